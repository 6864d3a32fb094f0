#ifndef WPROX_HARNESS_PERSISTENCE_HPP_
#define WPROX_HARNESS_PERSISTENCE_HPP_

#include <filesystem>
#include <map>
#include <string>

#include "wprox/common.hpp"

namespace wprox::harness {

// Cloud container, all integers and floats little-endian:
//   8 bytes  magic "WPXCLOUD"
//   u32      version (1)
//   u64      m
//   u64      d
//   f64[m*d] points, row-major
// A sidecar "<path>.meta" holds `key = value` text (seeds, config hash).

inline constexpr char kCloudMagic[8] = {'W', 'P', 'X', 'C', 'L', 'O', 'U', 'D'};
inline constexpr std::uint32_t kCloudVersion = 1;

using Metadata = std::map<std::string, std::string>;

void save_cloud(const std::filesystem::path& path, const ParticleCloud& cloud,
                const Metadata& meta = {});
ParticleCloud load_cloud(const std::filesystem::path& path);
Metadata load_metadata(const std::filesystem::path& cloud_path);

/// Writes `text` to `path`, creating parent directories. Throws on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace wprox::harness

#endif  // WPROX_HARNESS_PERSISTENCE_HPP_
