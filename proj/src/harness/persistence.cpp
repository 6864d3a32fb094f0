#include "wprox/harness/persistence.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wprox/harness/format.hpp"

namespace wprox::harness {
namespace {

void put_u64(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t& pos, int bytes) {
  if (pos + bytes > in.size()) throw std::runtime_error("cloud file truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += bytes;
  return v;
}

}  // namespace

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_cloud(const std::filesystem::path& path, const ParticleCloud& cloud,
                const Metadata& meta) {
  std::string bytes(kCloudMagic, sizeof(kCloudMagic));
  put_u64(bytes, kCloudVersion, 4);
  put_u64(bytes, static_cast<std::uint64_t>(cloud.rows()), 8);
  put_u64(bytes, static_cast<std::uint64_t>(cloud.cols()), 8);
  for (Eigen::Index i = 0; i < cloud.rows(); ++i)
    for (Eigen::Index j = 0; j < cloud.cols(); ++j)
      put_u64(bytes, std::bit_cast<std::uint64_t>(cloud(i, j)), 8);
  write_text_file(path, bytes);

  std::string text;
  for (const auto& [k, v] : meta) text += k + " = " + v + "\n";
  write_text_file(path.string() + ".meta", text);
}

ParticleCloud load_cloud(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  if (bytes.size() < sizeof(kCloudMagic) ||
      std::memcmp(bytes.data(), kCloudMagic, sizeof(kCloudMagic)) != 0)
    throw std::runtime_error(path.string() + ": not a cloud file");
  std::size_t pos = sizeof(kCloudMagic);
  const auto version = get_u64(bytes, pos, 4);
  if (version != kCloudVersion)
    throw std::runtime_error(path.string() + ": unsupported version " + std::to_string(version));
  const auto m = static_cast<Eigen::Index>(get_u64(bytes, pos, 8));
  const auto d = static_cast<Eigen::Index>(get_u64(bytes, pos, 8));
  if (bytes.size() != pos + static_cast<std::size_t>(m * d) * 8)
    throw std::runtime_error(path.string() + ": size does not match header");
  ParticleCloud cloud(m, d);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < d; ++j) cloud(i, j) = std::bit_cast<double>(get_u64(bytes, pos, 8));
  return cloud;
}

Metadata load_metadata(const std::filesystem::path& cloud_path) {
  Metadata meta;
  std::istringstream in(read_text_file(cloud_path.string() + ".meta"));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    meta[std::string(trim(std::string_view(line).substr(0, eq)))] =
        std::string(trim(std::string_view(line).substr(eq + 1)));
  }
  return meta;
}

}  // namespace wprox::harness
