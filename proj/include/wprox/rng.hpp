#ifndef WPROX_RNG_HPP_
#define WPROX_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace wprox {

/// Seeded pseudo-random stream.
///
/// Engine: std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniforms take the top 53 bits of one engine draw; normals use
/// the Box-Muller transform on two uniforms and cache the second variate.
/// None of the std:: distributions are used, since their algorithms are
/// implementation-defined.
///
/// Independent streams are derived from (seed, tag) with SplitMix64 over an
/// FNV-1a hash of the tag. A stream is not thread-safe; derive one per task.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  /// Child stream keyed by a purpose tag and an optional index.
  SeededRng derive(std::string_view tag, std::uint64_t index = 0) const;

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double normal();

  template <typename Scalar = double>
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> normal_matrix(
      Eigen::Index rows, Eigen::Index cols) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(rows, cols);
    // Row-major fill order so that a cloud's j-th particle is stable when m grows.
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = static_cast<Scalar>(normal());
    return out;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace wprox

#endif  // WPROX_RNG_HPP_
