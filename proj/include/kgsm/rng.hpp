#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace kgsm {

/// Seeded xoshiro256** stream. State is expanded from the 64-bit seed with
/// SplitMix64, so equal seeds give equal sequences on every platform.
///
/// Normals come from the Box-Muller transform; the second value of each pair
/// is cached and returned by the next call.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform on (0, 1].
  double uniform_open_closed();

  double standard_normal();

  /// Uniform integer in [0, bound). Uses Lemire's rejection method.
  std::size_t uniform_index(std::size_t bound);

private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  std::optional<double> cached_normal_;
};

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t z);

/// Stream for trial `trial` of an experiment seeded with `master_seed`.
/// Pure function of its arguments; distinct trials give distinct seeds.
RngStream derive_substream(std::uint64_t master_seed, std::uint64_t trial);

/// Categorical sampler over row indices, weights ||a_i||^2 / ||A||_F^2.
class RowSampler {
public:
  /// Weights proportional to `squared_norms`. Throws std::invalid_argument on
  /// an empty list or a non-positive entry.
  explicit RowSampler(std::span<const double> squared_norms);

  static RowSampler uniform(std::size_t count);

  std::size_t size() const { return weights_.size(); }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& cumulative() const { return cumulative_; }

  /// Zero-based row index. Binary search on the cumulative weights.
  std::size_t sample(RngStream& stream) const;

private:
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

} // namespace kgsm
