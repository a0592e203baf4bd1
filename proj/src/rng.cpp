#include "kgsm/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kgsm {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

} // namespace

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed) {
  std::uint64_t x = seed;
  for (auto& word : s_) {
    x += kGolden;
    word = mix64(x);
  }
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open_closed() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::standard_normal() {
  if (cached_normal_) {
    const double z = *cached_normal_;
    cached_normal_.reset();
    return z;
  }
  const double u1 = uniform_open_closed();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

std::size_t RngStream::uniform_index(std::size_t bound) {
  if (bound == 0) {
    throw std::invalid_argument("uniform_index: empty range");
  }
  const auto range = static_cast<std::uint64_t>(bound);
  __extension__ using u128 = unsigned __int128;
  u128 product = static_cast<u128>(next_u64()) * range;
  auto low = static_cast<std::uint64_t>(product);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      product = static_cast<u128>(next_u64()) * range;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::size_t>(product >> 64);
}

RngStream derive_substream(std::uint64_t master_seed, std::uint64_t trial) {
  // master + (trial + 1) * golden is injective in trial (golden is odd) and
  // mix64 is a bijection, so distinct trials never share a seed.
  return RngStream(mix64(master_seed + (trial + 1) * kGolden));
}

RowSampler::RowSampler(std::span<const double> squared_norms) {
  if (squared_norms.empty()) {
    throw std::invalid_argument("RowSampler: no rows");
  }
  double total = 0.0;
  for (double w : squared_norms) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("RowSampler: zero or non-finite row weight");
    }
    total += w;
  }
  weights_.reserve(squared_norms.size());
  cumulative_.reserve(squared_norms.size());
  double running = 0.0;
  for (double w : squared_norms) {
    weights_.push_back(w / total);
    running += w;
    cumulative_.push_back(running / total);
  }
  cumulative_.back() = 1.0;
}

RowSampler RowSampler::uniform(std::size_t count) {
  std::vector<double> ones(count, 1.0);
  return RowSampler(ones);
}

std::size_t RowSampler::sample(RngStream& stream) const {
  const double u = stream.uniform();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto index = static_cast<std::size_t>(it - cumulative_.begin());
  return std::min(index, cumulative_.size() - 1);
}

} // namespace kgsm
