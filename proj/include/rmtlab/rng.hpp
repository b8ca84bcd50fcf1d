#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace rmtlab {

// SplitMix64 finalizer; used to derive independent engine seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Order-sensitive hash of a tuple of 64-bit keys.
constexpr std::uint64_t hash_keys(std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (auto k : keys) h = mix64(h ^ mix64(k));
  return h;
}

// A deterministic random stream identified by (master_seed, stream_index).
// Two streams built from the same pair produce bit-identical sequences.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : master_seed_(master_seed),
        stream_index_(stream_index),
        engine_(hash_keys({master_seed, stream_index})) {}

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_index() const noexcept { return stream_index_; }

  // Child stream keyed on this stream's identity; does not consume draws.
  RngStream derive(std::uint64_t key) const {
    return RngStream(master_seed_, hash_keys({stream_index_, key}));
  }

  std::mt19937_64& engine() noexcept { return engine_; }

  double normal() { return normal_(engine_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  bool coin() { return (engine_() >> 63) != 0; }

  // chi-distributed variate with `dof` degrees of freedom.
  double chi(double dof) {
    std::gamma_distribution<double> g(0.5 * dof, 2.0);
    return std::sqrt(g(engine_));
  }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace rmtlab
