#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace uavstop {

// Seedable random stream. The engine (mt19937_64) is fully specified by the
// standard, and uniforms are produced from its raw output rather than through
// std::uniform_real_distribution, so draws are identical across platforms.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64";

  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// splitmix64 finalizer; used to derive independent substream seeds.
std::uint64_t mix_seed(std::uint64_t x);

// Seed of substream `index` under `master`, optionally tagged by purpose so
// that e.g. the dynamics and policy streams of one mission never coincide.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t tag = 0);

}  // namespace uavstop
