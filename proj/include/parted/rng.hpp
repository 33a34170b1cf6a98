#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace parted {

/// Seeded random source with platform-independent value transforms.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Uniform, normal and Bernoulli draws are derived here rather
/// than through <random> distributions, whose algorithms vary between
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform_open_low() { return 1.0 - uniform(); }

  /// Standard normal via Box-Muller; the sine branch is cached.
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n).
  int uniform_int(int n);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// splitmix64 finaliser.
std::uint64_t mix64(std::uint64_t x);

/// Order-sensitive hash of a word sequence; used to derive per-cell seeds as
/// hash64({master, solver_index, n_index, trial_index}).
std::uint64_t hash64(std::initializer_list<std::uint64_t> words);

}  // namespace parted
