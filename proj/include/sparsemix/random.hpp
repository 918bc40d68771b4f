#pragma once

// Reproducible random streams. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; the uniform and normal transforms are
// implemented here so draws do not depend on the standard library vendor.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace sparsemix {

/// Identifies the generator + transforms; bump when any of them changes.
inline constexpr std::string_view kRngVersion = "mt19937_64/u53/box-muller/v1";

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Order-sensitive combination of several 64-bit keys into one seed.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> keys) noexcept;

/// Bit pattern of a double, for use as a seed key.
std::uint64_t double_key(double x) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller; caches the second variate).
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sparsemix
