#ifndef ANTRACE_RNG_HPP
#define ANTRACE_RNG_HPP

#include <cstdint>
#include <random>

namespace antrace {

/// Seeded random source with a fully pinned output stream.
///
/// The engine is std::mt19937_64 (bit-exact across platforms by the
/// standard); uniform doubles and normal variates are derived with fixed
/// algorithms here instead of std::*_distribution, whose output sequences
/// are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the sine partner is cached.
  double normal();

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t raw() { return engine_(); }

  /// Child seed for stream `index` of a base seed (splitmix64 mix),
  /// so replicates and folds get decorrelated, reproducible streams.
  static std::uint64_t derive_stream(std::uint64_t base, std::uint64_t index);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace antrace

#endif
