#pragma once

#include <cstdint>
#include <random>

namespace gimspg {

/// Seedable generator with platform-independent output. The engine is
/// std::mt19937_64, whose sequence the standard pins down; the
/// distributions are implemented here because the std:: ones are
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound). bound > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via the Box-Muller transform.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// splitmix64 finalizer; derives independent stream seeds from one seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace gimspg
