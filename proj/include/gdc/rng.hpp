#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gdc {

// Deterministic random streams.  A stream is addressed by (seed, name[, index])
// so that independent consumers ("noise", "mask", "init", "probe", ...) never
// share state and results do not depend on call order across consumers.
class Rng {
public:
  Rng(uint64_t seed, std::string_view stream, uint64_t index = 0);

  uint64_t next_u64();
  // Uniform in [0,1).
  double uniform();
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller; deterministic across platforms.
  double normal();
  double normal(double mean, double stddev);
  // Uniform integer in [0, n).
  uint64_t below(uint64_t n);

private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Stable 64-bit hash used to derive stream seeds from names.
uint64_t fnv1a64(std::string_view s);

}  // namespace gdc
