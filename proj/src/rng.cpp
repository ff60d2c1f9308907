#include "gdc/rng.hpp"

#include <cmath>

namespace gdc {

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {
// splitmix64: mixes seed material into a well-distributed 64-bit state.
uint64_t splitmix64(uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace

Rng::Rng(uint64_t seed, std::string_view stream, uint64_t index) {
  uint64_t x = seed ^ fnv1a64(stream);
  x ^= 0x51fc86e3e761a801ull * (index + 1);
  std::seed_seq seq{static_cast<uint32_t>(splitmix64(x)), static_cast<uint32_t>(splitmix64(x) >> 32),
                    static_cast<uint32_t>(splitmix64(x)), static_cast<uint32_t>(splitmix64(x) >> 32)};
  gen_.seed(seq);
}

uint64_t Rng::next_u64() { return gen_(); }

double Rng::uniform() {
  // 53-bit mantissa; avoids platform differences in std::uniform_real_distribution.
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

double Rng::normal(double mean, double stddev) { return mean + stddev * normal(); }

uint64_t Rng::below(uint64_t n) {
  // Rejection sampling for an unbiased result.
  if (n == 0) return 0;
  uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t v;
  do {
    v = gen_();
  } while (v >= limit);
  return v % n;
}

}  // namespace gdc
