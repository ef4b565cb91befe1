#include "eegtok/rng.hpp"

#include <cmath>

namespace eegtok {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(splitmix64(seed) ^ splitmix64(stream * 0xD2B74407B1CE6E93ULL + 1))) {}

Rng Rng::split(std::uint64_t substream) const {
  Rng child(key_, substream + 0x5851F42D4C957F2DULL);
  return child;
}

std::uint64_t Rng::next_u64() { return splitmix64(key_ + 0x632BE59BD9B4E019ULL * ++counter_); }

double Rng::uniform() {
  // 53 random bits -> double in [0, 1)
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::gaussian() {
  if (has_cached_gauss_) {
    has_cached_gauss_ = false;
    return cached_gauss_;
  }
  // Box-Muller; u1 bounded away from zero.
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 1e-300);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  cached_gauss_ = r * std::sin(a);
  has_cached_gauss_ = true;
  return r * std::cos(a);
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) return 0;
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

}  // namespace eegtok
