#pragma once

#include <cstdint>
#include <vector>

namespace eegtok {

// Counter-based splittable RNG. A generator is identified by (seed, stream);
// the k-th output is a pure function of (seed, stream, k), so draws are
// reproducible regardless of which other streams were consumed in between.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Derive an independent child stream without perturbing this one.
  Rng split(std::uint64_t substream) const;

  std::uint64_t next_u64();
  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  double gaussian();                      // N(0, 1)
  std::uint64_t uniform_int(std::uint64_t n);  // [0, n)

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_gauss_ = 0.0;
  bool has_cached_gauss_ = false;
};

}  // namespace eegtok
