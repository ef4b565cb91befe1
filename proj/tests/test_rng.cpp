#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "eegtok/rng.hpp"

using eegtok::Rng;

TEST_CASE("same seed and stream reproduce the sequence") {
  Rng a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different streams decorrelate") {
  Rng a(42, 0), b(42, 1);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += a.next_u64() == b.next_u64();
  CHECK(equal == 0);
}

TEST_CASE("split is independent of parent consumption") {
  Rng a(9, 0);
  Rng child1 = a.split(3);
  for (int i = 0; i < 10; ++i) a.next_u64();
  Rng child2 = a.split(3);
  for (int i = 0; i < 20; ++i) CHECK(child1.next_u64() == child2.next_u64());
}

TEST_CASE("uniform stays in range with plausible mean") {
  Rng r(1, 0);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 100000.0 - 0.5) < 0.01);
}

TEST_CASE("gaussian has unit moments") {
  Rng r(2, 0);
  double s1 = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = r.gaussian();
    s1 += g;
    s2 += g * g;
  }
  CHECK(std::abs(s1 / n) < 0.02);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("uniform_int covers [0, n) uniformly") {
  Rng r(3, 0);
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 100000; ++i) ++counts[r.uniform_int(10)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 600);
}

TEST_CASE("shuffle is a permutation and deterministic") {
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  std::vector<int> w = v;
  Rng a(4, 0), b(4, 0);
  a.shuffle(v);
  b.shuffle(w);
  CHECK(v == w);
  std::set<int> seen(v.begin(), v.end());
  CHECK(seen.size() == 50);
}
