#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "wclab/rng.hpp"

using namespace wclab;

TEST_CASE("philox blocks are pure functions of counter and key") {
  const auto a = philox4x32({1, 2, 3, 4}, {5, 6});
  const auto b = philox4x32({1, 2, 3, 4}, {5, 6});
  CHECK(a == b);
  CHECK(philox4x32({1, 2, 3, 5}, {5, 6}) != a);
  CHECK(philox4x32({1, 2, 3, 4}, {5, 7}) != a);
}

TEST_CASE("counter rng reproduces streams and decorrelates them") {
  CounterRng r1(42, 7), r2(42, 7), r3(42, 8);
  bool all_equal = true, any_equal_cross = true;
  for (int i = 0; i < 64; ++i) {
    const auto a = r1.next_u64(), b = r2.next_u64(), c = r3.next_u64();
    all_equal = all_equal && a == b;
    any_equal_cross = any_equal_cross && a == c;
  }
  CHECK(all_equal);
  CHECK_FALSE(any_equal_cross);
}

TEST_CASE("uniform moments") {
  CounterRng rng(1, 1);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_unit();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sq += u * u;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean - 0.5) < 0.005);
  CHECK(std::abs(var - 1.0 / 12.0) < 0.005);
}

TEST_CASE("gaussian moments") {
  CounterRng rng(2, 9);
  const int n = 200000;
  double s1 = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.next_gaussian();
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  CHECK(std::abs(s1 / n) < 0.02);
  CHECK(std::abs(s2 / n - 1.0) < 0.03);
  CHECK(std::abs(s4 / n - 3.0) < 0.15);
}

TEST_CASE("cross-stream correlation is negligible") {
  const int n = 100000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    CounterRng a(3, chain(11, i)), b(3, chain(12, i));
    acc += (a.next_unit() - 0.5) * (b.next_unit() - 0.5);
  }
  CHECK(std::abs(acc / n) < 0.005);
}

TEST_CASE("categorical sampling by cdf walk") {
  const std::vector<double> w = {0.25, 0.5, 0.25};
  CHECK(sample_categorical(w, 0.0) == 0);
  CHECK(sample_categorical(w, 0.24) == 0);
  CHECK(sample_categorical(w, 0.26) == 1);
  CHECK(sample_categorical(w, 0.74) == 1);
  CHECK(sample_categorical(w, 0.76) == 2);
  CHECK(sample_categorical(w, 0.9999999) == 2);
}

TEST_CASE("stream hash separates paths") {
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    StreamHash h;
    h.absorb(i);
    seen.insert(h.digest());
  }
  CHECK(seen.size() == 1000);
  StreamHash h1, h2;
  h1.absorb(1);
  h1.absorb(2);
  h2.absorb(2);
  h2.absorb(1);
  CHECK(h1.digest() != h2.digest());
}
