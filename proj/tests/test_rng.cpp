#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "bscusum/parallel.hpp"
#include "bscusum/rng.hpp"

using namespace bscusum;

TEST_CASE("splitmix64 reference values") {
  // First outputs for state 0, from the reference C implementation.
  std::uint64_t state = 0;
  CHECK(splitmix64(state) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(state) == 0x6e789e6aa1b965f4ULL);
  CHECK(splitmix64(state) == 0x06c45d188009454fULL);
}

TEST_CASE("same seed gives the same stream, different seeds differ") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    differs = differs || x != c();
  }
  CHECK(differs);
}

TEST_CASE("derive_seed depends on the whole path") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 50; ++i)
    for (std::uint64_t j = 0; j < 50; ++j) seen.insert(derive_seed(7, {i, j}));
  CHECK(seen.size() == 2500);
  CHECK(derive_seed(7, {1, 2}) != derive_seed(7, {2, 1}));
  CHECK(derive_seed(7, {1}) != derive_seed(7, {1, 0}));
  CHECK(derive_seed(7, {3, 4}) == derive_seed(7, {3, 4}));
}

TEST_CASE("uniform ranges") {
  Rng rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK_UNARY(u >= 0.0);
    CHECK_UNARY(u < 1.0);
    const double v = rng.uniform_pos();
    CHECK_UNARY(v > 0.0);
    CHECK_UNARY(v <= 1.0);
  }
}

TEST_CASE("below is unbiased on a small range") {
  Rng rng(5);
  std::vector<int> counts(7, 0);
  const int n = 700000;
  for (int i = 0; i < n; ++i) ++counts[rng.below(7)];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - n / 7.0) * (c - n / 7.0) / (n / 7.0);
  CHECK(chi2 < 22.46);  // chi-square(6) 0.999 quantile
}

TEST_CASE("normal and exponential moments") {
  Rng rng(11);
  const int n = 1'000'000;
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0, e1 = 0, e2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
    s3 += z * z * z;
    s4 += z * z * z * z;
    const double e = rng.exponential();
    CHECK_UNARY(e >= 0.0);
    e1 += e;
    e2 += e * e;
  }
  CHECK(std::abs(s1 / n) < 0.005);
  CHECK(std::abs(s2 / n - 1.0) < 0.01);
  CHECK(std::abs(s3 / n) < 0.02);
  CHECK(std::abs(s4 / n - 3.0) < 0.05);
  CHECK(std::abs(e1 / n - 1.0) < 0.005);
  CHECK(std::abs(e2 / n - 2.0) < 0.02);
}

TEST_CASE("parallel_for matches the sequential loop") {
  const std::size_t n = 1000;
  auto run = [&](unsigned threads) {
    std::vector<double> out(n);
    parallel_for(n, threads, [&](std::size_t i) {
      Rng rng(derive_seed(9, {i}));
      double s = 0;
      for (int k = 0; k < 100; ++k) s += rng.normal();
      out[i] = s;
    });
    return out;
  };
  const auto one = run(1);
  CHECK(run(2) == one);
  CHECK(run(8) == one);
}

TEST_CASE("parallel_for rethrows the lowest failing index") {
  for (unsigned threads : {1u, 4u}) {
    try {
      parallel_for(100, threads, [](std::size_t i) {
        if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
      });
      FAIL("no exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "17");
    }
  }
}
