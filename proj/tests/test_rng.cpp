#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>

#include "doctest.h"
#include "sadmm/rng.hpp"

using namespace sadmm;

TEST_CASE("splitmix64 matches the published first output for state 0") {
  std::uint64_t state = 0;
  CHECK(splitmix64_next(state) == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("derive_seed is deterministic and separates streams") {
  CHECK(derive_seed(42, 0) == derive_seed(42, 0));
  std::set<std::uint64_t> seen;
  for (std::uint64_t stream = 0; stream < 8; ++stream) seen.insert(derive_seed(42, stream));
  CHECK(seen.size() == 8);
  CHECK(derive_seed(42, 1) != derive_seed(43, 1));
}

TEST_CASE("identical seeds give identical streams") {
  Rng a(12345), b(12345);
  for (int i = 0; i < 200; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  Rng c(12345), d(12345);
  for (int i = 0; i < 50; ++i) {
    CHECK(c.uniform() == d.uniform());
    CHECK(c.normal() == d.normal());
  }
}

TEST_CASE("uniform lies in [0, 1)") {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal has roughly standard moments") {
  Rng rng(99);
  const int n = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  double mean = sum / n;
  double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.03);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("normal consumes two raw draws per fresh pair and caches the spare") {
  Rng a(11), b(11);
  (void)a.normal();
  (void)a.normal();  // served from the cached spare, no raw draw
  (void)b.next_u64();
  (void)b.next_u64();
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform_index stays in range and rejects n = 0") {
  Rng rng(3);
  for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{7}, std::size_t{1000}}) {
    for (int i = 0; i < 200; ++i) {
      std::size_t v = rng.uniform_index(n);
      CHECK(v < n);
    }
  }
  for (int i = 0; i < 10; ++i) CHECK(rng.uniform_index(1) == 0);
  CHECK_THROWS_AS((void)rng.uniform_index(0), std::domain_error);
}

TEST_CASE("sample_without_replacement draws k distinct in-range indices") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto idx = rng.sample_without_replacement(20, 7);
    REQUIRE(idx.size() == 7);
    std::set<std::size_t> uniq(idx.begin(), idx.end());
    CHECK(uniq.size() == 7);
    for (std::size_t v : idx) CHECK(v < 20);
  }
}

TEST_CASE("sample_without_replacement with k = n is a permutation") {
  Rng rng(8);
  auto idx = rng.sample_without_replacement(12, 12);
  std::sort(idx.begin(), idx.end());
  for (std::size_t i = 0; i < 12; ++i) CHECK(idx[i] == i);
}

TEST_CASE("sample_without_replacement rejects k > n") {
  Rng rng(1);
  CHECK_THROWS_AS((void)rng.sample_without_replacement(3, 4), std::domain_error);
}
