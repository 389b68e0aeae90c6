#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "octo/rng.hpp"

using namespace octo;

TEST_CASE("rng determinism and stream splitting") {
  SUBCASE("same seed, same sequence") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  }

  SUBCASE("split streams are independent of each other") {
    Rng a = Rng::split(42, streams::kBatchSampler);
    Rng b = Rng::split(42, streams::kAugmentation);
    int equal = 0;
    for (int i = 0; i < 64; ++i) {
      if (a.next_u64() == b.next_u64()) ++equal;
    }
    CHECK(equal == 0);
  }

  SUBCASE("next_below stays in range and covers it") {
    Rng rng(7);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
      const std::uint64_t v = rng.next_below(5);
      CHECK(v < 5);
      seen.insert(v);
    }
    CHECK(seen.size() == 5);
  }

  SUBCASE("next_double in [0,1), uniform in halves") {
    Rng rng(9);
    int low = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const double v = rng.next_double();
      CHECK(v >= 0.0);
      CHECK(v < 1.0);
      if (v < 0.5) ++low;
    }
    CHECK(low > n / 2 - 300);
    CHECK(low < n / 2 + 300);
  }

  SUBCASE("uniform endpoints") {
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
      const double v = rng.uniform(2.0, 3.0);
      CHECK(v >= 2.0);
      CHECK(v < 3.0);
    }
    CHECK(rng.uniform(4.0, 4.0) == 4.0);
  }

  SUBCASE("shuffle is a permutation and seed-stable") {
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    std::vector<int> w = v;
    Rng a(3), b(3);
    a.shuffle(v);
    b.shuffle(w);
    CHECK(v == w);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expected(50);
    std::iota(expected.begin(), expected.end(), 0);
    CHECK(sorted == expected);
  }
}
