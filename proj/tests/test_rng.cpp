#include "doctest.h"

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "pclab/rng.hpp"

using pclab::Rng;

TEST_CASE("streams are deterministic and distinct per trial") {
    auto a1 = Rng::stream(7, "completeness", 0);
    auto a2 = Rng::stream(7, "completeness", 0);
    auto b = Rng::stream(7, "completeness", 1);
    auto c = Rng::stream(7, "soundness-sweep", 0);
    const auto x = a1.next_u64();
    CHECK(x == a2.next_u64());
    CHECK(x != b.next_u64());
    CHECK(x != c.next_u64());
}

TEST_CASE("uniform_int stays in range and covers values") {
    Rng rng(123);
    std::set<std::int64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        auto v = rng.uniform_int(7);
        CHECK(v >= 0);
        CHECK(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("sample_subset is uniform on a small case") {
    // 2-subsets of {1..4}: 6 equally likely outcomes
    Rng rng(99);
    std::map<std::vector<std::int64_t>, int> counts;
    const int trials = 30000;
    for (int i = 0; i < trials; ++i) counts[rng.sample_subset({1, 2, 3, 4}, 2)]++;
    CHECK(counts.size() == 6);
    for (const auto& [k, c] : counts) {
        const double f = static_cast<double>(c) / trials;
        CHECK(f > 1.0 / 6 - 0.02);
        CHECK(f < 1.0 / 6 + 0.02);
    }
}

TEST_CASE("normal has sane first moments") {
    Rng rng(5);
    double s = 0.0, s2 = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        s += x;
        s2 += x * x;
    }
    CHECK(std::abs(s / n) < 0.05);
    CHECK(std::abs(s2 / n - 1.0) < 0.05);
}
