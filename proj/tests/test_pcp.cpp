#include "doctest.h"

#include <cstdio>
#include <set>

#include "pclab/pcp.hpp"

using namespace pclab;
using namespace pclab::pcp;

TEST_CASE("bucket layout arithmetic") {
    // B = 2*floor((M-N)/(2(b-1))) evaluated by hand for both cases
    auto bk = bucket_layout(2, 4, 3);
    CHECK(bk.N == 4);
    CHECK(bk.M == 256);
    CHECK(bk.B == 126);
    CHECK(bk.interval(1) == std::make_pair<std::int64_t, std::int64_t>(1, 4));
    CHECK(bk.interval(2) == std::make_pair<std::int64_t, std::int64_t>(5, 130));
    CHECK(bk.interval(3) == std::make_pair<std::int64_t, std::int64_t>(131, 256));
    CHECK(bk.junk_size() == 0);

    auto bk2 = bucket_layout(1, 4, 2);
    CHECK(bk2.N == 2);
    CHECK(bk2.M == 16);
    CHECK(bk2.B == 14);
    CHECK(bk2.interval(2) == std::make_pair<std::int64_t, std::int64_t>(3, 16));

    CHECK_THROWS(bucket_layout(1, 1, 2));  // B < 2N
    CHECK_THROWS(bucket_layout(1, 3, 3));  // B = 2 < 2N = 4
}

TEST_CASE("bucket_of agrees with intervals") {
    auto bk = bucket_layout(2, 3, 3);  // N=4 M=64 B=30
    CHECK(bk.B == 30);
    for (std::int64_t x = 1; x <= bk.M; ++x) {
        int direct = 0;
        for (int i = 1; i <= bk.b; ++i)
            if (bk.in_bucket(i, x)) direct = i;
        CHECK(bk.bucket_of(x) == direct);
    }
}

TEST_CASE("paper regime flag") {
    CHECK(paper_regime(bucket_layout(2, 4, 2)).first);
    CHECK_FALSE(paper_regime(bucket_layout(2, 3, 3)).first);  // l < 4
    auto r = paper_regime(bucket_layout(2, 6, 5));            // b=5 > ceil(2^{n/2})=2
    CHECK_FALSE(r.first);
}

TEST_CASE("assemble permutation on a hand-traced b=2 instance") {
    auto bk = bucket_layout(1, 4, 2);
    std::vector<std::vector<std::int64_t>> ss = {{1, 2}, {4, 6}};
    std::vector<std::vector<std::int64_t>> fs = {{1, 2}, {4, 6}};
    auto perm = assemble_permutation(bk, ss, fs);
    CHECK(perm.apply(1) == 4);
    CHECK(perm.apply(4) == 1);
    CHECK(perm.apply(2) == 6);
    CHECK(perm.apply(6) == 2);
    CHECK(perm.apply(5) == 5);  // off-chain fixed point
    CHECK(perm.apply(16) == 16);

    // pi^b restricted to [N] is the identity (cycle closure)
    for (std::int64_t j = 1; j <= bk.N; ++j) {
        std::int64_t x = j;
        for (int k = 0; k < bk.b; ++k) x = perm.apply(x);
        CHECK(x == j);
    }

    // overlapping level sets are rejected
    std::vector<std::vector<std::int64_t>> bad_f = {{1, 2}, {4, 4}};
    std::vector<std::vector<std::int64_t>> bad_s = {{1, 2}, {4, 4}};
    CHECK_THROWS(assemble_permutation(bk, bad_s, bad_f));
}

TEST_CASE("sampled YES instances satisfy their promise and structure") {
    auto bk = bucket_layout(2, 3, 3);
    Rng rng(17);
    for (int t = 0; t < 25; ++t) {
        auto inst = sample_yes(bk, rng);
        CHECK(classify(inst).kind == Classification::Kind::YES);
        for (std::int64_t j = 1; j <= bk.N; ++j) CHECK(inst.perm().apply(inst.f(bk.b, j)) == j);
        // round-trip through decomposition
        auto [ss, fs] = decompose_permutation(bk, inst.perm());
        CHECK(ss == inst.level_sets);
        CHECK(fs == inst.bijections);
    }
}

TEST_CASE("sampled NO instances sit at the promise extreme") {
    auto bk = bucket_layout(2, 3, 3);
    Rng rng(18);
    for (int t = 0; t < 25; ++t) {
        auto inst = sample_no(bk, rng);
        CHECK(classify(inst).kind == Classification::Kind::NO);
        CHECK(inst.even_count_last() == bk.N / 2);
    }
}

TEST_CASE("uniform subset marginal of the YES sampler") {
    // Pr[4 in S_2] = N / |I_2^even| = 2/7 at (n=1, l=4, b=2)
    auto bk = bucket_layout(1, 4, 2);
    Rng rng(99);
    int hits = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        auto inst = sample_yes(bk, rng);
        const auto& s2 = inst.level_sets[1];
        if (std::binary_search(s2.begin(), s2.end(), std::int64_t{4})) ++hits;
    }
    const double f = static_cast<double>(hits) / trials;
    CHECK(f > 2.0 / 7 - 0.05);
    CHECK(f < 2.0 / 7 + 0.05);
}

TEST_CASE("classify rejects promise-gap instances") {
    auto bk = bucket_layout(2, 3, 3);
    Rng rng(5);
    auto inst = sample_with_even_count(bk, bk.N - 1, rng);  // 3 of 4 even
    CHECK(classify(inst).kind == Classification::Kind::INVALID);
    CHECK(classify(inst).reason.find("promise") != std::string::npos);
}

TEST_CASE("witness state is the uniform preimage state") {
    auto bk = bucket_layout(1, 4, 2);
    std::vector<std::vector<std::int64_t>> ss = {{1, 2}, {4, 6}};
    std::vector<std::vector<std::int64_t>> fs = {{1, 2}, {4, 6}};
    PointerChasingInstance inst;
    inst.buckets = bk;
    inst.level_sets = ss;
    inst.bijections = fs;
    inst.label = Label::YES;

    auto w = witness_state(inst);
    CHECK(std::abs(w.amplitudes()(3) - qsim::cdouble(1.0 / std::sqrt(2.0))) < 1e-12);
    CHECK(std::abs(w.amplitudes()(5) - qsim::cdouble(1.0 / std::sqrt(2.0))) < 1e-12);
    CHECK(std::abs(w.norm() - 1.0) < 1e-12);

    // O_pi |S_b> = |[N]>
    auto mapped = qsim::apply_inplace_oracle(w, inst.perm(), "w");
    auto expect = qsim::Statevector::uniform_over({"w", bk.M}, {1, 2});
    CHECK((mapped.amplitudes() - expect.amplitudes()).norm() < 1e-12);
}

TEST_CASE("chains walk back to the first level") {
    auto bk = bucket_layout(2, 3, 3);
    Rng rng(7);
    auto inst = sample_yes(bk, rng);
    // g = f_3(2) -> [f_3(2), f_2(2), 2]
    auto c = chain(inst, inst.f(3, 2));
    REQUIRE(c.size() == 3);
    CHECK(c[0] == inst.f(3, 2));
    CHECK(c[1] == inst.f(2, 2));
    CHECK(c[2] == 2);
    // level-1 point is its own chain
    CHECK(chain(inst, 3) == std::vector<std::int64_t>{3});
    // chain length equals the level index
    for (int i = 1; i <= bk.b; ++i)
        for (std::int64_t j = 1; j <= bk.N; ++j)
            CHECK(chain(inst, inst.f(i, j)).size() == static_cast<std::size_t>(i));
    // off-chain labels throw
    std::int64_t junk = 0;
    for (std::int64_t x = bk.interval(2).first; x <= bk.interval(2).second; ++x) {
        const auto& s2 = inst.level_sets[1];
        if (!std::binary_search(s2.begin(), s2.end(), x)) {
            junk = x;
            break;
        }
    }
    CHECK_THROWS(chain(inst, junk));
}

TEST_CASE("cycle structure by exhaustive orbit walk") {
    auto bk = bucket_layout(2, 3, 3);
    Rng rng(23);
    auto inst = sample_yes(bk, rng);
    std::set<std::int64_t> on_chain;
    for (const auto& s : inst.level_sets) on_chain.insert(s.begin(), s.end());
    for (std::int64_t x = 1; x <= bk.M; ++x) {
        if (on_chain.count(x)) {
            // orbit of x has length exactly b
            std::int64_t cur = x;
            int len = 0;
            do {
                cur = inst.perm().apply(cur);
                ++len;
            } while (cur != x && len <= bk.b + 1);
            CHECK(len == bk.b);
        } else {
            CHECK(inst.perm().apply(x) == x);
        }
    }
}

TEST_CASE("instance serialization round trips bit for bit") {
    auto bk = bucket_layout(2, 3, 3);
    Rng rng(31);
    auto inst = sample_no(bk, rng);
    const auto text = write_instance_text(inst);
    auto back = read_instance_text(text);
    CHECK(back == inst);
    CHECK(write_instance_text(back) == text);

    const std::string path = "pclab_test_instance.json";
    write_instance_file(inst, path);
    auto fromfile = read_instance_file(path);
    CHECK(fromfile == inst);
    std::remove(path.c_str());

    // tampered files are rejected
    auto broken = text;
    broken.replace(broken.find("\"label\": \"NO\""), 13, "\"label\": \"XX\"");
    CHECK_THROWS(read_instance_text(broken));
}
