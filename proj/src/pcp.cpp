#include "pclab/pcp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace pclab::pcp {

namespace {

bool is_even(std::int64_t x) { return x % 2 == 0; }

void check_level_structure(const Buckets& bk, const std::vector<std::vector<std::int64_t>>& level_sets,
                           const std::vector<std::vector<std::int64_t>>& bijections) {
    if (static_cast<int>(level_sets.size()) != bk.b || static_cast<int>(bijections.size()) != bk.b)
        throw std::invalid_argument("instance: expected b level sets and bijections");
    for (int i = 1; i <= bk.b; ++i) {
        const auto& s = level_sets[static_cast<std::size_t>(i - 1)];
        const auto& f = bijections[static_cast<std::size_t>(i - 1)];
        if (static_cast<std::int64_t>(s.size()) != bk.N)
            throw std::invalid_argument("instance: |S_i| must equal N");
        if (static_cast<std::int64_t>(f.size()) != bk.N)
            throw std::invalid_argument("instance: f_i must have N entries");
        if (!std::is_sorted(s.begin(), s.end())) throw std::invalid_argument("instance: S_i must be sorted");
        std::set<std::int64_t> sset(s.begin(), s.end());
        if (sset.size() != s.size()) throw std::invalid_argument("instance: S_i has duplicates");
        for (auto x : s)
            if (!bk.in_bucket(i, x)) throw std::invalid_argument("instance: S_i leaves its bucket");
        std::set<std::int64_t> fset(f.begin(), f.end());
        if (fset != sset) throw std::invalid_argument("instance: f_i is not a bijection onto S_i");
    }
    const auto& f1 = bijections[0];
    for (std::int64_t j = 1; j <= bk.N; ++j)
        if (f1[static_cast<std::size_t>(j - 1)] != j)
            throw std::invalid_argument("instance: f_1 must be the identity");
}

}  // namespace

std::pair<std::int64_t, std::int64_t> Buckets::interval(int i) const {
    if (i < 1 || i > b) throw std::invalid_argument("Buckets::interval: bucket index out of range");
    if (i == 1) return {1, N};
    return {N + static_cast<std::int64_t>(i - 2) * B + 1, N + static_cast<std::int64_t>(i - 1) * B};
}

bool Buckets::in_bucket(int i, std::int64_t x) const {
    const auto [lo, hi] = interval(i);
    return x >= lo && x <= hi;
}

int Buckets::bucket_of(std::int64_t x) const {
    if (x >= 1 && x <= N) return 1;
    if (x > N && x <= N + static_cast<std::int64_t>(b - 1) * B)
        return 2 + static_cast<int>((x - N - 1) / B);
    return 0;
}

std::vector<std::int64_t> Buckets::bucket_labels(int i) const {
    const auto [lo, hi] = interval(i);
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t x = lo; x <= hi; ++x) out.push_back(x);
    return out;
}

std::vector<std::int64_t> Buckets::bucket_even(int i) const {
    auto all = bucket_labels(i);
    std::vector<std::int64_t> out;
    for (auto x : all)
        if (is_even(x)) out.push_back(x);
    return out;
}

std::vector<std::int64_t> Buckets::bucket_odd(int i) const {
    auto all = bucket_labels(i);
    std::vector<std::int64_t> out;
    for (auto x : all)
        if (!is_even(x)) out.push_back(x);
    return out;
}

Buckets bucket_layout(int n, int l, int b) {
    if (n < 1 || l < 1 || b < 2) throw std::invalid_argument("bucket_layout: need n >= 1, l >= 1, b >= 2");
    if (static_cast<std::int64_t>(l) * n > 40) throw std::invalid_argument("bucket_layout: M = 2^(ln) too large");
    Buckets bk;
    bk.n = n;
    bk.l = l;
    bk.b = b;
    bk.N = std::int64_t{1} << n;
    bk.M = std::int64_t{1} << (static_cast<std::int64_t>(l) * n);
    bk.B = 2 * ((bk.M - bk.N) / (2 * static_cast<std::int64_t>(b - 1)));
    if (bk.B < 2 * bk.N)
        throw std::invalid_argument("bucket_layout: infeasible parameters (B < 2N)");
    if (bk.N + static_cast<std::int64_t>(b - 1) * bk.B > bk.M)
        throw std::invalid_argument("bucket_layout: buckets overflow [M]");
    return bk;
}

std::pair<bool, std::string> paper_regime(const Buckets& bk) {
    if (bk.l < 4) return {false, "l < 4"};
    // b = ceil(2^{alpha n}) for some alpha in (0, 1/2) iff 2 <= b <= ceil(2^{n/2})
    const double upper = std::ceil(std::pow(2.0, bk.n / 2.0));
    if (bk.b < 2 || static_cast<double>(bk.b) > upper)
        return {false, "b not realizable as ceil(2^(alpha n)) with alpha in (0, 1/2)"};
    return {true, ""};
}

const qsim::Permutation& PointerChasingInstance::perm() const {
    if (!perm_) perm_ = assemble_permutation(buckets, level_sets, bijections);
    return *perm_;
}

std::int64_t PointerChasingInstance::f(int i, std::int64_t j) const {
    if (i < 1 || i > buckets.b || j < 1 || j > buckets.N)
        throw std::invalid_argument("PointerChasingInstance::f: index out of range");
    return bijections[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)];
}

std::int64_t PointerChasingInstance::even_count_last() const {
    std::int64_t c = 0;
    for (auto x : level_sets.back())
        if (is_even(x)) ++c;
    return c;
}

double PointerChasingInstance::s_fraction() const {
    return static_cast<double>(even_count_last()) / static_cast<double>(buckets.N);
}

qsim::Permutation assemble_permutation(const Buckets& bk,
                                       const std::vector<std::vector<std::int64_t>>& level_sets,
                                       const std::vector<std::vector<std::int64_t>>& bijections) {
    check_level_structure(bk, level_sets, bijections);
    std::vector<std::int64_t> fwd(static_cast<std::size_t>(bk.M));
    for (std::int64_t x = 1; x <= bk.M; ++x) fwd[static_cast<std::size_t>(x - 1)] = x;  // fixed-point branch
    for (int i = 1; i <= bk.b; ++i) {
        const auto& fi = bijections[static_cast<std::size_t>(i - 1)];
        for (std::int64_t j = 1; j <= bk.N; ++j) {
            const std::int64_t x = fi[static_cast<std::size_t>(j - 1)];
            const std::int64_t y =
                i < bk.b ? bijections[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - 1)] : j;
            fwd[static_cast<std::size_t>(x - 1)] = y;
        }
    }
    // overlap between level sets would have silently overwritten a slot
    std::set<std::int64_t> images(fwd.begin(), fwd.end());
    if (static_cast<std::int64_t>(images.size()) != bk.M)
        throw std::invalid_argument("assemble_permutation: overlapping images");
    return qsim::Permutation(std::move(fwd));
}

std::pair<std::vector<std::vector<std::int64_t>>, std::vector<std::vector<std::int64_t>>> decompose_permutation(
    const Buckets& bk, const qsim::Permutation& perm) {
    std::vector<std::vector<std::int64_t>> fs(static_cast<std::size_t>(bk.b),
                                              std::vector<std::int64_t>(static_cast<std::size_t>(bk.N)));
    for (std::int64_t j = 1; j <= bk.N; ++j) {
        std::int64_t x = j;
        for (int i = 1; i <= bk.b; ++i) {
            if (bk.bucket_of(x) != i) throw std::invalid_argument("decompose_permutation: chain leaves bucket order");
            fs[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] = x;
            x = perm.apply(x);
        }
        if (x != j) throw std::invalid_argument("decompose_permutation: chain does not close");
    }
    std::vector<std::vector<std::int64_t>> ss;
    for (const auto& f : fs) {
        auto s = f;
        std::sort(s.begin(), s.end());
        ss.push_back(std::move(s));
    }
    return {ss, fs};
}

PointerChasingInstance sample_with_even_count(const Buckets& bk, std::int64_t k, Rng& rng) {
    if (k < 0 || k > bk.N) throw std::invalid_argument("sample_with_even_count: bad even count");
    const auto evens = bk.bucket_even(bk.b);
    const auto odds = bk.bucket_odd(bk.b);
    if (static_cast<std::int64_t>(evens.size()) < k || static_cast<std::int64_t>(odds.size()) < bk.N - k)
        throw std::invalid_argument("sample_with_even_count: infeasible parity counts");

    PointerChasingInstance inst;
    inst.buckets = bk;
    inst.level_sets.resize(static_cast<std::size_t>(bk.b));
    inst.bijections.resize(static_cast<std::size_t>(bk.b));

    // S_1 = [N], f_1 = id
    std::vector<std::int64_t> s1(static_cast<std::size_t>(bk.N));
    for (std::int64_t j = 1; j <= bk.N; ++j) s1[static_cast<std::size_t>(j - 1)] = j;
    inst.level_sets[0] = s1;
    inst.bijections[0] = s1;

    for (int i = 2; i <= bk.b - 1; ++i) {
        auto s = rng.sample_subset(bk.bucket_labels(i), static_cast<std::size_t>(bk.N));
        auto f = s;
        rng.shuffle(f);
        inst.level_sets[static_cast<std::size_t>(i - 1)] = std::move(s);
        inst.bijections[static_cast<std::size_t>(i - 1)] = std::move(f);
    }

    auto se = rng.sample_subset(evens, static_cast<std::size_t>(k));
    auto so = rng.sample_subset(odds, static_cast<std::size_t>(bk.N - k));
    std::vector<std::int64_t> sb;
    sb.reserve(static_cast<std::size_t>(bk.N));
    sb.insert(sb.end(), se.begin(), se.end());
    sb.insert(sb.end(), so.begin(), so.end());
    std::sort(sb.begin(), sb.end());
    auto fb = sb;
    rng.shuffle(fb);
    inst.level_sets[static_cast<std::size_t>(bk.b - 1)] = std::move(sb);
    inst.bijections[static_cast<std::size_t>(bk.b - 1)] = std::move(fb);

    inst.label = (k == bk.N) ? Label::YES : Label::NO;
    return inst;
}

PointerChasingInstance sample_yes(const Buckets& bk, Rng& rng) {
    if (static_cast<std::int64_t>(bk.bucket_even(bk.b).size()) < bk.N)
        throw std::invalid_argument("sample_yes: not enough even labels in the last bucket");
    return sample_with_even_count(bk, bk.N, rng);
}

PointerChasingInstance sample_no(const Buckets& bk, Rng& rng) {
    if (bk.N % 2 != 0) throw std::invalid_argument("sample_no: N must be even");
    return sample_with_even_count(bk, bk.N / 2, rng);
}

Classification classify(const PointerChasingInstance& inst) {
    try {
        check_level_structure(inst.buckets, inst.level_sets, inst.bijections);
    } catch (const std::exception& e) {
        return {Classification::Kind::INVALID, e.what()};
    }
    const std::int64_t even = inst.even_count_last();
    if (even == inst.buckets.N) return {Classification::Kind::YES, ""};
    if (2 * even <= inst.buckets.N) return {Classification::Kind::NO, ""};
    return {Classification::Kind::INVALID,
            "promise violated: N/2 < |S_b^even| < N (" + std::to_string(even) + " of " +
                std::to_string(inst.buckets.N) + " even)"};
}

qsim::Statevector witness_state(const PointerChasingInstance& inst) {
    return qsim::Statevector::uniform_over({"w", inst.buckets.M}, inst.level_sets.back());
}

std::vector<std::int64_t> chain(const PointerChasingInstance& inst, std::int64_t g) {
    const int bucket = inst.buckets.bucket_of(g);
    int level = 0;
    for (int i = 1; i <= inst.buckets.b; ++i) {
        const auto& s = inst.level_sets[static_cast<std::size_t>(i - 1)];
        if (std::binary_search(s.begin(), s.end(), g)) {
            level = i;
            break;
        }
    }
    if (level == 0 || bucket != level) throw std::invalid_argument("chain: label lies on no chain");
    std::vector<std::int64_t> out{g};
    std::int64_t cur = g;
    for (int i = level; i > 1; --i) {
        cur = inst.perm().inverse(cur);
        out.push_back(cur);
    }
    return out;
}

std::string write_instance_text(const PointerChasingInstance& inst) {
    nlohmann::ordered_json j;
    j["n"] = inst.buckets.n;
    j["l"] = inst.buckets.l;
    j["b"] = inst.buckets.b;
    j["N"] = inst.buckets.N;
    j["M"] = inst.buckets.M;
    j["B"] = inst.buckets.B;
    j["level_sets"] = inst.level_sets;
    j["bijections"] = inst.bijections;
    j["label"] = inst.label == Label::YES ? "YES" : "NO";
    return j.dump(2) + "\n";
}

PointerChasingInstance read_instance_text(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    PointerChasingInstance inst;
    inst.buckets = bucket_layout(j.at("n").get<int>(), j.at("l").get<int>(), j.at("b").get<int>());
    if (j.at("N").get<std::int64_t>() != inst.buckets.N || j.at("M").get<std::int64_t>() != inst.buckets.M ||
        j.at("B").get<std::int64_t>() != inst.buckets.B)
        throw std::invalid_argument("instance file: derived sizes disagree with stored sizes");
    inst.level_sets = j.at("level_sets").get<std::vector<std::vector<std::int64_t>>>();
    inst.bijections = j.at("bijections").get<std::vector<std::vector<std::int64_t>>>();
    const auto label = j.at("label").get<std::string>();
    if (label != "YES" && label != "NO") throw std::invalid_argument("instance file: bad label");
    inst.label = label == "YES" ? Label::YES : Label::NO;
    check_level_structure(inst.buckets, inst.level_sets, inst.bijections);
    return inst;
}

void write_instance_file(const PointerChasingInstance& inst, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << write_instance_text(inst);
}

PointerChasingInstance read_instance_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return read_instance_text(ss.str());
}

}  // namespace pclab::pcp
