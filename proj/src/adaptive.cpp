#include "pclab/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pclab::adaptive {

using qsim::cdouble;
using qsim::Matrix;
using qsim::Vector;

namespace {

std::int64_t witness_label(const std::string& bits, std::int64_t dim) {
    std::int64_t v = 0;
    for (char c : bits) {
        if (c != '0' && c != '1') throw std::invalid_argument("witness bits must be 0/1");
        v = v * 2 + (c - '0');
    }
    if (v >= dim) throw std::invalid_argument("witness does not fit its register");
    return v + 1;
}

void apply_round_unitary(qsim::Statevector& st, const std::vector<GateOp>& gates) {
    for (const auto& g : gates) st = qsim::apply_dense(st, g.matrix, g.regs);
}

void apply_oracle_round(qsim::Statevector& st, const AdaptiveAlgorithm& alg, const qsim::Permutation& oracle,
                        OracleMode mode) {
    for (int j = 0; j < alg.width(); ++j) {
        if (mode == OracleMode::inplace)
            st = qsim::apply_inplace_oracle(st, oracle, alg.query_regs[static_cast<std::size_t>(j)]);
        else
            st = qsim::apply_xor_oracle(st, oracle, alg.query_regs[static_cast<std::size_t>(j)],
                                        alg.query_out_regs[static_cast<std::size_t>(j)]);
    }
}

/// Unitary with a prescribed first column, completed by Gram-Schmidt.
Matrix preparation_unitary(const Vector& target) {
    const std::int64_t d = target.size();
    Matrix u = Matrix::Zero(d, d);
    u.col(0) = target / target.norm();
    std::int64_t next = 0;
    for (std::int64_t c = 1; c < d; ++c) {
        Vector v;
        do {
            v = Vector::Zero(d);
            v(next++) = 1.0;
            for (std::int64_t k = 0; k < c; ++k) v -= u.col(k).dot(v) * u.col(k);
        } while (v.norm() < 0.5 && next < d);
        u.col(c) = v / v.norm();
    }
    return u;
}

std::string set_to_text(const std::set<std::int64_t>& s) {
    std::string out = "{";
    bool first = true;
    for (auto x : s) {
        if (!first) out += ",";
        out += std::to_string(x);
        first = false;
    }
    return out + "}";
}

}  // namespace

// ---------------------------------------------------------------------------
// AdaptiveAlgorithm

std::int64_t AdaptiveAlgorithm::state_dim() const {
    std::int64_t d = 1;
    for (const auto& r : registers) d *= r.dim;
    return d;
}

void AdaptiveAlgorithm::validate(OracleMode mode, std::int64_t oracle_domain) const {
    if (rounds < 0) throw std::invalid_argument("AdaptiveAlgorithm: negative round count");
    if (static_cast<int>(unitaries.size()) != rounds + 1)
        throw std::invalid_argument("AdaptiveAlgorithm: need R+1 round unitaries");
    if (query_regs.empty()) throw std::invalid_argument("AdaptiveAlgorithm: no query registers");
    if (mode == OracleMode::xor_mode && query_out_regs.size() != query_regs.size())
        throw std::invalid_argument("AdaptiveAlgorithm: xor mode needs one output register per query register");
    auto find_dim = [&](const std::string& name) {
        for (const auto& r : registers)
            if (r.name == name) return r.dim;
        throw std::invalid_argument("AdaptiveAlgorithm: unknown register " + name);
    };
    for (const auto& qr : query_regs)
        if (find_dim(qr) < oracle_domain)
            throw std::invalid_argument("AdaptiveAlgorithm: query register smaller than the oracle domain");
    if (!witness_reg.empty()) find_dim(witness_reg);
    for (const auto& round : unitaries)
        for (const auto& g : round) {
            std::int64_t d = 1;
            for (const auto& rn : g.regs) d *= find_dim(rn);
            if (g.matrix.rows() != d || g.matrix.cols() != d)
                throw std::invalid_argument("AdaptiveAlgorithm: gate dimension mismatch");
            if ((g.matrix.adjoint() * g.matrix - Matrix::Identity(d, d)).norm() > 1e-10)
                throw std::invalid_argument("AdaptiveAlgorithm: gate is not unitary");
        }
}

std::vector<qsim::Statevector> run_adaptive_trace(const AdaptiveAlgorithm& alg, const qsim::Permutation& oracle,
                                                  OracleMode mode, const std::string& witness_bits,
                                                  std::int64_t state_budget) {
    alg.validate(mode, oracle.size());
    if (alg.state_dim() > state_budget)
        throw std::invalid_argument("run_adaptive: state dimension exceeds the budget");

    std::vector<std::int64_t> labels(alg.registers.size(), 1);
    if (!alg.witness_reg.empty()) {
        for (std::size_t i = 0; i < alg.registers.size(); ++i)
            if (alg.registers[i].name == alg.witness_reg)
                labels[i] = witness_label(witness_bits, alg.registers[i].dim);
    } else if (!witness_bits.empty()) {
        throw std::invalid_argument("run_adaptive: witness given but the algorithm has no witness register");
    }
    auto st = qsim::Statevector::basis(alg.registers, labels);

    std::vector<qsim::Statevector> trace;
    apply_round_unitary(st, alg.unitaries[0]);
    trace.push_back(st);
    for (int r = 1; r <= alg.rounds; ++r) {
        apply_oracle_round(st, alg, oracle, mode);
        apply_round_unitary(st, alg.unitaries[static_cast<std::size_t>(r)]);
        trace.push_back(st);
    }
    return trace;
}

qsim::Statevector run_adaptive(const AdaptiveAlgorithm& alg, const qsim::Permutation& oracle, OracleMode mode,
                               const std::string& witness_bits, std::int64_t state_budget) {
    return run_adaptive_trace(alg, oracle, mode, witness_bits, state_budget).back();
}

// ---------------------------------------------------------------------------
// Query-mass machinery

double query_mass(const qsim::Statevector& state, std::pair<std::int64_t, std::int64_t> interval,
                  const std::string& query_reg) {
    const auto p = state.marginal(query_reg);
    double mass = 0.0;
    for (std::int64_t x = interval.first; x <= interval.second && x <= static_cast<std::int64_t>(p.size()); ++x)
        mass += p[static_cast<std::size_t>(x - 1)];
    return mass;
}

std::map<std::int64_t, double> bucket_mu(const qsim::Statevector& state, const pcp::Buckets& bk, int bucket,
                                         const std::vector<std::string>& query_regs) {
    const auto [lo, hi] = bk.interval(bucket);
    std::map<std::int64_t, double> mass;
    double total = 0.0;
    for (const auto& qr : query_regs) {
        const auto p = state.marginal(qr);
        for (std::int64_t x = lo; x <= hi; ++x) {
            const double m = p[static_cast<std::size_t>(x - 1)];
            if (m > 0.0) mass[x] += m;
            total += m;
        }
    }
    std::map<std::int64_t, double> mu;
    if (total <= 0.0) return mu;  // mu = 0 by convention when p_i = 0
    for (const auto& [x, m] : mass) mu[x] = m / total;
    return mu;
}

std::set<std::int64_t> heavy_set(const qsim::Statevector& state, const pcp::Buckets& bk, int bucket,
                                 const std::vector<std::string>& query_regs, const HeavyParams& params) {
    params.validate();
    const auto mu = bucket_mu(state, bk, bucket, query_regs);
    const double threshold = params.epsilon / static_cast<double>(bk.N);
    std::set<std::int64_t> h;
    for (const auto& [x, m] : mu)
        if (m >= threshold) h.insert(x);
    return h;
}

// ---------------------------------------------------------------------------
// Transcripts

Transcript Transcript::initial(const pcp::Buckets& bk) {
    Transcript tr;
    tr.round = 0;
    tr.buckets = bk;
    tr.parts.resize(static_cast<std::size_t>(bk.b));
    for (std::int64_t j = 1; j <= bk.N; ++j) tr.parts[0].discovered.insert(j);
    for (int i = 2; i <= bk.b; ++i) {
        const auto [lo, hi] = bk.interval(i);
        for (std::int64_t x = lo; x <= hi; ++x) tr.parts[static_cast<std::size_t>(i - 1)].unexplored.insert(x);
    }
    return tr;
}

std::set<std::int64_t> Transcript::frontier(int i) const {
    const auto& p = bucket(i);
    std::set<std::int64_t> f;
    std::set_difference(p.discovered.begin(), p.discovered.end(), p.committed.begin(), p.committed.end(),
                        std::inserter(f, f.begin()));
    return f;
}

std::set<std::int64_t> Transcript::excluded(int i) const {
    const auto& p = bucket(i);
    const auto [lo, hi] = buckets.interval(i);
    std::set<std::int64_t> e;
    for (std::int64_t x = lo; x <= hi; ++x)
        if (!p.discovered.count(x) && !p.unexplored.count(x)) e.insert(x);
    return e;
}

void Transcript::check_partition() const {
    std::set<std::int64_t> values;
    for (int i = 1; i <= buckets.b; ++i) {
        const auto& p = bucket(i);
        const auto [lo, hi] = buckets.interval(i);
        for (auto x : p.discovered)
            if (x < lo || x > hi) throw std::runtime_error("transcript: D leaves its bucket");
        for (auto x : p.unexplored) {
            if (x < lo || x > hi) throw std::runtime_error("transcript: U leaves its bucket");
            if (p.discovered.count(x)) throw std::runtime_error("transcript: U and D overlap");
        }
        for (auto x : p.committed) {
            if (!p.discovered.count(x)) throw std::runtime_error("transcript: Q not inside D");
            auto it = committed_values.find(x);
            if (it == committed_values.end()) throw std::runtime_error("transcript: committed point without value");
            if (!values.insert(it->second).second)
                throw std::runtime_error("transcript: committed values are not injective");
        }
        // Q | F | U | E partitions I_i: Q,F partition D; U,E partition the rest.
        const std::int64_t total = static_cast<std::int64_t>(p.committed.size() + frontier(i).size() +
                                                             p.unexplored.size() + excluded(i).size());
        if (total != hi - lo + 1) throw std::runtime_error("transcript: partition cardinality mismatch");
    }
}

Transcript update_transcript(const Transcript& prev, const pcp::PointerChasingInstance& inst,
                             const std::vector<std::set<std::int64_t>>& heavy_sets) {
    const auto& bk = prev.buckets;
    if (static_cast<int>(heavy_sets.size()) != bk.b)
        throw std::invalid_argument("update_transcript: one heavy set per bucket required");
    if (inst.buckets.b != bk.b || inst.buckets.M != bk.M)
        throw std::invalid_argument("update_transcript: instance does not match the transcript layout");

    Transcript next = prev;
    next.round = prev.round + 1;

    // undiscovered S_i and the heavy hits G_i = H_i n S_i
    std::vector<std::set<std::int64_t>> hits(static_cast<std::size_t>(bk.b));
    for (int i = 1; i <= bk.b; ++i) {
        const auto& prev_u = prev.bucket(i).unexplored;
        for (auto x : inst.level_sets[static_cast<std::size_t>(i - 1)])
            if (prev_u.count(x) && heavy_sets[static_cast<std::size_t>(i - 1)].count(x))
                hits[static_cast<std::size_t>(i - 1)].insert(x);
    }

    // path points: uncommitted chain elements of every heavy hit
    std::vector<std::set<std::int64_t>> path(static_cast<std::size_t>(bk.b));
    for (int k = 1; k <= bk.b; ++k) {
        for (auto g : hits[static_cast<std::size_t>(k - 1)]) {
            const auto ch = pcp::chain(inst, g);
            // ch[0] = g at level k, ch[t] at level k - t
            for (std::size_t t = 1; t < ch.size(); ++t) {
                const int level = k - static_cast<int>(t);
                if (level < 2) break;  // level 1 is committed wholesale below
                if (!prev.bucket(level).committed.count(ch[t]))
                    path[static_cast<std::size_t>(level - 1)].insert(ch[t]);
            }
        }
    }

    // committed sets (Q_1 = [N] from round 1 on)
    {
        auto& b1 = next.parts[0];
        for (std::int64_t j = 1; j <= bk.N; ++j) {
            b1.discovered.insert(j);
            if (b1.committed.insert(j).second)
                next.committed_values[j] = inst.perm().apply(j);
        }
        b1.unexplored.clear();
    }
    for (int i = 2; i <= bk.b; ++i) {
        auto& part = next.parts[static_cast<std::size_t>(i - 1)];
        auto commit = [&](std::int64_t x) {
            if (part.committed.insert(x).second) next.committed_values[x] = inst.perm().apply(x);
        };
        for (auto x : prev.bucket(i).discovered) commit(x);
        for (auto x : hits[static_cast<std::size_t>(i - 1)]) commit(x);
        for (auto x : path[static_cast<std::size_t>(i - 1)]) commit(x);
    }

    // discovered sets, ascending so pi(Q_{i-1}) uses this round's commitments
    for (int i = 2; i <= bk.b; ++i) {
        auto& part = next.parts[static_cast<std::size_t>(i - 1)];
        for (auto x : hits[static_cast<std::size_t>(i - 1)]) part.discovered.insert(x);
        for (auto x : path[static_cast<std::size_t>(i - 1)]) part.discovered.insert(x);
        for (auto x : next.parts[static_cast<std::size_t>(i - 2)].committed) {
            const auto it = next.committed_values.find(x);
            if (it == next.committed_values.end()) throw std::runtime_error("update_transcript: missing committed value");
            if (bk.bucket_of(it->second) != i)
                throw std::runtime_error("update_transcript: committed value escapes the next bucket");
            part.discovered.insert(it->second);
        }
    }

    // unexplored sets lose the heavy sets and everything discovered
    for (int i = 2; i <= bk.b; ++i) {
        auto& part = next.parts[static_cast<std::size_t>(i - 1)];
        for (auto x : heavy_sets[static_cast<std::size_t>(i - 1)]) part.unexplored.erase(x);
        for (auto x : part.discovered) part.unexplored.erase(x);
    }

    next.check_partition();
    return next;
}

std::vector<std::set<std::int64_t>> heavy_hits(const Transcript& prev, const pcp::PointerChasingInstance& inst,
                                               const std::vector<std::set<std::int64_t>>& heavy_sets) {
    std::vector<std::set<std::int64_t>> hits(static_cast<std::size_t>(prev.buckets.b));
    for (int i = 1; i <= prev.buckets.b; ++i)
        for (auto x : inst.level_sets[static_cast<std::size_t>(i - 1)])
            if (prev.bucket(i).unexplored.count(x) && heavy_sets[static_cast<std::size_t>(i - 1)].count(x))
                hits[static_cast<std::size_t>(i - 1)].insert(x);
    return hits;
}

std::map<std::int64_t, std::int64_t> root_function(const Transcript& tr) {
    std::vector<std::int64_t> frontier;
    for (int i = 1; i <= tr.buckets.b; ++i) {
        const auto f = tr.frontier(i);
        frontier.insert(frontier.end(), f.begin(), f.end());
    }
    std::sort(frontier.begin(), frontier.end());

    std::set<std::int64_t> taken;
    for (auto x : tr.bucket(tr.buckets.b).committed) taken.insert(tr.committed_values.at(x));
    std::vector<std::int64_t> targets;
    for (std::int64_t j = 1; j <= tr.buckets.N; ++j)
        if (!taken.count(j)) targets.push_back(j);

    if (frontier.size() != targets.size())
        throw std::runtime_error("root_function: frontier and target sizes disagree");
    std::map<std::int64_t, std::int64_t> f;
    for (std::size_t k = 0; k < frontier.size(); ++k) f[frontier[k]] = targets[k];
    return f;
}

qsim::Permutation canonical_completion(const Transcript& tr) {
    const auto root = root_function(tr);
    std::vector<std::int64_t> fwd(static_cast<std::size_t>(tr.buckets.M));
    for (std::int64_t x = 1; x <= tr.buckets.M; ++x) fwd[static_cast<std::size_t>(x - 1)] = x;
    for (const auto& [x, y] : tr.committed_values) fwd[static_cast<std::size_t>(x - 1)] = y;
    for (const auto& [x, y] : root) fwd[static_cast<std::size_t>(x - 1)] = y;
    return qsim::Permutation(std::move(fwd));  // ctor rejects branch overlap
}

bool is_good(const Transcript& tr, const HeavyParams& params) {
    params.validate();
    const double budget = 4.0 * tr.round * tr.buckets.b * params.delta * static_cast<double>(tr.buckets.N);
    for (int i = tr.round + 2; i <= tr.buckets.b; ++i)
        if (static_cast<double>(tr.bucket(i).discovered.size()) > budget) return false;
    for (int i = tr.round + 1; i <= tr.buckets.b; ++i)
        if (static_cast<double>(tr.bucket(i).committed.size()) > budget) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Bounds

std::pair<double, double> hybrid_check(const qsim::Permutation& pi, const qsim::Permutation& pi_prime,
                                       const qsim::Statevector& state, int q) {
    if (static_cast<int>(state.registers().size()) != q)
        throw std::invalid_argument("hybrid_check: state must have exactly q query registers");
    auto a = state;
    auto b = state;
    for (const auto& reg : state.registers()) {
        a = qsim::apply_inplace_oracle(a, pi, reg.name);
        b = qsim::apply_inplace_oracle(b, pi_prime, reg.name);
    }
    const double lhs = (a.amplitudes() - b.amplitudes()).norm();

    const auto disagree = pi.disagreement(pi_prime);
    double total = 0.0;
    for (const auto& reg : state.registers()) {
        const auto p = state.marginal(reg.name);
        for (auto x : disagree) total += p[static_cast<std::size_t>(x - 1)];
    }
    return {lhs, 2.0 * std::sqrt(total)};
}

double too_heavy_bound(std::int64_t n_sub, std::int64_t b_universe, double epsilon, double delta) {
    if (n_sub <= 0 || b_universe < n_sub) throw std::invalid_argument("too_heavy_bound: need 0 < N <= B");
    if (epsilon <= 0.0 || epsilon > 1.0 || delta <= 0.0 || delta > 1.0)
        throw std::invalid_argument("too_heavy_bound: epsilon, delta in (0, 1]");
    const double e = 2.718281828459045235360287471353;
    const double base = e * static_cast<double>(n_sub) / (delta * epsilon * static_cast<double>(b_universe));
    return std::pow(base, delta * static_cast<double>(n_sub));
}

double too_heavy_empirical(std::int64_t n_sub, std::int64_t b_universe, const std::vector<double>& mu,
                           double epsilon, double delta, int trials, Rng& rng) {
    if (static_cast<std::int64_t>(mu.size()) != b_universe)
        throw std::invalid_argument("too_heavy_empirical: mu must have B entries");
    const double threshold = epsilon / static_cast<double>(n_sub);
    std::vector<std::int64_t> heavy;
    for (std::int64_t x = 0; x < b_universe; ++x)
        if (mu[static_cast<std::size_t>(x)] >= threshold) heavy.push_back(x + 1);
    std::set<std::int64_t> hset(heavy.begin(), heavy.end());

    std::vector<std::int64_t> universe(static_cast<std::size_t>(b_universe));
    for (std::int64_t x = 0; x < b_universe; ++x) universe[static_cast<std::size_t>(x)] = x + 1;
    const double cut = delta * static_cast<double>(n_sub);
    int bad = 0;
    for (int t = 0; t < trials; ++t) {
        auto s = rng.sample_subset(universe, static_cast<std::size_t>(n_sub));
        std::int64_t inter = 0;
        for (auto x : s)
            if (hset.count(x)) ++inter;
        if (static_cast<double>(inter) >= cut) ++bad;
    }
    return static_cast<double>(bad) / static_cast<double>(trials);
}

// ---------------------------------------------------------------------------
// Attack runner and the NO transformation

AttackRun run_transcript_attack(const AdaptiveAlgorithm& alg, const pcp::PointerChasingInstance& inst,
                                const HeavyParams& params, OracleMode mode, const std::string& witness_bits) {
    params.validate();
    alg.validate(mode, inst.buckets.M);
    const auto& bk = inst.buckets;

    AttackRun run;
    run.params = params;
    run.mode = mode;
    run.q = alg.width();
    run.rounds = alg.rounds;
    run.witness_bits = witness_bits;
    run.transcripts.push_back(Transcript::initial(bk));
    run.good.push_back(is_good(run.transcripts[0], params));

    // true-oracle and canonical runs advance in lockstep
    std::vector<std::int64_t> labels(alg.registers.size(), 1);
    if (!alg.witness_reg.empty())
        for (std::size_t i = 0; i < alg.registers.size(); ++i)
            if (alg.registers[i].name == alg.witness_reg)
                labels[i] = witness_label(witness_bits, alg.registers[i].dim);
    auto true_state = qsim::Statevector::basis(alg.registers, labels);
    apply_round_unitary(true_state, alg.unitaries[0]);
    auto canon_state = true_state;

    for (int r = 1; r <= alg.rounds; ++r) {
        // heavy sets come from the canonical state before this round's query
        std::vector<std::set<std::int64_t>> hv;
        for (int i = 1; i <= bk.b; ++i) hv.push_back(heavy_set(canon_state, bk, i, alg.query_regs, params));
        run.heavy.push_back(hv);
        run.hits.push_back(heavy_hits(run.transcripts.back(), inst, hv));

        auto next = update_transcript(run.transcripts.back(), inst, hv);
        run.transcripts.push_back(next);
        run.good.push_back(is_good(next, params));
        auto completion = canonical_completion(next);
        run.completions.push_back(completion);

        apply_oracle_round(true_state, alg, inst.perm(), mode);
        apply_round_unitary(true_state, alg.unitaries[static_cast<std::size_t>(r)]);
        apply_oracle_round(canon_state, alg, completion, mode);
        apply_round_unitary(canon_state, alg.unitaries[static_cast<std::size_t>(r)]);
    }
    run.final_true = true_state;
    run.final_canonical = canon_state;
    return run;
}

pcp::PointerChasingInstance build_no_instance(const pcp::PointerChasingInstance& yes,
                                              const std::vector<Transcript>& rounds, const HeavyParams& params) {
    params.validate();
    const auto& bk = yes.buckets;
    if (bk.b < 3) throw std::invalid_argument("build_no_instance: needs b >= 3");
    if (bk.N % 2 != 0) throw std::invalid_argument("build_no_instance: needs even N");
    if (rounds.empty()) throw std::invalid_argument("build_no_instance: no transcripts");
    if (pcp::classify(yes).kind != pcp::Classification::Kind::YES)
        throw std::invalid_argument("build_no_instance: input must be a YES instance");
    const int r_final = rounds.back().round;
    for (const auto& tr : rounds)
        if (!is_good(tr, params))
            throw std::invalid_argument("build_no_instance: transcript is not good at round " +
                                        std::to_string(tr.round));

    // slack conditions of the transformation
    const double c1 = 8.0 * r_final * bk.b * params.delta;
    const double c2 =
        (1.0 / params.epsilon + 4.0 * bk.b * params.delta) * r_final * static_cast<double>(bk.N);
    if (c1 > 0.25 || c2 > static_cast<double>(bk.B) / 4.0)
        throw std::invalid_argument("build_no_instance: slack preconditions violated");

    const auto& final_tr = rounds.back();
    const auto& q_bm1 = final_tr.bucket(bk.b - 1).committed;
    const auto& d_b = final_tr.bucket(bk.b).discovered;
    const auto& u_b = final_tr.bucket(bk.b).unexplored;

    std::set<std::int64_t> j_fix;
    for (std::int64_t j = 1; j <= bk.N; ++j) {
        if (q_bm1.count(yes.f(bk.b - 1, j))) j_fix.insert(j);
        if (d_b.count(yes.f(bk.b, j))) j_fix.insert(j);
    }
    std::set<std::int64_t> fixed_targets;  // F = f_b(J_fix)
    for (auto j : j_fix) {
        const std::int64_t x = yes.f(bk.b, j);
        if (x % 2 != 0) throw std::runtime_error("build_no_instance: YES instance has odd chain end");
        if (!d_b.count(x)) throw std::runtime_error("build_no_instance: F escapes the discovered set");
        fixed_targets.insert(x);
    }
    if (static_cast<std::int64_t>(fixed_targets.size()) > bk.N / 2)
        throw std::invalid_argument("build_no_instance: too many certified chain ends");

    // untouched replacements, smallest labels first
    std::vector<std::int64_t> avail_odd, avail_even;
    for (auto x : u_b) (x % 2 == 0 ? avail_even : avail_odd).push_back(x);
    const std::int64_t need_odd = bk.N / 2;
    const std::int64_t need_even = bk.N / 2 - static_cast<std::int64_t>(fixed_targets.size());
    if (static_cast<std::int64_t>(avail_odd.size()) < need_odd ||
        static_cast<std::int64_t>(avail_even.size()) < need_even)
        throw std::invalid_argument("build_no_instance: selection infeasible");

    std::set<std::int64_t> sb_no(fixed_targets);
    for (std::int64_t k = 0; k < need_odd; ++k) sb_no.insert(avail_odd[static_cast<std::size_t>(k)]);
    for (std::int64_t k = 0; k < need_even; ++k) sb_no.insert(avail_even[static_cast<std::size_t>(k)]);
    if (static_cast<std::int64_t>(sb_no.size()) != bk.N)
        throw std::runtime_error("build_no_instance: replacement set has the wrong size");

    // f_b^NO agrees with f_b on J_fix, remaining indices map ascending
    std::vector<std::int64_t> remaining_targets;
    for (auto x : sb_no)
        if (!fixed_targets.count(x)) remaining_targets.push_back(x);
    std::vector<std::int64_t> fb_no(static_cast<std::size_t>(bk.N), 0);
    std::size_t next_target = 0;
    for (std::int64_t j = 1; j <= bk.N; ++j) {
        if (j_fix.count(j))
            fb_no[static_cast<std::size_t>(j - 1)] = yes.f(bk.b, j);
        else
            fb_no[static_cast<std::size_t>(j - 1)] = remaining_targets[next_target++];
    }

    pcp::PointerChasingInstance no = yes;
    no.level_sets.back() = std::vector<std::int64_t>(sb_no.begin(), sb_no.end());
    no.bijections.back() = std::move(fb_no);
    no.label = pcp::Label::NO;
    if (pcp::classify(no).kind != pcp::Classification::Kind::NO)
        throw std::runtime_error("build_no_instance: output fails the NO promise");
    return no;
}

// ---------------------------------------------------------------------------
// Transcript text

std::string write_transcripts_text(const AttackRun& run) {
    const auto& bk = run.transcripts.front().buckets;
    std::ostringstream os;
    char buf[64];
    os << "pclab-transcript v1\n";
    std::snprintf(buf, sizeof buf, "%.12g", run.params.epsilon);
    os << "meta n=" << bk.n << " l=" << bk.l << " b=" << bk.b << " N=" << bk.N << " M=" << bk.M << " B=" << bk.B
       << " q=" << run.q << " R=" << run.rounds << " mode=" << (run.mode == OracleMode::inplace ? "inplace" : "xor")
       << " epsilon=" << buf;
    std::snprintf(buf, sizeof buf, "%.12g", run.params.delta);
    os << " delta=" << buf << "\n";
    for (std::size_t r = 0; r < run.transcripts.size(); ++r) {
        const auto& tr = run.transcripts[r];
        os << "round " << tr.round << " good=" << (run.good[r] ? 1 : 0) << "\n";
        if (r >= 1) {
            for (int i = 1; i <= bk.b; ++i)
                os << "  heavy " << i << " " << set_to_text(run.heavy[r - 1][static_cast<std::size_t>(i - 1)])
                   << " hits " << set_to_text(run.hits[r - 1][static_cast<std::size_t>(i - 1)]) << "\n";
        }
        for (int i = 1; i <= bk.b; ++i) {
            const auto& p = tr.bucket(i);
            os << "  bucket " << i << " Q=" << set_to_text(p.committed) << " F=" << set_to_text(tr.frontier(i))
               << " U=" << set_to_text(p.unexplored) << " E=" << set_to_text(tr.excluded(i))
               << " D=" << set_to_text(p.discovered) << "\n";
        }
        os << "  committed {";
        bool first = true;
        for (const auto& [x, y] : tr.committed_values) {
            if (!first) os << ",";
            os << x << ":" << y;
            first = false;
        }
        os << "}\n";
    }
    return os.str();
}

TranscriptDiff diff_transcripts_text(const std::string& a, const std::string& b) {
    if (a == b) return {true, ""};
    std::istringstream sa(a), sb(b);
    std::string la, lb, locus = "header";
    std::size_t line = 0;
    while (true) {
        const bool ga = static_cast<bool>(std::getline(sa, la));
        const bool gb = static_cast<bool>(std::getline(sb, lb));
        ++line;
        if (!ga && !gb) break;
        const std::string& probe = ga ? la : lb;
        if (probe.rfind("round ", 0) == 0) locus = probe.substr(0, probe.find(" good"));
        if (!ga || !gb || la != lb) {
            std::ostringstream os;
            os << "line " << line << " (" << locus << "): ";
            if (!ga)
                os << "first dump ends early";
            else if (!gb)
                os << "second dump ends early";
            else
                os << "'" << la << "' vs '" << lb << "'";
            return {false, os.str()};
        }
    }
    return {false, "dumps differ only in trailing bytes"};
}

// ---------------------------------------------------------------------------
// Probe algorithms

AdaptiveAlgorithm make_probe_algorithm(const pcp::Buckets& bk, int rounds, int q, int witness_bits,
                                       OracleMode mode, Rng& rng) {
    AdaptiveAlgorithm alg;
    alg.rounds = rounds;
    const std::int64_t m = bk.M;
    for (int j = 0; j < q; ++j) {
        alg.registers.push_back({"x" + std::to_string(j), m});
        alg.query_regs.push_back("x" + std::to_string(j));
        if (mode == OracleMode::xor_mode) {
            std::int64_t out = 1;
            while (out < m) out <<= 1;
            alg.registers.push_back({"y" + std::to_string(j), out});
            alg.query_out_regs.push_back("y" + std::to_string(j));
        }
    }
    if (witness_bits > 0) {
        alg.registers.push_back({"wit", std::int64_t{1} << witness_bits});
        alg.witness_reg = "wit";
    }

    // U_0 prepares each query register; the preparation menu is
    // instance-independent (it sees only the public bucket structure).
    std::vector<GateOp> u0;
    for (int j = 0; j < q; ++j) {
        Vector target = Vector::Zero(m);
        switch (rng.uniform_int(4)) {
            case 0: {  // basis state anywhere in [M]
                target(rng.uniform_int(m)) = 1.0;
                break;
            }
            case 1: {  // uniform window inside a random bucket
                const int i = 1 + static_cast<int>(rng.uniform_int(bk.b));
                const auto [lo, hi] = bk.interval(i);
                const std::int64_t len = 1 + rng.uniform_int(hi - lo + 1);
                const std::int64_t start = lo + rng.uniform_int(hi - lo + 2 - len);
                for (std::int64_t x = start; x < start + len; ++x) target(x - 1) = 1.0;
                target.normalize();
                break;
            }
            case 2: {  // uniform over [N], the honest chase start
                for (std::int64_t x = 1; x <= bk.N; ++x) target(x - 1) = 1.0;
                target.normalize();
                break;
            }
            default: {  // generic dense state
                for (std::int64_t x = 0; x < m; ++x) target(x) = rng.normal_complex();
                target.normalize();
                break;
            }
        }
        u0.push_back({preparation_unitary(target), {alg.query_regs[static_cast<std::size_t>(j)]}});
    }
    alg.unitaries.push_back(std::move(u0));

    for (int r = 1; r <= rounds; ++r) {
        std::vector<GateOp> ur;
        if (!alg.witness_reg.empty() && rng.uniform_int(2) == 0) {
            // small random unitary on the witness register
            const std::int64_t d = std::int64_t{1} << witness_bits;
            Vector target(d);
            for (std::int64_t x = 0; x < d; ++x) target(x) = rng.normal_complex();
            target.normalize();
            ur.push_back({preparation_unitary(target), {alg.witness_reg}});
        }
        alg.unitaries.push_back(std::move(ur));
    }
    return alg;
}

// ---------------------------------------------------------------------------
// Guesser

std::set<std::int64_t> guesser(const GuesserAlgorithm& alg, int l, Rng& rng) {
    if (alg.rounds < 1) throw std::invalid_argument("guesser: needs at least one unitary");
    if (static_cast<int>(alg.unitaries.size()) != alg.rounds)
        throw std::invalid_argument("guesser: expected r unitaries");
    if (alg.pair_regs.empty() || alg.answer_regs.size() != alg.pair_regs.size())
        throw std::invalid_argument("guesser: query and answer registers must pair up");

    std::int64_t witness_dim = 1;
    for (const auto& r : alg.registers)
        if (r.name == alg.witness_reg) witness_dim = r.dim;
    const std::int64_t y = 1 + (alg.witness_reg.empty() ? 0 : rng.uniform_int(witness_dim));

    std::set<std::int64_t> acc;  // accumulated pair labels
    for (int i = 1; i <= l; ++i) {
        const int j = static_cast<int>(rng.uniform_int(alg.rounds));  // j in [0, r-1]
        std::vector<std::int64_t> labels(alg.registers.size(), 1);
        for (std::size_t k = 0; k < alg.registers.size(); ++k)
            if (alg.registers[k].name == alg.witness_reg) labels[k] = y;
        auto st = qsim::Statevector::basis(alg.registers, labels);
        apply_round_unitary(st, alg.unitaries[0]);
        for (int t = 1; t <= j; ++t) {
            // membership oracle of the accumulated set, one call per query slot
            for (std::size_t slot = 0; slot < alg.pair_regs.size(); ++slot) {
                const int pr = st.axis(alg.pair_regs[slot]);
                const int ar = st.axis(alg.answer_regs[slot]);
                const std::int64_t pd = st.axis_dim(pr), ps = st.stride(pr);
                const std::int64_t as = st.stride(ar);
                Vector out = Vector::Zero(st.dim());
                for (std::int64_t idx = 0; idx < st.dim(); ++idx) {
                    const cdouble ampl = st.amplitudes()(idx);
                    if (ampl == 0.0) continue;
                    const std::int64_t pair = (idx / ps) % pd + 1;
                    const std::int64_t bit = (idx / as) % 2;
                    const std::int64_t flip = acc.count(pair) ? 1 - 2 * bit : 0;
                    out(idx + flip * as) = ampl;
                }
                st = qsim::Statevector(st.registers(), std::move(out));
            }
            apply_round_unitary(st, alg.unitaries[static_cast<std::size_t>(t)]);
        }
        const auto& reg =
            alg.pair_regs[static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(alg.pair_regs.size())))];
        auto [outcome, post] = qsim::measure(st, reg, rng);
        acc.insert(outcome);
    }
    return acc;
}

double guesser_lower_bound(int witness_bits, double gap_delta, int queries, int l) {
    if (queries < 1 || l < 0 || gap_delta <= 0.0) throw std::invalid_argument("guesser_lower_bound: bad parameters");
    const double per = gap_delta * gap_delta / (16.0 * static_cast<double>(queries) * queries);
    return std::pow(2.0, -witness_bits) * std::pow(per, l);
}

}  // namespace pclab::adaptive
