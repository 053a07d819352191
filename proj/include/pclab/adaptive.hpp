#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pclab/pcp.hpp"
#include "pclab/qsim.hpp"
#include "pclab/rng.hpp"

namespace pclab::adaptive {

enum class OracleMode { inplace, xor_mode };

/// One dense gate acting on the listed registers (identity elsewhere).
struct GateOp {
    qsim::Matrix matrix;
    std::vector<std::string> regs;
};

/// Bounded-adaptivity query algorithm: R rounds of q parallel oracle calls
/// interlaced with unitaries U_0..U_R, each given as a gate list over named
/// registers. In xor mode each query slot j has an input and an output
/// register; in in-place mode only the input register.
struct AdaptiveAlgorithm {
    std::vector<qsim::RegisterSpec> registers;
    std::string witness_reg;                  // empty when w = 0
    std::vector<std::string> query_regs;      // q input registers
    std::vector<std::string> query_out_regs;  // q output registers (xor mode)
    int rounds = 0;                           // R
    std::vector<std::vector<GateOp>> unitaries;  // size R + 1

    int width() const { return static_cast<int>(query_regs.size()); }
    std::int64_t state_dim() const;
    void validate(OracleMode mode, std::int64_t oracle_domain) const;
};

/// U_R O^q ... U_1 O^q U_0 |0>|witness> computed exactly.
qsim::Statevector run_adaptive(const AdaptiveAlgorithm& alg, const qsim::Permutation& oracle, OracleMode mode,
                               const std::string& witness_bits, std::int64_t state_budget = std::int64_t{1} << 22);

/// Same run, also returning the states right before every oracle round:
/// trace[r] is the state after U_r (r = 0..R); trace[R] is the final state.
std::vector<qsim::Statevector> run_adaptive_trace(const AdaptiveAlgorithm& alg, const qsim::Permutation& oracle,
                                                  OracleMode mode, const std::string& witness_bits,
                                                  std::int64_t state_budget = std::int64_t{1} << 22);

// ---------------------------------------------------------------------------
// Query-mass machinery

/// Threshold scale epsilon and goodness scale delta; the defaults follow the
/// parameter assignments epsilon = 1/(10^4 q b^2), delta = 1/(64 b^2).
struct HeavyParams {
    double epsilon = 0.0;
    double delta = 0.0;
    static HeavyParams defaults(int q, int b) {
        HeavyParams hp;
        hp.epsilon = 1.0 / (1e4 * q * static_cast<double>(b) * b);
        hp.delta = 1.0 / (64.0 * static_cast<double>(b) * b);
        return hp;
    }
    void validate() const {
        if (!(epsilon > 0.0 && epsilon <= 1.0 && delta > 0.0 && delta <= 1.0))
            throw std::invalid_argument("HeavyParams: epsilon, delta must lie in (0, 1]");
    }
};

/// <psi| Pi_interval^{(j)} |psi>: probability mass of the 1-based label
/// interval on one query register.
double query_mass(const qsim::Statevector& state, std::pair<std::int64_t, std::int64_t> interval,
                  const std::string& query_reg);

/// Normalized per-label query distribution mu_i({x}) over bucket i, summed
/// across the given query registers; empty map when the bucket mass is zero.
std::map<std::int64_t, double> bucket_mu(const qsim::Statevector& state, const pcp::Buckets& bk, int bucket,
                                         const std::vector<std::string>& query_regs);

/// Heavy set H_i = { x in I_i : mu_i({x}) >= epsilon / N } (ties included).
std::set<std::int64_t> heavy_set(const qsim::Statevector& state, const pcp::Buckets& bk, int bucket,
                                 const std::vector<std::string>& query_regs, const HeavyParams& params);

// ---------------------------------------------------------------------------
// Transcripts

/// Per-round record of what an algorithm knows about each bucket:
/// Discovered D_i, Committed Q_i (with committed values pi(x)), Unexplored
/// U_i; the Frontier F_i = D_i \ Q_i and Excluded E_i = I_i \ (U_i u D_i)
/// are derived. Committed values are stored as explicit pairs so the NO
/// transformation never consults the original permutation afterwards.
struct Transcript {
    int round = 0;
    pcp::Buckets buckets;
    struct BucketPart {
        std::set<std::int64_t> discovered;
        std::set<std::int64_t> committed;
        std::set<std::int64_t> unexplored;
    };
    std::vector<BucketPart> parts;                       // index i-1
    std::map<std::int64_t, std::int64_t> committed_values;  // x -> pi(x)

    static Transcript initial(const pcp::Buckets& bk);

    const BucketPart& bucket(int i) const { return parts[static_cast<std::size_t>(i - 1)]; }
    std::set<std::int64_t> frontier(int i) const;
    std::set<std::int64_t> excluded(int i) const;

    /// Asserts the partition I_i = Q u F u U u E, Q subset of D, and
    /// injectivity of the committed values. Throws on violation.
    void check_partition() const;

    bool operator==(const Transcript& o) const {
        auto eq = [](const BucketPart& a, const BucketPart& b) {
            return a.discovered == b.discovered && a.committed == b.committed && a.unexplored == b.unexplored;
        };
        if (round != o.round || parts.size() != o.parts.size() || committed_values != o.committed_values)
            return false;
        for (std::size_t i = 0; i < parts.size(); ++i)
            if (!eq(parts[i], o.parts[i])) return false;
        return true;
    }
};

/// One round of the update rules: S_i = S_i n U_i^{(r-1)}, heavy hits
/// G_i = H_i n S_i, path points through chains, then
///   Q_i = Q_i u D_i u G_i u P_i,
///   D_i = D_i u G_i u P_i u pi(Q_{i-1}),
///   U_i = U_i \ (H_i u D_i),
/// with Q_1 = [N] from round 1 on.
Transcript update_transcript(const Transcript& prev, const pcp::PointerChasingInstance& inst,
                             const std::vector<std::set<std::int64_t>>& heavy_sets);

/// Heavy hits G_i of the round that produced `cur` from `prev` (recomputed
/// for reporting).
std::vector<std::set<std::int64_t>> heavy_hits(const Transcript& prev, const pcp::PointerChasingInstance& inst,
                                               const std::vector<std::set<std::int64_t>>& heavy_sets);

/// Sort-and-pair bijection from the union of frontiers to [N] \ pi(Q_b).
/// Throws when the two sides differ in size.
std::map<std::int64_t, std::int64_t> root_function(const Transcript& tr);

/// Canonical completion: committed values on Q, the root function on
/// frontiers, identity elsewhere. The result is validated as a permutation.
qsim::Permutation canonical_completion(const Transcript& tr);

/// Goodness: |D_i| <= 4 r b delta N for i >= r+2 and |Q_i| <= 4 r b delta N
/// for i >= r+1.
bool is_good(const Transcript& tr, const HeavyParams& params);

// ---------------------------------------------------------------------------
// Bounds

/// Both sides of the parallel-query hybrid inequality
/// ||(O_pi^q - O_pi'^q)|phi>|| <= 2 sqrt(sum_j p_j); the state's registers
/// are the q query registers.
std::pair<double, double> hybrid_check(const qsim::Permutation& pi, const qsim::Permutation& pi_prime,
                                       const qsim::Statevector& state, int q);

/// Analytic bound (eN / (delta epsilon B))^{delta N}.
double too_heavy_bound(std::int64_t n_sub, std::int64_t b_universe, double epsilon, double delta);

/// Monte-Carlo frequency of |S n H| >= delta N over uniform N-subsets of a
/// B-element universe, where H is the epsilon/N-heavy set of mu (a length-B
/// probability vector).
double too_heavy_empirical(std::int64_t n_sub, std::int64_t b_universe, const std::vector<double>& mu,
                           double epsilon, double delta, int trials, Rng& rng);

// ---------------------------------------------------------------------------
// Attack runner and the NO transformation

struct AttackRun {
    HeavyParams params;
    OracleMode mode;
    int q = 0;
    int rounds = 0;
    std::string witness_bits;
    std::vector<Transcript> transcripts;                  // rounds 0..R
    std::vector<qsim::Permutation> completions;           // pi~_1..pi~_R
    std::vector<std::vector<std::set<std::int64_t>>> heavy;  // per round 1..R, per bucket
    std::vector<std::vector<std::set<std::int64_t>>> hits;   // G_i per round 1..R
    std::vector<bool> good;                               // per round 0..R
    std::optional<qsim::Statevector> final_true;          // psi_R under the true oracle
    std::optional<qsim::Statevector> final_canonical;     // psi'_R

    bool all_good() const {
        for (bool g : good)
            if (!g) return false;
        return true;
    }
};

/// Runs the transcript machinery: heavy sets are measured on the canonical
/// states psi'_{r-1}, the transcript is updated against the true instance,
/// and the canonical state advances with the fresh completion each round.
AttackRun run_transcript_attack(const AdaptiveAlgorithm& alg, const pcp::PointerChasingInstance& inst,
                                const HeavyParams& params, OracleMode mode, const std::string& witness_bits);

/// Builds the NO instance consistent with the YES run's transcripts:
/// keeps the certified chain ends F = f_b(J_fix), swaps the rest of S_b for
/// untouched labels with exactly N/2 odd, and reuses f_1..f_{b-1}.
/// Requires goodness at every round and the slack conditions
/// 8 R b delta <= 1/4 and (1/epsilon + 4 b delta) R N <= B/4.
pcp::PointerChasingInstance build_no_instance(const pcp::PointerChasingInstance& yes,
                                              const std::vector<Transcript>& rounds, const HeavyParams& params);

/// Deterministic per-round text dump of an attack run (the five sets per
/// bucket, committed values, heavy sets, goodness verdicts).
std::string write_transcripts_text(const AttackRun& run);

struct TranscriptDiff {
    bool equal = false;
    std::string first_divergence;  // human-readable locus, empty when equal
};

/// Byte-level and structural comparison of two transcript dumps.
TranscriptDiff diff_transcripts_text(const std::string& a, const std::string& b);

// ---------------------------------------------------------------------------
// Randomized probe algorithms (instance-independent)

/// Builds a small randomized R-round algorithm over the bucket structure:
/// query registers are prepared in basis states, uniform bucket windows,
/// uniform [N], or random dense states; later unitaries act on the witness
/// register. Used by the transcript-attack experiments.
AdaptiveAlgorithm make_probe_algorithm(const pcp::Buckets& bk, int rounds, int q, int witness_bits,
                                       OracleMode mode, Rng& rng);

// ---------------------------------------------------------------------------
// Guesser

/// Membership-oracle algorithm for the guesser: pair registers (x, v) each
/// with an answer bit, a witness register, and unitaries U_0..U_{r-1}.
struct GuesserAlgorithm {
    std::vector<qsim::RegisterSpec> registers;
    std::string witness_reg;
    std::vector<std::string> pair_regs;    // query registers; one is measured
    std::vector<std::string> answer_regs;  // XOR membership answer bits
    int rounds = 0;                        // r
    std::vector<std::vector<GateOp>> unitaries;  // size r
};

/// One guesser run: sample a witness, then l iterations of (pick j in
/// [0, r-1], run U_j O_S ... O_S U_0 |y, 0>, measure a query register,
/// insert the outcome into S). Returns the accumulated pair set.
std::set<std::int64_t> guesser(const GuesserAlgorithm& alg, int l, Rng& rng);

/// Lower-bound formula 2^{-w} (delta^2 / (16 Q^2))^l for the success of a
/// no-query guesser derived from a gap-delta verifier with Q queries.
double guesser_lower_bound(int witness_bits, double gap_delta, int queries, int l);

}  // namespace pclab::adaptive
