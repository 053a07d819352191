#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pclab/pcp.hpp"
#include "pclab/qsim.hpp"
#include "pclab/rng.hpp"

namespace pclab::verify {

/// Acceptance analysis of the two-subroutine verifier on one witness.
/// accept is the exact half-half mixture (p_a + p_b) / 2; s is the even
/// fraction |S_b^even| / N of the instance under test.
struct VerifierReport {
    double p_a = 0.0;
    double p_b = 0.0;
    double accept = 0.0;
    double s = 0.0;
    // closed-form cross-checks: p_a = |sum_{o in S_b} alpha_o|^2 / N and
    // p_b = sum over even o in S_b of |alpha_o|^2
    double p_a_closed = 0.0;
    double p_b_closed = 0.0;
};

/// Runs the verifier exactly on an M-dimensional witness register:
/// subroutine (a) by statevector simulation (oracle, Hadamard block on the
/// low n qubits, projection on the all-zeros outcome), subroutine (b) by
/// classical post-measurement bookkeeping on the amplitudes.
VerifierReport qma1_accept(const pcp::PointerChasingInstance& inst, const qsim::Statevector& witness);

/// Max acceptance over all witnesses: top eigenpair of
/// A = (Pi_a + Pi_b)/2 with Pi_a = O^dag |[N]><[N]| O and Pi_b the projector
/// on even labels mapping into [N].
std::pair<double, qsim::Statevector> optimal_quantum_witness(const pcp::PointerChasingInstance& inst,
                                                             std::int64_t dense_cutoff = 4096);

/// (1 + sqrt(s)) / 2.
double soundness_envelope(double s);

struct CorpResult {
    bool accept = false;
    std::int64_t queries = 0;  // always b - 1
    std::int64_t start = 0;    // sampled j
    std::int64_t end = 0;      // f_b(j)
};

/// One-sided classical decider: sample j in [N], chase the permutation b-1
/// steps, accept iff the endpoint label is even.
CorpResult corp_decider(const pcp::PointerChasingInstance& inst, Rng& rng);

/// Witness-indexed acceptance family for brute-force search.
using WitnessVerifier = std::function<double(const std::string& witness_bits)>;

struct BruteforceResult {
    std::string best_witness;
    double best_accept = 0.0;
    std::vector<double> all;  // acceptance per witness, index = binary value
};

/// Exhaustive maximum over all w-bit classical witnesses.
/// Throws when 2^w exceeds the evaluation budget.
BruteforceResult qcma_bruteforce(const WitnessVerifier& verifier, int w, std::int64_t budget = 1 << 20);

}  // namespace pclab::verify
