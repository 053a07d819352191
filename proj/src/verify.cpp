#include "pclab/verify.hpp"

#include <algorithm>
#include <cmath>

namespace pclab::verify {

using qsim::cdouble;
using qsim::Matrix;
using qsim::Vector;

VerifierReport qma1_accept(const pcp::PointerChasingInstance& inst, const qsim::Statevector& witness) {
    const auto& bk = inst.buckets;
    witness.check_normalized();
    if (witness.registers().size() != 1 || witness.registers()[0].dim != bk.M)
        throw std::invalid_argument("qma1_accept: witness must live on one M-dimensional register");
    const std::string reg = witness.registers()[0].name;

    VerifierReport rep;
    rep.s = inst.s_fraction();

    // Subroutine (a): apply the oracle, Hadamard the low n qubits, accept on
    // the all-zeros outcome. |[N]> = |0...0>|+>^n under enc(x) = x-1.
    auto after_oracle = qsim::apply_inplace_oracle(witness, inst.perm(), reg);
    auto split = after_oracle.split_register(reg, {{"hi", bk.M / bk.N}, {"lo", bk.N}});
    auto rotated = qsim::apply_dense(split, qsim::hadamard_tensor(bk.n), {"lo"});
    rep.p_a = std::norm(rotated.amplitudes()(0));

    // Subroutine (b): measure, reject odd outcomes, accept iff pi(o) in [N].
    // Exact acceptance is the total amplitude mass on even labels mapping
    // into [N]; the measurement itself is classical bookkeeping.
    double pb = 0.0;
    for (std::int64_t o = 1; o <= bk.M; ++o) {
        if (o % 2 != 0) continue;
        if (inst.perm().apply(o) > bk.N) continue;
        pb += std::norm(witness.amplitudes()(o - 1));
    }
    rep.p_b = pb;
    rep.accept = 0.5 * (rep.p_a + rep.p_b);

    // Closed forms from the acceptance-probability equations.
    cdouble amp_sum = 0.0;
    double even_mass = 0.0;
    for (auto o : inst.level_sets.back()) {
        amp_sum += witness.amplitudes()(o - 1);
        if (o % 2 == 0) even_mass += std::norm(witness.amplitudes()(o - 1));
    }
    rep.p_a_closed = std::norm(amp_sum) / static_cast<double>(bk.N);
    rep.p_b_closed = even_mass;
    return rep;
}

std::pair<double, qsim::Statevector> optimal_quantum_witness(const pcp::PointerChasingInstance& inst,
                                                             std::int64_t dense_cutoff) {
    const auto& bk = inst.buckets;
    if (bk.M > dense_cutoff)
        throw std::invalid_argument("optimal_quantum_witness: M exceeds the dense cutoff");

    // Pi_a = O^dag P_[N] O: for pointer-chasing permutations this is the
    // rank-N projector onto basis states mapping into [N], sandwiched with
    // the uniform pattern; build it directly as O^dag |[N]><[N]| O.
    Vector target = Vector::Zero(bk.M);
    const double a = 1.0 / std::sqrt(static_cast<double>(bk.N));
    for (std::int64_t y = 1; y <= bk.N; ++y) target(inst.perm().inverse(y) - 1) = a;  // O^dag |[N]>
    Matrix acc = 0.5 * (target * target.adjoint());
    for (std::int64_t o = 2; o <= bk.M; o += 2)
        if (inst.perm().apply(o) <= bk.N) acc(o - 1, o - 1) += 0.5;

    auto top = qsim::extremal_eigen(acc, qsim::Which::max);
    return {top.value, qsim::Statevector({{"w", bk.M}}, top.vector)};
}

double soundness_envelope(double s) {
    if (s < 0.0 || s > 1.0) throw std::invalid_argument("soundness_envelope: s outside [0, 1]");
    return 0.5 * (1.0 + std::sqrt(s));
}

CorpResult corp_decider(const pcp::PointerChasingInstance& inst, Rng& rng) {
    const auto& bk = inst.buckets;
    CorpResult r;
    r.start = 1 + rng.uniform_int(bk.N);
    std::int64_t x = r.start;
    for (int step = 0; step < bk.b - 1; ++step) {
        x = inst.perm().apply(x);
        ++r.queries;
    }
    r.end = x;
    r.accept = (x % 2 == 0);
    return r;
}

BruteforceResult qcma_bruteforce(const WitnessVerifier& verifier, int w, std::int64_t budget) {
    if (w < 0 || w > 62) throw std::invalid_argument("qcma_bruteforce: bad witness width");
    const std::int64_t count = std::int64_t{1} << w;
    if (count > budget) throw std::invalid_argument("qcma_bruteforce: 2^w exceeds the evaluation budget");
    BruteforceResult res;
    res.all.reserve(static_cast<std::size_t>(count));
    res.best_accept = -1.0;
    for (std::int64_t v = 0; v < count; ++v) {
        std::string bits(static_cast<std::size_t>(w), '0');
        for (int i = 0; i < w; ++i)
            if ((v >> (w - 1 - i)) & 1) bits[static_cast<std::size_t>(i)] = '1';
        const double p = verifier(bits);
        res.all.push_back(p);
        if (p > res.best_accept) {
            res.best_accept = p;
            res.best_witness = bits;
        }
    }
    return res;
}

}  // namespace pclab::verify
