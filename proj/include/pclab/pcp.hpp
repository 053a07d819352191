#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pclab/qsim.hpp"
#include "pclab/rng.hpp"

namespace pclab::pcp {

/// Bucket layout for the pointer-chasing domain [M].
///
/// I_1 = [1, N]; for i >= 2, I_i = [N + (i-2)B + 1, N + (i-1)B] with
/// B = 2 * floor((M - N) / (2 (b-1))). Everything outside the buckets is
/// junk (fixed points).
struct Buckets {
    int n = 0;
    int l = 0;
    int b = 0;
    std::int64_t N = 0;
    std::int64_t M = 0;
    std::int64_t B = 0;

    /// Inclusive 1-based interval of bucket i (1-based bucket index).
    std::pair<std::int64_t, std::int64_t> interval(int i) const;
    bool in_bucket(int i, std::int64_t x) const;
    /// Bucket index containing x, or 0 when x is junk.
    int bucket_of(std::int64_t x) const;
    std::int64_t junk_size() const { return M - N - static_cast<std::int64_t>(b - 1) * B; }
    std::vector<std::int64_t> bucket_labels(int i) const;
    std::vector<std::int64_t> bucket_even(int i) const;
    std::vector<std::int64_t> bucket_odd(int i) const;
};

/// Exact layout arithmetic; throws on infeasible parameters (B odd is
/// impossible by construction; B < 2N is rejected as the desk-scale guard).
Buckets bucket_layout(int n, int l, int b);

/// True plus empty reason when (n, l, b) also sit inside the paper's
/// asymptotic regime (l >= 4 and b realizable as ceil(2^{alpha n}) for some
/// alpha in (0, 1/2)); otherwise false plus the violated condition.
std::pair<bool, std::string> paper_regime(const Buckets& bk);

enum class Label { YES, NO };

/// A pointer-chasing oracle instance: level sets S_i with bijections
/// f_i : [N] -> S_i, the assembled permutation, and the promise label.
struct PointerChasingInstance {
    Buckets buckets;
    std::vector<std::vector<std::int64_t>> level_sets;  // S_1..S_b, each sorted
    std::vector<std::vector<std::int64_t>> bijections;  // f_i as arrays [N] -> S_i
    Label label = Label::YES;

    const qsim::Permutation& perm() const;
    std::int64_t f(int i, std::int64_t j) const;  // f_i(j), 1-based both ways
    std::int64_t even_count_last() const;         // |S_b^even| on 1-based labels
    double s_fraction() const;                    // |S_b^even| / N

    bool operator==(const PointerChasingInstance& o) const {
        return level_sets == o.level_sets && bijections == o.bijections && label == o.label &&
               buckets.n == o.buckets.n && buckets.l == o.buckets.l && buckets.b == o.buckets.b;
    }

private:
    mutable std::optional<qsim::Permutation> perm_;
};

/// Assembles the permutation from level sets and bijections:
/// f_i(j) -> f_{i+1}(j), f_b(j) -> j, and every other point is fixed.
qsim::Permutation assemble_permutation(const Buckets& buckets,
                                       const std::vector<std::vector<std::int64_t>>& level_sets,
                                       const std::vector<std::vector<std::int64_t>>& bijections);

/// Recovers (S_i, f_i) from an assembled permutation by walking chains.
std::pair<std::vector<std::vector<std::int64_t>>, std::vector<std::vector<std::int64_t>>> decompose_permutation(
    const Buckets& buckets, const qsim::Permutation& perm);

/// Uniform YES instance: S_i uniform N-subsets (last bucket from its even
/// labels), uniformly random bijections, f_1 = id.
PointerChasingInstance sample_yes(const Buckets& buckets, Rng& rng);

/// NO instance at the promise extreme: exactly N/2 even and N/2 odd elements
/// in S_b.
PointerChasingInstance sample_no(const Buckets& buckets, Rng& rng);

/// Instance with exactly k even elements in S_b (k = N gives YES-shaped,
/// k <= N/2 NO-shaped, anything else violates the promise).
PointerChasingInstance sample_with_even_count(const Buckets& buckets, std::int64_t k, Rng& rng);

struct Classification {
    enum class Kind { YES, NO, INVALID } kind;
    std::string reason;  // set when INVALID
};

/// YES iff all of S_b is even, NO iff |S_b^even| <= N/2, otherwise invalid;
/// structural violations are reported as invalid with a reason.
Classification classify(const PointerChasingInstance& inst);

/// The canonical witness |S_b> on an M-dimensional register named "w".
qsim::Statevector witness_state(const PointerChasingInstance& inst);

/// Maximal backward chain g, pi^{-1}(g), ..., ending in S_1.
/// Throws when g lies on no chain.
std::vector<std::int64_t> chain(const PointerChasingInstance& inst, std::int64_t g);

/// JSON-shaped instance file (permutation never stored).
std::string write_instance_text(const PointerChasingInstance& inst);
PointerChasingInstance read_instance_text(const std::string& text);
void write_instance_file(const PointerChasingInstance& inst, const std::string& path);
PointerChasingInstance read_instance_file(const std::string& path);

}  // namespace pclab::pcp
