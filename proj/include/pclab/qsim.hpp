#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "pclab/dyadic.hpp"
#include "pclab/rng.hpp"

namespace pclab::qsim {

using cdouble = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Named registers with arbitrary (not necessarily power-of-two) dimensions.
struct RegisterSpec {
    std::string name;
    std::int64_t dim;
};

/// Exact statevector over an ordered list of named registers.
///
/// Domain labels are 1-based throughout; the 0-based encoding enc(x) = x-1
/// is applied only at the register boundary (basis index = label - 1).
/// The amplitude layout is row-major with the first register most
/// significant.
class Statevector {
public:
    Statevector(std::vector<RegisterSpec> regs, Vector amplitudes);

    /// |0,0,...,0> on the given layout (all labels 1).
    static Statevector zero(std::vector<RegisterSpec> regs);
    /// Basis state with specified 1-based labels, one per register.
    static Statevector basis(std::vector<RegisterSpec> regs, const std::vector<std::int64_t>& labels);
    /// Uniform superposition |S> over 1-based labels of a single register.
    static Statevector uniform_over(RegisterSpec reg, const std::vector<std::int64_t>& labels);

    const std::vector<RegisterSpec>& registers() const { return regs_; }
    const Vector& amplitudes() const { return amp_; }
    Vector& amplitudes() { return amp_; }
    std::int64_t dim() const { return amp_.size(); }

    int axis(const std::string& name) const;  // throws if absent
    std::int64_t axis_dim(int axis) const { return regs_[static_cast<std::size_t>(axis)].dim; }
    std::int64_t stride(int axis) const;

    double norm() const { return amp_.norm(); }
    void check_normalized(double tol = 1e-10) const;

    /// Reinterpret a single register as several registers whose dims multiply
    /// to the original dimension. No data movement (big-endian split).
    Statevector split_register(const std::string& name, const std::vector<RegisterSpec>& parts) const;

    /// Marginal probability distribution of a register (index = label - 1).
    std::vector<double> marginal(const std::string& reg) const;

private:
    std::vector<RegisterSpec> regs_;
    Vector amp_;
};

/// Bijection on {1,...,M} stored as a forward table; inverse built on demand.
/// No operation exposes inverse access through the oracle surface.
class Permutation {
public:
    explicit Permutation(std::vector<std::int64_t> forward);  // validates bijection
    static Permutation identity(std::int64_t m);

    std::int64_t size() const { return static_cast<std::int64_t>(fwd_.size()); }
    std::int64_t apply(std::int64_t x) const;    // 1-based
    std::int64_t inverse(std::int64_t y) const;  // 1-based, materializes table once
    const std::vector<std::int64_t>& forward_table() const { return fwd_; }

    bool operator==(const Permutation& other) const { return fwd_ == other.fwd_; }
    /// Labels where this and other disagree.
    std::vector<std::int64_t> disagreement(const Permutation& other) const;

    Permutation(const Permutation& other);
    Permutation& operator=(const Permutation& other);
    Permutation(Permutation&&) noexcept = default;
    Permutation& operator=(Permutation&&) noexcept = default;

private:
    std::vector<std::int64_t> fwd_;
    mutable std::vector<std::int64_t> inv_;
    mutable std::unique_ptr<std::once_flag> inv_once_;
};

/// Hermitian (real symmetric) sparse operator with exact dyadic entries.
/// Rows are sorted by column with no duplicates and no explicit zeros.
class SparseHamiltonian {
public:
    struct Entry {
        std::int64_t col;
        Dyadic val;
    };

    SparseHamiltonian() : dim_(0) {}
    explicit SparseHamiltonian(std::int64_t dim) : dim_(dim), rows_(static_cast<std::size_t>(dim)) {}

    /// Accumulates duplicate coordinates, drops zeros, validates symmetry.
    static SparseHamiltonian from_triplets(
        std::int64_t dim, const std::vector<std::tuple<std::int64_t, std::int64_t, Dyadic>>& triplets);

    std::int64_t dim() const { return dim_; }
    const std::vector<Entry>& row(std::int64_t i) const { return rows_[static_cast<std::size_t>(i)]; }
    Dyadic entry(std::int64_t i, std::int64_t j) const;

    /// Max row occupancy (the paper's d in "d-sparse").
    int max_row_nnz() const;
    std::int64_t total_nnz() const;
    double max_abs_entry() const;

    /// True when every entry times 2^shift is an integer.
    bool integer_after_shift(int shift) const;

    Eigen::MatrixXd dense() const;  // entries are real
    void matvec(const Vector& in, Vector& out) const;

    friend SparseHamiltonian operator+(const SparseHamiltonian& a, const SparseHamiltonian& b);
    SparseHamiltonian scaled(const Dyadic& c) const;

    /// Deterministic row-compressed triplet text: "row col num log2den" lines.
    std::string export_triplets() const;
    static SparseHamiltonian parse_triplets(const std::string& text);

private:
    std::int64_t dim_;
    std::vector<std::vector<Entry>> rows_;
};

// ---------------------------------------------------------------------------
// Operations

/// Applies a dense unitary on the listed target registers (identity
/// elsewhere). Throws on dimension mismatch or when the operator deviates
/// from unitarity by more than 1e-8 in Frobenius norm.
Statevector apply_dense(const Statevector& state, const Matrix& op, const std::vector<std::string>& targets);

/// Forward in-place permutation oracle: basis label x maps to pi(x).
/// The target register may be wider than the permutation; labels above M
/// must carry zero amplitude.
Statevector apply_inplace_oracle(const Statevector& state, const Permutation& perm, const std::string& target);

/// Standard XOR oracle |x, y> -> |x, y XOR enc(pi(x))> with enc(x) = x - 1.
Statevector apply_xor_oracle(const Statevector& state, const Permutation& perm, const std::string& in_reg,
                             const std::string& out_reg);

/// Born-rule measurement of one register. Returns the 1-based outcome label
/// and the collapsed, renormalized state.
std::pair<std::int64_t, Statevector> measure(const Statevector& state, const std::string& target, Rng& rng);

enum class Which { min, max };

struct EigenOptions {
    std::int64_t dense_cutoff = 4096;
    int max_iterations = 600;
    double residual_tol = 1e-9;
};

struct EigenResult {
    double value;
    Vector vector;
};

/// Extremal eigenpair of a dense Hermitian matrix. Residual <= 1e-8.
EigenResult extremal_eigen(const Matrix& hermitian, Which which);

/// Extremal eigenpair of a SparseHamiltonian: dense path below the cutoff,
/// Lanczos with full reorthogonalization above it.
EigenResult extremal_eigen(const SparseHamiltonian& h, Which which, const EigenOptions& opts = {});

/// e^{iHt} as a dense unitary (dense-cutoff guarded).
Matrix unitary_exponential(const SparseHamiltonian& h, double t, std::int64_t dense_cutoff = 4096);

/// n-fold Hadamard tensor as a dense 2^n x 2^n matrix.
Matrix hadamard_tensor(int n);

}  // namespace pclab::qsim
