#include "pclab/qsim.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <sstream>

namespace pclab::qsim {

namespace {

std::int64_t product_dim(const std::vector<RegisterSpec>& regs) {
    std::int64_t p = 1;
    for (const auto& r : regs) {
        if (r.dim <= 0) throw std::invalid_argument("register dimension must be positive: " + r.name);
        p *= r.dim;
    }
    return p;
}

}  // namespace

// --------------------------------------------------------------------------
// Statevector

Statevector::Statevector(std::vector<RegisterSpec> regs, Vector amplitudes)
    : regs_(std::move(regs)), amp_(std::move(amplitudes)) {
    if (amp_.size() != product_dim(regs_))
        throw std::invalid_argument("amplitude length does not match register dimensions");
}

Statevector Statevector::zero(std::vector<RegisterSpec> regs) {
    Vector amp = Vector::Zero(product_dim(regs));
    amp(0) = 1.0;
    return Statevector(std::move(regs), std::move(amp));
}

Statevector Statevector::basis(std::vector<RegisterSpec> regs, const std::vector<std::int64_t>& labels) {
    if (labels.size() != regs.size()) throw std::invalid_argument("basis: one label per register required");
    std::int64_t idx = 0;
    for (std::size_t i = 0; i < regs.size(); ++i) {
        if (labels[i] < 1 || labels[i] > regs[i].dim)
            throw std::invalid_argument("basis: label out of range for register " + regs[i].name);
        idx = idx * regs[i].dim + (labels[i] - 1);
    }
    Vector amp = Vector::Zero(product_dim(regs));
    amp(idx) = 1.0;
    return Statevector(std::move(regs), std::move(amp));
}

Statevector Statevector::uniform_over(RegisterSpec reg, const std::vector<std::int64_t>& labels) {
    if (labels.empty()) throw std::invalid_argument("uniform_over: empty label set");
    Vector amp = Vector::Zero(reg.dim);
    const double a = 1.0 / std::sqrt(static_cast<double>(labels.size()));
    for (auto x : labels) {
        if (x < 1 || x > reg.dim) throw std::invalid_argument("uniform_over: label out of range");
        if (amp(x - 1) != 0.0) throw std::invalid_argument("uniform_over: duplicate label");
        amp(x - 1) = a;
    }
    return Statevector({std::move(reg)}, std::move(amp));
}

int Statevector::axis(const std::string& name) const {
    for (std::size_t i = 0; i < regs_.size(); ++i)
        if (regs_[i].name == name) return static_cast<int>(i);
    throw std::invalid_argument("no register named " + name);
}

std::int64_t Statevector::stride(int ax) const {
    std::int64_t s = 1;
    for (std::size_t i = static_cast<std::size_t>(ax) + 1; i < regs_.size(); ++i) s *= regs_[i].dim;
    return s;
}

void Statevector::check_normalized(double tol) const {
    if (std::abs(amp_.squaredNorm() - 1.0) > tol)
        throw std::runtime_error("statevector is not normalized");
}

Statevector Statevector::split_register(const std::string& name, const std::vector<RegisterSpec>& parts) const {
    const int ax = axis(name);
    if (product_dim(parts) != regs_[static_cast<std::size_t>(ax)].dim)
        throw std::invalid_argument("split_register: part dims do not multiply to register dim");
    std::vector<RegisterSpec> out;
    for (std::size_t i = 0; i < regs_.size(); ++i) {
        if (static_cast<int>(i) == ax)
            out.insert(out.end(), parts.begin(), parts.end());
        else
            out.push_back(regs_[i]);
    }
    return Statevector(std::move(out), amp_);
}

std::vector<double> Statevector::marginal(const std::string& reg) const {
    const int ax = axis(reg);
    const std::int64_t d = axis_dim(ax);
    const std::int64_t str = stride(ax);
    const std::int64_t block = d * str;
    std::vector<double> p(static_cast<std::size_t>(d), 0.0);
    for (std::int64_t base = 0; base < amp_.size(); base += block)
        for (std::int64_t x = 0; x < d; ++x)
            for (std::int64_t lo = 0; lo < str; ++lo)
                p[static_cast<std::size_t>(x)] += std::norm(amp_(base + x * str + lo));
    return p;
}

// --------------------------------------------------------------------------
// Permutation

Permutation::Permutation(std::vector<std::int64_t> forward)
    : fwd_(std::move(forward)), inv_once_(std::make_unique<std::once_flag>()) {
    const std::int64_t m = static_cast<std::int64_t>(fwd_.size());
    if (m == 0) throw std::invalid_argument("Permutation: empty table");
    std::vector<bool> seen(static_cast<std::size_t>(m), false);
    for (auto v : fwd_) {
        if (v < 1 || v > m) throw std::invalid_argument("Permutation: image out of range");
        if (seen[static_cast<std::size_t>(v - 1)]) throw std::invalid_argument("Permutation: repeated image");
        seen[static_cast<std::size_t>(v - 1)] = true;
    }
}

Permutation Permutation::identity(std::int64_t m) {
    std::vector<std::int64_t> f(static_cast<std::size_t>(m));
    for (std::int64_t i = 0; i < m; ++i) f[static_cast<std::size_t>(i)] = i + 1;
    return Permutation(std::move(f));
}

Permutation::Permutation(const Permutation& other)
    : fwd_(other.fwd_), inv_once_(std::make_unique<std::once_flag>()) {}

Permutation& Permutation::operator=(const Permutation& other) {
    if (this != &other) {
        fwd_ = other.fwd_;
        inv_.clear();
        inv_once_ = std::make_unique<std::once_flag>();
    }
    return *this;
}

std::int64_t Permutation::apply(std::int64_t x) const {
    if (x < 1 || x > size()) throw std::invalid_argument("Permutation::apply: label out of range");
    return fwd_[static_cast<std::size_t>(x - 1)];
}

std::int64_t Permutation::inverse(std::int64_t y) const {
    if (y < 1 || y > size()) throw std::invalid_argument("Permutation::inverse: label out of range");
    std::call_once(*inv_once_, [this] {
        inv_.resize(fwd_.size());
        for (std::size_t x = 0; x < fwd_.size(); ++x)
            inv_[static_cast<std::size_t>(fwd_[x] - 1)] = static_cast<std::int64_t>(x) + 1;
    });
    return inv_[static_cast<std::size_t>(y - 1)];
}

std::vector<std::int64_t> Permutation::disagreement(const Permutation& other) const {
    if (size() != other.size()) throw std::invalid_argument("disagreement: size mismatch");
    std::vector<std::int64_t> out;
    for (std::int64_t x = 1; x <= size(); ++x)
        if (fwd_[static_cast<std::size_t>(x - 1)] != other.fwd_[static_cast<std::size_t>(x - 1)]) out.push_back(x);
    return out;
}

// --------------------------------------------------------------------------
// SparseHamiltonian

SparseHamiltonian SparseHamiltonian::from_triplets(
    std::int64_t dim, const std::vector<std::tuple<std::int64_t, std::int64_t, Dyadic>>& triplets) {
    SparseHamiltonian h(dim);
    std::map<std::pair<std::int64_t, std::int64_t>, Dyadic> acc;
    for (const auto& [i, j, v] : triplets) {
        if (i < 0 || i >= dim || j < 0 || j >= dim)
            throw std::invalid_argument("SparseHamiltonian: index out of range");
        auto key = std::make_pair(i, j);
        auto it = acc.find(key);
        if (it == acc.end())
            acc.emplace(key, v);
        else
            it->second = it->second + v;
    }
    for (const auto& [key, v] : acc) {
        if (v.is_zero()) continue;
        h.rows_[static_cast<std::size_t>(key.first)].push_back({key.second, v});
    }
    // rows come out of the map column-sorted already; validate symmetry
    for (std::int64_t i = 0; i < dim; ++i)
        for (const auto& e : h.rows_[static_cast<std::size_t>(i)])
            if (h.entry(e.col, i) != e.val)
                throw std::invalid_argument("SparseHamiltonian: matrix is not symmetric");
    return h;
}

Dyadic SparseHamiltonian::entry(std::int64_t i, std::int64_t j) const {
    const auto& r = rows_[static_cast<std::size_t>(i)];
    auto it = std::lower_bound(r.begin(), r.end(), j,
                               [](const Entry& e, std::int64_t col) { return e.col < col; });
    if (it != r.end() && it->col == j) return it->val;
    return Dyadic();
}

int SparseHamiltonian::max_row_nnz() const {
    std::size_t m = 0;
    for (const auto& r : rows_) m = std::max(m, r.size());
    return static_cast<int>(m);
}

std::int64_t SparseHamiltonian::total_nnz() const {
    std::int64_t t = 0;
    for (const auto& r : rows_) t += static_cast<std::int64_t>(r.size());
    return t;
}

double SparseHamiltonian::max_abs_entry() const {
    double m = 0.0;
    for (const auto& r : rows_)
        for (const auto& e : r) m = std::max(m, std::abs(e.val.value()));
    return m;
}

bool SparseHamiltonian::integer_after_shift(int shift) const {
    for (const auto& r : rows_)
        for (const auto& e : r)
            if (!e.val.integer_after_shift(shift)) return false;
    return true;
}

Eigen::MatrixXd SparseHamiltonian::dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim_, dim_);
    for (std::int64_t i = 0; i < dim_; ++i)
        for (const auto& e : rows_[static_cast<std::size_t>(i)]) m(i, e.col) = e.val.value();
    return m;
}

void SparseHamiltonian::matvec(const Vector& in, Vector& out) const {
    out.setZero(dim_);
    for (std::int64_t i = 0; i < dim_; ++i) {
        cdouble s = 0.0;
        for (const auto& e : rows_[static_cast<std::size_t>(i)]) s += e.val.value() * in(e.col);
        out(i) = s;
    }
}

SparseHamiltonian operator+(const SparseHamiltonian& a, const SparseHamiltonian& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("SparseHamiltonian add: dimension mismatch");
    std::vector<std::tuple<std::int64_t, std::int64_t, Dyadic>> tr;
    for (std::int64_t i = 0; i < a.dim(); ++i) {
        for (const auto& e : a.row(i)) tr.emplace_back(i, e.col, e.val);
        for (const auto& e : b.row(i)) tr.emplace_back(i, e.col, e.val);
    }
    return SparseHamiltonian::from_triplets(a.dim(), tr);
}

SparseHamiltonian SparseHamiltonian::scaled(const Dyadic& c) const {
    std::vector<std::tuple<std::int64_t, std::int64_t, Dyadic>> tr;
    for (std::int64_t i = 0; i < dim_; ++i)
        for (const auto& e : rows_[static_cast<std::size_t>(i)]) tr.emplace_back(i, e.col, e.val * c);
    return from_triplets(dim_, tr);
}

std::string SparseHamiltonian::export_triplets() const {
    std::ostringstream os;
    os << "pclab-ham v1 dim=" << dim_ << "\n";
    for (std::int64_t i = 0; i < dim_; ++i)
        for (const auto& e : rows_[static_cast<std::size_t>(i)])
            os << i << " " << e.col << " " << e.val.num << " " << e.val.log2_den << "\n";
    return os.str();
}

SparseHamiltonian SparseHamiltonian::parse_triplets(const std::string& text) {
    std::istringstream is(text);
    std::string tag, ver, dimfield;
    is >> tag >> ver >> dimfield;
    if (tag != "pclab-ham" || ver != "v1" || dimfield.rfind("dim=", 0) != 0)
        throw std::invalid_argument("parse_triplets: bad header");
    const std::int64_t dim = std::stoll(dimfield.substr(4));
    std::vector<std::tuple<std::int64_t, std::int64_t, Dyadic>> tr;
    std::int64_t i, j, num;
    int k;
    while (is >> i >> j >> num >> k) tr.emplace_back(i, j, Dyadic(num, k));
    return from_triplets(dim, tr);
}

// --------------------------------------------------------------------------
// Operations

Statevector apply_dense(const Statevector& state, const Matrix& op, const std::vector<std::string>& targets) {
    if (targets.empty()) throw std::invalid_argument("apply_dense: no target registers");
    std::vector<int> axes;
    std::int64_t target_dim = 1;
    for (const auto& t : targets) {
        axes.push_back(state.axis(t));
        target_dim *= state.axis_dim(axes.back());
    }
    if (op.rows() != op.cols() || op.rows() != target_dim)
        throw std::invalid_argument("apply_dense: operator dimension mismatch");
    const double unit_dev = (op.adjoint() * op - Matrix::Identity(target_dim, target_dim)).norm();
    if (unit_dev > 1e-8) throw std::invalid_argument("apply_dense: operator is not unitary");

    // Enumerate the joint target index by its per-axis digits; everything
    // else is carried through block-wise via strides.
    std::vector<std::int64_t> strides, dims;
    for (int ax : axes) {
        strides.push_back(state.stride(ax));
        dims.push_back(state.axis_dim(ax));
    }
    const std::int64_t total = state.dim();
    std::vector<std::int64_t> offsets(static_cast<std::size_t>(target_dim));
    for (std::int64_t k = 0; k < target_dim; ++k) {
        std::int64_t rem = k, off = 0;
        for (std::size_t a = dims.size(); a-- > 0;) {
            off += (rem % dims[a]) * strides[a];
            rem /= dims[a];
        }
        offsets[static_cast<std::size_t>(k)] = off;
    }
    // Walk the complement: visit every index whose target digits are all 0.
    Vector out = state.amplitudes();
    std::vector<bool> is_target_axis(state.registers().size(), false);
    for (int ax : axes) is_target_axis[static_cast<std::size_t>(ax)] = true;
    Vector gathered(target_dim), transformed(target_dim);
    std::vector<std::int64_t> digits(state.registers().size(), 0);
    for (std::int64_t idx = 0; idx < total;) {
        // idx currently has zero digits on the target axes
        for (std::int64_t k = 0; k < target_dim; ++k) gathered(k) = state.amplitudes()(idx + offsets[static_cast<std::size_t>(k)]);
        transformed.noalias() = op * gathered;
        for (std::int64_t k = 0; k < target_dim; ++k) out(idx + offsets[static_cast<std::size_t>(k)]) = transformed(k);
        // advance to the next complement index (mixed-radix increment that
        // skips target axes)
        std::size_t a = state.registers().size();
        bool advanced = false;
        while (a-- > 0) {
            if (is_target_axis[a]) continue;
            const std::int64_t d = state.registers()[a].dim;
            const std::int64_t s = state.stride(static_cast<int>(a));
            if (digits[a] + 1 < d) {
                ++digits[a];
                idx += s;
                advanced = true;
                break;
            }
            idx -= digits[a] * s;
            digits[a] = 0;
        }
        if (!advanced) break;
    }
    return Statevector(state.registers(), std::move(out));
}

Statevector apply_inplace_oracle(const Statevector& state, const Permutation& perm, const std::string& target) {
    const int ax = state.axis(target);
    const std::int64_t d = state.axis_dim(ax);
    const std::int64_t m = perm.size();
    if (d < m) throw std::invalid_argument("apply_inplace_oracle: register smaller than permutation domain");
    const std::int64_t str = state.stride(ax);
    const std::int64_t block = d * str;
    Vector out = Vector::Zero(state.dim());
    for (std::int64_t base = 0; base < state.dim(); base += block) {
        for (std::int64_t x = 0; x < d; ++x) {
            const std::int64_t y = x < m ? perm.apply(x + 1) - 1 : x;
            for (std::int64_t lo = 0; lo < str; ++lo) {
                const cdouble a = state.amplitudes()(base + x * str + lo);
                if (x >= m && a != 0.0)
                    throw std::invalid_argument("apply_inplace_oracle: nonzero amplitude beyond permutation domain");
                out(base + y * str + lo) = a;
            }
        }
    }
    return Statevector(state.registers(), std::move(out));
}

Statevector apply_xor_oracle(const Statevector& state, const Permutation& perm, const std::string& in_reg,
                             const std::string& out_reg) {
    const int ax_in = state.axis(in_reg);
    const int ax_out = state.axis(out_reg);
    const std::int64_t din = state.axis_dim(ax_in);
    const std::int64_t dout = state.axis_dim(ax_out);
    const std::int64_t m = perm.size();
    if (din < m) throw std::invalid_argument("apply_xor_oracle: input register smaller than domain");
    if ((dout & (dout - 1)) != 0) throw std::invalid_argument("apply_xor_oracle: output register dim not a power of two");
    if (dout < m) throw std::invalid_argument("apply_xor_oracle: output register cannot hold enc(M)");

    const std::int64_t sin = state.stride(ax_in);
    const std::int64_t sout = state.stride(ax_out);
    Vector out = Vector::Zero(state.dim());
    // Walk all indices once; decompose into (x, y, rest) via the two strides.
    for (std::int64_t idx = 0; idx < state.dim(); ++idx) {
        const cdouble a = state.amplitudes()(idx);
        if (a == 0.0) continue;
        const std::int64_t x = (idx / sin) % din;
        if (x >= m) throw std::invalid_argument("apply_xor_oracle: nonzero amplitude beyond permutation domain");
        const std::int64_t y = (idx / sout) % dout;
        const std::int64_t y2 = y ^ (perm.apply(x + 1) - 1);
        out(idx + (y2 - y) * sout) = a;
    }
    return Statevector(state.registers(), std::move(out));
}

std::pair<std::int64_t, Statevector> measure(const Statevector& state, const std::string& target, Rng& rng) {
    state.check_normalized();
    const auto p = state.marginal(target);
    const double u = rng.uniform();
    double cum = 0.0;
    std::int64_t outcome = static_cast<std::int64_t>(p.size());  // fallback to last label
    for (std::size_t x = 0; x < p.size(); ++x) {
        cum += p[x];
        if (u < cum) {
            outcome = static_cast<std::int64_t>(x) + 1;
            break;
        }
    }
    const double mass = p[static_cast<std::size_t>(outcome - 1)];
    if (mass <= 0.0) throw std::runtime_error("measure: sampled outcome with zero marginal mass");

    const int ax = state.axis(target);
    const std::int64_t d = state.axis_dim(ax);
    const std::int64_t str = state.stride(ax);
    const std::int64_t block = d * str;
    Vector out = Vector::Zero(state.dim());
    const double scale = 1.0 / std::sqrt(mass);
    for (std::int64_t base = 0; base < state.dim(); base += block)
        for (std::int64_t lo = 0; lo < str; ++lo) {
            const std::int64_t i = base + (outcome - 1) * str + lo;
            out(i) = state.amplitudes()(i) * scale;
        }
    return {outcome, Statevector(state.registers(), std::move(out))};
}

// --------------------------------------------------------------------------
// Eigenanalysis

namespace {

void check_residual(const char* who, double r, double tol = 1e-8) {
    if (!(r <= tol)) throw std::runtime_error(std::string(who) + ": eigen residual " + std::to_string(r));
}

EigenResult lanczos_extremal(const SparseHamiltonian& h, Which which, const EigenOptions& opts) {
    const std::int64_t n = h.dim();
    Rng rng(0x1acc05u);  // fixed internal seed; the solve is deterministic
    Vector v = Vector::Zero(n);
    for (std::int64_t i = 0; i < n; ++i) v(i) = rng.normal_complex();
    v.normalize();

    std::vector<Vector> basis;
    std::vector<double> alpha, beta;
    Vector w(n);
    for (int it = 0; it < opts.max_iterations; ++it) {
        basis.push_back(v);
        h.matvec(v, w);
        double a = std::real(v.dot(w));
        alpha.push_back(a);
        w -= a * v;
        if (!beta.empty()) w -= beta.back() * basis[basis.size() - 2];
        // full reorthogonalization keeps Ritz pairs clean at these sizes
        for (const auto& b : basis) w -= b.dot(w) * b;

        const std::size_t k = alpha.size();
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
        for (std::size_t i = 0; i < k; ++i) {
            t(i, i) = alpha[i];
            if (i + 1 < k) {
                t(i, i + 1) = beta[i];
                t(i + 1, i) = beta[i];
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        const std::int64_t pick = which == Which::min ? 0 : static_cast<std::int64_t>(k) - 1;
        const double theta = es.eigenvalues()(pick);
        Vector ritz = Vector::Zero(n);
        for (std::size_t i = 0; i < k; ++i) ritz += es.eigenvectors()(static_cast<std::int64_t>(i), pick) * basis[i];
        ritz.normalize();
        Vector hv(n);
        h.matvec(ritz, hv);
        const double resid = (hv - theta * ritz).norm();
        if (resid <= opts.residual_tol) return {theta, ritz};

        const double bnorm = w.norm();
        if (bnorm < 1e-14) {
            // invariant subspace exhausted; the Ritz pair is exact
            check_residual("lanczos", resid);
            return {theta, ritz};
        }
        beta.push_back(bnorm);
        v = w / bnorm;
    }
    throw std::runtime_error("extremal_eigen: Lanczos did not converge within the iteration budget");
}

}  // namespace

EigenResult extremal_eigen(const Matrix& hermitian, Which which) {
    if (hermitian.rows() != hermitian.cols()) throw std::invalid_argument("extremal_eigen: non-square matrix");
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian);
    if (es.info() != Eigen::Success) throw std::runtime_error("extremal_eigen: dense solver failed");
    const std::int64_t idx = which == Which::min ? 0 : hermitian.rows() - 1;
    EigenResult r{es.eigenvalues()(idx), es.eigenvectors().col(idx)};
    check_residual("extremal_eigen(dense)", (hermitian * r.vector - r.value * r.vector).norm());
    return r;
}

EigenResult extremal_eigen(const SparseHamiltonian& h, Which which, const EigenOptions& opts) {
    if (h.dim() <= opts.dense_cutoff) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.dense());
        if (es.info() != Eigen::Success) throw std::runtime_error("extremal_eigen: dense solver failed");
        const std::int64_t idx = which == Which::min ? 0 : h.dim() - 1;
        EigenResult r{es.eigenvalues()(idx), es.eigenvectors().col(idx).cast<cdouble>()};
        Vector hv(h.dim());
        h.matvec(r.vector, hv);
        check_residual("extremal_eigen(sparse/dense path)", (hv - r.value * r.vector).norm());
        return r;
    }
    return lanczos_extremal(h, which, opts);
}

Matrix unitary_exponential(const SparseHamiltonian& h, double t, std::int64_t dense_cutoff) {
    if (h.dim() > dense_cutoff) throw std::invalid_argument("unitary_exponential: dimension exceeds dense cutoff");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.dense());
    if (es.info() != Eigen::Success) throw std::runtime_error("unitary_exponential: eigensolver failed");
    const auto& vals = es.eigenvalues();
    const Matrix vecs = es.eigenvectors().cast<cdouble>();
    Vector phases(h.dim());
    for (std::int64_t i = 0; i < h.dim(); ++i)
        phases(i) = std::exp(cdouble(0.0, vals(i) * t));
    return vecs * phases.asDiagonal() * vecs.adjoint();
}

Matrix hadamard_tensor(int n) {
    std::int64_t d = std::int64_t{1} << n;
    Matrix m(d, d);
    const double s = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::int64_t i = 0; i < d; ++i)
        for (std::int64_t j = 0; j < d; ++j)
            m(i, j) = (std::popcount(static_cast<std::uint64_t>(i & j)) % 2 == 0 ? s : -s);
    return m;
}

}  // namespace pclab::qsim
