#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "msle/error.hpp"

namespace msle {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::Index;

// ---------------------------------------------------------------------------
// Soft-thresholding, the proximal map of the l1 norm.
// ---------------------------------------------------------------------------

/// S_tau(x) = sign(x) * max(|x| - tau, 0). Requires tau >= 0.
inline double soft_threshold(double x, double tau) {
    if (tau < 0) throw_config("ConfigInvalid", "soft_threshold requires tau >= 0");
    double m = std::abs(x) - tau;
    return m > 0 ? (x > 0 ? m : -m) : 0.0;
}

/// Elementwise extension to any dense Eigen expression.
template <class Derived>
typename Derived::PlainObject soft_threshold(const Eigen::MatrixBase<Derived>& X, double tau) {
    if (tau < 0) throw_config("ConfigInvalid", "soft_threshold requires tau >= 0");
    return X.unaryExpr([tau](double v) {
        double m = std::abs(v) - tau;
        return m > 0 ? (v > 0 ? m : -m) : 0.0;
    });
}

// ---------------------------------------------------------------------------
// SymMatrix: validated dense symmetric matrix.
// ---------------------------------------------------------------------------

class SymMatrix {
public:
    explicit SymMatrix(MatrixXd entries) : m_(std::move(entries)) {
        if (m_.rows() != m_.cols())
            throw_numeric("ShapeMismatch", "symmetric matrix must be square");
        if (!m_.allFinite())
            throw_numeric("NonFinite", "symmetric matrix contains NaN/Inf");
        const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
        if (asym > 1e-12)
            throw_numeric("NotSymmetric",
                          "asymmetry " + std::to_string(asym) + " exceeds 1e-12");
        m_ = ((m_ + m_.transpose()) * 0.5).eval();
    }

    Index order() const { return m_.rows(); }
    const MatrixXd& mat() const { return m_; }

private:
    MatrixXd m_;
};

enum class Which { Smallest, Largest };

/// Eigenpairs of a symmetric (or symmetric-definite generalized) problem.
/// Eigenvalues ascending; eigenvectors column-orthonormal (B-orthonormal for
/// generalized problems); residual_bound bounds ||A v - lambda (B) v||_2 over
/// all returned pairs.
struct EigenSystem {
    VectorXd eigenvalues;
    MatrixXd eigenvectors;
    double residual_bound = 0.0;
};

namespace detail {

/// Deterministic sign convention: the largest-magnitude entry of each column
/// is made positive; ties broken by lowest index.
inline void fix_signs(MatrixXd& V) {
    for (Index j = 0; j < V.cols(); ++j) {
        Index best = 0;
        double mag = std::abs(V(0, j));
        for (Index i = 1; i < V.rows(); ++i) {
            double a = std::abs(V(i, j));
            if (a > mag) {
                mag = a;
                best = i;
            }
        }
        if (V(best, j) < 0) V.col(j) = -V.col(j);
    }
}

using MatVec = std::function<void(const VectorXd&, VectorXd&)>;

struct LanczosOptions {
    int max_iter = 5000;       // hard cap on the Krylov dimension
    double tol = 1e-10;        // relative Ritz residual target
    std::uint32_t seed = 0x9e3779b9u;
};

/// Lanczos with full reorthogonalization; finds the k algebraically largest
/// eigenpairs of the symmetric operator `av`. The Krylov basis is expanded in
/// chunks until the wanted Ritz residuals |beta_m y_mi| fall below
/// tol * scale, where scale estimates ||A||.
inline EigenSystem lanczos_largest(const MatVec& av, Index n, Index k,
                                   const LanczosOptions& opt) {
    if (k < 1 || k > n) throw_config("ConfigInvalid", "lanczos: need 1 <= k <= n");
    const Index mmax = std::min<Index>(n, opt.max_iter);

    std::mt19937 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto fresh_vector = [&](VectorXd& v) {
        for (Index i = 0; i < n; ++i) v[i] = gauss(rng);
    };

    MatrixXd Q(n, std::min<Index>(mmax + 1, n));
    std::vector<double> alpha, beta; // T diag / subdiag
    VectorXd q(n), w(n);

    fresh_vector(q);
    q.normalize();
    Q.col(0) = q;

    Index m = 0;
    Index target = std::min<Index>(mmax, std::max<Index>(2 * k + 30, 80));
    double scale = 1.0;

    EigenSystem out;
    while (true) {
        // expand the Krylov basis up to `target`
        while (m < target) {
            av(Q.col(m), w);
            if (!w.allFinite()) throw_numeric("NonFinite", "operator produced NaN/Inf");
            double a = Q.col(m).dot(w);
            alpha.push_back(a);
            w -= a * Q.col(m);
            if (m > 0) w -= beta[m - 1] * Q.col(m - 1);
            // two classical Gram-Schmidt passes against the whole basis
            for (int pass = 0; pass < 2; ++pass) {
                VectorXd proj = Q.leftCols(m + 1).transpose() * w;
                w.noalias() -= Q.leftCols(m + 1) * proj;
            }
            double b = w.norm();
            scale = std::max(scale, std::abs(a) + b);
            if (m + 1 >= Q.cols()) { // basis exhausted (m == n - 1)
                beta.push_back(0.0);
                ++m;
                break;
            }
            if (b < 1e-13 * scale) {
                // invariant subspace hit: restart with a fresh orthogonal direction
                beta.push_back(0.0);
                fresh_vector(w);
                for (int pass = 0; pass < 2; ++pass) {
                    VectorXd proj = Q.leftCols(m + 1).transpose() * w;
                    w.noalias() -= Q.leftCols(m + 1) * proj;
                }
                double wn = w.norm();
                if (wn < 1e-300) throw_numeric("NoConvergence", "lanczos basis degenerate");
                w /= wn;
            } else {
                beta.push_back(b);
                w /= b;
            }
            Q.col(m + 1) = w;
            ++m;
        }

        // Ritz extraction from the tridiagonal T_m
        Eigen::Map<const VectorXd> dia(alpha.data(), m);
        VectorXd sub(m > 1 ? m - 1 : 0);
        for (Index i = 0; i + 1 < m; ++i) sub[i] = beta[i];
        Eigen::SelfAdjointEigenSolver<MatrixXd> tri;
        tri.computeFromTridiagonal(dia, sub);
        if (tri.info() != Eigen::Success)
            throw_numeric("NoConvergence", "tridiagonal QL failed");

        // wanted pairs: the k largest Ritz values (tail of ascending order)
        const double last_beta = (m >= 1 && static_cast<size_t>(m) <= beta.size())
                                     ? beta[m - 1] : 0.0;
        bool converged = m >= std::min<Index>(n, k);
        if (m < k) converged = false;
        if (converged) {
            for (Index j = m - std::min(k, m); j < m; ++j) {
                double resid = std::abs(last_beta * tri.eigenvectors()(m - 1, j));
                if (resid > opt.tol * scale) { converged = false; break; }
            }
        }
        const bool exhausted = (m >= mmax) || (m >= n);
        if (converged || exhausted) {
            if (!converged && m < k)
                throw_numeric("NoConvergence", "lanczos iteration cap reached");
            Index kk = std::min(k, m);
            out.eigenvalues = tri.eigenvalues().tail(kk);
            out.eigenvectors.noalias() = Q.leftCols(m) * tri.eigenvectors().rightCols(kk);
            // re-normalize; full reorthogonalization keeps this near 1 already
            for (Index j = 0; j < kk; ++j) out.eigenvectors.col(j).normalize();
            if (!converged && m >= mmax && m < n)
                throw_numeric("NoConvergence", "lanczos iteration cap reached");
            return out;
        }
        target = std::min<Index>(mmax, std::max<Index>(target + 20, (target * 8) / 5));
    }
}

/// Largest residual ||A v - lambda v|| over the returned pairs.
inline double max_residual(const MatVec& av, const EigenSystem& es) {
    double worst = 0.0;
    VectorXd tmp(es.eigenvectors.rows());
    for (Index j = 0; j < es.eigenvectors.cols(); ++j) {
        av(es.eigenvectors.col(j), tmp);
        worst = std::max(worst, (tmp - es.eigenvalues[j] * es.eigenvectors.col(j)).norm());
    }
    return worst;
}

constexpr Index kDenseEigThreshold = 2048;

/// Smallest/largest k eigenpairs of a symmetric operator. The smallest end is
/// reached by running on sigma*I - A with the Gershgorin shift
/// sigma = max_i sum_j |A_ij| (supplied by the caller as `shift`).
inline EigenSystem eig_operator(const MatVec& av, Index n, Index k, Which which,
                                double shift, const LanczosOptions& opt = {}) {
    EigenSystem es;
    if (which == Which::Smallest) {
        MatVec shifted = [&av, shift](const VectorXd& x, VectorXd& y) {
            av(x, y);
            y = shift * x - y;
        };
        es = lanczos_largest(shifted, n, k, opt);
        es.eigenvalues = (shift - es.eigenvalues.array()).matrix();
        // shift map reverses order; restore ascending
        es.eigenvalues.reverseInPlace();
        es.eigenvectors = es.eigenvectors.rowwise().reverse().eval();
    } else {
        es = lanczos_largest(av, n, k, opt);
    }
    fix_signs(es.eigenvectors);
    es.residual_bound = max_residual(av, es);
    return es;
}

} // namespace detail

// ---------------------------------------------------------------------------
// eig_sym: k eigenpairs from one end of the spectrum of a dense SymMatrix.
// Dense tridiagonalization + implicit QL up to order 2048, Lanczos with full
// reorthogonalization above.
// ---------------------------------------------------------------------------

inline EigenSystem eig_sym(const SymMatrix& A, Index k, Which which = Which::Smallest) {
    const Index n = A.order();
    if (k < 1 || k > n) throw_config("ConfigInvalid", "eig_sym: need 1 <= k <= n");

    EigenSystem out;
    if (n <= detail::kDenseEigThreshold) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(A.mat());
        if (es.info() != Eigen::Success)
            throw_numeric("NoConvergence", "dense QL iteration did not converge");
        if (which == Which::Smallest) {
            out.eigenvalues = es.eigenvalues().head(k);
            out.eigenvectors = es.eigenvectors().leftCols(k);
        } else {
            out.eigenvalues = es.eigenvalues().tail(k);
            out.eigenvectors = es.eigenvectors().rightCols(k);
        }
        detail::fix_signs(out.eigenvectors);
        detail::MatVec av = [&A](const VectorXd& x, VectorXd& y) { y.noalias() = A.mat() * x; };
        out.residual_bound = detail::max_residual(av, out);
    } else {
        detail::MatVec av = [&A](const VectorXd& x, VectorXd& y) { y.noalias() = A.mat() * x; };
        const double shift = A.mat().cwiseAbs().rowwise().sum().maxCoeff();
        out = detail::eig_operator(av, n, k, which, shift);
    }

    const double maxabs = A.mat().cwiseAbs().maxCoeff();
    const double bound = 1e-8 * (1.0 + maxabs * static_cast<double>(n));
    if (out.residual_bound > bound)
        throw_numeric("NoConvergence", "eigen residual " + std::to_string(out.residual_bound) +
                                           " exceeds bound " + std::to_string(bound));
    return out;
}

// ---------------------------------------------------------------------------
// eig_generalized: A v = lambda B v with B diagonal positive, solved through
// the substitution At = B^{-1/2} A B^{-1/2}, v = B^{-1/2} vt. Returns the
// smallest k eigenvalues with B-orthonormal eigenvectors.
// ---------------------------------------------------------------------------

inline EigenSystem eig_generalized(const SymMatrix& A, const VectorXd& B, Index k) {
    const Index n = A.order();
    if (B.size() != n) throw_numeric("ShapeMismatch", "mass diagonal size mismatch");
    if ((B.array() <= 0).any())
        throw_numeric("SingularMass", "mass diagonal must be strictly positive");
    if (k < 1 || k > n) throw_config("ConfigInvalid", "eig_generalized: need 1 <= k <= n");

    const VectorXd s = B.array().rsqrt().matrix();
    MatrixXd At = s.asDiagonal() * A.mat() * s.asDiagonal();
    At = ((At + At.transpose()) * 0.5).eval();

    EigenSystem es = eig_sym(SymMatrix(At), k, Which::Smallest);
    es.eigenvectors = (s.asDiagonal() * es.eigenvectors).eval();
    detail::fix_signs(es.eigenvectors);

    double worst = 0.0;
    for (Index j = 0; j < k; ++j) {
        VectorXd r = A.mat() * es.eigenvectors.col(j) -
                     es.eigenvalues[j] * (B.asDiagonal() * es.eigenvectors.col(j));
        worst = std::max(worst, r.norm());
    }
    es.residual_bound = worst;
    return es;
}

/// Operator form of eig_generalized for sparse/implicit A. `shift` must bound
/// the spectrum of B^{-1/2} A B^{-1/2} from above (Gershgorin of the scaled
/// operator works).
inline EigenSystem eig_generalized_op(const detail::MatVec& av, Index n, const VectorXd& B,
                                      Index k, double shift,
                                      const detail::LanczosOptions& opt = {}) {
    if (B.size() != n) throw_numeric("ShapeMismatch", "mass diagonal size mismatch");
    if ((B.array() <= 0).any())
        throw_numeric("SingularMass", "mass diagonal must be strictly positive");
    const VectorXd s = B.array().rsqrt().matrix();
    detail::MatVec scaled = [&av, &s](const VectorXd& x, VectorXd& y) {
        VectorXd xs = s.asDiagonal() * x;
        av(xs, y);
        y = s.asDiagonal() * y;
    };
    EigenSystem es = detail::eig_operator(scaled, n, k, Which::Smallest, shift, opt);
    es.eigenvectors = (s.asDiagonal() * es.eigenvectors).eval();
    detail::fix_signs(es.eigenvectors);
    double worst = 0.0;
    VectorXd tmp(n);
    for (Index j = 0; j < es.eigenvectors.cols(); ++j) {
        av(es.eigenvectors.col(j), tmp);
        worst = std::max(
            worst,
            (tmp - es.eigenvalues[j] * (B.asDiagonal() * es.eigenvectors.col(j))).norm());
    }
    es.residual_bound = worst;
    return es;
}

// ---------------------------------------------------------------------------
// solve_spd: X with A X = B for symmetric positive-definite A, via Cholesky
// with a one-shot ridge jitter of 1e-10 tr(A)/n (retried at 1e-6 scale).
// ---------------------------------------------------------------------------

inline MatrixXd solve_spd(const SymMatrix& A, const MatrixXd& B) {
    if (B.rows() != A.order())
        throw_numeric("ShapeMismatch", "solve_spd: rhs row count mismatch");
    const double base = A.mat().trace() / static_cast<double>(A.order());
    for (double scale : {1e-10, 1e-6}) {
        MatrixXd M = A.mat();
        M.diagonal().array() += scale * base;
        Eigen::LLT<MatrixXd> llt(M);
        if (llt.info() == Eigen::Success) return llt.solve(B);
    }
    throw_numeric("NotPositiveDefinite", "Cholesky failed after ridge jitter");
}

} // namespace msle
