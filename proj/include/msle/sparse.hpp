#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "msle/embedding.hpp"
#include "msle/error.hpp"
#include "msle/graph.hpp"
#include "msle/spectral.hpp"

namespace msle {

// ---------------------------------------------------------------------------
// Accelerated proximal gradient (monotone FISTA with backtracking)
// ---------------------------------------------------------------------------

struct ApgConfig {
    double tol = 1e-6;      // relative objective change
    int max_iter = 500;
    double eta = 2.0;       // backtracking growth factor for beta
    double beta0 = 1.0;     // initial inverse step size
    bool monotone = true;   // reject ascending candidates and restart momentum
};

struct SparseCode {
    MatrixXd Z;
    double alpha = 0.0;
    std::vector<double> objective_trace;  // F at z0, then one entry per iteration
    int iterations = 0;
    bool converged = false;
};

/// Fraction of entries with |z| <= 1e-12.
inline double sparsity_fraction(const MatrixXd& Z) {
    if (Z.size() == 0) return 0.0;
    const auto zeros = (Z.cwiseAbs().array() <= 1e-12).count();
    return static_cast<double>(zeros) / static_cast<double>(Z.size());
}

/// Minimize f(Z) + alpha*||Z||_1 where `prob` provides the smooth part via
/// value(Z) and gradient(Z, G). Monotone variant: a candidate that raises the
/// objective is rejected and Nesterov momentum restarts, so objective_trace
/// never increases.
template <class Problem>
SparseCode apg_solve(const Problem& prob, const MatrixXd& z0, double alpha,
                     const ApgConfig& cfg = {}) {
    if (alpha < 0) throw_config("ConfigInvalid", "l1 weight must be >= 0");
    if (cfg.max_iter < 1 || cfg.tol < 0 || cfg.eta <= 1.0 || cfg.beta0 <= 0)
        throw_config("ConfigInvalid", "bad APG configuration");
    if (!z0.allFinite()) throw_numeric("NonFinite", "z0 contains NaN/Inf");

    const auto penalty = [alpha](const MatrixXd& Z) { return alpha * Z.cwiseAbs().sum(); };

    MatrixXd x = z0;          // current accepted iterate
    MatrixXd x_old = z0;
    MatrixXd y = z0;          // extrapolated point
    MatrixXd u(z0.rows(), z0.cols());
    MatrixXd grad(z0.rows(), z0.cols());
    double t = 1.0;
    double beta = cfg.beta0;
    double F_x = prob.value(x) + penalty(x);
    if (!std::isfinite(F_x)) throw_numeric("NonFinite", "objective not finite at z0");

    SparseCode out;
    out.alpha = alpha;
    out.objective_trace.push_back(F_x);

    int grow_streak = 0;
    for (int it = 1; it <= cfg.max_iter; ++it) {
        const double f_y = prob.value(y);
        prob.gradient(y, grad);
        if (!grad.allFinite()) throw_numeric("NonFinite", "gradient not finite");

        // backtracking: find beta with f(u) <= f(y) + <grad, u-y> + beta/2 |u-y|^2
        double f_u = 0.0;
        for (int bt = 0;; ++bt) {
            u = soft_threshold(y - grad / beta, alpha / beta);
            f_u = prob.value(u);
            const MatrixXd d = u - y;
            const double quad = f_y + grad.cwiseProduct(d).sum() + 0.5 * beta * d.squaredNorm();
            if (f_u <= quad + 1e-12 * (1.0 + std::abs(quad))) break;
            if (bt > 300) throw_numeric("NoConvergence", "backtracking failed to find a step");
            beta *= cfg.eta;
        }
        const double F_u = f_u + penalty(u);
        out.iterations = it;

        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        if (cfg.monotone && F_u > F_x) {
            // rejected: keep x, restart momentum from it
            out.objective_trace.push_back(F_x);
            x_old = x;
            y = x;
            t = 1.0;
            continue;
        }

        if (!cfg.monotone) {
            grow_streak = (F_u > F_x) ? grow_streak + 1 : 0;
            if (grow_streak >= 10)
                throw_numeric("DivergenceDetected",
                              "objective grew for 10 consecutive accepted steps");
        }

        const double drop = F_x - F_u;
        x_old.swap(x);
        x = u;
        y = x + (t / t_next) * (u - x) + ((t - 1.0) / t_next) * (x - x_old);
        t = t_next;
        F_x = F_u;
        out.objective_trace.push_back(F_x);

        if (std::abs(drop) <= cfg.tol * std::max(1.0, std::abs(F_x))) {
            out.converged = true;
            break;
        }
    }

    out.Z = std::move(x);
    return out;
}

// ---------------------------------------------------------------------------
// Column-wise sparse coding against a basis (reconstruction objective)
// ---------------------------------------------------------------------------

/// Per-column weights for the coding objective: empty lambdas means uniform
/// weight 1; otherwise column j gets lambdas[min(j, len-1)].
inline VectorXd coding_column_weights(Index ncols, const VectorXd& lambdas) {
    if (lambdas.size() == 0) return VectorXd::Ones(ncols);
    if ((lambdas.array() < 0).any())
        throw_config("ConfigInvalid", "eigenvalue weights must be nonnegative");
    VectorXd w(ncols);
    for (Index j = 0; j < ncols; ++j) w[j] = lambdas[std::min(j, lambdas.size() - 1)];
    return w;
}

/// sum_j w_j ||x_j - U z_j||^2 + alpha ||Z||_1 computed directly from the
/// definition. The solver works in the Gram domain; this is the reference
/// value shared with tests and metadata.
inline double coding_objective(const MatrixXd& Z, const MatrixXd& X_cols, const MatrixXd& U,
                               const VectorXd& lambdas, double alpha) {
    if (U.rows() != X_cols.rows() || U.cols() != Z.rows() || Z.cols() != X_cols.cols())
        throw_numeric("ShapeMismatch", "coding objective shapes inconsistent");
    const VectorXd w = coding_column_weights(X_cols.cols(), lambdas);
    const MatrixXd R = X_cols - U * Z;
    return w.dot(R.colwise().squaredNorm().transpose()) + alpha * Z.cwiseAbs().sum();
}

/// Smooth part of the coding objective in the Gram domain: the k x k Gram
/// matrix and k x n correlation are precomputed once, so each APG iteration
/// costs O(k^2 n) instead of O(d k n).
class ColumnCodingProblem {
public:
    ColumnCodingProblem(const MatrixXd& U, const MatrixXd& X_cols, VectorXd col_weights)
        : G_(U.transpose() * U),
          C_(U.transpose() * X_cols),
          xsq_(X_cols.colwise().squaredNorm().transpose()),
          w_(std::move(col_weights)) {
        if (U.rows() != X_cols.rows())
            throw_numeric("ShapeMismatch", "basis and data row counts differ");
        if (w_.size() != X_cols.cols())
            throw_numeric("ShapeMismatch", "one weight per data column required");
    }

    double value(const MatrixXd& Z) const {
        const VectorXd per_col = xsq_ - 2.0 * (Z.cwiseProduct(C_)).colwise().sum().transpose() +
                                 (Z.cwiseProduct(G_ * Z)).colwise().sum().transpose();
        return w_.dot(per_col);
    }

    void gradient(const MatrixXd& Z, MatrixXd& out) const {
        out.noalias() = G_ * Z;
        out -= C_;
        out *= 2.0;
        out.array().rowwise() *= w_.transpose().array();
    }

private:
    MatrixXd G_;   // k x k
    MatrixXd C_;   // k x n
    VectorXd xsq_; // squared norms of data columns
    VectorXd w_;   // per-column weights
};

/// Sparse-code the columns of X_cols against basis U: minimize
/// sum_j w_j ||x_j - U z_j||^2 + alpha ||Z||_1 from Z = 0.
inline SparseCode solve_coding(const MatrixXd& U, const MatrixXd& X_cols, double alpha,
                               const VectorXd& lambdas = VectorXd(),
                               const ApgConfig& cfg = {}) {
    ColumnCodingProblem prob(U, X_cols, coding_column_weights(X_cols.cols(), lambdas));
    const MatrixXd Z0 = MatrixXd::Zero(U.cols(), X_cols.cols());
    return apg_solve(prob, Z0, alpha, cfg);
}

// ---------------------------------------------------------------------------
// Sparse spectral embedding: trace(Y^T L Y) + lambda ||Y||_1 with the columns
// renormalized onto the D-orthonormal manifold after each APG round
// ---------------------------------------------------------------------------

class TraceProblem {
public:
    explicit TraceProblem(const GraphMatrix& L) : L_(&L) {}
    double value(const MatrixXd& Y) const { return Y.cwiseProduct(L_->apply(Y)).sum(); }
    void gradient(const MatrixXd& Y, MatrixXd& out) const { out = 2.0 * L_->apply(Y); }

private:
    const GraphMatrix* L_;
};

struct SparseEmbedding {
    MatrixXd Y;                           // n x d_embed, best projected iterate
    std::vector<double> objective_trace;  // objective after each outer round
    int rounds = 0;
    bool converged = false;
};

/// Minimize trace(Y^T L Y) + lambda ||Y||_1 by APG rounds with per-column
/// renormalization y_c <- y_c / sqrt(y_c^T D y_c) (zero columns stay zero).
/// Warm-started at the spectral embedding, and the best projected iterate by
/// objective is returned, so the result never scores worse than the
/// unpenalized eigenvectors.
inline SparseEmbedding sparse_embedding(const GraphLaplacian& lap, Index d_embed,
                                        double lambda_sparse, const ApgConfig& cfg = {},
                                        int max_rounds = 20) {
    if (lambda_sparse < 0) throw_config("ConfigInvalid", "lambda_sparse must be >= 0");
    if (max_rounds < 1) throw_config("ConfigInvalid", "max_rounds must be >= 1");

    const VectorXd& D = lap.eff_degrees;
    const auto renorm = [&D](MatrixXd& Y) {
        for (Index c = 0; c < Y.cols(); ++c) {
            const double s = std::sqrt(Y.col(c).dot(D.asDiagonal() * Y.col(c)));
            if (s > 0) Y.col(c) /= s;
        }
    };
    TraceProblem prob(lap.matrix);
    const auto objective = [&](const MatrixXd& Y) {
        return prob.value(Y) + lambda_sparse * Y.cwiseAbs().sum();
    };

    MatrixXd Y = laplacian_eigenmaps(lap, d_embed, true, Mass::Degree).Y;
    renorm(Y);

    SparseEmbedding out;
    out.Y = Y;
    double best = objective(Y);
    double prev = best;
    out.objective_trace.push_back(best);

    for (int r = 1; r <= max_rounds; ++r) {
        SparseCode sc = apg_solve(prob, Y, lambda_sparse, cfg);
        Y = std::move(sc.Z);
        renorm(Y);
        const double F = objective(Y);
        out.objective_trace.push_back(F);
        out.rounds = r;
        if (F < best) {
            best = F;
            out.Y = Y;
        }
        if (std::abs(prev - F) <= cfg.tol * std::max(1.0, std::abs(prev))) {
            out.converged = true;
            break;
        }
        prev = F;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Multi-view self-representation weight matrix
// ---------------------------------------------------------------------------

struct SparseWeightMatrix {
    MatrixXd W_sel;            // n x n
    VectorXd per_view_alphas;
    double residual = 0.0;     // ||A W - G||_F / ||G||_F against the quadratic objective
    bool used_l1 = false;
    SparseCode code;           // populated only when l1_weight > 0
};

namespace detail {

inline void add_scaled(MatrixXd& A, const GraphMatrix& M, double alpha) {
    if (alpha == 0.0) return;
    if (!M.is_sparse()) {
        A += alpha * M.dense();
        return;
    }
    const SpMat& S = M.sparse();
    for (int k = 0; k < S.outerSize(); ++k)
        for (SpMat::InnerIterator it(S, k); it; ++it)
            A(it.row(), it.col()) += alpha * it.value();
}

} // namespace detail

/// Self-representation across views: minimize
/// sum_i ||X_i - X_i W||_F^2 + sum_i alpha_i tr(W^T L_i W). The objective is
/// quadratic, so the default path solves the stationary system
/// (sum_i X_i^T X_i + sum_i alpha_i L_i) W = sum_i X_i^T X_i directly. A
/// positive l1_weight switches to APG on the same smooth part plus an l1 term.
/// `view_rows[i]` holds view i as an n x d_i sample-major block.
inline SparseWeightMatrix sparse_weight_matrix(const std::vector<MatrixXd>& view_rows,
                                               const std::vector<GraphLaplacian>& laps,
                                               const VectorXd& alphas, double l1_weight = 0.0,
                                               const ApgConfig& cfg = {}) {
    const size_t m = view_rows.size();
    if (m == 0) throw_config("ConfigInvalid", "need at least one view");
    if (laps.size() != m || static_cast<size_t>(alphas.size()) != m)
        throw_numeric("ShapeMismatch", "one Laplacian and one alpha per view required");
    if ((alphas.array() < 0).any()) throw_config("ConfigInvalid", "alphas must be >= 0");
    if (l1_weight < 0) throw_config("ConfigInvalid", "l1_weight must be >= 0");

    const Index n = view_rows[0].rows();
    for (size_t i = 0; i < m; ++i) {
        if (view_rows[i].rows() != n)
            throw_numeric("ShapeMismatch", "views disagree on sample count");
        if (laps[i].order() != n)
            throw_numeric("ShapeMismatch", "Laplacian order != sample count");
    }

    MatrixXd G = MatrixXd::Zero(n, n);
    for (const MatrixXd& V : view_rows) G.noalias() += V * V.transpose();
    MatrixXd A = G;
    for (size_t i = 0; i < m; ++i) detail::add_scaled(A, laps[i].matrix, alphas[i]);

    SparseWeightMatrix out;
    out.per_view_alphas = alphas;

    if (l1_weight == 0.0) {
        out.W_sel = solve_spd(SymMatrix(A), G);
    } else {
        // f(W) = tr(G) - 2 tr(G W) + tr(W^T A W), grad = 2 (A W - G)
        struct Quad {
            const MatrixXd *A, *G;
            double c;
            double value(const MatrixXd& W) const {
                return c - 2.0 * G->cwiseProduct(W).sum() + W.cwiseProduct(*A * W).sum();
            }
            void gradient(const MatrixXd& W, MatrixXd& out) const {
                out.noalias() = *A * W;
                out -= *G;
                out *= 2.0;
            }
        } prob{&A, &G, G.trace()};
        out.code = apg_solve(prob, MatrixXd::Zero(n, n), l1_weight, cfg);
        out.W_sel = out.code.Z;
        out.used_l1 = true;
    }

    const double gnorm = G.norm();
    out.residual = gnorm > 0 ? (A * out.W_sel - G).norm() / gnorm : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Alternating refinement: sparse codes <-> reweighted similarity graph
// ---------------------------------------------------------------------------

struct RefineResult {
    SparseCode code;
    GraphLaplacian lap;
    SimilarityGraph graph;
    std::vector<double> round_objectives;  // accepted rounds only, non-increasing
};

namespace detail {

/// Median pairwise distance between columns of Z over a capped subsample
/// (deterministic). Returns 0 when all sampled codes coincide.
inline double median_code_distance(const MatrixXd& Z) {
    const Index n = Z.cols();
    if (n < 2) return 0.0;
    std::vector<Index> idx(n);
    std::iota(idx.begin(), idx.end(), Index{0});
    const Index cap = 1000;
    if (n > cap) {
        std::mt19937 rng(42);
        for (Index i = 0; i < cap; ++i) {
            std::uniform_int_distribution<Index> pick(i, n - 1);
            std::swap(idx[i], idx[pick(rng)]);
        }
        idx.resize(cap);
    }
    std::vector<double> d;
    d.reserve(idx.size() * (idx.size() - 1) / 2);
    for (size_t a = 0; a < idx.size(); ++a)
        for (size_t b = a + 1; b < idx.size(); ++b)
            d.push_back((Z.col(idx[a]) - Z.col(idx[b])).norm());
    std::sort(d.begin(), d.end());
    return d[(d.size() - 1) / 2];
}

/// W_ij <- W_ij * exp(-|z_i - z_j|^2 / (2 sigma_z^2)), then rescale so the
/// largest weight is 1. No-op when the codes are degenerate (sigma_z = 0).
inline void reweight_by_codes(SimilarityGraph& g, const MatrixXd& Z) {
    const double sigma_z = median_code_distance(Z);
    if (sigma_z <= 0) return;
    const double inv = 1.0 / (2.0 * sigma_z * sigma_z);
    if (g.weights.is_sparse()) {
        SpMat S = g.weights.sparse();
        for (int k = 0; k < S.outerSize(); ++k)
            for (SpMat::InnerIterator it(S, k); it; ++it) {
                const double d2 = (Z.col(it.row()) - Z.col(it.col())).squaredNorm();
                it.valueRef() *= std::exp(-d2 * inv);
            }
        double mx = 0.0;
        for (int k = 0; k < S.outerSize(); ++k)
            for (SpMat::InnerIterator it(S, k); it; ++it) mx = std::max(mx, it.value());
        if (mx > 0) S /= mx;
        g.weights = GraphMatrix(std::move(S));
    } else {
        MatrixXd W = g.weights.dense();
        for (Index i = 0; i < W.rows(); ++i)
            for (Index j = 0; j < W.cols(); ++j) {
                const double d2 = (Z.col(i) - Z.col(j)).squaredNorm();
                W(i, j) *= std::exp(-d2 * inv);
            }
        const double mx = W.maxCoeff();
        if (mx > 0) W /= mx;
        g.weights = GraphMatrix(std::move(W));
    }
}

} // namespace detail

/// Alternate between sparse coding and graph refinement. Each round builds
/// the symmetric-normalized Laplacian of the current graph, embeds, codes the
/// sample columns against the basis U = colnorm(X^T Y), then reweights the
/// similarity by code distances. A round that would raise the coding
/// objective is discarded and iteration stops, so round_objectives is
/// non-increasing. rounds = 1 is a single coding pass on the initial graph.
inline RefineResult alternate_refine(const MatrixXd& X_rows, SimilarityGraph g, Index k,
                                     int rounds, double alpha, const ApgConfig& cfg = {}) {
    if (rounds < 1) throw_config("ConfigInvalid", "rounds must be >= 1");
    if (k < 1) throw_config("ConfigInvalid", "basis size must be >= 1");
    if (X_rows.rows() != g.n) throw_numeric("ShapeMismatch", "graph order != sample count");

    const MatrixXd X_cols = X_rows.transpose();
    RefineResult out;
    for (int r = 0; r < rounds; ++r) {
        GraphLaplacian lap = laplacian(g, LapVariant::Symmetric);
        Embedding emb = laplacian_eigenmaps(lap, k, true, Mass::Identity);
        MatrixXd U = X_cols * emb.Y;
        for (Index c = 0; c < U.cols(); ++c) {
            const double s = U.col(c).norm();
            if (s > 0) U.col(c) /= s;
        }
        SparseCode sc = solve_coding(U, X_cols, alpha, VectorXd(), cfg);
        const double obj = sc.objective_trace.back();
        if (r > 0 && obj > out.round_objectives.back()) break;
        out.code = std::move(sc);
        out.lap = std::move(lap);
        out.graph = g;
        out.round_objectives.push_back(obj);
        if (r + 1 < rounds) detail::reweight_by_codes(g, out.code.Z);
    }
    return out;
}

} // namespace msle
