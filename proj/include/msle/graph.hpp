#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "msle/error.hpp"
#include "msle/parallel.hpp"
#include "msle/spectral.hpp"

namespace msle {

using SpMat = Eigen::SparseMatrix<double>;

// ---------------------------------------------------------------------------
// GraphMatrix: one facade over the dense (n <= dense threshold) and sparse
// (knn mode) storage of symmetric graph matrices.
// ---------------------------------------------------------------------------

class GraphMatrix {
public:
    GraphMatrix() = default;
    explicit GraphMatrix(MatrixXd dense) : dense_(std::move(dense)), sparse_(false) {}
    explicit GraphMatrix(SpMat sp) : sp_(std::move(sp)), sparse_(true) {
        sp_.makeCompressed();
    }

    Index order() const { return sparse_ ? sp_.rows() : dense_.rows(); }
    bool is_sparse() const { return sparse_; }

    const MatrixXd& dense() const {
        if (sparse_) throw_numeric("ShapeMismatch", "matrix stored sparse");
        return dense_;
    }
    const SpMat& sparse() const {
        if (!sparse_) throw_numeric("ShapeMismatch", "matrix stored dense");
        return sp_;
    }

    MatrixXd to_dense() const { return sparse_ ? MatrixXd(sp_) : dense_; }

    void matvec(const VectorXd& x, VectorXd& y) const {
        if (sparse_)
            y.noalias() = sp_ * x;
        else
            y.noalias() = dense_ * x;
    }

    MatrixXd apply(const MatrixXd& X) const {
        if (sparse_) return sp_ * X;
        return dense_ * X;
    }

    VectorXd row_sums() const {
        if (sparse_) return sp_ * VectorXd::Ones(sp_.cols());
        return dense_.rowwise().sum();
    }

    VectorXd abs_row_sums() const {
        if (!sparse_) return dense_.cwiseAbs().rowwise().sum();
        VectorXd r = VectorXd::Zero(sp_.rows());
        for (int k = 0; k < sp_.outerSize(); ++k)
            for (SpMat::InnerIterator it(sp_, k); it; ++it) r[it.row()] += std::abs(it.value());
        return r;
    }

    /// max_i sum_j |M_ij| s_i s_j for positive scalings s (Gershgorin bound of
    /// diag(s) M diag(s)).
    double scaled_gershgorin(const VectorXd& s) const {
        VectorXd r = VectorXd::Zero(order());
        if (sparse_) {
            for (int k = 0; k < sp_.outerSize(); ++k)
                for (SpMat::InnerIterator it(sp_, k); it; ++it)
                    r[it.row()] += std::abs(it.value()) * s[it.row()] * s[it.col()];
        } else {
            for (Index i = 0; i < dense_.rows(); ++i)
                for (Index j = 0; j < dense_.cols(); ++j)
                    r[i] += std::abs(dense_(i, j)) * s[i] * s[j];
        }
        return r.size() ? r.maxCoeff() : 0.0;
    }

    double quad_form(const VectorXd& x) const {
        VectorXd y(x.size());
        matvec(x, y);
        return x.dot(y);
    }

private:
    MatrixXd dense_;
    SpMat sp_;
    bool sparse_ = false;
};

// ---------------------------------------------------------------------------
// SimilarityGraph
// ---------------------------------------------------------------------------

struct SimilarityGraph {
    Index n = 0;
    GraphMatrix weights;  // symmetric, entries in [0,1] for the Gaussian kernel
    double sigma = 0.0;   // kernel bandwidth
    int knn = 0;          // 0 = dense
};

namespace detail {

constexpr Index kDistBlock = 256;

/// Squared Euclidean distances between rows [r0, r1) of X and all rows,
/// clamped at 0. (sqn_i + sqn_j) is formed as one addition so the result is
/// bitwise symmetric and the dense and knn builders agree exactly.
inline MatrixXd sqdist_block(const MatrixXd& X, const VectorXd& sqn, Index r0, Index r1) {
    const Index m = r1 - r0;
    const Index n = X.rows();
    MatrixXd d2 = (-2.0 * (X.middleRows(r0, m) * X.transpose())).eval();
    d2.array() += (sqn.segment(r0, m).replicate(1, n) +
                   sqn.transpose().replicate(m, 1))
                      .array();
    return d2.cwiseMax(0.0);
}

struct WeightedEdge {
    Index col;
    double w;
};

/// Row-wise k largest off-diagonal weights; ties broken by lower column index.
inline void top_k_row(const VectorXd& wrow, Index row, Index k, std::vector<WeightedEdge>& out) {
    out.clear();
    for (Index j = 0; j < wrow.size(); ++j) {
        if (j == row || wrow[j] <= 0.0) continue;
        out.push_back({j, wrow[j]});
    }
    auto cmp = [](const WeightedEdge& a, const WeightedEdge& b) {
        if (a.w != b.w) return a.w > b.w;
        return a.col < b.col;
    };
    if (static_cast<Index>(out.size()) > k) {
        std::nth_element(out.begin(), out.begin() + k - 1, out.end(), cmp);
        out.resize(k);
    }
    std::sort(out.begin(), out.end(),
              [](const WeightedEdge& a, const WeightedEdge& b) { return a.col < b.col; });
}

} // namespace detail

/// Dense Gaussian-kernel similarity: W_ij = exp(-||x_i - x_j||^2 / (2 sigma^2)).
/// The diagonal is 1 (zero distance); the zero-diagonal policy is applied when
/// the Laplacian is formed.
inline SimilarityGraph gaussian_similarity(const MatrixXd& X, double sigma) {
    if (sigma <= 0) throw_numeric("BandwidthZero", "kernel bandwidth must be positive");
    if (!X.allFinite()) throw_numeric("NonFinite", "sample matrix contains NaN/Inf");
    const Index n = X.rows();
    if (n < 1) throw_config("ConfigInvalid", "need at least one sample");

    const VectorXd sqn = X.rowwise().squaredNorm();
    const double inv = 1.0 / (2.0 * sigma * sigma);
    MatrixXd W(n, n);
    parallel_for_blocked(n, detail::kDistBlock, [&](Index r0, Index r1) {
        W.middleRows(r0, r1 - r0) =
            (-inv * detail::sqdist_block(X, sqn, r0, r1).array()).exp();
    });
    W = ((W + W.transpose()) * 0.5).eval();
    W.diagonal().setOnes();

    SimilarityGraph g;
    g.n = n;
    g.weights = GraphMatrix(std::move(W));
    g.sigma = sigma;
    return g;
}

/// Keep each row's k_nn largest off-diagonal weights, then symmetrize by
/// max(W, W^T).
inline SimilarityGraph knn_sparsify(const SimilarityGraph& g, Index k_nn) {
    if (k_nn < 1 || k_nn >= g.n)
        throw_config("KTooLarge", "need 1 <= k_nn < n");
    const Index n = g.n;
    std::vector<std::vector<detail::WeightedEdge>> kept(n);
    if (g.weights.is_sparse()) {
        const SpMat& W = g.weights.sparse();
        std::vector<detail::WeightedEdge> all;
        for (Index i = 0; i < n; ++i) {
            all.clear();
            for (SpMat::InnerIterator it(W, i); it; ++it)
                if (it.index() != i && it.value() > 0.0)
                    all.push_back({it.index(), it.value()});
            auto cmp = [](const detail::WeightedEdge& a, const detail::WeightedEdge& b) {
                if (a.w != b.w) return a.w > b.w;
                return a.col < b.col;
            };
            if (static_cast<Index>(all.size()) > k_nn) {
                std::nth_element(all.begin(), all.begin() + k_nn - 1, all.end(), cmp);
                all.resize(k_nn);
            }
            std::sort(all.begin(), all.end(), [](const detail::WeightedEdge& a,
                                                 const detail::WeightedEdge& b) {
                return a.col < b.col;
            });
            kept[i] = all;
        }
    } else {
        const MatrixXd& W = g.weights.dense();
        std::vector<detail::WeightedEdge> row;
        for (Index i = 0; i < n; ++i) {
            detail::top_k_row(W.row(i).transpose(), i, k_nn, row);
            kept[i] = row;
        }
    }

    // union with max; W symmetric so max == union of kept edges
    std::vector<Eigen::Triplet<double>> trips;
    for (Index i = 0; i < n; ++i)
        for (const auto& e : kept[i]) {
            trips.emplace_back(i, e.col, e.w);
            trips.emplace_back(e.col, i, e.w);
        }
    SpMat S(n, n);
    S.setFromTriplets(trips.begin(), trips.end(),
                      [](const double& a, const double& b) { return std::max(a, b); });

    SimilarityGraph out;
    out.n = n;
    out.weights = GraphMatrix(std::move(S));
    out.sigma = g.sigma;
    out.knn = static_cast<int>(k_nn);
    return out;
}

/// Gaussian kernel + kNN sparsification without materializing the dense n x n
/// matrix; entrywise identical to knn_sparsify(gaussian_similarity(X, sigma)).
inline SimilarityGraph gaussian_knn_graph(const MatrixXd& X, double sigma, Index k_nn) {
    if (sigma <= 0) throw_numeric("BandwidthZero", "kernel bandwidth must be positive");
    if (!X.allFinite()) throw_numeric("NonFinite", "sample matrix contains NaN/Inf");
    const Index n = X.rows();
    if (k_nn < 1 || k_nn >= n) throw_config("KTooLarge", "need 1 <= k_nn < n");

    const VectorXd sqn = X.rowwise().squaredNorm();
    const double inv = 1.0 / (2.0 * sigma * sigma);
    std::vector<std::vector<detail::WeightedEdge>> kept(n);
    parallel_for_blocked(n, detail::kDistBlock, [&](Index r0, Index r1) {
        MatrixXd Wb = (-inv * detail::sqdist_block(X, sqn, r0, r1).array()).exp();
        std::vector<detail::WeightedEdge> row;
        for (Index i = r0; i < r1; ++i) {
            detail::top_k_row(Wb.row(i - r0).transpose(), i, k_nn, row);
            kept[i] = row;
        }
    });

    std::vector<Eigen::Triplet<double>> trips;
    for (Index i = 0; i < n; ++i)
        for (const auto& e : kept[i]) {
            trips.emplace_back(i, e.col, e.w);
            trips.emplace_back(e.col, i, e.w);
        }
    SpMat S(n, n);
    S.setFromTriplets(trips.begin(), trips.end(),
                      [](const double& a, const double& b) { return std::max(a, b); });

    SimilarityGraph out;
    out.n = n;
    out.weights = GraphMatrix(std::move(S));
    out.sigma = sigma;
    out.knn = static_cast<int>(k_nn);
    return out;
}

// ---------------------------------------------------------------------------
// Graph Laplacians
// ---------------------------------------------------------------------------

enum class LapVariant { Unnormalized, Symmetric, RandomWalk };

inline const char* to_string(LapVariant v) {
    switch (v) {
        case LapVariant::Unnormalized: return "unnormalized";
        case LapVariant::Symmetric: return "sym";
        case LapVariant::RandomWalk: return "rw";
    }
    return "?";
}

/// L with its degree vector. For the random-walk variant the symmetric
/// similarity transform D^{-1/2} L D^{-1/2} is stored for eigen work; the
/// random-walk eigenvectors are recovered as D^{-1/2} v.
struct GraphLaplacian {
    GraphMatrix matrix;      // variant matrix (sym transform for rw)
    VectorXd degrees;        // row sums of W with zero diagonal
    VectorXd eff_degrees;    // degrees with isolated vertices mapped to 1
    LapVariant variant = LapVariant::Unnormalized;
    Index isolated = 0;      // number of zero-degree vertices

    Index order() const { return degrees.size(); }
};

inline GraphLaplacian laplacian(const SimilarityGraph& g, LapVariant variant) {
    const Index n = g.n;
    GraphLaplacian lap;
    lap.variant = variant;

    if (g.weights.is_sparse()) {
        SpMat W = g.weights.sparse();
        W.prune([](Index i, Index j, double) { return i != j; }); // zero-diagonal policy
        VectorXd D = W * VectorXd::Ones(n);
        lap.degrees = D;
        lap.eff_degrees = D.unaryExpr([](double d) { return d > 0 ? d : 1.0; });
        lap.isolated = (D.array() <= 0).count();
        if (variant == LapVariant::Unnormalized) {
            SpMat L = -W;
            SpMat diag(n, n);
            diag.setIdentity();
            for (Index i = 0; i < n; ++i) diag.coeffRef(i, i) = D[i];
            L += diag;
            lap.matrix = GraphMatrix(std::move(L));
        } else {
            const VectorXd s = lap.eff_degrees.array().rsqrt().matrix();
            SpMat Wn = s.asDiagonal() * W * s.asDiagonal();
            SpMat L = -Wn;
            SpMat eye(n, n);
            eye.setIdentity();
            L += eye;
            lap.matrix = GraphMatrix(std::move(L));
        }
    } else {
        MatrixXd W = g.weights.dense();
        if ((W.array() < 0).any())
            throw_numeric("ConfigInvalid", "similarity weights must be nonnegative");
        W.diagonal().setZero();
        VectorXd D = W.rowwise().sum();
        lap.degrees = D;
        lap.eff_degrees = D.unaryExpr([](double d) { return d > 0 ? d : 1.0; });
        lap.isolated = (D.array() <= 0).count();
        if (variant == LapVariant::Unnormalized) {
            MatrixXd L = -W;
            L.diagonal() += D;
            lap.matrix = GraphMatrix(std::move(L));
        } else {
            const VectorXd s = lap.eff_degrees.array().rsqrt().matrix();
            MatrixXd L = -(s.asDiagonal() * W * s.asDiagonal());
            L = ((L + L.transpose()) * 0.5).eval();
            L.diagonal().array() += 1.0;
            lap.matrix = GraphMatrix(std::move(L));
        }
    }

    if (lap.isolated > 0 && variant != LapVariant::Unnormalized)
        std::fprintf(stderr,
                     "[msle] warning: %lld isolated vertices; degrees treated as 1 for "
                     "normalization\n",
                     static_cast<long long>(lap.isolated));
    return lap;
}

// ---------------------------------------------------------------------------
// Bandwidth heuristic
// ---------------------------------------------------------------------------

/// Median pairwise Euclidean distance over a uniform subsample of
/// min(n, 1000) points (lower median; deterministic given `seed`).
inline double auto_bandwidth(const MatrixXd& X, std::uint32_t seed = 42) {
    const Index n = X.rows();
    if (n < 2) throw_config("ConfigInvalid", "auto_bandwidth needs n >= 2");
    if (!X.allFinite()) throw_numeric("NonFinite", "sample matrix contains NaN/Inf");

    const Index cap = 1000;
    std::vector<Index> idx(n);
    std::iota(idx.begin(), idx.end(), Index{0});
    if (n > cap) {
        std::mt19937 rng(seed);
        for (Index i = 0; i < cap; ++i) {
            std::uniform_int_distribution<Index> pick(i, n - 1);
            std::swap(idx[i], idx[pick(rng)]);
        }
        idx.resize(cap);
    }

    const Index m = static_cast<Index>(idx.size());
    std::vector<double> dists;
    dists.reserve(static_cast<size_t>(m) * (m - 1) / 2);
    for (Index a = 0; a < m; ++a)
        for (Index b = a + 1; b < m; ++b)
            dists.push_back((X.row(idx[a]) - X.row(idx[b])).norm());
    std::sort(dists.begin(), dists.end());
    const double med = dists[(dists.size() - 1) / 2];
    if (med <= 0.0)
        throw_data("DegenerateData",
                   "median pairwise distance is zero; supply sigma explicitly");
    return med;
}

} // namespace msle
