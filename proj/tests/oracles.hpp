// Independent reference implementations used to cross-check the library.
// Everything here is deliberately naive: O(n^3) Jacobi sweeps, double loops,
// coordinate descent. Slow and obviously correct beats fast and shared-bug.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Cyclic Jacobi eigensolver. Returns eigenvalues ascending with matching
// eigenvector columns. Only for small symmetric matrices.
// ---------------------------------------------------------------------------

struct EigPair {
    VectorXd values;
    MatrixXd vectors;
};

inline EigPair jacobi_eig(MatrixXd A) {
    const Index n = A.rows();
    MatrixXd V = MatrixXd::Identity(n, n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (Index p = 0; p < n; ++p)
            for (Index q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        if (off < 1e-26 * (1.0 + A.squaredNorm())) break;
        for (Index p = 0; p < n; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                if (std::abs(A(p, q)) < 1e-300) continue;
                const double theta = (A(q, q) - A(p, p)) / (2 * A(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                Eigen::JacobiRotation<double> rot(c, s);
                A.applyOnTheLeft(p, q, rot.adjoint());
                A.applyOnTheRight(p, q, rot);
                V.applyOnTheRight(p, q, rot);
            }
        }
    }
    std::vector<Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), Index(0));
    std::sort(order.begin(), order.end(),
              [&](Index a, Index b) { return A(a, a) < A(b, b); });
    EigPair out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Index j = 0; j < n; ++j) {
        out.values[j] = A(order[static_cast<size_t>(j)], order[static_cast<size_t>(j)]);
        out.vectors.col(j) = V.col(order[static_cast<size_t>(j)]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Coordinate descent for min_z  w * ||x - U z||^2 + alpha * ||z||_1.
// Exact single-coordinate minimization, looped to convergence.
// ---------------------------------------------------------------------------

inline double soft(double x, double tau) {
    const double m = std::abs(x) - tau;
    return m > 0 ? (x > 0 ? m : -m) : 0.0;
}

inline VectorXd cd_lasso(const MatrixXd& U, const VectorXd& x, double alpha, double w = 1.0,
                         int max_pass = 20000, double tol = 1e-13) {
    const Index k = U.cols();
    VectorXd z = VectorXd::Zero(k);
    VectorXd r = x;  // residual x - U z
    for (int pass = 0; pass < max_pass; ++pass) {
        double max_delta = 0;
        for (Index j = 0; j < k; ++j) {
            const double ujj = U.col(j).squaredNorm();
            if (ujj <= 0) continue;
            r += U.col(j) * z[j];
            const double t = U.col(j).dot(r);
            const double znew = soft(t, alpha / (2.0 * w)) / ujj;
            r -= U.col(j) * znew;
            max_delta = std::max(max_delta, std::abs(znew - z[j]));
            z[j] = znew;
        }
        if (max_delta <= tol) break;
    }
    return z;
}

inline double lasso_objective(const MatrixXd& U, const VectorXd& x, const VectorXd& z,
                              double alpha, double w = 1.0) {
    return w * (x - U * z).squaredNorm() + alpha * z.lpNorm<1>();
}

// ---------------------------------------------------------------------------
// Connected components of a nonnegative weight matrix via union-find.
// ---------------------------------------------------------------------------

struct UnionFind {
    std::vector<Index> parent;
    explicit UnionFind(Index n) : parent(static_cast<size_t>(n)) {
        std::iota(parent.begin(), parent.end(), Index(0));
    }
    Index find(Index a) {
        while (parent[static_cast<size_t>(a)] != a) {
            parent[static_cast<size_t>(a)] = parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
            a = parent[static_cast<size_t>(a)];
        }
        return a;
    }
    void unite(Index a, Index b) { parent[static_cast<size_t>(find(a))] = find(b); }
};

inline int component_count(const MatrixXd& W, double edge_tol = 0.0) {
    const Index n = W.rows();
    UnionFind uf(n);
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            if (std::abs(W(i, j)) > edge_tol) uf.unite(i, j);
    int c = 0;
    for (Index i = 0; i < n; ++i)
        if (uf.find(i) == i) ++c;
    return c;
}

// ---------------------------------------------------------------------------
// Naive classifiers with the same tie rules as the library contract:
// kNN breaks distance ties by lower train index and vote ties by smaller
// class id; GNB returns raw log-posteriors.
// ---------------------------------------------------------------------------

inline std::vector<int> knn_predict(const MatrixXd& Xtr, const std::vector<int>& ytr,
                                    const MatrixXd& Xte, int k, int num_classes) {
    const Index ntr = Xtr.rows(), nte = Xte.rows();
    k = std::min<Index>(k, ntr);
    std::vector<int> pred(static_cast<size_t>(nte));
    for (Index i = 0; i < nte; ++i) {
        std::vector<std::pair<double, Index>> dist;
        dist.reserve(static_cast<size_t>(ntr));
        for (Index j = 0; j < ntr; ++j)
            dist.emplace_back((Xte.row(i) - Xtr.row(j)).squaredNorm(), j);
        std::sort(dist.begin(), dist.end());
        std::vector<int> votes(static_cast<size_t>(num_classes), 0);
        for (int m = 0; m < k; ++m)
            ++votes[static_cast<size_t>(ytr[static_cast<size_t>(dist[static_cast<size_t>(m)].second)])];
        int best = 0;
        for (int c = 1; c < num_classes; ++c)
            if (votes[static_cast<size_t>(c)] > votes[static_cast<size_t>(best)]) best = c;
        pred[static_cast<size_t>(i)] = best;
    }
    return pred;
}

struct GnbModel {
    MatrixXd mean;    // C x d
    MatrixXd var;     // C x d, floored
    VectorXd prior;   // C
};

inline GnbModel gnb_fit(const MatrixXd& Xtr, const std::vector<int>& ytr, int num_classes) {
    const Index n = Xtr.rows(), d = Xtr.cols();
    GnbModel m;
    m.mean = MatrixXd::Zero(num_classes, d);
    m.var = MatrixXd::Zero(num_classes, d);
    m.prior = VectorXd::Zero(num_classes);
    for (Index i = 0; i < n; ++i) {
        m.prior[ytr[static_cast<size_t>(i)]] += 1.0;
        m.mean.row(ytr[static_cast<size_t>(i)]) += Xtr.row(i);
    }
    for (int c = 0; c < num_classes; ++c)
        if (m.prior[c] > 0) m.mean.row(c) /= m.prior[c];
    for (Index i = 0; i < n; ++i) {
        const int c = ytr[static_cast<size_t>(i)];
        m.var.row(c) += (Xtr.row(i) - m.mean.row(c)).array().square().matrix();
    }
    for (int c = 0; c < num_classes; ++c)
        if (m.prior[c] > 0) m.var.row(c) /= m.prior[c];
    const double vmax = m.var.maxCoeff();
    const double floor = vmax > 0 ? 1e-9 * vmax : 1.0;
    m.var = m.var.cwiseMax(floor);
    m.prior /= static_cast<double>(n);
    return m;
}

inline double gnb_log_posterior(const GnbModel& m, const VectorXd& x, int c) {
    if (m.prior[c] <= 0) return -std::numeric_limits<double>::infinity();
    double s = std::log(m.prior[c]);
    for (Index j = 0; j < x.size(); ++j) {
        const double diff = x[j] - m.mean(c, j);
        s -= 0.5 * (std::log(2.0 * M_PI * m.var(c, j)) + diff * diff / m.var(c, j));
    }
    return s;
}

inline std::vector<int> gnb_predict(const GnbModel& m, const MatrixXd& Xte, int num_classes) {
    std::vector<int> pred(static_cast<size_t>(Xte.rows()));
    for (Index i = 0; i < Xte.rows(); ++i) {
        int best = 0;
        double best_s = gnb_log_posterior(m, Xte.row(i).transpose(), 0);
        for (int c = 1; c < num_classes; ++c) {
            const double s = gnb_log_posterior(m, Xte.row(i).transpose(), c);
            if (s > best_s) {
                best_s = s;
                best = c;
            }
        }
        pred[static_cast<size_t>(i)] = best;
    }
    return pred;
}

// ---------------------------------------------------------------------------
// Central finite differences for gradient checks.
// ---------------------------------------------------------------------------

inline MatrixXd fd_gradient(const std::function<double(const MatrixXd&)>& f, const MatrixXd& Z,
                            double h = 1e-5) {
    MatrixXd g(Z.rows(), Z.cols());
    MatrixXd Zp = Z;
    for (Index j = 0; j < Z.cols(); ++j) {
        for (Index i = 0; i < Z.rows(); ++i) {
            const double orig = Zp(i, j);
            Zp(i, j) = orig + h;
            const double fp = f(Zp);
            Zp(i, j) = orig - h;
            const double fm = f(Zp);
            Zp(i, j) = orig;
            g(i, j) = (fp - fm) / (2 * h);
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Largest principal angle between the column spans of A and B (radians).
// ---------------------------------------------------------------------------

inline double max_principal_angle(const MatrixXd& A, const MatrixXd& B) {
    Eigen::HouseholderQR<MatrixXd> qa(A), qb(B);
    MatrixXd Qa = qa.householderQ() * MatrixXd::Identity(A.rows(), A.cols());
    MatrixXd Qb = qb.householderQ() * MatrixXd::Identity(B.rows(), B.cols());
    Eigen::JacobiSVD<MatrixXd> svd(Qa.transpose() * Qb);
    const double smin = svd.singularValues().minCoeff();
    return std::acos(std::min(1.0, std::max(-1.0, smin)));
}

// ---------------------------------------------------------------------------
// Random test-problem generators. All take an explicit seed so failures
// reproduce.
// ---------------------------------------------------------------------------

inline MatrixXd random_symmetric(Index n, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    MatrixXd A(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) A(i, j) = g(rng);
    return 0.5 * (A + A.transpose());
}

inline MatrixXd random_matrix(Index r, Index c, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    MatrixXd A(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) A(i, j) = g(rng);
    return A;
}

inline MatrixXd random_spd(Index n, std::uint32_t seed) {
    const MatrixXd B = random_matrix(n, n, seed);
    return B * B.transpose() + 0.5 * MatrixXd::Identity(n, n);
}

/// Nonnegative symmetric weights with a zero diagonal. Edge weights are
/// bounded away from zero so spectral gaps are clean.
inline MatrixXd random_weights(Index n, std::uint32_t seed, double density = 1.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.3, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    MatrixXd W = MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            if (coin(rng) < density) W(i, j) = W(j, i) = u(rng);
    return W;
}

/// Block-diagonal weights with the given component sizes; each block is a
/// connected random graph (a path plus random extra edges).
inline MatrixXd block_weights(const std::vector<Index>& sizes, std::uint32_t seed) {
    Index n = 0;
    for (Index s : sizes) n += s;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.3, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    MatrixXd W = MatrixXd::Zero(n, n);
    Index off = 0;
    for (Index s : sizes) {
        for (Index i = 1; i < s; ++i) {
            W(off + i - 1, off + i) = W(off + i, off + i - 1) = u(rng);
        }
        for (Index i = 0; i < s; ++i)
            for (Index j = i + 2; j < s; ++j)
                if (coin(rng) < 0.3) W(off + i, off + j) = W(off + j, off + i) = u(rng);
        off += s;
    }
    return W;
}

/// Random matrix with B-orthonormal columns: Y^T diag(dmass) Y = I.
inline MatrixXd random_d_orthonormal(Index n, Index k, const VectorXd& dmass,
                                     std::uint32_t seed) {
    MatrixXd Y = random_matrix(n, k, seed);
    for (Index j = 0; j < k; ++j) {
        for (Index l = 0; l < j; ++l) {
            const double proj = (Y.col(l).array() * dmass.array() * Y.col(j).array()).sum();
            Y.col(j) -= proj * Y.col(l);
        }
        const double nrm =
            std::sqrt((Y.col(j).array() * dmass.array() * Y.col(j).array()).sum());
        Y.col(j) /= nrm;
    }
    return Y;
}

/// Labeled Gaussian blobs: means on a scaled simplex, unit noise.
inline void make_blobs(Index n_per_class, int num_classes, Index d, std::uint32_t seed,
                       double sep, MatrixXd& X, std::vector<int>& y) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    X.resize(n_per_class * num_classes, d);
    y.assign(static_cast<size_t>(n_per_class * num_classes), 0);
    Index row = 0;
    for (int c = 0; c < num_classes; ++c) {
        VectorXd mu = VectorXd::Zero(d);
        mu[c % d] = sep;
        if (d > 1) mu[(c + 1) % d] = -0.5 * sep;
        for (Index i = 0; i < n_per_class; ++i, ++row) {
            for (Index j = 0; j < d; ++j) X(row, j) = mu[j] + g(rng);
            y[static_cast<size_t>(row)] = c;
        }
    }
}

}  // namespace oracle
