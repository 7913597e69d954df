#pragma once

#include <Eigen/Dense>
#include <utility>

#include "msle/error.hpp"
#include "msle/graph.hpp"
#include "msle/spectral.hpp"

namespace msle {

/// Mass matrix of the eigenproblem: Degree solves L u = lambda D u, Identity
/// solves the standard problem L u = lambda u.
enum class Mass { Degree, Identity };

struct Embedding {
    MatrixXd Y;              // n x d_embed, columns are embedding coordinates
    VectorXd eigenvalues;    // ascending, same length as Y has columns
    LapVariant source_variant = LapVariant::Unnormalized;
    Mass mass = Mass::Degree;
    bool dropped_trivial = true;
};

namespace detail {

inline EigenSystem smallest_pairs(const GraphLaplacian& lap, Index k, Mass mass) {
    const Index n = lap.order();
    const bool degree_mass = (mass == Mass::Degree) && lap.variant == LapVariant::Unnormalized;

    if (!lap.matrix.is_sparse()) {
        SymMatrix A(lap.matrix.dense());
        if (degree_mass) return eig_generalized(A, lap.eff_degrees, k);
        return eig_sym(A, k, Which::Smallest);
    }

    const SpMat& M = lap.matrix.sparse();
    MatVec av = [&M](const VectorXd& x, VectorXd& y) { y.noalias() = M * x; };
    LanczosOptions opt;
    if (degree_mass) {
        const VectorXd s = lap.eff_degrees.array().rsqrt().matrix();
        const double shift = lap.matrix.scaled_gershgorin(s) * (1.0 + 1e-12);
        return eig_generalized_op(av, n, lap.eff_degrees, k, shift, opt);
    }
    const double shift = lap.matrix.abs_row_sums().maxCoeff() * (1.0 + 1e-12);
    EigenSystem sys = eig_operator(av, n, k, Which::Smallest, shift, opt);
    const double scale = 1.0 + lap.matrix.abs_row_sums().maxCoeff() * static_cast<double>(n);
    if (sys.residual_bound > 1e-8 * scale)
        throw_numeric("NoConvergence", "eigensolver residual above tolerance");
    return sys;
}

} // namespace detail

/// Spectral embedding from the smallest eigenpairs of the graph Laplacian.
/// With drop_trivial the constant eigenvector (eigenvalue ~0 for a connected
/// graph) is discarded and the next d_embed eigenvectors are returned.
///
/// Variant semantics:
///   unnormalized + Degree mass  -> generalized problem L u = lambda D u
///   unnormalized + Identity     -> standard problem on L
///   sym                         -> standard problem on L_sym
///   rw                          -> standard problem on the stored symmetric
///                                  transform, then u = D^{-1/2} v
inline Embedding laplacian_eigenmaps(const GraphLaplacian& lap, Index d_embed,
                                     bool drop_trivial = true, Mass mass = Mass::Degree) {
    const Index n = lap.order();
    const Index k = d_embed + (drop_trivial ? 1 : 0);
    if (d_embed < 1) throw_config("ConfigInvalid", "d_embed must be >= 1");
    if (k > n)
        throw_config("EmbedDimTooLarge",
                     "requested dimensions (plus dropped trivial vector) exceed n");

    EigenSystem sys = detail::smallest_pairs(lap, k, mass);

    Embedding emb;
    emb.source_variant = lap.variant;
    emb.mass = mass;
    emb.dropped_trivial = drop_trivial;

    MatrixXd U = sys.eigenvectors;
    VectorXd vals = sys.eigenvalues;
    if (lap.variant == LapVariant::RandomWalk) {
        // stored matrix is the symmetric transform; undo it
        const VectorXd s = lap.eff_degrees.array().rsqrt().matrix();
        U = s.asDiagonal() * U;
        detail::fix_signs(U);
    }
    const Index off = drop_trivial ? 1 : 0;
    emb.Y = U.middleCols(off, d_embed);
    emb.eigenvalues = vals.segment(off, d_embed);
    return emb;
}

/// Nystrom-style projection of a new point given its similarity row against
/// the training points: y = Lambda^{-1} Y^T (w / sum(w)). Approximate; rows
/// that are all zero map to the origin.
inline VectorXd embed_out_of_sample(const Embedding& emb, const VectorXd& w_row) {
    if (w_row.size() != emb.Y.rows())
        throw_numeric("ShapeMismatch", "similarity row length != training size");
    if ((emb.eigenvalues.array() <= 1e-12).any())
        throw_numeric("ZeroEigenvalue",
                      "out-of-sample projection needs strictly positive eigenvalues");
    const double total = w_row.sum();
    if (total == 0.0) return VectorXd::Zero(emb.Y.cols());
    VectorXd y = emb.Y.transpose() * (w_row / total);
    y.array() /= emb.eigenvalues.array();
    return y;
}

} // namespace msle
