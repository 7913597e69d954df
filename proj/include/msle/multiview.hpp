#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "msle/embedding.hpp"
#include "msle/error.hpp"
#include "msle/graph.hpp"
#include "msle/sparse.hpp"
#include "msle/spectral.hpp"
#include "msle/timing.hpp"

namespace msle {

// ---------------------------------------------------------------------------
// View partitions
// ---------------------------------------------------------------------------

struct ViewSpec {
    std::string name;
    std::vector<Index> columns;
};

struct ViewSet {
    std::vector<ViewSpec> views;
    Index d_total = 0;    // feature count of the parent dataset
    bool disjoint = true;

    Index m() const { return static_cast<Index>(views.size()); }

    /// Column indices valid, every view nonempty, disjointness recorded.
    void validate() const {
        if (views.empty()) throw_config("ConfigInvalid", "need at least one view");
        std::vector<char> seen(static_cast<size_t>(d_total), 0);
        bool overlap = false;
        for (const ViewSpec& v : views) {
            if (v.columns.empty())
                throw_data("EmptyView", "view '" + v.name + "' has no columns");
            for (Index c : v.columns) {
                if (c < 0 || c >= d_total)
                    throw_config("ConfigInvalid",
                                 "view '" + v.name + "' references column out of range");
                if (seen[static_cast<size_t>(c)]) overlap = true;
                seen[static_cast<size_t>(c)] = 1;
            }
        }
        if (disjoint && overlap)
            throw_config("ConfigInvalid", "views overlap but the set is marked disjoint");
    }

    /// One view spanning every column.
    static ViewSet single(Index d) {
        if (d < 1) throw_config("ConfigInvalid", "need at least one feature");
        ViewSet s;
        s.d_total = d;
        ViewSpec v;
        v.name = "all";
        v.columns.resize(static_cast<size_t>(d));
        std::iota(v.columns.begin(), v.columns.end(), Index{0});
        s.views.push_back(std::move(v));
        return s;
    }

    /// m contiguous blocks of near-equal width (first blocks take the
    /// remainder).
    static ViewSet contiguous(Index d, Index m) {
        if (m < 1 || m > d) throw_config("ConfigInvalid", "need 1 <= m <= d views");
        ViewSet s;
        s.d_total = d;
        const Index base = d / m, rem = d % m;
        Index next = 0;
        for (Index i = 0; i < m; ++i) {
            ViewSpec v;
            v.name = "view" + std::to_string(i);
            const Index len = base + (i < rem ? 1 : 0);
            for (Index j = 0; j < len; ++j) v.columns.push_back(next++);
            s.views.push_back(std::move(v));
        }
        return s;
    }

    /// Partition by signal family parsed from feature names: frequency-domain
    /// names (leading 'f'), then magnitude, jerk, gravity, gyroscope, with
    /// body-acceleration as the catch-all. Families that match nothing are
    /// dropped; if the names fit no family scheme at all, falls back to
    /// contiguous blocks.
    static ViewSet from_feature_names(const std::vector<std::string>& names) {
        const Index d = static_cast<Index>(names.size());
        if (d < 1) throw_config("ConfigInvalid", "need at least one feature name");
        auto lower = [](std::string s) {
            std::transform(s.begin(), s.end(), s.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            return s;
        };
        const char* family_names[6] = {"body_acc", "gravity", "gyro",
                                       "jerk",     "magnitude", "freq"};
        std::vector<std::vector<Index>> fam(6);
        for (Index j = 0; j < d; ++j) {
            const std::string s = lower(names[static_cast<size_t>(j)]);
            size_t f;
            if (!s.empty() && s[0] == 'f') f = 5;
            else if (s.find("mag") != std::string::npos) f = 4;
            else if (s.find("jerk") != std::string::npos) f = 3;
            else if (s.find("gravity") != std::string::npos) f = 1;
            else if (s.find("gyro") != std::string::npos) f = 2;
            else f = 0;
            fam[f].push_back(j);
        }
        ViewSet s;
        s.d_total = d;
        for (size_t f = 0; f < 6; ++f) {
            if (fam[f].empty()) continue;
            ViewSpec v;
            v.name = family_names[f];
            v.columns = std::move(fam[f]);
            s.views.push_back(std::move(v));
        }
        if (s.views.size() < 2) return contiguous(d, std::min<Index>(6, d));
        return s;
    }
};

/// Column slice of X for one view.
inline MatrixXd view_matrix(const MatrixXd& X, const ViewSpec& v) {
    MatrixXd out(X.rows(), static_cast<Index>(v.columns.size()));
    for (size_t j = 0; j < v.columns.size(); ++j) out.col(static_cast<Index>(j)) = X.col(v.columns[j]);
    return out;
}

// ---------------------------------------------------------------------------
// Multi-view Laplacian: L_sum = sum_i L_i, D_sum = sum_i D_i
// ---------------------------------------------------------------------------

struct GraphConfig {
    double sigma = 0.0;                            // 0 = bandwidth heuristic per view
    LapVariant variant = LapVariant::Unnormalized;
    Index knn = 0;                                 // 0 = dense up to the threshold below
    std::uint32_t seed = 42;
};

/// Dense similarity graphs above this order switch to the kNN sparse path.
constexpr Index kDenseGraphThreshold = 4000;
constexpr Index kDefaultKnn = 15;

inline SimilarityGraph build_graph(const MatrixXd& Xv, const GraphConfig& cfg) {
    const double sigma = cfg.sigma > 0 ? cfg.sigma : auto_bandwidth(Xv, cfg.seed);
    const Index n = Xv.rows();
    if (cfg.knn == 0 && n <= kDenseGraphThreshold) return gaussian_similarity(Xv, sigma);
    const Index k_nn = cfg.knn > 0 ? cfg.knn : std::min<Index>(kDefaultKnn, n - 1);
    return gaussian_knn_graph(Xv, sigma, k_nn);
}

struct MultiviewLaplacian {
    GraphLaplacian sum;                    // L_sum with D_sum as its degrees
    std::vector<GraphLaplacian> per_view;
    std::vector<double> sigmas;            // resolved bandwidth per view
};

inline MultiviewLaplacian multiview_laplacian(const MatrixXd& X, const ViewSet& views,
                                              const GraphConfig& cfg) {
    views.validate();
    if (X.cols() != views.d_total)
        throw_numeric("ShapeMismatch", "dataset width != view set width");
    const Index n = X.rows();

    MultiviewLaplacian mv;
    for (const ViewSpec& v : views.views) {
        const MatrixXd Xv = view_matrix(X, v);
        SimilarityGraph g = build_graph(Xv, cfg);
        mv.sigmas.push_back(g.sigma);
        mv.per_view.push_back(laplacian(g, cfg.variant));
    }

    GraphLaplacian sum;
    sum.variant = cfg.variant;
    sum.degrees = VectorXd::Zero(n);
    for (const GraphLaplacian& lap : mv.per_view) sum.degrees += lap.degrees;
    sum.eff_degrees = sum.degrees.unaryExpr([](double d) { return d > 0 ? d : 1.0; });
    sum.isolated = (sum.degrees.array() <= 0).count();
    if (sum.isolated > 0)
        std::fprintf(stderr,
                     "[msle] warning: %lld vertices isolated in every view; summed degrees "
                     "treated as 1\n",
                     static_cast<long long>(sum.isolated));

    const bool any_sparse =
        std::any_of(mv.per_view.begin(), mv.per_view.end(),
                    [](const GraphLaplacian& l) { return l.matrix.is_sparse(); });
    if (any_sparse) {
        SpMat L(n, n);
        for (const GraphLaplacian& lap : mv.per_view) {
            if (lap.matrix.is_sparse())
                L += lap.matrix.sparse();
            else
                L += lap.matrix.dense().sparseView();
        }
        sum.matrix = GraphMatrix(std::move(L));
    } else {
        MatrixXd L = MatrixXd::Zero(n, n);
        for (const GraphLaplacian& lap : mv.per_view) L += lap.matrix.dense();
        sum.matrix = GraphMatrix(std::move(L));
    }
    mv.sum = std::move(sum);
    return mv;
}

/// ViewSet front end for the self-representation weight matrix.
inline SparseWeightMatrix sparse_weight_matrix(const MatrixXd& X, const ViewSet& views,
                                               const std::vector<GraphLaplacian>& laps,
                                               const VectorXd& alphas, double l1_weight = 0.0,
                                               const ApgConfig& cfg = {}) {
    views.validate();
    std::vector<MatrixXd> blocks;
    blocks.reserve(views.views.size());
    for (const ViewSpec& v : views.views) blocks.push_back(view_matrix(X, v));
    return sparse_weight_matrix(blocks, laps, alphas, l1_weight, cfg);
}

// ---------------------------------------------------------------------------
// Feature scoring and selection
// ---------------------------------------------------------------------------

enum class ScoreRule { RowL2 };

/// Scores original features from a matrix whose rows correspond to features:
/// row r contributes to feature row_to_feature[r] (identity when empty).
/// RowL2 accumulates squared row norms and takes the square root.
inline VectorXd score_features(const MatrixXd& rows_matrix, Index d,
                               const std::vector<Index>& row_to_feature = {},
                               ScoreRule rule = ScoreRule::RowL2) {
    (void)rule;
    if (!row_to_feature.empty() &&
        static_cast<Index>(row_to_feature.size()) != rows_matrix.rows())
        throw_numeric("ShapeMismatch", "one feature index per row required");
    if (row_to_feature.empty() && rows_matrix.rows() != d)
        throw_numeric("ShapeMismatch", "row count != feature count with identity mapping");
    VectorXd acc = VectorXd::Zero(d);
    for (Index r = 0; r < rows_matrix.rows(); ++r) {
        const Index f = row_to_feature.empty() ? r : row_to_feature[static_cast<size_t>(r)];
        if (f < 0 || f >= d) throw_numeric("ShapeMismatch", "feature index out of range");
        acc[f] += rows_matrix.row(r).squaredNorm();
    }
    return acc.cwiseSqrt();
}

/// Indices of the k highest scores, ascending; ties broken by lower index.
inline std::vector<Index> select_top_k(const VectorXd& scores, Index k) {
    const Index d = scores.size();
    if (k > d) throw_config("ConfigInvalid", "k exceeds feature count");
    std::vector<Index> idx(static_cast<size_t>(d));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::sort(idx.begin(), idx.end(), [&](Index a, Index b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    idx.resize(static_cast<size_t>(k));
    std::sort(idx.begin(), idx.end());
    return idx;
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

struct MsleConfig {
    GraphConfig graph;
    VectorXd alphas;                    // per-view; empty = all 1.0
    double alpha_sparse = 0.1;          // l1 weight of the per-feature coding step
    bool eigen_weights = false;         // weight coding columns by eigenvalues
    double blend = 0.5;                 // score = (1-blend)*embed + blend*code
    Index basis_dim = 0;                // 0 = min(k, 64, n-2)
    bool compute_weight_matrix = false; // n x n self-representation solve
    double l1_weight = 0.0;             // l1 knob of the weight-matrix step
    bool standardize = true;
    ApgConfig apg;
    PhaseTimer* timer = nullptr;  // optional per-phase wall-clock accounting
};

struct SelectionResult {
    VectorXd scores;                 // length d
    std::vector<Index> selected;     // ascending, |selected| = min(k, d)
    Index k = 0;
    MatrixXd spectral_basis;         // n x basis_dim eigenvectors (trivial dropped)
    VectorXd eigenvalues;            // matching eigenvalues, ascending
    VectorXd component_embed;        // basis-correlation score, max-normalized
    VectorXd component_code;         // sparse-code score, max-normalized
    MatrixXd W_sel;                  // empty unless compute_weight_matrix
    double weight_residual = 0.0;
    // provenance
    VectorXd alphas;
    std::vector<double> sigmas;
    LapVariant variant = LapVariant::Unnormalized;
    std::uint32_t seed = 42;
    double blend = 0.5;
    Index basis_dim = 0;
    double alpha_sparse = 0.0;
    bool eigen_weights = false;
};

namespace detail {

/// Column standardization with population statistics; zero-variance columns
/// become all-zero instead of dividing by zero.
inline MatrixXd standardize_columns(const MatrixXd& X) {
    MatrixXd out = X;
    const Index n = X.rows();
    if (n == 0) return out;
    for (Index j = 0; j < X.cols(); ++j) {
        const double mean = X.col(j).mean();
        out.col(j).array() -= mean;
        const double sd = std::sqrt(out.col(j).squaredNorm() / static_cast<double>(n));
        if (sd > 0)
            out.col(j) /= sd;
        else
            out.col(j).setZero();
    }
    return out;
}

inline void max_normalize(VectorXd& v) {
    const double mx = v.size() ? v.maxCoeff() : 0.0;
    if (mx > 0) v /= mx;
}

} // namespace detail

/// End-to-end multi-view selection: per-view graphs and Laplacians, summed
/// Laplacian/degree, optional self-representation weight matrix, generalized
/// eigenbasis, and a blended per-feature score from (a) feature correlation
/// with the spectral basis and (b) row norms of the sparse codes of each
/// feature column against that basis.
inline SelectionResult run_msle(const MatrixXd& X, const ViewSet& views, Index k,
                                const MsleConfig& cfg = {}) {
    const Index n = X.rows();
    const Index d = X.cols();
    if (k < 1 || k > d) throw_config("ConfigInvalid", "need 1 <= k <= feature count");
    if (n < 3) throw_config("ConfigInvalid", "need at least 3 samples");
    views.validate();
    if (views.d_total != d) throw_numeric("ShapeMismatch", "view set width != feature count");

    VectorXd alphas = cfg.alphas;
    if (alphas.size() == 0) alphas = VectorXd::Ones(views.m());
    if (alphas.size() != views.m())
        throw_config("ConfigInvalid", "need one alpha per view");
    if ((alphas.array() < 0).any()) throw_config("ConfigInvalid", "alphas must be >= 0");

    const auto phase = [&cfg](const char* name) {
        if (cfg.timer) cfg.timer->start(name);
    };

    phase("standardize");
    const MatrixXd Xs = cfg.standardize ? detail::standardize_columns(X) : X;

    phase("graphs");
    MultiviewLaplacian mv = multiview_laplacian(Xs, views, cfg.graph);

    SelectionResult res;
    res.k = k;
    res.alphas = alphas;
    res.sigmas = mv.sigmas;
    res.variant = cfg.graph.variant;
    res.seed = cfg.graph.seed;
    res.blend = cfg.blend;
    res.alpha_sparse = cfg.alpha_sparse;
    res.eigen_weights = cfg.eigen_weights;

    if (cfg.compute_weight_matrix) {
        phase("weight_matrix");
        SparseWeightMatrix sw =
            sparse_weight_matrix(Xs, views, mv.per_view, alphas, cfg.l1_weight, cfg.apg);
        res.W_sel = std::move(sw.W_sel);
        res.weight_residual = sw.residual;
    }

    // spectral basis of the summed Laplacian (the alphas only weight the
    // self-representation objective above)
    phase("eigenbasis");
    Index b = cfg.basis_dim > 0 ? cfg.basis_dim : std::min<Index>({k, 64, n - 2});
    b = std::max<Index>(1, std::min<Index>(b, n - 1));
    Embedding emb = laplacian_eigenmaps(mv.sum, b, true, Mass::Degree);
    res.spectral_basis = emb.Y;
    res.eigenvalues = emb.eigenvalues;
    res.basis_dim = b;

    // component A: correlation of each feature column with the basis
    res.component_embed = score_features(Xs.transpose() * emb.Y, d);

    // component B: sparse-code each view's feature columns against the basis
    phase("coding");
    {
        VectorXd codes = VectorXd::Zero(d);
        const VectorXd lambdas = cfg.eigen_weights ? emb.eigenvalues : VectorXd();
        for (const ViewSpec& v : views.views) {
            const MatrixXd cols = view_matrix(Xs, v);
            SparseCode sc = solve_coding(emb.Y, cols, cfg.alpha_sparse, lambdas, cfg.apg);
            std::vector<Index> mapping = v.columns;
            const VectorXd sub =
                score_features(sc.Z.transpose(), d, mapping, ScoreRule::RowL2);
            codes += sub;
        }
        res.component_code = codes;
    }

    phase("scoring");
    detail::max_normalize(res.component_embed);
    detail::max_normalize(res.component_code);
    res.scores = (1.0 - cfg.blend) * res.component_embed + cfg.blend * res.component_code;
    res.selected = select_top_k(res.scores, k);
    if (cfg.timer) cfg.timer->stop();
    return res;
}

} // namespace msle
