#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "msle/data_io.hpp"
#include "msle/error.hpp"
#include "msle/multiview.hpp"
#include "msle/parallel.hpp"

namespace msle {

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct RocPoint {
    double threshold;
    double tpr;
    double fpr;
};

struct MetricsReport {
    std::string classifier;
    std::string params;
    Index feature_count = 0;
    double reduction_percent = 0.0;
    Eigen::MatrixXi confusion;                 // C x C, rows = true class
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::vector<std::vector<RocPoint>> roc;    // one curve per class (one-vs-rest)
};

namespace detail {

/// Confusion matrix, accuracy, and macro scores from labels and predictions;
/// ROC curves from per-class decision scores (rows = test samples).
inline MetricsReport make_report(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                                 const MatrixXd& scores, int C) {
    MetricsReport rep;
    const size_t n = y_true.size();
    rep.confusion = Eigen::MatrixXi::Zero(C, C);
    for (size_t i = 0; i < n; ++i) rep.confusion(y_true[i], y_pred[i]) += 1;
    rep.accuracy = static_cast<double>(rep.confusion.trace()) / static_cast<double>(n);

    double psum = 0, rsum = 0, fsum = 0;
    for (int c = 0; c < C; ++c) {
        const double tp = rep.confusion(c, c);
        const double fp = rep.confusion.col(c).sum() - tp;
        const double fn = rep.confusion.row(c).sum() - tp;
        const double p = (tp + fp) > 0 ? tp / (tp + fp) : 0.0;
        const double r = (tp + fn) > 0 ? tp / (tp + fn) : 0.0;
        psum += p;
        rsum += r;
        fsum += (p + r) > 0 ? 2.0 * p * r / (p + r) : 0.0;
    }
    rep.macro_precision = psum / C;
    rep.macro_recall = rsum / C;
    rep.macro_f1 = fsum / C;

    // one-vs-rest ROC per class: thresholds descending, so TPR/FPR ascend
    rep.roc.resize(static_cast<size_t>(C));
    for (int c = 0; c < C; ++c) {
        std::vector<std::pair<double, int>> sl(n);  // (score, is_positive)
        size_t npos = 0;
        for (size_t i = 0; i < n; ++i) {
            sl[i] = {scores(static_cast<Index>(i), c), y_true[i] == c ? 1 : 0};
            npos += static_cast<size_t>(sl[i].second);
        }
        const size_t nneg = n - npos;
        std::sort(sl.begin(), sl.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });
        auto& curve = rep.roc[static_cast<size_t>(c)];
        curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
        size_t tp = 0, fp = 0;
        for (size_t i = 0; i < n; ++i) {
            if (sl[i].second) ++tp; else ++fp;
            const bool last_at_threshold = (i + 1 == n) || (sl[i + 1].first != sl[i].first);
            if (!last_at_threshold) continue;
            curve.push_back({sl[i].first,
                             npos ? static_cast<double>(tp) / static_cast<double>(npos) : 0.0,
                             nneg ? static_cast<double>(fp) / static_cast<double>(nneg) : 0.0});
        }
        curve.push_back({-std::numeric_limits<double>::infinity(), 1.0, 1.0});
    }
    return rep;
}

inline void require_labeled(const Dataset& ds, const char* who) {
    if (ds.n() == 0 || !ds.has_labels())
        throw_data("EmptyTrain", std::string(who) + " requires labeled training samples");
}

} // namespace detail

// ---------------------------------------------------------------------------
// k-nearest-neighbor classifier
// ---------------------------------------------------------------------------

/// Majority vote over the k nearest training samples by Euclidean distance.
/// Distance ties resolve to the lower training index, vote ties to the
/// smaller class id. Vote fractions serve as ROC scores.
inline MetricsReport classify_knn(const Dataset& train, const Dataset& test,
                                  int k_neighbors = 5) {
    detail::require_labeled(train, "classify_knn");
    detail::require_labeled(test, "classify_knn");
    if (k_neighbors < 1) throw_config("ConfigInvalid", "k_neighbors must be >= 1");
    const Index ntr = train.n(), nte = test.n();
    const int k = static_cast<int>(std::min<Index>(k_neighbors, ntr));
    const int C = std::max(train.num_classes(), test.num_classes());

    const VectorXd sq_tr = train.X.rowwise().squaredNorm();
    const VectorXd sq_te = test.X.rowwise().squaredNorm();

    std::vector<int> pred(static_cast<size_t>(nte));
    MatrixXd scores = MatrixXd::Zero(nte, C);

    parallel_for_blocked(nte, 256, [&](Index r0, Index r1) {
        MatrixXd D2 = (-2.0 * (test.X.middleRows(r0, r1 - r0) * train.X.transpose())).eval();
        D2.colwise() += sq_te.segment(r0, r1 - r0);
        D2.rowwise() += sq_tr.transpose();
        std::vector<Index> idx(static_cast<size_t>(ntr));
        for (Index i = r0; i < r1; ++i) {
            const auto row = D2.row(i - r0);
            std::iota(idx.begin(), idx.end(), Index{0});
            std::nth_element(idx.begin(), idx.begin() + (k - 1), idx.end(),
                             [&](Index a, Index b) {
                                 if (row[a] != row[b]) return row[a] < row[b];
                                 return a < b;
                             });
            std::vector<int> votes(static_cast<size_t>(C), 0);
            for (int j = 0; j < k; ++j) ++votes[static_cast<size_t>(train.y[static_cast<size_t>(idx[static_cast<size_t>(j)])])];
            int best = 0;
            for (int c = 1; c < C; ++c)
                if (votes[static_cast<size_t>(c)] > votes[static_cast<size_t>(best)]) best = c;
            pred[static_cast<size_t>(i)] = best;
            for (int c = 0; c < C; ++c)
                scores(i, c) = static_cast<double>(votes[static_cast<size_t>(c)]) / k;
        }
    });

    MetricsReport rep = detail::make_report(test.y, pred, scores, C);
    rep.classifier = "knn";
    rep.params = "k=" + std::to_string(k);
    rep.feature_count = train.d();
    return rep;
}

// ---------------------------------------------------------------------------
// Gaussian naive Bayes
// ---------------------------------------------------------------------------

/// Argmax of class log-posterior under per-feature independent Gaussians.
/// Per-class variances are floored at 1e-9 times the largest observed
/// variance. Log-posteriors serve as ROC scores; ties go to the smaller
/// class id.
inline MetricsReport classify_gnb(const Dataset& train, const Dataset& test) {
    detail::require_labeled(train, "classify_gnb");
    detail::require_labeled(test, "classify_gnb");
    const int C = std::max(train.num_classes(), test.num_classes());
    {
        std::vector<char> present(static_cast<size_t>(C), 0);
        for (int v : train.y) present[static_cast<size_t>(v)] = 1;
        if (std::count(present.begin(), present.end(), char(1)) < 2)
            throw_data("SingleClassTrain", "naive Bayes needs at least two training classes");
    }
    const Index d = train.d(), ntr = train.n(), nte = test.n();

    MatrixXd mu = MatrixXd::Zero(C, d);
    MatrixXd var = MatrixXd::Zero(C, d);
    VectorXd prior = VectorXd::Zero(C);
    for (Index i = 0; i < ntr; ++i) {
        const int c = train.y[static_cast<size_t>(i)];
        prior[c] += 1.0;
        mu.row(c) += train.X.row(i);
    }
    for (int c = 0; c < C; ++c)
        if (prior[c] > 0) mu.row(c) /= prior[c];
    for (Index i = 0; i < ntr; ++i) {
        const int c = train.y[static_cast<size_t>(i)];
        var.row(c) += (train.X.row(i) - mu.row(c)).array().square().matrix();
    }
    for (int c = 0; c < C; ++c)
        if (prior[c] > 0) var.row(c) /= prior[c];
    const double vmax = var.maxCoeff();
    const double floor = vmax > 0 ? 1e-9 * vmax : 1.0;
    var = var.cwiseMax(floor);
    prior /= static_cast<double>(ntr);

    MatrixXd scores(nte, C);
    constexpr double log2pi = 1.8378770664093454836;
    for (int c = 0; c < C; ++c) {
        if (prior[c] == 0.0) {
            scores.col(c).setConstant(-std::numeric_limits<double>::infinity());
            continue;
        }
        const double logdet = (var.row(c).array().log() + log2pi).sum();
        MatrixXd Dm = test.X;
        Dm.rowwise() -= mu.row(c);
        const VectorXd q = Dm.cwiseProduct(Dm) * var.row(c).cwiseInverse().transpose();
        scores.col(c) = ((std::log(prior[c]) - 0.5 * logdet) - 0.5 * q.array()).matrix();
    }

    std::vector<int> pred(static_cast<size_t>(nte));
    for (Index i = 0; i < nte; ++i) {
        int best = 0;
        for (int c = 1; c < C; ++c)
            if (scores(i, c) > scores(i, best)) best = c;
        pred[static_cast<size_t>(i)] = best;
    }
    MetricsReport rep = detail::make_report(test.y, pred, scores, C);
    rep.classifier = "gnb";
    rep.params = "var_floor=1e-9*max";
    rep.feature_count = d;
    return rep;
}

// ---------------------------------------------------------------------------
// Linear SVM (one-vs-rest, Pegasos-style SGD on the hinge loss)
// ---------------------------------------------------------------------------

struct SvmConfig {
    double lambda = 1e-4;
    int epochs = 30;
    std::uint32_t seed = 42;
    bool strict_standardized = false;  // escalate the standardization warning
};

/// One deterministic-seeded stochastic-subgradient hinge-loss classifier per
/// class; a constant bias feature is appended (and regularized with the
/// rest). Prediction is the argmax decision value, ties to the smaller class
/// id; decision values serve as ROC scores.
inline MetricsReport classify_linear_svm(const Dataset& train, const Dataset& test,
                                         const SvmConfig& cfg = {}) {
    detail::require_labeled(train, "classify_linear_svm");
    detail::require_labeled(test, "classify_linear_svm");
    if (cfg.lambda <= 0 || cfg.epochs < 1) throw_config("ConfigInvalid", "bad SVM config");
    const int C = std::max(train.num_classes(), test.num_classes());
    const Index d = train.d(), ntr = train.n(), nte = test.n();

    {
        // linear SVM assumes roughly z-scored inputs
        bool suspicious = false;
        for (Index j = 0; j < d && !suspicious; ++j) {
            const double mean = train.X.col(j).mean();
            const double sd = std::sqrt((train.X.col(j).array() - mean).square().sum() /
                                        static_cast<double>(ntr));
            if (std::abs(mean) > 0.1 || sd > 3.0) suspicious = true;
        }
        if (suspicious) {
            if (cfg.strict_standardized)
                throw_data("NotStandardized",
                           "training features are not standardized (strict mode)");
            std::fprintf(stderr,
                         "[msle] warning: SVM features look unstandardized; accuracy may "
                         "suffer\n");
        }
    }

    // augmented design with constant bias column
    MatrixXd W = MatrixXd::Zero(d + 1, C);
    std::vector<Index> order(static_cast<size_t>(ntr));
    for (int c = 0; c < C; ++c) {
        VectorXd w = VectorXd::Zero(d + 1);
        std::mt19937 rng(cfg.seed + static_cast<std::uint32_t>(c));
        long t = 0;
        for (int ep = 0; ep < cfg.epochs; ++ep) {
            std::iota(order.begin(), order.end(), Index{0});
            std::shuffle(order.begin(), order.end(), rng);
            for (Index i : order) {
                ++t;
                const double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
                const double yi = train.y[static_cast<size_t>(i)] == c ? 1.0 : -1.0;
                const double margin =
                    yi * (train.X.row(i).dot(w.head(d)) + w[d]);
                w *= (1.0 - eta * cfg.lambda);
                if (margin < 1.0) {
                    w.head(d) += (eta * yi) * train.X.row(i).transpose();
                    w[d] += eta * yi;
                }
            }
        }
        W.col(c) = w;
    }

    MatrixXd scores = test.X * W.topRows(d);
    scores.rowwise() += W.row(d);
    std::vector<int> pred(static_cast<size_t>(nte));
    for (Index i = 0; i < nte; ++i) {
        int best = 0;
        for (int c = 1; c < C; ++c)
            if (scores(i, c) > scores(i, best)) best = c;
        pred[static_cast<size_t>(i)] = best;
    }
    MetricsReport rep = detail::make_report(test.y, pred, scores, C);
    rep.classifier = "svm_linear";
    char buf[96];
    std::snprintf(buf, sizeof buf, "lambda=%g,epochs=%d,seed=%u", cfg.lambda, cfg.epochs,
                  cfg.seed);
    rep.params = buf;
    rep.feature_count = d;
    return rep;
}

// ---------------------------------------------------------------------------
// Reduction sweep
// ---------------------------------------------------------------------------

struct SweepPoint {
    double reduction = 0.0;               // percent of features removed
    Index k = 0;                          // features kept
    std::vector<Index> selected;
    std::vector<MetricsReport> reports;
};

struct SweepResult {
    SelectionResult selection;            // scores computed once on train
    std::vector<SweepPoint> points;
};

inline Dataset subset_columns(const Dataset& ds, const std::vector<Index>& cols) {
    Dataset out;
    out.X.resize(ds.n(), static_cast<Index>(cols.size()));
    for (size_t j = 0; j < cols.size(); ++j) {
        out.X.col(static_cast<Index>(j)) = ds.X.col(cols[j]);
        out.feature_names.push_back(ds.feature_names.empty()
                                        ? "f" + std::to_string(cols[j])
                                        : ds.feature_names[static_cast<size_t>(cols[j])]);
    }
    out.y = ds.y;
    out.label_names = ds.label_names;
    out.split = ds.split;
    return out;
}

/// Features kept at p percent removed.
inline Index reduction_to_k(Index d, double reduction) {
    if (reduction < 0 || reduction >= 100)
        throw_config("ConfigInvalid", "reduction percent must be in [0, 100)");
    const Index k = static_cast<Index>(std::lround(static_cast<double>(d) * (1.0 - reduction / 100.0)));
    return std::max<Index>(1, std::min(k, d));
}

/// Scores features once on the training split (at the largest k so smaller
/// selections are prefixes), then trains and evaluates every requested
/// classifier at every reduction. Reduction percent counts features REMOVED:
/// r = 80 on 561 features keeps round(561 * 0.2) = 112.
/// Classifier ids: "knn", "gnb", "svm_linear". The SVM sees standardized
/// features (train statistics); kNN and GNB see the original values.
inline SweepResult sweep_reduction(const Dataset& train, const Dataset& test,
                                   const ViewSet& views, const MsleConfig& cfg,
                                   const std::vector<double>& reductions,
                                   const std::vector<std::string>& classifiers,
                                   int knn_k = 5, const SvmConfig& svm_cfg = {}) {
    detail::require_labeled(train, "sweep_reduction");
    detail::require_labeled(test, "sweep_reduction");
    const Index d = train.d();

    Index k_max = 1;
    for (double r : reductions) k_max = std::max(k_max, reduction_to_k(d, r));

    SweepResult out;
    out.selection = run_msle(train.X, views, k_max, cfg);

    if (cfg.timer) cfg.timer->start("classify");

    // standardized copies for the SVM
    Dataset tr_std = train, te_std = test;
    const bool want_svm =
        std::find(classifiers.begin(), classifiers.end(), "svm_linear") != classifiers.end();
    if (want_svm) standardize(tr_std, te_std);

    for (double r : reductions) {
        SweepPoint pt;
        pt.reduction = r;
        pt.k = reduction_to_k(d, r);
        pt.selected = select_top_k(out.selection.scores, pt.k);

        const Dataset tr_sub = subset_columns(train, pt.selected);
        const Dataset te_sub = subset_columns(test, pt.selected);

        for (const std::string& c : classifiers) {
            MetricsReport rep;
            if (c == "knn") {
                rep = classify_knn(tr_sub, te_sub, knn_k);
            } else if (c == "gnb") {
                rep = classify_gnb(tr_sub, te_sub);
            } else if (c == "svm_linear") {
                rep = classify_linear_svm(subset_columns(tr_std, pt.selected),
                                          subset_columns(te_std, pt.selected), svm_cfg);
            } else {
                throw_config("ConfigInvalid",
                             "unknown classifier '" + c + "' (use knn|gnb|svm_linear)");
            }
            rep.reduction_percent = r;
            pt.reports.push_back(std::move(rep));
        }
        out.points.push_back(std::move(pt));
    }
    if (cfg.timer) cfg.timer->stop();
    return out;
}

// ---------------------------------------------------------------------------
// Report writers (fixed formatting, no timestamps: reruns are byte-identical)
// ---------------------------------------------------------------------------

inline void write_metrics_table(const std::vector<SweepPoint>& points, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_data("LayoutNotFound", "cannot write " + path);
    out << "classifier\tparams\treduction_pct\tfeatures\taccuracy\tmacro_precision\t"
           "macro_recall\tmacro_f1\n";
    char buf[256];
    for (const SweepPoint& pt : points)
        for (const MetricsReport& r : pt.reports) {
            std::snprintf(buf, sizeof buf, "%s\t%s\t%.6g\t%lld\t%.6f\t%.6f\t%.6f\t%.6f\n",
                          r.classifier.c_str(), r.params.c_str(), pt.reduction,
                          static_cast<long long>(r.feature_count), r.accuracy,
                          r.macro_precision, r.macro_recall, r.macro_f1);
            out << buf;
        }
    if (!out) throw_data("LayoutNotFound", "write failed for " + path);
}

/// Accuracy grid: one row per classifier, one column per reduction percent.
inline void write_sweep_grid(const std::vector<SweepPoint>& points, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_data("LayoutNotFound", "cannot write " + path);
    std::vector<std::string> classifiers;
    for (const SweepPoint& pt : points)
        for (const MetricsReport& r : pt.reports)
            if (std::find(classifiers.begin(), classifiers.end(), r.classifier) ==
                classifiers.end())
                classifiers.push_back(r.classifier);
    char buf[64];
    out << "classifier";
    for (const SweepPoint& pt : points) {
        std::snprintf(buf, sizeof buf, "\t%.6g%%", pt.reduction);
        out << buf;
    }
    out << '\n';
    for (const std::string& c : classifiers) {
        out << c;
        for (const SweepPoint& pt : points) {
            const auto it =
                std::find_if(pt.reports.begin(), pt.reports.end(),
                             [&](const MetricsReport& r) { return r.classifier == c; });
            if (it == pt.reports.end()) {
                out << "\t-";
            } else {
                std::snprintf(buf, sizeof buf, "\t%.4f", it->accuracy * 100.0);
                out << buf;
            }
        }
        out << '\n';
    }
    if (!out) throw_data("LayoutNotFound", "write failed for " + path);
}

inline void write_confusion(const MetricsReport& rep, const std::vector<std::string>& labels,
                            const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_data("LayoutNotFound", "cannot write " + path);
    const int C = static_cast<int>(rep.confusion.rows());
    out << "true\\pred";
    for (int c = 0; c < C; ++c)
        out << '\t' << (c < static_cast<int>(labels.size()) ? labels[static_cast<size_t>(c)]
                                                            : "class" + std::to_string(c));
    out << '\n';
    for (int r = 0; r < C; ++r) {
        out << (r < static_cast<int>(labels.size()) ? labels[static_cast<size_t>(r)]
                                                    : "class" + std::to_string(r));
        for (int c = 0; c < C; ++c) out << '\t' << rep.confusion(r, c);
        out << '\n';
    }
    if (!out) throw_data("LayoutNotFound", "write failed for " + path);
}

inline void write_roc(const MetricsReport& rep, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_data("LayoutNotFound", "cannot write " + path);
    out << "class\tthreshold\ttpr\tfpr\n";
    char buf[128];
    for (size_t c = 0; c < rep.roc.size(); ++c)
        for (const RocPoint& p : rep.roc[c]) {
            std::snprintf(buf, sizeof buf, "%zu\t%.10g\t%.10g\t%.10g\n", c, p.threshold, p.tpr,
                          p.fpr);
            out << buf;
        }
    if (!out) throw_data("LayoutNotFound", "write failed for " + path);
}

} // namespace msle
