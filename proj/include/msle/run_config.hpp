#pragma once

#include <cstdlib>
#include <string>
#include <vector>

#include <json.hpp>

#include "msle/data_io.hpp"
#include "msle/eval.hpp"
#include "msle/multiview.hpp"

namespace msle {

/// Everything a CLI run needs, fully serializable. Precedence is
/// command-line flags > config file > these defaults; the resolved values are
/// dumped beside the outputs of every run.
struct RunConfig {
    // dataset
    std::string dataset = "ucihar";        // ucihar | delimited
    std::string data_dir;                  // UCI-HAR root; falls back to $MSLE_DATA_DIR
    std::string train_path;                // delimited mode
    std::string test_path;                 // delimited mode (optional)
    std::string label_column = "label";
    bool strict = true;

    // views
    std::string views = "auto";            // auto | single | contiguous
    long num_views = 6;

    // graph
    double sigma = 0.0;                    // 0 = bandwidth heuristic
    std::string variant = "unnormalized";  // unnormalized | sym | rw
    long knn = 0;                          // 0 = dense below the size threshold

    // solver
    std::vector<double> alphas;            // empty = all 1.0
    double alpha_sparse = 0.1;
    double blend = 0.5;
    long basis_dim = 0;                    // 0 = min(k, 64, n-2)
    double tol = 1e-6;
    long max_iter = 500;
    bool eigen_weights = false;
    bool weight_matrix = false;
    double l1_weight = 0.0;

    // selection / sweep
    long k = 0;                            // features to keep (select)
    double reduction = -1.0;               // percent removed, alternative to k
    std::vector<double> reductions = {10, 20, 30, 40, 50, 60, 70, 80, 90};
    std::vector<std::string> classifiers = {"knn", "gnb", "svm_linear"};
    long knn_neighbors = 5;
    double svm_lambda = 1e-4;
    long svm_epochs = 30;

    // embed / eval inputs
    long d_embed = 2;
    std::string mass = "identity";         // identity | degree
    bool drop_trivial = true;
    std::string weights_path;              // similarity matrix given directly
    std::string selection_path;            // saved selection to evaluate
    bool roc = false;                      // emit ROC point files

    // misc
    unsigned seed = 42;
    long threads = 0;                      // 0 = all logical cores
    std::string out_dir = "msle_out";

    std::string resolved_data_dir() const {
        if (!data_dir.empty()) return data_dir;
        if (const char* env = std::getenv("MSLE_DATA_DIR")) return env;
        return {};
    }

    MsleConfig msle_config() const {
        MsleConfig cfg;
        cfg.graph.sigma = sigma;
        cfg.graph.variant = variant_from_string(variant);
        cfg.graph.knn = knn;
        cfg.graph.seed = seed;
        if (!alphas.empty())
            cfg.alphas = Eigen::Map<const VectorXd>(alphas.data(),
                                                    static_cast<Index>(alphas.size()));
        cfg.alpha_sparse = alpha_sparse;
        cfg.eigen_weights = eigen_weights;
        cfg.blend = blend;
        cfg.basis_dim = basis_dim;
        cfg.compute_weight_matrix = weight_matrix;
        cfg.l1_weight = l1_weight;
        cfg.apg.tol = tol;
        cfg.apg.max_iter = static_cast<int>(max_iter);
        return cfg;
    }

    SvmConfig svm_config() const {
        SvmConfig s;
        s.lambda = svm_lambda;
        s.epochs = static_cast<int>(svm_epochs);
        s.seed = seed;
        return s;
    }
};

inline json to_json(const RunConfig& c) {
    json j;
    j["dataset"] = c.dataset;
    j["data_dir"] = c.data_dir;
    j["train_path"] = c.train_path;
    j["test_path"] = c.test_path;
    j["label_column"] = c.label_column;
    j["strict"] = c.strict;
    j["views"] = c.views;
    j["num_views"] = c.num_views;
    j["sigma"] = c.sigma;
    j["variant"] = c.variant;
    j["knn"] = c.knn;
    j["alphas"] = c.alphas;
    j["alpha_sparse"] = c.alpha_sparse;
    j["blend"] = c.blend;
    j["basis_dim"] = c.basis_dim;
    j["tol"] = c.tol;
    j["max_iter"] = c.max_iter;
    j["eigen_weights"] = c.eigen_weights;
    j["weight_matrix"] = c.weight_matrix;
    j["l1_weight"] = c.l1_weight;
    j["k"] = c.k;
    j["reduction"] = c.reduction;
    j["reductions"] = c.reductions;
    j["classifiers"] = c.classifiers;
    j["knn_neighbors"] = c.knn_neighbors;
    j["svm_lambda"] = c.svm_lambda;
    j["svm_epochs"] = c.svm_epochs;
    j["d_embed"] = c.d_embed;
    j["mass"] = c.mass;
    j["drop_trivial"] = c.drop_trivial;
    j["weights_path"] = c.weights_path;
    j["selection_path"] = c.selection_path;
    j["roc"] = c.roc;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["out_dir"] = c.out_dir;
    return j;
}

/// Overwrites only the keys present in j, so file values sit between
/// defaults and flags in precedence.
inline void merge_json(RunConfig& c, const json& j) {
    c.dataset = j.value("dataset", c.dataset);
    c.data_dir = j.value("data_dir", c.data_dir);
    c.train_path = j.value("train_path", c.train_path);
    c.test_path = j.value("test_path", c.test_path);
    c.label_column = j.value("label_column", c.label_column);
    c.strict = j.value("strict", c.strict);
    c.views = j.value("views", c.views);
    c.num_views = j.value("num_views", c.num_views);
    c.sigma = j.value("sigma", c.sigma);
    c.variant = j.value("variant", c.variant);
    c.knn = j.value("knn", c.knn);
    c.alphas = j.value("alphas", c.alphas);
    c.alpha_sparse = j.value("alpha_sparse", c.alpha_sparse);
    c.blend = j.value("blend", c.blend);
    c.basis_dim = j.value("basis_dim", c.basis_dim);
    c.tol = j.value("tol", c.tol);
    c.max_iter = j.value("max_iter", c.max_iter);
    c.eigen_weights = j.value("eigen_weights", c.eigen_weights);
    c.weight_matrix = j.value("weight_matrix", c.weight_matrix);
    c.l1_weight = j.value("l1_weight", c.l1_weight);
    c.k = j.value("k", c.k);
    c.reduction = j.value("reduction", c.reduction);
    c.reductions = j.value("reductions", c.reductions);
    c.classifiers = j.value("classifiers", c.classifiers);
    c.knn_neighbors = j.value("knn_neighbors", c.knn_neighbors);
    c.svm_lambda = j.value("svm_lambda", c.svm_lambda);
    c.svm_epochs = j.value("svm_epochs", c.svm_epochs);
    c.d_embed = j.value("d_embed", c.d_embed);
    c.mass = j.value("mass", c.mass);
    c.drop_trivial = j.value("drop_trivial", c.drop_trivial);
    c.weights_path = j.value("weights_path", c.weights_path);
    c.selection_path = j.value("selection_path", c.selection_path);
    c.roc = j.value("roc", c.roc);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.out_dir = j.value("out_dir", c.out_dir);
}

/// View set per the config: "auto" uses the feature-name families when names
/// look informative, otherwise contiguous blocks.
inline ViewSet make_views(const RunConfig& c, const Dataset& train) {
    if (c.views == "single") return ViewSet::single(train.d());
    if (c.views == "contiguous")
        return ViewSet::contiguous(train.d(), std::min<Index>(c.num_views, train.d()));
    if (c.views == "auto") {
        if (!train.feature_names.empty()) return ViewSet::from_feature_names(train.feature_names);
        return ViewSet::contiguous(train.d(), std::min<Index>(c.num_views, train.d()));
    }
    throw_config("ConfigInvalid", "unknown views mode '" + c.views + "' (use auto|single|contiguous)");
}

} // namespace msle
