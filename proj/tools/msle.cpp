// msle: multi-view sparse Laplacian eigenmaps feature selection, batch CLI.
//
// Subcommands: select, sweep, embed, eval, fetch-ucihar.
// Exit codes: 0 success, 2 config/usage error, 3 data error, 4 numerical failure.
// Every run dumps its resolved config beside the outputs; failures leave a
// machine-readable error.json in the output directory.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msle/msle.hpp"

#include "fetch_util.hpp"

namespace fs = std::filesystem;
using msle::RunConfig;

namespace {

const char* kind_name(msle::ErrorKind k) {
    switch (k) {
        case msle::ErrorKind::Config: return "config";
        case msle::ErrorKind::Data: return "data";
        case msle::ErrorKind::Numeric: return "numeric";
    }
    return "numeric";
}

int exit_code(msle::ErrorKind k) {
    switch (k) {
        case msle::ErrorKind::Config: return 2;
        case msle::ErrorKind::Data: return 3;
        case msle::ErrorKind::Numeric: return 4;
    }
    return 4;
}

void write_error_doc(const std::string& out_dir, const std::string& code,
                     const std::string& kind, const std::string& message) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    std::ofstream out(fs::path(out_dir) / "error.json", std::ios::binary);
    if (!out) return;
    msle::json j;
    j["code"] = code;
    j["kind"] = kind;
    j["message"] = message;
    out << j.dump(2) << '\n';
}

int run_guarded(const RunConfig& rc, const std::function<int()>& body) {
    try {
        return body();
    } catch (const msle::Error& e) {
        std::cerr << "[msle] error: " << e.what() << "\n";
        write_error_doc(rc.out_dir, e.code(), kind_name(e.kind()), e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "[msle] unexpected error: " << e.what() << "\n";
        write_error_doc(rc.out_dir, "Internal", "numeric", e.what());
        return 4;
    }
}

void dump_resolved_config(const RunConfig& rc) {
    fs::create_directories(rc.out_dir);
    const fs::path p = fs::path(rc.out_dir) / "resolved_config.json";
    std::ofstream out(p, std::ios::binary);
    if (!out) msle::throw_data("LayoutNotFound", "cannot write " + p.string());
    out << msle::to_json(rc).dump(2) << '\n';
}

msle::Mass mass_from_string(const std::string& s) {
    if (s == "identity") return msle::Mass::Identity;
    if (s == "degree") return msle::Mass::Degree;
    msle::throw_config("ConfigInvalid", "unknown mass '" + s + "' (use identity|degree)");
}

std::string fmt_pct(double r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", r);
    return buf;
}

// ---------------------------------------------------------------------------
// dataset plumbing
// ---------------------------------------------------------------------------

msle::Dataset load_one(const RunConfig& rc, const std::string& path, bool want_labels) {
    msle::DelimitedOptions opt;
    if (want_labels) opt.label_col_name = rc.label_column;
    return msle::load_delimited(path, opt);
}

std::pair<msle::Dataset, msle::Dataset> load_train_test(const RunConfig& rc, bool need_test) {
    if (rc.dataset == "ucihar") {
        const std::string root = rc.resolved_data_dir();
        if (root.empty())
            msle::throw_config("ConfigInvalid",
                               "UCI-HAR root not set: pass --data-dir or set MSLE_DATA_DIR");
        return msle::load_ucihar(root, rc.strict);
    }
    if (rc.dataset == "delimited") {
        if (rc.train_path.empty())
            msle::throw_config("ConfigInvalid", "--train is required with --dataset delimited");
        msle::Dataset train = load_one(rc, rc.train_path, true);
        msle::Dataset test;
        if (!rc.test_path.empty()) {
            test = load_one(rc, rc.test_path, true);
        } else if (need_test) {
            msle::throw_config("ConfigInvalid", "--test is required for this command");
        }
        return {std::move(train), std::move(test)};
    }
    msle::throw_config("ConfigInvalid",
                       "unknown dataset '" + rc.dataset + "' (use ucihar|delimited)");
}

msle::Index resolve_k(const RunConfig& rc, msle::Index d) {
    if (rc.k > 0) return static_cast<msle::Index>(rc.k);
    if (rc.reduction >= 0) return msle::reduction_to_k(d, rc.reduction);
    msle::throw_config("ConfigInvalid", "pass --k or --reduction to size the selection");
}

// ---------------------------------------------------------------------------
// select
// ---------------------------------------------------------------------------

void write_selected_features(const msle::SelectionResult& res,
                             const std::vector<std::string>& names, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) msle::throw_data("LayoutNotFound", "cannot write " + path);
    out << "rank\tfeature\tname\tscore\n";
    char buf[64];
    std::vector<msle::Index> ranked = msle::select_top_k(res.scores, res.k);
    std::sort(ranked.begin(), ranked.end(), [&](msle::Index a, msle::Index b) {
        if (res.scores[a] != res.scores[b]) return res.scores[a] > res.scores[b];
        return a < b;
    });
    for (size_t r = 0; r < ranked.size(); ++r) {
        const msle::Index f = ranked[r];
        std::snprintf(buf, sizeof buf, "%.10g", res.scores[f]);
        out << r + 1 << '\t' << f << '\t'
            << (f < static_cast<msle::Index>(names.size()) ? names[static_cast<size_t>(f)]
                                                           : "f" + std::to_string(f))
            << '\t' << buf << '\n';
    }
    if (!out) msle::throw_data("LayoutNotFound", "write failed for " + path);
}

void write_scores(const msle::SelectionResult& res, const std::vector<std::string>& names,
                  const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) msle::throw_data("LayoutNotFound", "cannot write " + path);
    out << "feature\tname\tscore\tembed_component\tcode_component\n";
    char buf[160];
    for (msle::Index f = 0; f < res.scores.size(); ++f) {
        std::snprintf(buf, sizeof buf, "%.10g\t%.10g\t%.10g", res.scores[f],
                      res.component_embed[f], res.component_code[f]);
        out << f << '\t'
            << (f < static_cast<msle::Index>(names.size()) ? names[static_cast<size_t>(f)]
                                                           : "f" + std::to_string(f))
            << '\t' << buf << '\n';
    }
    if (!out) msle::throw_data("LayoutNotFound", "write failed for " + path);
}

int cmd_select(const RunConfig& rc) {
    dump_resolved_config(rc);
    auto [train, test] = load_train_test(rc, false);
    (void)test;

    const msle::ViewSet views = msle::make_views(rc, train);
    const msle::Index k = resolve_k(rc, train.d());

    msle::PhaseTimer timer;
    msle::MsleConfig mc = rc.msle_config();
    mc.timer = &timer;

    const msle::SelectionResult res = msle::run_msle(train.X, views, k, mc);

    const fs::path dir(rc.out_dir);
    msle::save_selection(res, (dir / "selection.msle").string());
    write_selected_features(res, train.feature_names, (dir / "selected_features.tsv").string());
    write_scores(res, train.feature_names, (dir / "scores.tsv").string());
    timer.write_tsv((dir / "phase_times.tsv").string());

    timer.print();
    std::cout << "selected " << res.selected.size() << " of " << train.d() << " features ("
              << views.m() << " views) -> " << (dir / "selection.msle").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

void write_reports(const std::vector<msle::SweepPoint>& points,
                   const std::vector<std::string>& labels, const fs::path& dir, bool roc) {
    for (const msle::SweepPoint& pt : points)
        for (const msle::MetricsReport& rep : pt.reports) {
            const std::string stem = rep.classifier + "_r" + fmt_pct(pt.reduction);
            msle::write_confusion(rep, labels, (dir / ("confusion_" + stem + ".tsv")).string());
            if (roc) msle::write_roc(rep, (dir / ("roc_" + stem + ".tsv")).string());
        }
}

int cmd_sweep(const RunConfig& rc) {
    dump_resolved_config(rc);
    auto [train, test] = load_train_test(rc, true);

    const msle::ViewSet views = msle::make_views(rc, train);

    msle::PhaseTimer timer;
    msle::MsleConfig mc = rc.msle_config();
    mc.timer = &timer;

    const msle::SweepResult sweep =
        msle::sweep_reduction(train, test, views, mc, rc.reductions, rc.classifiers,
                              static_cast<int>(rc.knn_neighbors), rc.svm_config());

    const fs::path dir(rc.out_dir);
    msle::write_sweep_grid(sweep.points, (dir / "sweep_grid.tsv").string());
    msle::write_metrics_table(sweep.points, (dir / "metrics.tsv").string());
    write_reports(sweep.points, test.label_names, dir, rc.roc);
    msle::save_selection(sweep.selection, (dir / "selection.msle").string());
    timer.write_tsv((dir / "phase_times.tsv").string());

    timer.print();
    for (const msle::SweepPoint& pt : sweep.points)
        for (const msle::MetricsReport& rep : pt.reports)
            std::printf("r=%-5g k=%-5lld %-10s acc=%.4f\n", pt.reduction,
                        static_cast<long long>(pt.k), rep.classifier.c_str(), rep.accuracy);
    std::cout << "sweep tables -> " << (dir / "sweep_grid.tsv").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// embed
// ---------------------------------------------------------------------------

msle::SimilarityGraph graph_from_weights_file(const std::string& path) {
    const std::string text = msle::detail::read_file(path);
    msle::MatrixXd W = msle::detail::parse_matrix_ws(text, path);
    if (W.rows() != W.cols())
        msle::throw_data("ShapeMismatch", path + ": weight matrix must be square");
    if (((W - W.transpose()).array().abs() > 1e-12 * (1.0 + W.array().abs().maxCoeff())).any())
        msle::throw_data("ShapeMismatch", path + ": weight matrix must be symmetric");
    W = ((W + W.transpose()) / 2.0).eval();
    msle::SimilarityGraph g;
    g.n = W.rows();
    g.weights = msle::GraphMatrix(std::move(W));
    return g;
}

int cmd_embed(const RunConfig& rc) {
    dump_resolved_config(rc);

    const msle::LapVariant variant = msle::variant_from_string(rc.variant);
    const msle::Mass mass = mass_from_string(rc.mass);

    msle::SimilarityGraph g;
    if (!rc.weights_path.empty()) {
        g = graph_from_weights_file(rc.weights_path);
    } else {
        msle::Dataset data;
        if (rc.dataset == "ucihar") {
            auto [train, test] = load_train_test(rc, false);
            (void)test;
            data = std::move(train);
        } else {
            if (rc.train_path.empty())
                msle::throw_config("ConfigInvalid",
                                   "pass --input (samples) or --weights (similarity matrix)");
            msle::DelimitedOptions opt; // unlabeled point cloud
            data = msle::load_delimited(rc.train_path, opt);
        }
        msle::GraphConfig gc;
        gc.sigma = rc.sigma;
        gc.variant = variant;
        gc.knn = rc.knn;
        gc.seed = rc.seed;
        g = msle::build_graph(data.X, gc);
    }

    const msle::GraphLaplacian lap = msle::laplacian(g, variant);
    const msle::Embedding emb =
        msle::laplacian_eigenmaps(lap, rc.d_embed, rc.drop_trivial, mass);

    const fs::path dir(rc.out_dir);
    msle::save_embedding(emb, (dir / "embedding.msle").string());
    {
        const std::string path = (dir / "eigenvalues.tsv").string();
        std::ofstream out(path, std::ios::binary);
        if (!out) msle::throw_data("LayoutNotFound", "cannot write " + path);
        out << "index\teigenvalue\n";
        char buf[48];
        for (msle::Index i = 0; i < emb.eigenvalues.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.12g", emb.eigenvalues[i]);
            out << i << '\t' << buf << '\n';
        }
        if (!out) msle::throw_data("LayoutNotFound", "write failed for " + path);
    }

    std::cout << "embedded " << emb.Y.rows() << " points into " << emb.Y.cols()
              << " dims; eigenvalues:";
    for (msle::Index i = 0; i < emb.eigenvalues.size(); ++i)
        std::printf(" %.10g", emb.eigenvalues[i]);
    std::cout << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

int cmd_eval(const RunConfig& rc) {
    dump_resolved_config(rc);
    auto [train, test] = load_train_test(rc, true);
    const msle::Index d = train.d();

    msle::SweepPoint pt;
    if (!rc.selection_path.empty()) {
        const msle::SelectionResult sel = msle::load_selection(rc.selection_path);
        if (sel.scores.size() != d)
            msle::throw_data("ShapeMismatch", "selection was made on " +
                                                  std::to_string(sel.scores.size()) +
                                                  " features, dataset has " + std::to_string(d));
        const msle::Index k = rc.k > 0 || rc.reduction >= 0 ? resolve_k(rc, d) : sel.k;
        pt.k = std::min(k, d);
        pt.selected = msle::select_top_k(sel.scores, pt.k);
        pt.reduction = 100.0 * (1.0 - static_cast<double>(pt.k) / static_cast<double>(d));
    } else {
        pt.k = d;
        pt.selected.resize(static_cast<size_t>(d));
        std::iota(pt.selected.begin(), pt.selected.end(), msle::Index{0});
        pt.reduction = 0.0;
    }

    const msle::Dataset tr_sub = msle::subset_columns(train, pt.selected);
    const msle::Dataset te_sub = msle::subset_columns(test, pt.selected);

    msle::Dataset tr_std = train, te_std = test;
    const bool want_svm = std::find(rc.classifiers.begin(), rc.classifiers.end(),
                                    "svm_linear") != rc.classifiers.end();
    if (want_svm) msle::standardize(tr_std, te_std);

    for (const std::string& c : rc.classifiers) {
        msle::MetricsReport rep;
        if (c == "knn") {
            rep = msle::classify_knn(tr_sub, te_sub, static_cast<int>(rc.knn_neighbors));
        } else if (c == "gnb") {
            rep = msle::classify_gnb(tr_sub, te_sub);
        } else if (c == "svm_linear") {
            rep = msle::classify_linear_svm(msle::subset_columns(tr_std, pt.selected),
                                            msle::subset_columns(te_std, pt.selected),
                                            rc.svm_config());
        } else {
            msle::throw_config("ConfigInvalid",
                               "unknown classifier '" + c + "' (use knn|gnb|svm_linear)");
        }
        rep.reduction_percent = pt.reduction;
        pt.reports.push_back(std::move(rep));
    }

    const fs::path dir(rc.out_dir);
    msle::write_metrics_table({pt}, (dir / "metrics.tsv").string());
    write_reports({pt}, test.label_names, dir, rc.roc);

    for (const msle::MetricsReport& rep : pt.reports)
        std::printf("k=%-5lld %-10s acc=%.4f macro_f1=%.4f\n", static_cast<long long>(pt.k),
                    rep.classifier.c_str(), rep.accuracy, rep.macro_f1);
    return 0;
}

// ---------------------------------------------------------------------------
// fetch-ucihar
// ---------------------------------------------------------------------------

struct FetchArgs {
    std::string url =
        "https://archive.ics.uci.edu/static/public/240/"
        "human+activity+recognition+using+smartphones.zip";
    std::string dest = "data";
    std::string sha256;    // expected digest; empty = print only
    bool insecure = false; // skip TLS certificate verification
    bool keep_zip = false;
};

int cmd_fetch(const RunConfig& rc, const FetchArgs& fa) {
    std::string dest = fa.dest;
    if (dest == "data" && !rc.resolved_data_dir().empty()) dest = rc.resolved_data_dir();
    fs::create_directories(dest);

    const std::string zip_path = (fs::path(dest) / "ucihar.zip").string();
    std::cout << "downloading " << fa.url << "\n";
    msle::fetch::download(fa.url, zip_path, !fa.insecure);

    const std::string digest = msle::fetch::sha256_file(zip_path);
    std::cout << "sha256 " << digest << "\n";
    if (!fa.sha256.empty() && digest != fa.sha256)
        msle::throw_data("ChecksumMismatch",
                         "expected sha256 " + fa.sha256 + ", downloaded file has " + digest);

    msle::fetch::extract_zip(zip_path, dest);
    // the official archive nests the dataset as a second zip
    for (const auto& entry : fs::recursive_directory_iterator(dest)) {
        if (entry.is_regular_file() && entry.path().extension() == ".zip" &&
            entry.path().string() != zip_path) {
            msle::fetch::extract_zip(entry.path().string(), dest);
        }
    }
    if (!fa.keep_zip) fs::remove(zip_path);

    auto [train, test] = msle::load_ucihar(dest, false);
    std::cout << "extracted: " << train.n() << " train + " << test.n() << " test samples, "
              << train.d() << " features\n";
    std::cout << "dataset root: " << dest << " (pass as --data-dir or set MSLE_DATA_DIR)\n";
    return 0;
}

std::string find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return argv[i + 1];
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return {};
}

} // namespace

int main(int argc, char** argv) {
    RunConfig rc;

    // config file sits between built-in defaults and flags in precedence, so
    // merge it before binding the flag targets
    const std::string config_path = find_config_arg(argc, argv);
    if (!config_path.empty()) {
        try {
            std::ifstream in(config_path);
            if (!in) msle::throw_config("ConfigInvalid", "cannot open config " + config_path);
            msle::json j = msle::json::parse(in, nullptr, true, true);
            msle::merge_json(rc, j);
        } catch (const msle::Error& e) {
            std::cerr << "[msle] error: " << e.what() << "\n";
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "[msle] error: bad config file " << config_path << ": " << e.what()
                      << "\n";
            return 2;
        }
    }

    CLI::App app{"multi-view sparse Laplacian eigenmaps feature selection"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.set_version_flag("--version", "msle 1.0.0");

    std::string config_dummy;
    FetchArgs fa;

    const auto add_common = [&](CLI::App* sc) {
        sc->add_option("--config", config_dummy, "JSON config file (flags override it)");
        sc->add_option("--out-dir", rc.out_dir, "output directory");
        sc->add_option("--seed", rc.seed, "RNG seed for every stochastic step");
        sc->add_option("--threads", rc.threads, "worker threads (0 = logical cores)");
    };
    const auto add_dataset = [&](CLI::App* sc) {
        sc->add_option("--dataset", rc.dataset, "dataset kind: ucihar|delimited");
        sc->add_option("--data-dir", rc.data_dir, "UCI-HAR root (default $MSLE_DATA_DIR)");
        sc->add_option("--train", rc.train_path, "training table (delimited mode)");
        sc->add_option("--test", rc.test_path, "test table (delimited mode)");
        sc->add_option("--label-col", rc.label_column, "label column name");
        sc->add_flag("--strict,!--no-strict", rc.strict, "enforce published UCI-HAR counts");
    };
    const auto add_graph = [&](CLI::App* sc) {
        sc->add_option("--sigma", rc.sigma, "kernel bandwidth (0 = median heuristic)");
        sc->add_option("--variant", rc.variant, "Laplacian variant: unnormalized|sym|rw");
        sc->add_option("--knn", rc.knn, "neighbors for sparse graphs (0 = dense when small)");
    };
    const auto add_views = [&](CLI::App* sc) {
        sc->add_option("--views", rc.views, "view grouping: auto|single|contiguous");
        sc->add_option("--num-views", rc.num_views, "view count for contiguous grouping");
    };
    const auto add_solver = [&](CLI::App* sc) {
        sc->add_option("--alphas", rc.alphas, "per-view Laplacian weights (default all 1)")
            ->delimiter(',');
        sc->add_option("--alpha-sparse", rc.alpha_sparse, "l1 weight of the coding step");
        sc->add_option("--blend", rc.blend, "score mix: (1-b)*embedding + b*coding");
        sc->add_option("--basis-dim", rc.basis_dim, "eigenbasis size (0 = min(k, 64, n-2))");
        sc->add_option("--tol", rc.tol, "APG relative objective tolerance");
        sc->add_option("--max-iter", rc.max_iter, "APG iteration cap");
        sc->add_flag("--eigen-weights", rc.eigen_weights,
                     "weight coding columns by their eigenvalues");
        sc->add_flag("--weight-matrix", rc.weight_matrix,
                     "also solve the n x n self-representation weights");
        sc->add_option("--l1-weight", rc.l1_weight, "l1 penalty of the weight-matrix solve");
    };
    const auto add_classifiers = [&](CLI::App* sc) {
        sc->add_option("--classifiers", rc.classifiers, "any of knn,gnb,svm_linear")
            ->delimiter(',');
        sc->add_option("--knn-neighbors", rc.knn_neighbors, "k for the kNN classifier");
        sc->add_option("--svm-lambda", rc.svm_lambda, "SVM regularization strength");
        sc->add_option("--svm-epochs", rc.svm_epochs, "SVM training epochs");
        sc->add_flag("--roc", rc.roc, "also write per-class ROC point tables");
    };

    CLI::App* sel = app.add_subcommand("select", "score features and write the top-k selection");
    add_common(sel);
    add_dataset(sel);
    add_views(sel);
    add_graph(sel);
    add_solver(sel);
    sel->add_option("--k", rc.k, "features to keep");
    sel->add_option("--reduction", rc.reduction, "percent of features to remove instead of --k");

    CLI::App* swp = app.add_subcommand(
        "sweep", "evaluate classifiers across a grid of reduction percentages");
    add_common(swp);
    add_dataset(swp);
    add_views(swp);
    add_graph(swp);
    add_solver(swp);
    add_classifiers(swp);
    swp->add_option("--reductions", rc.reductions, "reduction percentages (features removed)")
        ->delimiter(',');

    CLI::App* emb = app.add_subcommand("embed", "spectral embedding of a dataset or graph");
    add_common(emb);
    add_dataset(emb);
    add_graph(emb);
    emb->add_option("--input", rc.train_path, "delimited sample table (no labels needed)");
    emb->add_option("--weights", rc.weights_path, "whitespace-separated similarity matrix file");
    emb->add_option("--d-embed", rc.d_embed, "embedding dimensions");
    emb->add_option("--mass", rc.mass, "eigenproblem mass: identity|degree");
    emb->add_flag("--drop-trivial,!--keep-trivial", rc.drop_trivial,
                  "drop the constant zero-eigenvalue vector");

    CLI::App* evl = app.add_subcommand("eval", "classify with a saved selection (or all features)");
    add_common(evl);
    add_dataset(evl);
    add_classifiers(evl);
    evl->add_option("--selection", rc.selection_path, "selection container from `select`");
    evl->add_option("--k", rc.k, "override: keep top-k of the saved scores");
    evl->add_option("--reduction", rc.reduction, "override: percent of features to remove");

    CLI::App* fch = app.add_subcommand("fetch-ucihar", "download and unpack the UCI-HAR dataset");
    add_common(fch);
    fch->add_option("--url", fa.url, "archive URL");
    fch->add_option("--dest", fa.dest, "extraction directory");
    fch->add_option("--sha256", fa.sha256, "expected zip digest (verified when given)");
    fch->add_flag("--insecure", fa.insecure, "skip TLS certificate verification");
    fch->add_flag("--keep-zip", fa.keep_zip, "keep the downloaded archive");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    msle::set_threads(static_cast<int>(rc.threads));

    if (app.got_subcommand(sel)) return run_guarded(rc, [&] { return cmd_select(rc); });
    if (app.got_subcommand(swp)) return run_guarded(rc, [&] { return cmd_sweep(rc); });
    if (app.got_subcommand(emb)) return run_guarded(rc, [&] { return cmd_embed(rc); });
    if (app.got_subcommand(evl)) return run_guarded(rc, [&] { return cmd_eval(rc); });
    if (app.got_subcommand(fch)) return run_guarded(rc, [&] { return cmd_fetch(rc, fa); });
    return 2;
}
