#include <catch2/catch_amalgamated.hpp>

#include <msle/data_io.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"

using msle::Index;
using msle::MatrixXd;
using msle::VectorXd;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("msle_io_" + tag + "_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

/// Minimal six-file sensor-dataset layout with 3 features and 2 classes.
void write_mini_har(const fs::path& root) {
    write_text((root / "features.txt").string(), "1 featA\n2 featB\n3 featC\n");
    write_text((root / "activity_labels.txt").string(), "1 WALKING\n2 SITTING\n");
    write_text((root / "train" / "X_train.txt").string(),
               "  0.1 0.2 0.3\n 0.4 0.5 0.6\n-0.1 0.0 0.1\n 1.0 1.0 1.0\n");
    write_text((root / "train" / "y_train.txt").string(), "1\n2\n1\n2\n");
    write_text((root / "test" / "X_test.txt").string(), "0.0 0.0 0.0\n0.9 0.8 0.7\n");
    write_text((root / "test" / "y_test.txt").string(), "2\n1\n");
}

}  // namespace

TEST_CASE("whitespace matrix parser", "[data_io][parse]") {
    const MatrixXd M = msle::detail::parse_matrix_ws("1 2\n\n3\t4\n", "t");
    REQUIRE(M.rows() == 2);
    CHECK(M(0, 1) == 2.0);
    CHECK(M(1, 0) == 3.0);
    CHECK_THROWS_WITH(msle::detail::parse_matrix_ws("1 2\n3\n", "t"),
                      Catch::Matchers::ContainsSubstring("ShapeMismatch"));
    CHECK_THROWS_WITH(msle::detail::parse_matrix_ws("1 x\n", "t"),
                      Catch::Matchers::ContainsSubstring("NonNumericCell"));
    CHECK_THROWS_WITH(msle::detail::parse_matrix_ws("", "t"),
                      Catch::Matchers::ContainsSubstring("ShapeMismatch"));
    CHECK_THROWS_WITH(msle::detail::parse_matrix_ws("1 inf\n", "t"),
                      Catch::Matchers::ContainsSubstring("NonFinite"));
}

TEST_CASE("duplicate names get numbered suffixes", "[data_io][parse]") {
    const std::vector<std::string> a =
        msle::detail::dedup_names({"a", "a", "b"});
    CHECK(a == std::vector<std::string>{"a", "a_1", "b"});
    const std::vector<std::string> b =
        msle::detail::dedup_names({"a", "a", "a_1"});
    CHECK(b == std::vector<std::string>{"a", "a_2", "a_1"});
}

TEST_CASE("delimited loader handles headers, labels, and delimiters", "[data_io][delimited]") {
    TempDir tmp("delim");

    SECTION("comma with header and named label column") {
        write_text(tmp.file("d.csv"), "x,y,label\n1,2,7\n3,4,5\n");
        msle::DelimitedOptions opt;
        opt.label_col_name = "label";
        const msle::Dataset ds = msle::load_delimited(tmp.file("d.csv"), opt);
        REQUIRE(ds.n() == 2);
        REQUIRE(ds.d() == 2);
        CHECK(ds.X(1, 1) == 4.0);
        // labels remap to 0..C-1 by sorted distinct value: 5 -> 0, 7 -> 1
        CHECK(ds.y == std::vector<int>{1, 0});
        CHECK(ds.label_names == std::vector<std::string>{"5", "7"});
        CHECK(ds.feature_names == std::vector<std::string>{"x", "y"});
    }

    SECTION("tab beats comma in delimiter autodetection") {
        // the comma inside the second header cell survives only if the tab won
        write_text(tmp.file("d.tsv"), "a\tb,c\n1\t2.5\n");
        const msle::Dataset ds = msle::load_delimited(tmp.file("d.tsv"));
        REQUIRE(ds.d() == 2);
        CHECK(ds.feature_names[1] == "b,c");
        CHECK(ds.X(0, 1) == 2.5);
    }

    SECTION("headerless numeric data with label by index") {
        write_text(tmp.file("d.txt"), "1 2 0\n3 4 1\n");
        msle::DelimitedOptions opt;
        opt.label_col = 2;
        const msle::Dataset ds = msle::load_delimited(tmp.file("d.txt"), opt);
        CHECK(ds.d() == 2);
        CHECK(ds.y == std::vector<int>{0, 1});
        CHECK(ds.feature_names == std::vector<std::string>{"f0", "f1"});
    }

    SECTION("unlabeled load keeps every column") {
        write_text(tmp.file("d.csv"), "1,2\n3,4\n");
        const msle::Dataset ds = msle::load_delimited(tmp.file("d.csv"));
        CHECK_FALSE(ds.has_labels());
        CHECK(ds.d() == 2);
    }

    SECTION("error paths") {
        write_text(tmp.file("na.csv"), "x,y\n1,NA\n");
        CHECK_THROWS_WITH(msle::load_delimited(tmp.file("na.csv")),
                          Catch::Matchers::ContainsSubstring("NonNumericCell") &&
                              Catch::Matchers::ContainsSubstring("row 2") &&
                              Catch::Matchers::ContainsSubstring("column 2"));
        write_text(tmp.file("rag.csv"), "x,y\n1,2\n3\n");
        CHECK_THROWS_WITH(msle::load_delimited(tmp.file("rag.csv")),
                          Catch::Matchers::ContainsSubstring("RaggedRows"));
        write_text(tmp.file("empty.csv"), "");
        CHECK_THROWS_AS(msle::load_delimited(tmp.file("empty.csv")), msle::Error);
        write_text(tmp.file("hdr.csv"), "x,y\n");
        CHECK_THROWS_WITH(msle::load_delimited(tmp.file("hdr.csv")),
                          Catch::Matchers::ContainsSubstring("no data rows"));
        CHECK_THROWS_WITH(msle::load_delimited(tmp.file("missing.csv")),
                          Catch::Matchers::ContainsSubstring("LayoutNotFound"));
        write_text(tmp.file("lbl.csv"), "x,y\n1,2\n");
        msle::DelimitedOptions opt;
        opt.label_col_name = "nope";
        CHECK_THROWS_AS(msle::load_delimited(tmp.file("lbl.csv"), opt), msle::Error);
    }
}

TEST_CASE("dataset save/load round trip is bitwise", "[data_io][delimited]") {
    TempDir tmp("roundtrip");
    msle::Dataset ds;
    ds.X = oracle::random_matrix(7, 3, 5) * 1e-7;  // exercise %.17g on small magnitudes
    ds.X(0, 0) = 1.0 / 3.0;
    ds.y = {0, 1, 2, 0, 1, 2, 0};
    ds.feature_names = {"alpha", "beta", "gamma"};
    ds.label_names = {"0", "1", "2"};
    msle::save_dataset(ds, tmp.file("rt.csv"));

    msle::DelimitedOptions opt;
    opt.label_col_name = "label";
    const msle::Dataset back = msle::load_delimited(tmp.file("rt.csv"), opt);
    REQUIRE(back.n() == 7);
    REQUIRE(back.d() == 3);
    CHECK((back.X - ds.X).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.y == ds.y);
    CHECK(back.feature_names == ds.feature_names);

    // writing the reloaded dataset reproduces the file byte for byte
    msle::save_dataset(back, tmp.file("rt2.csv"));
    CHECK(read_bytes(tmp.file("rt.csv")) == read_bytes(tmp.file("rt2.csv")));
}

TEST_CASE("mini sensor layout loads with 0-based labels", "[data_io][ucihar]") {
    TempDir tmp("har");
    write_mini_har(tmp.path);
    const auto [train, test] = msle::load_ucihar(tmp.path.string(), false);
    REQUIRE(train.n() == 4);
    REQUIRE(train.d() == 3);
    REQUIRE(test.n() == 2);
    CHECK(train.y == std::vector<int>{0, 1, 0, 1});
    CHECK(test.y == std::vector<int>{1, 0});
    CHECK(train.label_names == std::vector<std::string>{"WALKING", "SITTING"});
    CHECK(train.feature_names == std::vector<std::string>{"featA", "featB", "featC"});
    CHECK(train.split == msle::Split::Train);
    CHECK(test.split == msle::Split::Test);
    CHECK(train.X(1, 2) == 0.6);
}

TEST_CASE("sensor layout resolves the nested directory convention", "[data_io][ucihar]") {
    TempDir tmp("harnest");
    write_mini_har(tmp.path / "UCI HAR Dataset");
    const auto [train, test] = msle::load_ucihar(tmp.path.string(), false);
    CHECK(train.n() == 4);
    CHECK(test.n() == 2);
}

TEST_CASE("sensor layout failures are specific", "[data_io][ucihar]") {
    SECTION("missing file names the path") {
        TempDir tmp("harmiss");
        write_mini_har(tmp.path);
        fs::remove(tmp.path / "test" / "y_test.txt");
        CHECK_THROWS_WITH(msle::load_ucihar(tmp.path.string(), false),
                          Catch::Matchers::ContainsSubstring("LayoutNotFound") &&
                              Catch::Matchers::ContainsSubstring("y_test.txt"));
    }
    SECTION("no layout at all") {
        TempDir tmp("harempty");
        CHECK_THROWS_WITH(msle::load_ucihar(tmp.path.string(), false),
                          Catch::Matchers::ContainsSubstring("LayoutNotFound"));
    }
    SECTION("label count mismatch names the file") {
        TempDir tmp("harcnt");
        write_mini_har(tmp.path);
        write_text((tmp.path / "train" / "y_train.txt").string(), "1\n2\n1\n");
        CHECK_THROWS_WITH(msle::load_ucihar(tmp.path.string(), false),
                          Catch::Matchers::ContainsSubstring("ShapeMismatch"));
    }
    SECTION("label outside the activity table") {
        TempDir tmp("harrange");
        write_mini_har(tmp.path);
        write_text((tmp.path / "train" / "y_train.txt").string(), "1\n2\n1\n9\n");
        CHECK_THROWS_WITH(msle::load_ucihar(tmp.path.string(), false),
                          Catch::Matchers::ContainsSubstring("ShapeMismatch"));
    }
    SECTION("non-numeric label") {
        TempDir tmp("harnan");
        write_mini_har(tmp.path);
        write_text((tmp.path / "train" / "y_train.txt").string(), "1\n2\nx\n2\n");
        CHECK_THROWS_WITH(msle::load_ucihar(tmp.path.string(), false),
                          Catch::Matchers::ContainsSubstring("NonNumericCell"));
    }
    SECTION("strict mode pins the published shape") {
        TempDir tmp("harstrict");
        write_mini_har(tmp.path);
        CHECK_THROWS_WITH(msle::load_ucihar(tmp.path.string(), true),
                          Catch::Matchers::ContainsSubstring("ShapeMismatch"));
    }
}

TEST_CASE("standardization uses train statistics only", "[data_io][standardize]") {
    msle::Dataset train, test;
    train.X = oracle::random_matrix(50, 4, 11);
    train.X.col(2).setConstant(9.0);  // zero variance
    test.X = oracle::random_matrix(10, 4, 12);
    const MatrixXd train_orig = train.X;
    const MatrixXd test_orig = test.X;

    const msle::StandardizeStats st = msle::standardize(train, test);

    for (Index j : {0, 1, 3}) {
        CHECK(train.X.col(j).mean() == Catch::Approx(0.0).margin(1e-10));
        const double var = train.X.col(j).squaredNorm() / 50.0;
        CHECK(var == Catch::Approx(1.0).margin(1e-10));
        CHECK(st.zero_var[static_cast<size_t>(j)] == 0);
        // test transformed with train parameters
        CHECK(test.X(0, j) ==
              Catch::Approx((test_orig(0, j) - st.mean[j]) / st.std[j]).margin(1e-12));
    }
    CHECK(st.zero_var[2] == 1);
    CHECK(train.X.col(2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(test.X.col(2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(st.mean[2] == 9.0);

    // already-standardized data passes through unchanged
    msle::Dataset tr2, te2;
    tr2.X.resize(2, 1);
    tr2.X << -1.0, 1.0;  // population mean 0, variance 1
    te2.X.resize(1, 1);
    te2.X << 0.5;
    msle::standardize(tr2, te2);
    CHECK(tr2.X(0, 0) == Catch::Approx(-1.0).margin(1e-12));
    CHECK(te2.X(0, 0) == Catch::Approx(0.5).margin(1e-12));

    msle::Dataset bad;
    bad.X = oracle::random_matrix(3, 2, 13);
    msle::Dataset bad_test;
    bad_test.X = oracle::random_matrix(3, 3, 14);
    CHECK_THROWS_WITH(msle::standardize(bad, bad_test),
                      Catch::Matchers::ContainsSubstring("ShapeMismatch"));
    (void)train_orig;
}

TEST_CASE("selection container round trip", "[data_io][container]") {
    TempDir tmp("sel");
    msle::SelectionResult res;
    res.scores = oracle::random_matrix(6, 1, 21).col(0).cwiseAbs();
    res.selected = {0, 2, 5};
    res.k = 3;
    res.spectral_basis = oracle::random_matrix(10, 4, 22);
    res.eigenvalues = oracle::random_matrix(4, 1, 23).col(0).cwiseAbs();
    res.component_embed = oracle::random_matrix(6, 1, 24).col(0).cwiseAbs();
    res.component_code = oracle::random_matrix(6, 1, 25).col(0).cwiseAbs();
    res.alphas = VectorXd::Ones(2);
    res.sigmas = {1.5, 2.5};
    res.variant = msle::LapVariant::Symmetric;
    res.seed = 7;
    res.blend = 0.25;
    res.basis_dim = 4;
    res.alpha_sparse = 0.05;
    res.eigen_weights = true;
    res.weight_residual = 1e-7;

    const std::string path = tmp.file("selection.msle");
    msle::save_selection(res, path);
    const msle::SelectionResult back = msle::load_selection(path);

    CHECK((back.scores - res.scores).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.selected == res.selected);
    CHECK(back.k == 3);
    CHECK((back.spectral_basis - res.spectral_basis).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.eigenvalues - res.eigenvalues).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.component_embed - res.component_embed).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.component_code - res.component_code).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.alphas - res.alphas).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.sigmas == res.sigmas);
    CHECK(back.variant == msle::LapVariant::Symmetric);
    CHECK(back.seed == 7);
    CHECK(back.blend == 0.25);
    CHECK(back.basis_dim == 4);
    CHECK(back.alpha_sparse == 0.05);
    CHECK(back.eigen_weights);
    CHECK(back.weight_residual == 1e-7);
    CHECK(back.W_sel.size() == 0);

    // optional weight matrix persists when present
    res.W_sel = oracle::random_matrix(10, 10, 26);
    msle::save_selection(res, tmp.file("sel2.msle"));
    const msle::SelectionResult back2 = msle::load_selection(tmp.file("sel2.msle"));
    CHECK((back2.W_sel - res.W_sel).cwiseAbs().maxCoeff() == 0.0);

    // loading twice produces identical bytes in memory
    const msle::SelectionResult again = msle::load_selection(path);
    CHECK((again.scores - back.scores).cwiseAbs().maxCoeff() == 0.0);

    msle::SelectionResult empty;
    CHECK_THROWS_WITH(msle::save_selection(empty, tmp.file("bad.msle")),
                      Catch::Matchers::ContainsSubstring("ConfigInvalid"));
}

TEST_CASE("container rejects foreign and future files", "[data_io][container]") {
    TempDir tmp("corrupt");
    msle::SelectionResult res;
    res.scores = VectorXd::Ones(3);
    res.selected = {0, 1};
    res.k = 2;
    const std::string path = tmp.file("c.msle");
    msle::save_selection(res, path);

    SECTION("bad magic") {
        std::string bytes = read_bytes(path);
        bytes[0] = 'X';
        write_text(tmp.file("badmagic.msle"), bytes);
        CHECK_THROWS_WITH(msle::detail::read_container(tmp.file("badmagic.msle")),
                          Catch::Matchers::ContainsSubstring("LayoutNotFound"));
    }
    SECTION("future container version") {
        std::string bytes = read_bytes(path);
        bytes[4] = 99;  // little-endian u16 version
        write_text(tmp.file("future.msle"), bytes);
        CHECK_THROWS_WITH(msle::detail::read_container(tmp.file("future.msle")),
                          Catch::Matchers::ContainsSubstring("SchemaVersionMismatch"));
    }
    SECTION("future sidecar schema") {
        write_text(msle::sidecar_path(path),
                   "{\"schema_version\": 99, \"kind\": \"selection\", \"k\": 2}");
        CHECK_THROWS_WITH(msle::load_selection(path),
                          Catch::Matchers::ContainsSubstring("SchemaVersionMismatch"));
    }
    SECTION("missing sidecar") {
        fs::remove(msle::sidecar_path(path));
        CHECK_THROWS_WITH(msle::load_selection(path),
                          Catch::Matchers::ContainsSubstring("LayoutNotFound"));
    }
    SECTION("truncated container") {
        std::string bytes = read_bytes(path);
        bytes.resize(bytes.size() / 2);
        write_text(tmp.file("trunc.msle"), bytes);
        CHECK_THROWS_WITH(msle::detail::read_container(tmp.file("trunc.msle")),
                          Catch::Matchers::ContainsSubstring("truncated"));
    }
}

TEST_CASE("embedding persistence keeps provenance", "[data_io][container]") {
    TempDir tmp("emb");
    msle::Embedding emb;
    emb.Y = oracle::random_matrix(8, 2, 31);
    emb.eigenvalues = oracle::random_matrix(2, 1, 32).col(0).cwiseAbs();
    emb.source_variant = msle::LapVariant::Symmetric;
    emb.mass = msle::Mass::Identity;
    emb.dropped_trivial = false;

    const std::string path = tmp.file("embedding.msle");
    msle::save_embedding(emb, path);
    const msle::Embedding back = msle::load_embedding(path);
    CHECK((back.Y - emb.Y).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.eigenvalues - emb.eigenvalues).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.source_variant == msle::LapVariant::Symmetric);
    CHECK(back.mass == msle::Mass::Identity);
    CHECK_FALSE(back.dropped_trivial);

    // the sidecar is human-readable JSON recording the variant string
    const std::string meta = read_bytes(msle::sidecar_path(path));
    CHECK(meta.find("\"sym\"") != std::string::npos);
    CHECK(meta.find("\"identity\"") != std::string::npos);
}

TEST_CASE("variant names parse in both spellings", "[data_io]") {
    CHECK(msle::variant_from_string("unnormalized") == msle::LapVariant::Unnormalized);
    CHECK(msle::variant_from_string("unnorm") == msle::LapVariant::Unnormalized);
    CHECK(msle::variant_from_string("sym") == msle::LapVariant::Symmetric);
    CHECK(msle::variant_from_string("symmetric") == msle::LapVariant::Symmetric);
    CHECK(msle::variant_from_string("rw") == msle::LapVariant::RandomWalk);
    CHECK(msle::variant_from_string("random_walk") == msle::LapVariant::RandomWalk);
    CHECK_THROWS_WITH(msle::variant_from_string("laplacian"),
                      Catch::Matchers::ContainsSubstring("unnormalized|sym|rw"));
}
