#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "msle/error.hpp"
#include "msle/multiview.hpp"
#include "msle/spectral.hpp"

namespace msle {

namespace fs = std::filesystem;
using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

enum class Split { Train, Test, Unsplit };

inline const char* to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Test: return "test";
        case Split::Unsplit: return "unsplit";
    }
    return "?";
}

struct Dataset {
    MatrixXd X;                               // n x d, row = sample
    std::vector<int> y;                       // empty when unlabeled; 0..C-1 otherwise
    std::vector<std::string> feature_names;   // length d
    std::vector<std::string> label_names;     // class id -> name
    Split split = Split::Unsplit;

    Index n() const { return X.rows(); }
    Index d() const { return X.cols(); }
    bool has_labels() const { return !y.empty(); }
    int num_classes() const {
        if (!label_names.empty()) return static_cast<int>(label_names.size());
        int c = 0;
        for (int v : y) c = std::max(c, v + 1);
        return c;
    }
};

namespace detail {

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw_data("LayoutNotFound", "cannot open " + p.string());
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

inline std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        size_t len = end - pos;
        if (len > 0 && text[pos + len - 1] == '\r') --len;
        lines.emplace_back(text, pos, len);
        pos = end + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

/// Whitespace-separated doubles, one sample per line, fixed width.
inline MatrixXd parse_matrix_ws(const std::string& text, const std::string& fname) {
    const std::vector<std::string> lines = split_lines(text);
    if (lines.empty()) throw_data("ShapeMismatch", fname + ": empty file");
    std::vector<std::vector<double>> rows;
    rows.reserve(lines.size());
    for (size_t li = 0; li < lines.size(); ++li) {
        const std::string& line = lines[li];
        std::vector<double> row;
        const char* p = line.c_str();
        const char* end = p + line.size();
        while (p < end) {
            while (p < end && (*p == ' ' || *p == '\t')) ++p;
            if (p >= end) break;
            char* after = nullptr;
            const double v = std::strtod(p, &after);
            if (after == p)
                throw_data("NonNumericCell", fname + ": line " + std::to_string(li + 1) +
                                                 ", token " + std::to_string(row.size() + 1));
            row.push_back(v);
            p = after;
        }
        if (row.empty()) continue;
        if (!rows.empty() && row.size() != rows.front().size())
            throw_data("ShapeMismatch", fname + ": line " + std::to_string(li + 1) + " has " +
                                            std::to_string(row.size()) + " values, expected " +
                                            std::to_string(rows.front().size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw_data("ShapeMismatch", fname + ": no data rows");
    MatrixXd X(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows.front().size(); ++j)
            X(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    if (!X.allFinite()) throw_data("NonFinite", fname + ": non-finite value");
    return X;
}

inline std::vector<std::string> dedup_names(std::vector<std::string> names) {
    std::set<std::string> used(names.begin(), names.end());
    std::map<std::string, int> count;
    std::map<std::string, int> suffix;
    for (const std::string& s : names) ++count[s];
    for (std::string& s : names) {
        if (count[s] <= 1) continue;
        int& k = suffix[s];
        if (k == 0) {  // first occurrence keeps the base name
            ++k;
            continue;
        }
        std::string cand;
        do {
            cand = s + "_" + std::to_string(k++);
        } while (used.count(cand));
        used.insert(cand);
        s = std::move(cand);
    }
    return names;
}

} // namespace detail

// ---------------------------------------------------------------------------
// UCI-HAR loader
// ---------------------------------------------------------------------------

/// Loads the standard UCI-HAR directory layout. The root may be the dataset
/// directory itself or a parent containing "UCI HAR Dataset". Strict mode
/// pins the published shape (7352/2947 samples, 561 features, 6 classes).
inline std::pair<Dataset, Dataset> load_ucihar(const std::string& root, bool strict = true) {
    fs::path base;
    for (const fs::path cand :
         {fs::path(root), fs::path(root) / "UCI HAR Dataset",
          fs::path(root) / "UCI HAR Dataset" / "UCI HAR Dataset"}) {
        if (fs::exists(cand / "train" / "X_train.txt")) {
            base = cand;
            break;
        }
    }
    if (base.empty())
        throw_data("LayoutNotFound",
                   "no UCI-HAR layout (train/X_train.txt) under " + root);

    const fs::path req[] = {base / "train" / "X_train.txt", base / "train" / "y_train.txt",
                            base / "test" / "X_test.txt",   base / "test" / "y_test.txt",
                            base / "features.txt",          base / "activity_labels.txt"};
    for (const fs::path& p : req)
        if (!fs::exists(p)) throw_data("LayoutNotFound", "missing " + p.string());

    // feature names: "<index> <name>" per line
    std::vector<std::string> names;
    for (const std::string& line : detail::split_lines(detail::read_file(base / "features.txt"))) {
        const size_t sp = line.find(' ');
        if (sp == std::string::npos)
            throw_data("ShapeMismatch", "features.txt: malformed line '" + line + "'");
        names.push_back(line.substr(sp + 1));
    }
    names = detail::dedup_names(std::move(names));

    // activity labels: "<id> <NAME>", ids 1..C
    std::map<int, std::string> acts;
    for (const std::string& line :
         detail::split_lines(detail::read_file(base / "activity_labels.txt"))) {
        const size_t sp = line.find(' ');
        if (sp == std::string::npos)
            throw_data("ShapeMismatch", "activity_labels.txt: malformed line '" + line + "'");
        acts[std::stoi(line.substr(0, sp))] = line.substr(sp + 1);
    }
    std::vector<std::string> label_names;
    int next_id = 1;
    for (const auto& [id, name] : acts) {
        if (id != next_id++)
            throw_data("ShapeMismatch", "activity_labels.txt: ids not contiguous from 1");
        label_names.push_back(name);
    }
    const int C = static_cast<int>(label_names.size());

    auto load_split = [&](const char* dir, const char* xs, const char* ys, Split tag) {
        Dataset ds;
        const fs::path xp = base / dir / xs;
        ds.X = detail::parse_matrix_ws(detail::read_file(xp), xp.filename().string());
        const fs::path yp = base / dir / ys;
        for (const std::string& line : detail::split_lines(detail::read_file(yp))) {
            char* after = nullptr;
            const long v = std::strtol(line.c_str(), &after, 10);
            if (after == line.c_str())
                throw_data("NonNumericCell", yp.filename().string() + ": bad label '" + line + "'");
            if (v < 1 || v > C)
                throw_data("ShapeMismatch",
                           yp.filename().string() + ": label " + std::to_string(v) +
                               " outside 1.." + std::to_string(C));
            ds.y.push_back(static_cast<int>(v - 1));
        }
        if (static_cast<Index>(ds.y.size()) != ds.X.rows())
            throw_data("ShapeMismatch", std::string(xs) + "/" + ys + ": row counts differ (" +
                                            std::to_string(ds.X.rows()) + " vs " +
                                            std::to_string(ds.y.size()) + ")");
        ds.feature_names = names;
        ds.label_names = label_names;
        ds.split = tag;
        return ds;
    };

    Dataset train = load_split("train", "X_train.txt", "y_train.txt", Split::Train);
    Dataset test = load_split("test", "X_test.txt", "y_test.txt", Split::Test);

    if (train.X.cols() != static_cast<Index>(names.size()))
        throw_data("ShapeMismatch", "X_train.txt: width " + std::to_string(train.X.cols()) +
                                        " != features.txt count " +
                                        std::to_string(names.size()));
    if (test.X.cols() != train.X.cols())
        throw_data("ShapeMismatch", "X_test.txt: width differs from X_train.txt");
    if (strict) {
        if (train.X.rows() != 7352)
            throw_data("ShapeMismatch",
                       "X_train.txt: expected 7352 rows, got " + std::to_string(train.X.rows()));
        if (test.X.rows() != 2947)
            throw_data("ShapeMismatch",
                       "X_test.txt: expected 2947 rows, got " + std::to_string(test.X.rows()));
        if (train.X.cols() != 561)
            throw_data("ShapeMismatch",
                       "X_train.txt: expected 561 columns, got " + std::to_string(train.X.cols()));
        if (C != 6)
            throw_data("ShapeMismatch",
                       "activity_labels.txt: expected 6 classes, got " + std::to_string(C));
    }
    return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// Generic delimited tables
// ---------------------------------------------------------------------------

struct DelimitedOptions {
    char delimiter = '\0';        // 0 = auto-detect (tab, comma, else whitespace)
    int header = -1;              // -1 auto, 0 none, 1 present
    int label_col = -1;           // column index of the labels, -1 = none
    std::string label_col_name;   // or by header name
};

inline Dataset load_delimited(const std::string& path, const DelimitedOptions& opt = {}) {
    const std::string text = detail::read_file(path);
    std::vector<std::string> lines = detail::split_lines(text);
    if (lines.empty()) throw_data("ShapeMismatch", path + ": empty file");

    char delim = opt.delimiter;
    if (delim == '\0') {
        if (lines[0].find('\t') != std::string::npos) delim = '\t';
        else if (lines[0].find(',') != std::string::npos) delim = ',';
        else delim = ' ';
    }

    auto split_row = [delim](const std::string& line) {
        std::vector<std::string> cells;
        if (delim == ' ') {
            size_t i = 0;
            while (i < line.size()) {
                while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
                if (i >= line.size()) break;
                size_t j = i;
                while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
                cells.push_back(line.substr(i, j - i));
                i = j;
            }
        } else {
            size_t pos = 0;
            while (true) {
                const size_t end = line.find(delim, pos);
                cells.push_back(line.substr(pos, end == std::string::npos ? end : end - pos));
                if (end == std::string::npos) break;
                pos = end + 1;
            }
        }
        return cells;
    };
    auto numeric = [](const std::string& s, double& out) {
        if (s.empty()) return false;
        char* after = nullptr;
        out = std::strtod(s.c_str(), &after);
        return after == s.c_str() + s.size();
    };

    std::vector<std::string> first = split_row(lines[0]);
    bool header = opt.header == 1;
    if (opt.header == -1) {
        double tmp;
        header = std::any_of(first.begin(), first.end(),
                             [&](const std::string& c) { return !numeric(c, tmp); });
    }

    std::vector<std::string> names;
    size_t start = 0;
    if (header) {
        names = first;
        start = 1;
        if (lines.size() == 1) throw_data("ShapeMismatch", path + ": header but no data rows");
    }

    int label_col = opt.label_col;
    if (!opt.label_col_name.empty()) {
        if (!header) throw_config("ConfigInvalid", "label column by name requires a header");
        const auto it = std::find(names.begin(), names.end(), opt.label_col_name);
        if (it == names.end())
            throw_config("ConfigInvalid", "no column named '" + opt.label_col_name + "'");
        label_col = static_cast<int>(it - names.begin());
    }

    const size_t width_full = header ? names.size() : first.size();
    if (label_col >= static_cast<int>(width_full))
        throw_config("ConfigInvalid", "label column index out of range");
    const size_t nrows = lines.size() - start;
    const size_t d = width_full - (label_col >= 0 ? 1 : 0);
    if (d == 0) throw_data("ShapeMismatch", path + ": no feature columns");

    Dataset ds;
    ds.X.resize(static_cast<Index>(nrows), static_cast<Index>(d));
    std::vector<double> raw_labels;
    for (size_t r = 0; r < nrows; ++r) {
        const std::vector<std::string> cells = split_row(lines[start + r]);
        if (cells.size() != width_full)
            throw_data("RaggedRows", path + ": line " + std::to_string(start + r + 1) + " has " +
                                         std::to_string(cells.size()) + " cells, expected " +
                                         std::to_string(width_full));
        Index cj = 0;
        for (size_t c = 0; c < cells.size(); ++c) {
            double v;
            if (!numeric(cells[c], v))
                throw_data("NonNumericCell", path + ": row " + std::to_string(start + r + 1) +
                                                 ", column " + std::to_string(c + 1) + ": '" +
                                                 cells[c] + "'");
            if (static_cast<int>(c) == label_col)
                raw_labels.push_back(v);
            else
                ds.X(static_cast<Index>(r), cj++) = v;
        }
    }
    if (!ds.X.allFinite()) throw_data("NonFinite", path + ": non-finite value");

    if (label_col >= 0) {
        // remap labels to 0..C-1 by sorted distinct value
        std::vector<double> uniq = raw_labels;
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        for (double v : raw_labels) {
            const auto it = std::lower_bound(uniq.begin(), uniq.end(), v);
            ds.y.push_back(static_cast<int>(it - uniq.begin()));
        }
        char buf[64];
        for (double v : uniq) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            ds.label_names.emplace_back(buf);
        }
    }

    if (header) {
        for (size_t c = 0; c < names.size(); ++c)
            if (static_cast<int>(c) != label_col) ds.feature_names.push_back(names[c]);
        ds.feature_names = detail::dedup_names(std::move(ds.feature_names));
    } else {
        for (size_t c = 0; c < d; ++c) ds.feature_names.push_back("f" + std::to_string(c));
    }
    return ds;
}

/// Writes a delimited table that load_delimited reads back bitwise-equal
/// (%.17g round-trips IEEE doubles). Labels go into a final column named
/// "label".
inline void save_dataset(const Dataset& ds, const std::string& path, char delimiter = ',') {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_data("LayoutNotFound", "cannot write " + path);
    for (Index j = 0; j < ds.d(); ++j) {
        if (j) out << delimiter;
        out << ds.feature_names[static_cast<size_t>(j)];
    }
    if (ds.has_labels()) out << delimiter << "label";
    out << '\n';
    char buf[64];
    for (Index i = 0; i < ds.n(); ++i) {
        for (Index j = 0; j < ds.d(); ++j) {
            if (j) out << delimiter;
            std::snprintf(buf, sizeof buf, "%.17g", ds.X(i, j));
            out << buf;
        }
        if (ds.has_labels()) out << delimiter << ds.y[static_cast<size_t>(i)];
        out << '\n';
    }
    if (!out) throw_data("LayoutNotFound", "write failed for " + path);
}

// ---------------------------------------------------------------------------
// Standardization (train statistics only)
// ---------------------------------------------------------------------------

struct StandardizeStats {
    VectorXd mean;
    VectorXd std;                 // population std; 0 where the column is constant
    std::vector<char> zero_var;   // 1 where the train column had zero variance
};

inline MatrixXd apply_standardize(const MatrixXd& X, const StandardizeStats& st) {
    if (X.cols() != st.mean.size())
        throw_numeric("ShapeMismatch", "standardization width mismatch");
    MatrixXd out = X;
    for (Index j = 0; j < X.cols(); ++j) {
        out.col(j).array() -= st.mean[j];
        if (st.zero_var[static_cast<size_t>(j)])
            out.col(j).setZero();
        else
            out.col(j) /= st.std[j];
    }
    return out;
}

/// Z-scores both splits with statistics computed on train only.
inline StandardizeStats standardize(Dataset& train, Dataset& test) {
    const Index n = train.n(), d = train.d();
    if (test.d() != d) throw_numeric("ShapeMismatch", "train/test widths differ");
    StandardizeStats st;
    st.mean.resize(d);
    st.std.resize(d);
    st.zero_var.assign(static_cast<size_t>(d), 0);
    for (Index j = 0; j < d; ++j) {
        st.mean[j] = train.X.col(j).mean();
        const double var =
            (train.X.col(j).array() - st.mean[j]).square().sum() / static_cast<double>(n);
        st.std[j] = std::sqrt(var);
        if (st.std[j] <= 0) st.zero_var[static_cast<size_t>(j)] = 1;
    }
    train.X = apply_standardize(train.X, st);
    test.X = apply_standardize(test.X, st);
    return st;
}

// ---------------------------------------------------------------------------
// Binary container: magic "MSLE", version u16, little-endian payloads
// ---------------------------------------------------------------------------

namespace detail {

constexpr std::uint16_t kContainerVersion = 1;

struct Record {
    std::string name;
    std::uint8_t dtype = 0;              // 0 = f64 matrix, 1 = i64 vector, 2 = utf8 blob
    MatrixXd mat;                        // dtype 0
    std::vector<std::int64_t> ivec;      // dtype 1
    std::string blob;                    // dtype 2
};

template <class T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
T get(std::ifstream& in, const std::string& path) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw_data("ShapeMismatch", path + ": truncated container");
    return v;
}

inline void write_container(const std::string& path, const std::vector<Record>& recs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_data("LayoutNotFound", "cannot write " + path);
    out.write("MSLE", 4);
    put<std::uint16_t>(out, kContainerVersion);
    put<std::uint16_t>(out, 0);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(recs.size()));
    for (const Record& r : recs) {
        put<std::uint8_t>(out, r.dtype);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(r.name.size()));
        out.write(r.name.data(), static_cast<std::streamsize>(r.name.size()));
        if (r.dtype == 0) {
            put<std::uint64_t>(out, static_cast<std::uint64_t>(r.mat.rows()));
            put<std::uint64_t>(out, static_cast<std::uint64_t>(r.mat.cols()));
            out.write(reinterpret_cast<const char*>(r.mat.data()),
                      static_cast<std::streamsize>(sizeof(double) * r.mat.size()));
        } else if (r.dtype == 1) {
            put<std::uint64_t>(out, static_cast<std::uint64_t>(r.ivec.size()));
            put<std::uint64_t>(out, 1);
            out.write(reinterpret_cast<const char*>(r.ivec.data()),
                      static_cast<std::streamsize>(sizeof(std::int64_t) * r.ivec.size()));
        } else {
            put<std::uint64_t>(out, static_cast<std::uint64_t>(r.blob.size()));
            put<std::uint64_t>(out, 1);
            out.write(r.blob.data(), static_cast<std::streamsize>(r.blob.size()));
        }
    }
    if (!out) throw_data("LayoutNotFound", "write failed for " + path);
}

inline std::vector<Record> read_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_data("LayoutNotFound", "cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "MSLE", 4) != 0)
        throw_data("LayoutNotFound", path + ": not an MSLE container");
    const auto version = get<std::uint16_t>(in, path);
    if (version > kContainerVersion)
        throw_data("SchemaVersionMismatch",
                   path + ": container version " + std::to_string(version) +
                       " newer than supported " + std::to_string(kContainerVersion));
    get<std::uint16_t>(in, path);  // reserved
    const auto count = get<std::uint32_t>(in, path);
    std::vector<Record> recs;
    for (std::uint32_t i = 0; i < count; ++i) {
        Record r;
        r.dtype = get<std::uint8_t>(in, path);
        const auto nlen = get<std::uint32_t>(in, path);
        r.name.resize(nlen);
        in.read(r.name.data(), nlen);
        const auto rows = get<std::uint64_t>(in, path);
        const auto cols = get<std::uint64_t>(in, path);
        if (r.dtype == 0) {
            r.mat.resize(static_cast<Index>(rows), static_cast<Index>(cols));
            in.read(reinterpret_cast<char*>(r.mat.data()),
                    static_cast<std::streamsize>(sizeof(double) * rows * cols));
        } else if (r.dtype == 1) {
            r.ivec.resize(rows);
            in.read(reinterpret_cast<char*>(r.ivec.data()),
                    static_cast<std::streamsize>(sizeof(std::int64_t) * rows));
        } else if (r.dtype == 2) {
            r.blob.resize(rows);
            in.read(r.blob.data(), static_cast<std::streamsize>(rows));
        } else {
            throw_data("SchemaVersionMismatch",
                       path + ": unknown record dtype " + std::to_string(int(r.dtype)));
        }
        if (!in) throw_data("ShapeMismatch", path + ": truncated container");
        recs.push_back(std::move(r));
    }
    return recs;
}

inline const Record& find_record(const std::vector<Record>& recs, const std::string& name,
                                 const std::string& path) {
    for (const Record& r : recs)
        if (r.name == name) return r;
    throw_data("ShapeMismatch", path + ": record '" + name + "' missing");
}

inline bool has_record(const std::vector<Record>& recs, const std::string& name) {
    for (const Record& r : recs)
        if (r.name == name) return true;
    return false;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Selection / embedding persistence (container + JSON sidecar)
// ---------------------------------------------------------------------------

inline std::string sidecar_path(const std::string& path) { return path + ".meta.json"; }

constexpr int kSchemaVersion = 1;

inline void save_selection(const SelectionResult& res, const std::string& path) {
    if (res.k < 1 || res.selected.empty())
        throw_config("ConfigInvalid", "refusing to save an empty selection");
    std::vector<detail::Record> recs;
    auto mat = [&](const char* name, const MatrixXd& m) {
        recs.push_back({name, 0, m, {}, {}});
    };
    mat("scores", res.scores);
    mat("eigenvalues", res.eigenvalues);
    mat("spectral_basis", res.spectral_basis);
    mat("component_embed", res.component_embed);
    mat("component_code", res.component_code);
    mat("alphas", res.alphas);
    {
        detail::Record r;
        r.name = "selected";
        r.dtype = 1;
        for (Index v : res.selected) r.ivec.push_back(v);
        recs.push_back(std::move(r));
    }
    if (res.W_sel.size() > 0) mat("W_sel", res.W_sel);
    detail::write_container(path, recs);

    json meta;
    meta["schema_version"] = kSchemaVersion;
    meta["kind"] = "selection";
    meta["k"] = res.k;
    meta["basis_dim"] = res.basis_dim;
    meta["variant"] = to_string(res.variant);
    meta["seed"] = res.seed;
    meta["blend"] = res.blend;
    meta["alpha_sparse"] = res.alpha_sparse;
    meta["eigen_weights"] = res.eigen_weights;
    meta["sigmas"] = res.sigmas;
    meta["weight_residual"] = res.weight_residual;
    std::ofstream out(sidecar_path(path), std::ios::binary);
    out << meta.dump(2) << '\n';
    if (!out) throw_data("LayoutNotFound", "write failed for " + sidecar_path(path));
}

inline LapVariant variant_from_string(const std::string& s) {
    if (s == "unnormalized" || s == "unnorm") return LapVariant::Unnormalized;
    if (s == "sym" || s == "symmetric") return LapVariant::Symmetric;
    if (s == "rw" || s == "random_walk") return LapVariant::RandomWalk;
    throw_config("ConfigInvalid",
                 "unknown Laplacian variant '" + s + "' (use unnormalized|sym|rw)");
}

inline SelectionResult load_selection(const std::string& path) {
    const std::vector<detail::Record> recs = detail::read_container(path);
    json meta;
    {
        std::ifstream in(sidecar_path(path), std::ios::binary);
        if (!in) throw_data("LayoutNotFound", "missing sidecar " + sidecar_path(path));
        try {
            in >> meta;
        } catch (const json::exception& e) {
            throw_data("ShapeMismatch", sidecar_path(path) + ": bad JSON: " + e.what());
        }
    }
    const int schema = meta.value("schema_version", 0);
    if (schema > kSchemaVersion)
        throw_data("SchemaVersionMismatch",
                   path + ": schema " + std::to_string(schema) + " newer than supported " +
                       std::to_string(kSchemaVersion));

    SelectionResult res;
    res.scores = detail::find_record(recs, "scores", path).mat;
    res.eigenvalues = detail::find_record(recs, "eigenvalues", path).mat;
    res.spectral_basis = detail::find_record(recs, "spectral_basis", path).mat;
    res.component_embed = detail::find_record(recs, "component_embed", path).mat;
    res.component_code = detail::find_record(recs, "component_code", path).mat;
    res.alphas = detail::find_record(recs, "alphas", path).mat;
    for (std::int64_t v : detail::find_record(recs, "selected", path).ivec)
        res.selected.push_back(static_cast<Index>(v));
    if (detail::has_record(recs, "W_sel")) res.W_sel = detail::find_record(recs, "W_sel", path).mat;
    res.k = meta.value("k", Index(res.selected.size()));
    res.basis_dim = meta.value("basis_dim", Index(res.eigenvalues.size()));
    res.variant = variant_from_string(meta.value("variant", std::string("unnormalized")));
    res.seed = meta.value("seed", 42u);
    res.blend = meta.value("blend", 0.5);
    res.alpha_sparse = meta.value("alpha_sparse", 0.0);
    res.eigen_weights = meta.value("eigen_weights", false);
    res.sigmas = meta.value("sigmas", std::vector<double>{});
    res.weight_residual = meta.value("weight_residual", 0.0);
    return res;
}

inline void save_embedding(const Embedding& emb, const std::string& path) {
    std::vector<detail::Record> recs;
    recs.push_back({"Y", 0, emb.Y, {}, {}});
    recs.push_back({"eigenvalues", 0, emb.eigenvalues, {}, {}});
    detail::write_container(path, recs);
    json meta;
    meta["schema_version"] = kSchemaVersion;
    meta["kind"] = "embedding";
    meta["variant"] = to_string(emb.source_variant);
    meta["mass"] = emb.mass == Mass::Degree ? "degree" : "identity";
    meta["dropped_trivial"] = emb.dropped_trivial;
    std::ofstream out(sidecar_path(path), std::ios::binary);
    out << meta.dump(2) << '\n';
    if (!out) throw_data("LayoutNotFound", "write failed for " + sidecar_path(path));
}

inline Embedding load_embedding(const std::string& path) {
    const std::vector<detail::Record> recs = detail::read_container(path);
    json meta;
    {
        std::ifstream in(sidecar_path(path), std::ios::binary);
        if (!in) throw_data("LayoutNotFound", "missing sidecar " + sidecar_path(path));
        try {
            in >> meta;
        } catch (const json::exception& e) {
            throw_data("ShapeMismatch", sidecar_path(path) + ": bad JSON: " + e.what());
        }
    }
    const int schema = meta.value("schema_version", 0);
    if (schema > kSchemaVersion)
        throw_data("SchemaVersionMismatch",
                   path + ": schema " + std::to_string(schema) + " newer than supported " +
                       std::to_string(kSchemaVersion));
    Embedding emb;
    emb.Y = detail::find_record(recs, "Y", path).mat;
    emb.eigenvalues = detail::find_record(recs, "eigenvalues", path).mat;
    emb.source_variant = variant_from_string(meta.value("variant", std::string("unnormalized")));
    emb.mass = meta.value("mass", std::string("degree")) == "identity" ? Mass::Identity
                                                                       : Mass::Degree;
    emb.dropped_trivial = meta.value("dropped_trivial", true);
    return emb;
}

} // namespace msle
