#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <zlib.h>

#include "syrbo/errors.hpp"
#include "syrbo/matrix.hpp"
#include "syrbo/rng.hpp"

namespace syrbo {

struct Dataset {
    Matrix X;
    std::vector<double> y;
    std::vector<std::string> feature_names;
    std::string name;

    bool has_target = true;
};

struct FoldSplit {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
};

namespace detail {

inline std::string read_text_file(const std::string& path) {
    if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
        gzFile gz = gzopen(path.c_str(), "rb");
        if (!gz) throw data_error("cannot open file: " + path);
        std::string out;
        char buf[1 << 16];
        int n;
        while ((n = gzread(gz, buf, sizeof(buf))) > 0) out.append(buf, static_cast<size_t>(n));
        bool bad = n < 0;
        gzclose(gz);
        if (bad) throw data_error("gzip read error: " + path);
        return out;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string dataset_name_from_path(std::string path) {
    auto slash = path.find_last_of("/\\");
    if (slash != std::string::npos) path.erase(0, slash + 1);
    for (std::string_view ext : {".gz", ".tsv", ".csv", ".txt"}) {
        if (path.size() > ext.size() &&
            path.compare(path.size() - ext.size(), ext.size(), ext) == 0)
            path.erase(path.size() - ext.size());
    }
    return path;
}

inline std::vector<std::string_view> split_line(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t end = line.find(delim, start);
        if (end == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, end - start));
        start = end + 1;
    }
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

}  // namespace detail

// Load a delimited text file (TSV or CSV, auto-detected from the header line;
// transparently gunzips `.gz`). All non-target columns become features, in
// file order. When `require_target` is false and the target column is absent,
// the dataset is returned without targets (for prediction inputs).
inline Dataset load_dataset(const std::string& path, const std::string& target_column = "target",
                            bool require_target = true) {
    std::string text = detail::read_text_file(path);
    if (text.empty()) throw data_error(path + ": file is empty");

    std::vector<std::string_view> lines;
    {
        std::string_view rest = text;
        while (!rest.empty()) {
            std::size_t nl = rest.find('\n');
            std::string_view line = rest.substr(0, nl);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            if (!line.empty()) lines.push_back(line);
            if (nl == std::string_view::npos) break;
            rest.remove_prefix(nl + 1);
        }
    }
    if (lines.empty()) throw data_error(path + ": file is empty");

    const char delim = lines[0].find('\t') != std::string_view::npos ? '\t' : ',';
    auto header = detail::split_line(lines[0], delim);
    std::size_t target_idx = header.size();
    Dataset ds;
    for (std::size_t c = 0; c < header.size(); ++c) {
        std::string col(detail::trim(header[c]));
        if (col == target_column && target_idx == header.size()) {
            target_idx = c;
        } else {
            ds.feature_names.push_back(col);
        }
    }
    const bool found_target = target_idx != header.size();
    if (!found_target && require_target)
        throw data_error(path + ": target column '" + target_column + "' not found");
    ds.has_target = found_target;
    if (ds.feature_names.empty())
        throw data_error(path + ": no feature columns besides the target");
    if (lines.size() < 2) throw data_error(path + ": no data rows");

    const std::size_t n_rows = lines.size() - 1;
    ds.X = Matrix(n_rows, ds.feature_names.size());
    if (found_target) ds.y.resize(n_rows);

    for (std::size_t r = 0; r < n_rows; ++r) {
        auto cells = detail::split_line(lines[r + 1], delim);
        if (cells.size() != header.size())
            throw data_error(path + ": row " + std::to_string(r + 2) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        std::size_t f = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            std::string_view cell = detail::trim(cells[c]);
            double v = 0.0;
            auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
                throw data_error(path + ": non-numeric cell '" + std::string(cell) + "' at row " +
                                 std::to_string(r + 2) + ", column '" +
                                 std::string(detail::trim(header[c])) + "'");
            if (c == target_idx)
                ds.y[r] = v;
            else
                ds.X.at(r, f++) = v;
        }
    }
    ds.name = detail::dataset_name_from_path(path);
    return ds;
}

// Scale each row to unit L2 norm; all-zero rows pass through unchanged.
// Targets are never touched.
inline Matrix l2_normalize_rows(Matrix X) {
    for (std::size_t r = 0; r < X.rows; ++r) {
        auto row = X.row(r);
        double sq = 0.0;
        for (double v : row) sq += v * v;
        double norm = std::sqrt(sq);
        if (norm == 0.0) continue;
        for (double& v : row) v /= norm;
    }
    return X;
}

inline Dataset l2_normalize_rows(Dataset ds) {
    ds.X = l2_normalize_rows(std::move(ds.X));
    return ds;
}

// Shuffle 0..n_rows-1 once, then cut into k contiguous blocks whose sizes
// differ by at most one; fold i tests on block i and trains on the rest.
inline std::vector<FoldSplit> kfold(std::size_t n_rows, std::size_t k, Rng& rng) {
    if (k < 2) throw std::invalid_argument("kfold: k must be at least 2");
    if (k > n_rows) throw std::invalid_argument("kfold: k exceeds number of rows");

    std::vector<std::size_t> order(n_rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    std::vector<FoldSplit> folds(k);
    std::size_t base = n_rows / k;
    std::size_t extra = n_rows % k;
    std::size_t offset = 0;
    std::vector<std::pair<std::size_t, std::size_t>> blocks(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t len = base + (i < extra ? 1 : 0);
        blocks[i] = {offset, len};
        offset += len;
    }
    for (std::size_t i = 0; i < k; ++i) {
        auto [start, len] = blocks[i];
        folds[i].test_indices.assign(order.begin() + start, order.begin() + start + len);
        folds[i].train_indices.reserve(n_rows - len);
        folds[i].train_indices.insert(folds[i].train_indices.end(), order.begin(),
                                      order.begin() + start);
        folds[i].train_indices.insert(folds[i].train_indices.end(), order.begin() + start + len,
                                      order.end());
    }
    return folds;
}

}  // namespace syrbo
