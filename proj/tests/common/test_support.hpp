#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "syrbo/dataset.hpp"
#include "syrbo/matrix.hpp"
#include "syrbo/program.hpp"
#include "syrbo/rng.hpp"

namespace testsupport {

// ---------------------------------------------------------------------------
// Independent interpreter: builds an explicit pointer tree from the prefix
// node list and evaluates it row by row with its own arithmetic. Used as the
// oracle for the fast evaluator.

struct TreeNode {
    syrbo::Node node;
    std::vector<std::unique_ptr<TreeNode>> children;
};

inline std::unique_ptr<TreeNode> build_tree(const std::vector<syrbo::Node>& nodes,
                                            std::size_t& pos) {
    auto t = std::make_unique<TreeNode>();
    t->node = nodes.at(pos++);
    for (int i = 0; i < syrbo::arity(t->node); ++i) t->children.push_back(build_tree(nodes, pos));
    return t;
}

inline double naive_eval(const TreeNode& t, std::span<const double> row) {
    using syrbo::Node;
    using syrbo::Primitive;
    switch (t.node.kind) {
        case Node::Kind::constant:
            return t.node.value;
        case Node::Kind::feature:
            return row[t.node.feature];
        case Node::Kind::primitive:
            break;
    }
    std::array<double, 4> v{};
    for (std::size_t i = 0; i < t.children.size(); ++i) v[i] = naive_eval(*t.children[i], row);
    const double eps = 0.001;
    switch (t.node.prim) {
        case Primitive::add: return v[0] + v[1];
        case Primitive::sub: return v[0] - v[1];
        case Primitive::mul: return v[0] * v[1];
        case Primitive::div: return std::fabs(v[1]) <= eps ? 1.0 : v[0] / v[1];
        case Primitive::sqrt: return std::sqrt(std::fabs(v[0]));
        case Primitive::log: return std::fabs(v[0]) <= eps ? 0.0 : std::log(std::fabs(v[0]));
        case Primitive::abs: return std::fabs(v[0]);
        case Primitive::neg: return -v[0];
        case Primitive::inv: return std::fabs(v[0]) <= eps ? 0.0 : 1.0 / v[0];
        case Primitive::max: return v[0] >= v[1] ? v[0] : v[1];
        case Primitive::min: return v[0] <= v[1] ? v[0] : v[1];
        case Primitive::if3: return v[0] >= 0.0 ? v[1] : v[2];
        case Primitive::if4: return v[0] >= v[1] ? v[2] : v[3];
    }
    throw std::logic_error("bad primitive");
}

inline std::vector<double> naive_evaluate(const syrbo::Program& p, const syrbo::Matrix& X) {
    std::size_t pos = 0;
    auto tree = build_tree(p.nodes, pos);
    if (pos != p.nodes.size()) throw std::logic_error("trailing nodes");
    std::vector<double> out(X.rows);
    for (std::size_t r = 0; r < X.rows; ++r) out[r] = naive_eval(*tree, X.row(r));
    return out;
}

inline bool same_bits(double a, double b) {
    std::uint64_t ba, bb;
    std::memcpy(&ba, &a, sizeof(ba));
    std::memcpy(&bb, &b, sizeof(bb));
    return ba == bb;
}

// ---------------------------------------------------------------------------
// Synthetic data.

inline double gaussian(syrbo::Rng& rng) {
    double u1 = 1.0 - rng.unit();
    double u2 = rng.unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
}

inline syrbo::Matrix random_matrix(std::size_t rows, std::size_t cols, syrbo::Rng& rng,
                                   double lo = -10.0, double hi = 10.0) {
    syrbo::Matrix X(rows, cols);
    for (double& v : X.data) v = rng.range(lo, hi);
    return X;
}

// Raw feature matrix in [-1,1]^cols plus targets fn(row) + gaussian noise.
template <typename Fn>
inline syrbo::Dataset make_regression(std::string name, std::size_t rows, std::size_t cols, Fn fn,
                                      double noise_sigma, std::uint64_t seed) {
    syrbo::Rng rng(seed);
    syrbo::Dataset ds;
    ds.name = std::move(name);
    ds.X = random_matrix(rows, cols, rng, -1.0, 1.0);
    ds.y.resize(rows);
    for (std::size_t r = 0; r < rows; ++r)
        ds.y[r] = fn(ds.X.row(r)) + noise_sigma * gaussian(rng);
    for (std::size_t c = 0; c < cols; ++c) ds.feature_names.push_back("x" + std::to_string(c));
    return ds;
}

// ---------------------------------------------------------------------------
// Reference benchmark fixture (98 rows per stage count).

struct BenchmarkRow {
    std::string dataset;
    double median_syrbo = 0.0;
    double median_baseline = 0.0;
    double p_value = 0.0;
    std::string winner;  // "syrbo" or "baseline"
    std::string marker;  // "!", "=", or "."
};

inline std::vector<BenchmarkRow> load_benchmark_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open fixture: " + path);
    std::vector<BenchmarkRow> rows;
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!saw_header) {
            saw_header = true;
            continue;
        }
        std::istringstream cells(line);
        BenchmarkRow row;
        std::string syrbo_s, base_s, p_s;
        if (!(std::getline(cells, row.dataset, '\t') && std::getline(cells, syrbo_s, '\t') &&
              std::getline(cells, base_s, '\t') && std::getline(cells, p_s, '\t') &&
              std::getline(cells, row.winner, '\t') && std::getline(cells, row.marker, '\t')))
            throw std::runtime_error("malformed fixture line: " + line);
        row.median_syrbo = std::stod(syrbo_s);
        row.median_baseline = std::stod(base_s);
        row.p_value = std::stod(p_s);
        rows.push_back(row);
    }
    return rows;
}

// The published medians are rounded for display; when both round to the same
// value, the published ordering (winner listed first) pins the strict
// inequality. Break such ties by an epsilon toward the winner.
inline std::pair<double, double> effective_medians(const BenchmarkRow& row) {
    double syrbo_median = row.median_syrbo;
    double baseline_median = row.median_baseline;
    if (syrbo_median == baseline_median) {
        if (row.winner == "syrbo")
            syrbo_median = std::nextafter(syrbo_median, -1.0e308);
        else
            baseline_median = std::nextafter(baseline_median, -1.0e308);
    }
    return {syrbo_median, baseline_median};
}

// ---------------------------------------------------------------------------
// Process helpers.

struct CommandResult {
    int exit_code = -1;
    std::string output;  // stdout only
};

inline CommandResult run_command(const std::string& command) {
    CommandResult result;
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed: " + command);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) result.output.append(buf, n);
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        for (int i = 0; i < 10000; ++i) {
            auto candidate = base / (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(i));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
        throw std::runtime_error("cannot create temp dir");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace testsupport
