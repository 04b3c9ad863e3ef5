#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

#include "syrbo/boosting.hpp"
#include "syrbo/dataset.hpp"
#include "syrbo/errors.hpp"
#include "syrbo/rng.hpp"

namespace syrbo {

enum class Algorithm { syrbo, baseline };

constexpr std::string_view to_string(Algorithm a) {
    return a == Algorithm::syrbo ? "syrbo" : "baseline";
}

inline Algorithm algorithm_from_string(std::string_view s) {
    if (s == "syrbo") return Algorithm::syrbo;
    if (s == "baseline") return Algorithm::baseline;
    throw data_error("unknown algorithm '" + std::string(s) + "'");
}

struct ExperimentConfig {
    std::size_t replicates = 30;
    std::size_t folds = 5;
    SyrboConfig syrbo;
    std::uint64_t master_seed = 0;
};

struct ScoreRecord {
    Algorithm algorithm = Algorithm::syrbo;
    std::size_t replicate = 0;
    std::size_t fold = 0;
    double test_mae = 0.0;
    double fit_seconds = 0.0;
};

// Mean absolute error.
inline double mae(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size()) throw std::invalid_argument("mae: length mismatch");
    if (pred.empty()) throw std::invalid_argument("mae: empty vectors");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += std::fabs(pred[i] - truth[i]);
    return sum / static_cast<double>(pred.size());
}

// Non-finite scores are recorded as the worst possible value, never dropped.
inline double sanitize_score(double score, Algorithm algorithm, std::size_t replicate,
                             std::size_t fold, std::ostream* warn = &std::cerr) {
    if (std::isfinite(score)) return score;
    if (warn)
        *warn << "warning: non-finite test MAE for " << to_string(algorithm) << " replicate "
              << replicate << " fold " << fold << "; recording worst-value sentinel\n";
    return std::numeric_limits<double>::infinity();
}

namespace detail {

// Salts for the independent derived seed streams.
inline constexpr std::uint64_t kShuffleStream = fnv1a("harness.shuffle");
inline constexpr std::uint64_t kCellStream = fnv1a("harness.cell");
inline constexpr std::uint64_t kStatsStream = fnv1a("stats.permutation");

// Run `count` tasks on `jobs` workers. Task results must be written through
// the task's own index so the outcome is independent of scheduling.
template <typename Fn>
inline void parallel_for(std::size_t count, std::size_t jobs, Fn&& task) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count == 0 ? 1 : count));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                task(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (std::size_t i = 0; i < jobs; ++i) workers.emplace_back(worker);
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace detail

// Seed used to shuffle the rows of replicate `r`.
inline std::uint64_t replicate_shuffle_seed(const ExperimentConfig& config, std::size_t replicate) {
    return derive_seed(config.master_seed, detail::kShuffleStream, replicate);
}

// Seed shared by both algorithms in cell (replicate, fold).
inline std::uint64_t cell_seed(const ExperimentConfig& config, std::size_t replicate,
                               std::size_t fold) {
    return derive_seed(config.master_seed, detail::kCellStream, replicate, fold);
}

// Seed for the post-experiment permutation test of `dataset_name`.
inline std::uint64_t stats_seed(std::uint64_t master_seed, std::string_view dataset_name) {
    return derive_seed(master_seed, detail::kStatsStream, fnv1a(dataset_name));
}

// Replicated k-fold head-to-head evaluation: per replicate the dataset is
// shuffled into folds shared by both algorithms; per fold, the boosted model
// and the single-stage baseline are trained with the same derived seed and
// scored on the held-out fold. Emits 2 * replicates * folds records, sorted
// by (algorithm, replicate, fold). Fully deterministic for a fixed
// master_seed, at any number of jobs.
inline std::vector<ScoreRecord> run_experiment(const Dataset& dataset,
                                               const ExperimentConfig& config,
                                               std::size_t jobs = 1,
                                               std::ostream* warn = &std::cerr) {
    if (config.replicates == 0) throw std::invalid_argument("replicates must be at least 1");
    if (config.folds < 2) throw std::invalid_argument("folds must be at least 2");
    validate(config.syrbo);
    if (dataset.X.rows < config.folds)
        throw std::invalid_argument("dataset has fewer rows than folds");
    if (!dataset.has_target || dataset.y.size() != dataset.X.rows)
        throw std::invalid_argument("dataset has no target values");

    // Fold splits are computed once per replicate and shared by both
    // algorithms and all fold cells of that replicate.
    std::vector<std::vector<FoldSplit>> splits(config.replicates);
    for (std::size_t r = 0; r < config.replicates; ++r) {
        Rng rng(replicate_shuffle_seed(config, r));
        splits[r] = kfold(dataset.X.rows, config.folds, rng);
    }

    struct Cell {
        ScoreRecord syrbo;
        ScoreRecord baseline;
    };
    const std::size_t n_cells = config.replicates * config.folds;
    std::vector<Cell> cells(n_cells);
    std::mutex warn_mutex;

    detail::parallel_for(n_cells, jobs, [&](std::size_t index) {
        const std::size_t r = index / config.folds;
        const std::size_t f = index % config.folds;
        const FoldSplit& split = splits[r][f];

        Matrix train_X = dataset.X.select_rows(split.train_indices);
        std::vector<double> train_y = select(dataset.y, split.train_indices);
        Matrix test_X = dataset.X.select_rows(split.test_indices);
        std::vector<double> test_y = select(dataset.y, split.test_indices);

        const std::uint64_t seed = cell_seed(config, r, f);
        auto run_one = [&](std::size_t stages, Algorithm algorithm) {
            SyrboConfig cfg = config.syrbo;
            cfg.stages = stages;
            cfg.gp.seed = seed;
            auto start = std::chrono::steady_clock::now();
            SyrboModel model = fit(cfg, train_X, train_y);
            std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
            double score = mae(predict(model, test_X), test_y);
            {
                std::lock_guard<std::mutex> lock(warn_mutex);
                score = sanitize_score(score, algorithm, r, f, warn);
            }
            return ScoreRecord{algorithm, r, f, score, elapsed.count()};
        };
        cells[index].syrbo = run_one(config.syrbo.stages, Algorithm::syrbo);
        cells[index].baseline = run_one(1, Algorithm::baseline);
    });

    std::vector<ScoreRecord> records;
    records.reserve(2 * n_cells);
    for (const Cell& c : cells) {
        records.push_back(c.syrbo);
        records.push_back(c.baseline);
    }
    std::sort(records.begin(), records.end(), [](const ScoreRecord& a, const ScoreRecord& b) {
        if (a.algorithm != b.algorithm) return to_string(a.algorithm) < to_string(b.algorithm);
        if (a.replicate != b.replicate) return a.replicate < b.replicate;
        return a.fold < b.fold;
    });
    return records;
}

// Median test MAE of one algorithm's records; an even count averages the two
// middle order statistics.
inline double median_score(std::span<const ScoreRecord> records, Algorithm algorithm) {
    std::vector<double> values;
    for (const ScoreRecord& r : records)
        if (r.algorithm == algorithm) values.push_back(r.test_mae);
    if (values.empty()) throw std::invalid_argument("median_score: no records for algorithm");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

inline double median_fit_seconds(std::span<const ScoreRecord> records, Algorithm algorithm) {
    std::vector<double> values;
    for (const ScoreRecord& r : records)
        if (r.algorithm == algorithm) values.push_back(r.fit_seconds);
    if (values.empty()) throw std::invalid_argument("median_fit_seconds: no records");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace detail

// Records file: '#' header lines, a column-name line, then one tab-separated
// row per record. `include_timings` false writes 0 in the fit_seconds column
// so reruns are byte-identical.
inline void write_records(std::ostream& out, std::span<const ScoreRecord> records,
                          std::span<const std::string> header_lines, bool include_timings) {
    for (const std::string& line : header_lines) out << "# " << line << '\n';
    out << "algorithm\treplicate\tfold\ttest_mae\tfit_seconds\n";
    for (const ScoreRecord& r : records) {
        out << to_string(r.algorithm) << '\t' << r.replicate << '\t' << r.fold << '\t'
            << detail::format_double(r.test_mae) << '\t'
            << detail::format_double(include_timings ? r.fit_seconds : 0.0) << '\n';
    }
}

inline std::vector<ScoreRecord> read_records(std::istream& in, const std::string& origin) {
    std::vector<ScoreRecord> records;
    std::string line;
    bool saw_header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!saw_header) {  // column-name line
            saw_header = true;
            continue;
        }
        std::istringstream cells(line);
        std::string algorithm, replicate, fold, test_mae, fit_seconds;
        if (!std::getline(cells, algorithm, '\t') || !std::getline(cells, replicate, '\t') ||
            !std::getline(cells, fold, '\t') || !std::getline(cells, test_mae, '\t') ||
            !std::getline(cells, fit_seconds, '\t'))
            throw data_error(origin + ": malformed record at line " + std::to_string(line_no));
        ScoreRecord r;
        r.algorithm = algorithm_from_string(algorithm);
        try {
            r.replicate = std::stoul(replicate);
            r.fold = std::stoul(fold);
        } catch (const std::exception&) {
            throw data_error(origin + ": malformed record at line " + std::to_string(line_no));
        }
        auto parse_double = [&](const std::string& s) {
            double v = 0.0;
            auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
                throw data_error(origin + ": bad number '" + s + "' at line " +
                                 std::to_string(line_no));
            return v;
        };
        r.test_mae = parse_double(test_mae);
        r.fit_seconds = parse_double(fit_seconds);
        records.push_back(r);
    }
    if (records.empty()) throw data_error(origin + ": no records");
    return records;
}

}  // namespace syrbo
