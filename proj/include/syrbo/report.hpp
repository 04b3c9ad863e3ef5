#pragma once

#include <cstddef>
#include <iomanip>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "syrbo/harness.hpp"
#include "syrbo/stats.hpp"

namespace syrbo {

// Per-dataset comparison document: medians, p-value, marker and label, plus
// the median wall-clock fit times.
inline nlohmann::json comparison_to_json(const ComparisonOutcome& outcome,
                                         double median_fit_seconds_syrbo,
                                         double median_fit_seconds_baseline) {
    return nlohmann::json{{"dataset", outcome.dataset},
                          {"median_syrbo", outcome.median_syrbo},
                          {"median_baseline", outcome.median_baseline},
                          {"p_value", outcome.p_value},
                          {"marker", std::string(marker(outcome.label))},
                          {"label", std::string(to_string(outcome.label))},
                          {"median_fit_seconds_syrbo", median_fit_seconds_syrbo},
                          {"median_fit_seconds_baseline", median_fit_seconds_baseline}};
}

// Aligned five-column summary table, one row per stage count.
inline std::string summary_table(std::span<const std::pair<std::size_t, Summary>> rows) {
    std::ostringstream out;
    out << std::setw(8) << "Datasets" << std::setw(8) << "Stages" << std::setw(6) << "Wins"
        << std::setw(13) << "Significant" << std::setw(8) << "Losses" << std::setw(15)
        << "Insignificant" << '\n';
    for (const auto& [stages, s] : rows) {
        out << std::setw(8) << s.datasets << std::setw(8) << stages << std::setw(6) << s.wins
            << std::setw(13) << s.significant_wins << std::setw(8) << s.losses << std::setw(15)
            << s.insignificant_losses << '\n';
    }
    return out.str();
}

inline std::string summary_table(std::size_t stages, const Summary& summary) {
    std::vector<std::pair<std::size_t, Summary>> rows{{stages, summary}};
    return summary_table(rows);
}

// Full comparison pipeline for one dataset's records: medians, permutation
// test between the two algorithms' scores, and classification.
inline ComparisonOutcome compare_records(const std::string& dataset_name,
                                         std::span<const ScoreRecord> records,
                                         std::size_t rounds, std::uint64_t master_seed) {
    std::vector<double> syrbo_scores, baseline_scores;
    for (const ScoreRecord& r : records) {
        (r.algorithm == Algorithm::syrbo ? syrbo_scores : baseline_scores).push_back(r.test_mae);
    }
    ComparisonOutcome outcome;
    outcome.dataset = dataset_name;
    outcome.median_syrbo = median_score(records, Algorithm::syrbo);
    outcome.median_baseline = median_score(records, Algorithm::baseline);
    Rng rng(stats_seed(master_seed, dataset_name));
    outcome.p_value = permutation_test(syrbo_scores, baseline_scores, rounds, rng);
    outcome.label = classify(outcome.median_syrbo, outcome.median_baseline, outcome.p_value);
    return outcome;
}

}  // namespace syrbo
