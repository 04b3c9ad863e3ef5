#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "syrbo/rng.hpp"

namespace syrbo {

enum class PermutationMode {
    automatic,    // exhaustive when the partition count fits in `rounds`
    exhaustive,   // enumerate every re-partition
    monte_carlo,  // `rounds` random re-partitions
};

namespace detail {

// C(n, k), saturating instead of overflowing.
inline std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    const std::uint64_t cap = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        std::uint64_t factor = n - k + i;
        if (result > cap / factor) return cap;
        result = result * factor / i;  // exact at every step
    }
    return result;
}

}  // namespace detail

// Two-sample permutation test on the absolute difference of means.
// p = (1 + #{permuted statistic >= observed}) / (1 + #permutations), so the
// result always lies in (0, 1]. In exhaustive mode every index re-partition
// of the pooled scores is enumerated; Monte Carlo samples `rounds` uniform
// re-partitions. `automatic` picks exhaustive whenever the full enumeration
// is no larger than `rounds`.
inline double permutation_test(std::span<const double> a, std::span<const double> b,
                               std::size_t rounds, Rng& rng,
                               PermutationMode mode = PermutationMode::automatic) {
    if (a.empty() || b.empty()) throw std::invalid_argument("permutation_test: empty sample");
    if (rounds == 0) throw std::invalid_argument("permutation_test: rounds must be positive");

    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    const std::size_t n = na + nb;

    std::vector<double> pooled;
    pooled.reserve(n);
    pooled.insert(pooled.end(), a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());

    // The observed statistic is computed from the two groups directly, so
    // identical samples give exactly zero. Permuted statistics share one
    // canonical arithmetic in both modes: group-a values summed in ascending
    // pooled-index order, group-b via the pooled total.
    double sum_a = 0.0, sum_b = 0.0;
    for (double v : a) sum_a += v;
    for (double v : b) sum_b += v;
    const double observed =
        std::fabs(sum_a / static_cast<double>(na) - sum_b / static_cast<double>(nb));
    double total = 0.0;
    for (double v : pooled) total += v;

    auto statistic_for_sum = [&](double group_a_sum) {
        double mean_a = group_a_sum / static_cast<double>(na);
        double mean_b = (total - group_a_sum) / static_cast<double>(nb);
        return std::fabs(mean_a - mean_b);
    };

    if (mode == PermutationMode::automatic) {
        std::uint64_t partitions = detail::binomial_saturating(n, na);
        mode = partitions <= rounds ? PermutationMode::exhaustive : PermutationMode::monte_carlo;
    }

    if (mode == PermutationMode::exhaustive) {
        // Lexicographic walk over all index combinations of size na.
        std::vector<std::size_t> comb(na);
        std::iota(comb.begin(), comb.end(), std::size_t{0});
        std::uint64_t hits = 0;
        std::uint64_t count = 0;
        for (;;) {
            double s = 0.0;
            for (std::size_t i : comb) s += pooled[i];
            if (statistic_for_sum(s) >= observed) ++hits;
            ++count;
            // advance
            std::size_t i = na;
            while (i > 0 && comb[i - 1] == nb + i - 1) --i;
            if (i == 0) break;
            ++comb[i - 1];
            for (std::size_t j = i; j < na; ++j) comb[j] = comb[j - 1] + 1;
        }
        return static_cast<double>(1 + hits) / static_cast<double>(1 + count);
    }

    // Monte Carlo. Group-a values are summed in ascending pooled-index order,
    // the same arithmetic the exhaustive walk uses, so partitions that tie
    // the observed statistic are counted identically in both modes.
    std::vector<std::size_t> indices(n);
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    std::vector<std::size_t> chosen(na);
    std::uint64_t hits = 0;
    for (std::size_t round = 0; round < rounds; ++round) {
        for (std::size_t i = 0; i < na; ++i) {
            std::size_t j = i + rng.index(n - i);
            std::swap(indices[i], indices[j]);
        }
        chosen.assign(indices.begin(), indices.begin() + na);
        std::sort(chosen.begin(), chosen.end());
        double s = 0.0;
        for (std::size_t i : chosen) s += pooled[i];
        if (statistic_for_sum(s) >= observed) ++hits;
    }
    return static_cast<double>(1 + hits) / static_cast<double>(1 + rounds);
}

enum class OutcomeLabel {
    significant_win,
    insignificant_win,
    significant_loss,
    insignificant_loss,
};

constexpr std::string_view to_string(OutcomeLabel label) {
    switch (label) {
        case OutcomeLabel::significant_win: return "significant_win";
        case OutcomeLabel::insignificant_win: return "insignificant_win";
        case OutcomeLabel::significant_loss: return "significant_loss";
        case OutcomeLabel::insignificant_loss: return "insignificant_loss";
    }
    return "";
}

constexpr bool is_win(OutcomeLabel label) {
    return label == OutcomeLabel::significant_win || label == OutcomeLabel::insignificant_win;
}

// Report marker: '!' flags a significant win, '=' an insignificant
// loss, otherwise blank.
constexpr std::string_view marker(OutcomeLabel label) {
    switch (label) {
        case OutcomeLabel::significant_win: return "!";
        case OutcomeLabel::insignificant_loss: return "=";
        default: return "";
    }
}

struct ComparisonOutcome {
    std::string dataset;
    double median_syrbo = 0.0;
    double median_baseline = 0.0;
    double p_value = 1.0;
    OutcomeLabel label = OutcomeLabel::insignificant_loss;
};

// Lower median is a win for the boosted model; a win is significant when
// p < 0.05, a loss insignificant when p >= 0.05. An exact tie of medians
// counts against the boosted model.
inline OutcomeLabel classify(double median_syrbo, double median_baseline, double p_value) {
    if (p_value < 0.0 || p_value > 1.0)
        throw std::invalid_argument("classify: p-value outside [0,1]");
    if (median_syrbo < median_baseline)
        return p_value < 0.05 ? OutcomeLabel::significant_win : OutcomeLabel::insignificant_win;
    return p_value >= 0.05 ? OutcomeLabel::insignificant_loss : OutcomeLabel::significant_loss;
}

struct Summary {
    std::size_t datasets = 0;
    std::size_t wins = 0;
    std::size_t significant_wins = 0;
    std::size_t losses = 0;
    std::size_t insignificant_losses = 0;

    bool operator==(const Summary&) const = default;
};

inline Summary summarize(std::span<const ComparisonOutcome> outcomes) {
    Summary s;
    s.datasets = outcomes.size();
    for (const ComparisonOutcome& o : outcomes) {
        switch (o.label) {
            case OutcomeLabel::significant_win:
                ++s.wins;
                ++s.significant_wins;
                break;
            case OutcomeLabel::insignificant_win:
                ++s.wins;
                break;
            case OutcomeLabel::significant_loss:
                ++s.losses;
                break;
            case OutcomeLabel::insignificant_loss:
                ++s.losses;
                ++s.insignificant_losses;
                break;
        }
    }
    return s;
}

}  // namespace syrbo
