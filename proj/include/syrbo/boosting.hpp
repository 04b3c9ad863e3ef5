#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "syrbo/errors.hpp"
#include "syrbo/gp.hpp"
#include "syrbo/matrix.hpp"
#include "syrbo/rng.hpp"

namespace syrbo {

struct SyrboConfig {
    std::size_t stages = 1;
    GpConfig gp;
};

inline void validate(const SyrboConfig& c) {
    if (c.stages == 0) throw std::invalid_argument("stages must be at least 1");
    validate(c.gp);
}

// Ordered list of fitted boosters; stage order is fit order.
struct SyrboModel {
    std::vector<GpRegressor> boosters;
    SyrboConfig config;
    std::size_t feature_count = 0;
};

// Seed for boosting stage `s`, derived from the configured master seed.
inline std::uint64_t stage_seed(const SyrboConfig& config, std::size_t stage) {
    return derive_seed(config.gp.seed, stage);
}

// Gradient-boosting loop over GP regressors: each stage evolves a regressor
// against the running pseudo-residuals, then subtracts its training
// predictions from them. The caller's y is left untouched.
inline SyrboModel fit(const SyrboConfig& config, const Matrix& X, const std::vector<double>& y) {
    validate(config);
    if (X.rows < 2) throw std::invalid_argument("fit: need at least 2 rows");
    if (X.rows != y.size()) throw std::invalid_argument("fit: X and y disagree on rows");

    SyrboModel model;
    model.config = config;
    model.feature_count = X.cols;
    model.boosters.reserve(config.stages);

    // Residuals are kept as y minus the cumulative prediction, accumulated in
    // the same order predict() uses, so the final residual equals
    // y - predict(model, X) bit for bit.
    std::vector<double> cumulative(X.rows, 0.0);
    std::vector<double> residual = y;
    for (std::size_t stage = 0; stage < config.stages; ++stage) {
        GpConfig gp_config = config.gp;
        gp_config.seed = stage_seed(config, stage);
        GpRegressor booster = evolve(gp_config, X, residual);
        std::vector<double> pred = evaluate(booster.program, X);
        for (std::size_t r = 0; r < X.rows; ++r) {
            cumulative[r] += pred[r];
            residual[r] = y[r] - cumulative[r];
        }
        model.boosters.push_back(std::move(booster));
    }
    return model;
}

// Elementwise sum of every booster's predictions, accumulated in stage order
// starting from zero.
inline std::vector<double> predict(const SyrboModel& model, const Matrix& X) {
    if (X.cols != model.feature_count)
        throw std::invalid_argument("predict: input has " + std::to_string(X.cols) +
                                    " features, model was trained with " +
                                    std::to_string(model.feature_count));
    std::vector<double> prediction(X.rows, 0.0);
    for (const GpRegressor& booster : model.boosters) {
        std::vector<double> pred = evaluate(booster.program, X);
        for (std::size_t r = 0; r < X.rows; ++r) prediction[r] += pred[r];
    }
    return prediction;
}

inline nlohmann::json to_json(const GpConfig& c) {
    return nlohmann::json{{"population_size", c.population_size},
                          {"generations", c.generations},
                          {"tournament_size", c.tournament_size},
                          {"crossover_prob", c.crossover_prob},
                          {"subtree_mut_prob", c.subtree_mut_prob},
                          {"hoist_mut_prob", c.hoist_mut_prob},
                          {"point_mut_prob", c.point_mut_prob},
                          {"point_replace_prob", c.point_replace_prob},
                          {"init_depth_min", c.init_depth_min},
                          {"init_depth_max", c.init_depth_max},
                          {"constant_min", c.constant_min},
                          {"constant_max", c.constant_max},
                          {"parsimony_coefficient", c.parsimony_coefficient},
                          {"hard_node_cap", c.hard_node_cap},
                          {"seed", c.seed}};
}

inline GpConfig gp_config_from_json(const nlohmann::json& j) {
    GpConfig c;
    j.at("population_size").get_to(c.population_size);
    j.at("generations").get_to(c.generations);
    j.at("tournament_size").get_to(c.tournament_size);
    j.at("crossover_prob").get_to(c.crossover_prob);
    j.at("subtree_mut_prob").get_to(c.subtree_mut_prob);
    j.at("hoist_mut_prob").get_to(c.hoist_mut_prob);
    j.at("point_mut_prob").get_to(c.point_mut_prob);
    j.at("point_replace_prob").get_to(c.point_replace_prob);
    j.at("init_depth_min").get_to(c.init_depth_min);
    j.at("init_depth_max").get_to(c.init_depth_max);
    j.at("constant_min").get_to(c.constant_min);
    j.at("constant_max").get_to(c.constant_max);
    j.at("parsimony_coefficient").get_to(c.parsimony_coefficient);
    j.at("hard_node_cap").get_to(c.hard_node_cap);
    j.at("seed").get_to(c.seed);
    return c;
}

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json model_to_json(const SyrboModel& model) {
    nlohmann::json boosters = nlohmann::json::array();
    for (const GpRegressor& b : model.boosters) boosters.push_back(to_sexpr(b.program));
    return nlohmann::json{{"format_version", kModelFormatVersion},
                          {"stages", model.config.stages},
                          {"gp_config", to_json(model.config.gp)},
                          {"boosters", boosters},
                          {"feature_count", model.feature_count}};
}

inline SyrboModel model_from_json(const nlohmann::json& j) {
    int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
        throw data_error("unsupported model format_version " + std::to_string(version));
    SyrboModel model;
    model.config.stages = j.at("stages").get<std::size_t>();
    model.config.gp = gp_config_from_json(j.at("gp_config"));
    model.feature_count = j.at("feature_count").get<std::size_t>();
    for (const auto& entry : j.at("boosters")) {
        GpRegressor booster;
        booster.program = parse_sexpr(entry.get<std::string>());
        booster.config = model.config.gp;
        booster.fitness = std::numeric_limits<double>::quiet_NaN();  // not stored in the file
        if (!is_valid(booster.program)) throw data_error("model contains an invalid program");
        if (uses_features(booster.program) &&
            max_feature_index(booster.program) >= model.feature_count)
            throw data_error("model program references a feature beyond feature_count");
        model.boosters.push_back(std::move(booster));
    }
    if (model.boosters.size() != model.config.stages)
        throw data_error("model stages field disagrees with booster count");
    return model;
}

inline void save_model(const SyrboModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write model file: " + path);
    out << model_to_json(model).dump(2) << '\n';
    if (!out) throw data_error("failed writing model file: " + path);
}

inline SyrboModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw data_error("malformed model file " + path + ": " + e.what());
    }
    try {
        return model_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw data_error("malformed model file " + path + ": " + e.what());
    }
}

}  // namespace syrbo
