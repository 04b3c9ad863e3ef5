// syrbo: symbolic-regression boosting CLI.
//
// Subcommands: fit, predict, experiment, compare. Every run with a fixed
// --seed is byte-reproducible, including across --jobs settings.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "syrbo/boosting.hpp"
#include "syrbo/dataset.hpp"
#include "syrbo/gp.hpp"
#include "syrbo/harness.hpp"
#include "syrbo/report.hpp"
#include "syrbo/stats.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

struct Options {
    std::vector<std::string> datasets;
    std::string dataset;
    std::string target_column = "target";
    std::string model_path;
    std::string model_out;
    std::string predictions_out;
    std::string out_dir;
    std::string records_a;
    std::string records_b;
    std::string algo_a = "syrbo";
    std::string algo_b = "baseline";
    std::string compare_out;

    std::size_t stages = 0;
    std::size_t population_size = 200;
    std::size_t generations = 200;
    std::size_t replicates = 30;
    std::size_t folds = 5;
    std::size_t rounds = 10000;
    std::size_t jobs = 1;
    std::uint64_t seed = 0;
    bool timings = false;
    bool verbose = false;
};

std::string config_line(const Options& opt, const std::string& subcommand) {
    nlohmann::json j{{"subcommand", subcommand},
                     {"target_column", opt.target_column},
                     {"seed", opt.seed}};
    if (subcommand == "fit" || subcommand == "experiment") {
        j["stages"] = opt.stages;
        j["population_size"] = opt.population_size;
        j["generations"] = opt.generations;
    }
    if (subcommand == "experiment") {
        j["replicates"] = opt.replicates;
        j["folds"] = opt.folds;
        j["rounds"] = opt.rounds;
        j["timings"] = opt.timings;
    }
    if (subcommand == "compare") {
        j["rounds"] = opt.rounds;
        j["algo_a"] = opt.algo_a;
        j["algo_b"] = opt.algo_b;
    }
    return j.dump();
}

syrbo::SyrboConfig make_syrbo_config(const Options& opt) {
    syrbo::SyrboConfig config;
    config.stages = opt.stages;
    config.gp.population_size = opt.population_size;
    config.gp.generations = opt.generations;
    config.gp.seed = opt.seed;
    return config;
}

int cmd_fit(const Options& opt) {
    syrbo::Dataset dataset =
        syrbo::l2_normalize_rows(syrbo::load_dataset(opt.dataset, opt.target_column));
    syrbo::SyrboConfig config = make_syrbo_config(opt);

    syrbo::SyrboModel model = syrbo::fit(config, dataset.X, dataset.y);

    std::vector<double> cumulative(dataset.X.rows, 0.0);
    for (std::size_t s = 0; s < model.boosters.size(); ++s) {
        std::vector<double> pred = syrbo::evaluate(model.boosters[s].program, dataset.X);
        for (std::size_t r = 0; r < cumulative.size(); ++r) cumulative[r] += pred[r];
        std::cout << "stage " << s
                  << " training MAE: " << syrbo::detail::format_double(syrbo::mae(cumulative, dataset.y))
                  << '\n';
    }
    syrbo::save_model(model, opt.model_out);
    if (opt.verbose) std::cerr << "model written to " << opt.model_out << '\n';
    return kExitOk;
}

int cmd_predict(const Options& opt) {
    syrbo::SyrboModel model = syrbo::load_model(opt.model_path);
    syrbo::Dataset dataset = syrbo::l2_normalize_rows(
        syrbo::load_dataset(opt.dataset, opt.target_column, /*require_target=*/false));
    if (dataset.X.cols != model.feature_count)
        throw syrbo::data_error(opt.dataset + " has " + std::to_string(dataset.X.cols) +
                                " features, model expects " +
                                std::to_string(model.feature_count));

    std::vector<double> predictions = syrbo::predict(model, dataset.X);

    std::ofstream out(opt.predictions_out, std::ios::binary);
    if (!out) throw syrbo::data_error("cannot write predictions file: " + opt.predictions_out);
    out << "# syrbo predictions\n";
    out << "# model: " << opt.model_path << '\n';
    out << "# dataset: " << dataset.name << '\n';
    out << "# config: " << config_line(opt, "predict") << '\n';
    for (double p : predictions) out << syrbo::detail::format_double(p) << '\n';
    if (!out) throw syrbo::data_error("failed writing predictions file: " + opt.predictions_out);

    if (dataset.has_target)
        std::cout << "MAE: " << syrbo::detail::format_double(syrbo::mae(predictions, dataset.y))
                  << '\n';
    return kExitOk;
}

int cmd_experiment(const Options& opt) {
    namespace fs = std::filesystem;
    fs::create_directories(opt.out_dir);

    syrbo::ExperimentConfig config;
    config.replicates = opt.replicates;
    config.folds = opt.folds;
    config.syrbo = make_syrbo_config(opt);
    config.master_seed = opt.seed;

    std::vector<syrbo::ComparisonOutcome> outcomes;
    int exit_code = kExitOk;

    for (const std::string& path : opt.datasets) {
        try {
            syrbo::Dataset dataset =
                syrbo::l2_normalize_rows(syrbo::load_dataset(path, opt.target_column));
            if (opt.verbose) std::cerr << "running experiment on " << dataset.name << '\n';

            std::vector<syrbo::ScoreRecord> records =
                syrbo::run_experiment(dataset, config, opt.jobs);

            std::vector<std::string> header{"syrbo experiment records", "dataset: " + dataset.name,
                                            "config: " + config_line(opt, "experiment")};
            fs::path records_path = fs::path(opt.out_dir) / (dataset.name + "_records.tsv");
            std::ofstream records_out(records_path, std::ios::binary);
            if (!records_out)
                throw syrbo::data_error("cannot write records file: " + records_path.string());
            syrbo::write_records(records_out, records, header, opt.timings);

            syrbo::ComparisonOutcome outcome =
                syrbo::compare_records(dataset.name, records, opt.rounds, config.master_seed);
            outcomes.push_back(outcome);

            double fit_syrbo = opt.timings
                                   ? syrbo::median_fit_seconds(records, syrbo::Algorithm::syrbo)
                                   : 0.0;
            double fit_baseline =
                opt.timings ? syrbo::median_fit_seconds(records, syrbo::Algorithm::baseline) : 0.0;
            nlohmann::json doc = syrbo::comparison_to_json(outcome, fit_syrbo, fit_baseline);
            doc["config"] = nlohmann::json::parse(config_line(opt, "experiment"));
            fs::path doc_path = fs::path(opt.out_dir) / (dataset.name + "_comparison.json");
            std::ofstream doc_out(doc_path, std::ios::binary);
            if (!doc_out)
                throw syrbo::data_error("cannot write comparison file: " + doc_path.string());
            doc_out << doc.dump(2) << '\n';
        } catch (const syrbo::data_error& e) {
            std::cerr << "error: " << path << ": " << e.what() << " (skipped)\n";
            exit_code = std::max(exit_code, kExitData);
        } catch (const std::exception& e) {
            std::cerr << "error: " << path << ": " << e.what() << " (skipped)\n";
            exit_code = std::max(exit_code, kExitRuntime);
        }
    }

    if (!outcomes.empty()) {
        syrbo::Summary summary = syrbo::summarize(outcomes);
        std::string table = syrbo::summary_table(opt.stages, summary);
        std::ofstream summary_out(std::filesystem::path(opt.out_dir) / "summary.txt",
                                  std::ios::binary);
        summary_out << "# syrbo experiment summary\n";
        summary_out << "# config: " << config_line(opt, "experiment") << '\n';
        summary_out << table;
        std::cout << table;
    }
    return exit_code;
}

std::string dataset_label_from_records_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("# dataset: ", 0) == 0) return line.substr(11);
        if (!line.empty() && line[0] != '#') break;
    }
    return syrbo::detail::dataset_name_from_path(path);
}

int cmd_compare(const Options& opt) {
    auto load = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw syrbo::data_error("cannot open records file: " + path);
        return syrbo::read_records(in, path);
    };
    std::vector<syrbo::ScoreRecord> records_a = load(opt.records_a);
    std::vector<syrbo::ScoreRecord> records_b = load(opt.records_b);

    syrbo::Algorithm algo_a = syrbo::algorithm_from_string(opt.algo_a);
    syrbo::Algorithm algo_b = syrbo::algorithm_from_string(opt.algo_b);

    std::vector<double> scores_a, scores_b;
    std::vector<double> fit_a, fit_b;
    for (const auto& r : records_a)
        if (r.algorithm == algo_a) {
            scores_a.push_back(r.test_mae);
            fit_a.push_back(r.fit_seconds);
        }
    for (const auto& r : records_b)
        if (r.algorithm == algo_b) {
            scores_b.push_back(r.test_mae);
            fit_b.push_back(r.fit_seconds);
        }
    if (scores_a.empty())
        throw syrbo::data_error(opt.records_a + ": no '" + opt.algo_a + "' records");
    if (scores_b.empty())
        throw syrbo::data_error(opt.records_b + ": no '" + opt.algo_b + "' records");

    std::string label_a = dataset_label_from_records_file(opt.records_a);
    std::string label_b = dataset_label_from_records_file(opt.records_b);
    std::string dataset = label_a == label_b ? label_a : label_a + " vs " + label_b;

    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        std::size_t n = v.size();
        return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
    };

    syrbo::ComparisonOutcome outcome;
    outcome.dataset = dataset;
    outcome.median_syrbo = median(scores_a);
    outcome.median_baseline = median(scores_b);
    syrbo::Rng rng(syrbo::stats_seed(opt.seed, dataset));
    outcome.p_value = syrbo::permutation_test(scores_a, scores_b, opt.rounds, rng);
    outcome.label =
        syrbo::classify(outcome.median_syrbo, outcome.median_baseline, outcome.p_value);

    nlohmann::json doc = syrbo::comparison_to_json(outcome, median(fit_a), median(fit_b));
    doc["config"] = nlohmann::json::parse(config_line(opt, "compare"));
    std::string text = doc.dump(2) + "\n";
    if (opt.compare_out.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(opt.compare_out, std::ios::binary);
        if (!out) throw syrbo::data_error("cannot write comparison file: " + opt.compare_out);
        out << text;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"symbolic-regression boosting: GP symbolic regression with a "
                 "gradient-boosting wrapper and a cross-validated benchmark harness"};
    app.require_subcommand(1);
    Options opt;

    auto add_stages = [&](CLI::App* cmd) {
        cmd->add_option("--stages", opt.stages, "number of boosting stages")
            ->required()
            ->check(CLI::PositiveNumber)
            ->envname("SYRBO_STAGES");
    };
    auto add_gp_flags = [&](CLI::App* cmd) {
        cmd->add_option("--population-size", opt.population_size, "GP population size")
            ->check(CLI::PositiveNumber)
            ->capture_default_str()
            ->envname("SYRBO_POPULATION_SIZE");
        cmd->add_option("--generations", opt.generations, "GP generations")
            ->capture_default_str()
            ->envname("SYRBO_GENERATIONS");
    };
    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", opt.seed, "master random seed")
            ->capture_default_str()
            ->envname("SYRBO_SEED");
    };
    auto add_target = [&](CLI::App* cmd) {
        cmd->add_option("--target-column", opt.target_column, "name of the target column")
            ->capture_default_str()
            ->envname("SYRBO_TARGET_COLUMN");
    };

    CLI::App* fit = app.add_subcommand("fit", "fit a boosted model on a full dataset");
    fit->add_option("dataset", opt.dataset, "dataset file (TSV/CSV, optionally .gz)")->required();
    add_stages(fit);
    add_gp_flags(fit);
    add_seed(fit);
    add_target(fit);
    fit->add_option("--model-out", opt.model_out, "path for the model file")->required();

    CLI::App* predict = app.add_subcommand("predict", "predict with a fitted model");
    predict->add_option("model", opt.model_path, "model file written by fit")->required();
    predict->add_option("dataset", opt.dataset, "dataset file (target column optional)")
        ->required();
    add_target(predict);
    predict->add_option("--out", opt.predictions_out, "path for the predictions file")->required();

    CLI::App* experiment = app.add_subcommand(
        "experiment", "replicated cross-validated comparison against the single-stage baseline");
    experiment->add_option("datasets", opt.datasets, "dataset files")->required();
    add_stages(experiment);
    add_gp_flags(experiment);
    add_seed(experiment);
    add_target(experiment);
    experiment->add_option("--replicates", opt.replicates, "replicate runs per dataset")
        ->check(CLI::PositiveNumber)
        ->capture_default_str()
        ->envname("SYRBO_REPLICATES");
    experiment->add_option("--folds", opt.folds, "cross-validation folds")
        ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}))
        ->capture_default_str()
        ->envname("SYRBO_FOLDS");
    experiment->add_option("--rounds", opt.rounds, "permutation test rounds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str()
        ->envname("SYRBO_ROUNDS");
    experiment->add_option("--jobs", opt.jobs, "worker threads (results are jobs-independent)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str()
        ->envname("SYRBO_JOBS");
    experiment->add_option("--out-dir", opt.out_dir, "output directory")
        ->required()
        ->envname("SYRBO_OUT_DIR");
    experiment->add_flag("--timings", opt.timings,
                         "record wall-clock fit times (not byte-reproducible)");

    CLI::App* compare = app.add_subcommand(
        "compare", "recompute a comparison from stored records, without retraining");
    compare->add_option("records_a", opt.records_a, "records file for the boosted side")
        ->required();
    compare->add_option("records_b", opt.records_b, "records file for the baseline side")
        ->required();
    compare->add_option("--algo-a", opt.algo_a, "algorithm column to take from records_a")
        ->capture_default_str();
    compare->add_option("--algo-b", opt.algo_b, "algorithm column to take from records_b")
        ->capture_default_str();
    compare->add_option("--rounds", opt.rounds, "permutation test rounds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str()
        ->envname("SYRBO_ROUNDS");
    add_seed(compare);
    compare->add_option("--out", opt.compare_out, "write the comparison document here (default: stdout)");

    app.add_flag("-v,--verbose", opt.verbose, "progress output on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand("fit")) return cmd_fit(opt);
        if (app.got_subcommand("predict")) return cmd_predict(opt);
        if (app.got_subcommand("experiment")) return cmd_experiment(opt);
        if (app.got_subcommand("compare")) return cmd_compare(opt);
        std::cerr << "error: no subcommand\n";
        return kExitUsage;
    } catch (const syrbo::data_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
