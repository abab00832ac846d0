// Command-line front end: every experiment is a reproducible subcommand with
// CSV input/output and deterministic seeding.

#include <string>

#include <CLI11.hpp>

#include "odrpo/cli.hpp"

namespace {

void add_shared_flags(CLI::App* cmd, odrpo::cli::RunConfig& config) {
    cmd->add_option("--seed", config.seed, "root 64-bit seed");
    cmd->add_option("--out", config.output_path, "output CSV path");
    cmd->add_option("--threads", config.threads, "worker thread bound")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--scale-k", config.scale_k, "integer scale {1..K}")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--scale-levels", config.scale_levels,
                    "explicit scale levels (comma separated)")
        ->delimiter(',');
}

void add_estimator_flags(CLI::App* cmd, odrpo::cli::RunConfig& config) {
    cmd->add_option("--estimator", config.estimator, "grpo|maxrl|odrpo");
    cmd->add_option("--norm", config.norm, "stddev|mean");
    cmd->add_option("--weights", config.weights, "unit|gini|gini-median");
}

}  // namespace

int main(int argc, char** argv) {
    odrpo::cli::RunConfig config;
    CLI::App app{"ordinal-decomposition advantage estimation toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file (flags override it)");

    auto* advantage = app.add_subcommand("advantage", "per-rollout advantages for reward groups");
    add_shared_flags(advantage, config);
    add_estimator_flags(advantage, config);
    advantage->add_option("--in", config.input_path, "reward-group CSV (group_id,r_1,...,r_G)");
    advantage->add_flag("--per-bin", config.per_bin, "emit per-bin columns (odrpo only)");
    advantage->add_option("--weights-out", config.weights_out,
                          "also emit per-group bin weights (group_id,bin,mu,weight)");

    auto* curl = app.add_subcommand("curl-scan", "mean absolute curl over a K x M grid");
    add_shared_flags(curl, config);
    add_estimator_flags(curl, config);
    curl->get_option("--estimator")->description("grpo|maxrl|odrpo|all (default all)");
    curl->callback([&config, curl] {
        if (curl->get_option("--estimator")->count() == 0) config.estimator = "all";
    });
    curl->add_option("--k-min", config.k_min)->check(CLI::Range(2, 64));
    curl->add_option("--k-max", config.k_max)->check(CLI::Range(2, 64));
    curl->add_option("--m-min", config.m_min)->check(CLI::Range(2, 64));
    curl->add_option("--m-max", config.m_max)->check(CLI::Range(2, 64));

    auto* objective = app.add_subcommand("objective",
                                         "beta/alpha table against the arcsin gradient");
    add_shared_flags(objective, config);
    objective->add_option("--m", config.objective_m, "group size M")->check(CLI::Range(2, 100000));
    objective->add_option("--grid", config.grid_points, "number of P grid points")
        ->check(CLI::Range(2, 1000000));

    auto* rater = app.add_subcommand("rater-sim", "synthetic judge concordance study");
    add_shared_flags(rater, config);
    rater->add_option("--responses", config.num_responses, "responses per datapoint (M)")
        ->check(CLI::Range(2, 10000));
    rater->add_option("--calls", config.num_calls, "judge calls per response (N)")
        ->check(CLI::Range(2, 10000));
    rater->add_option("--noise-width", config.noise_width, "logistic noise width");
    rater->add_option("--outlier-rate", config.outlier_rate, "uniform outlier probability")
        ->check(CLI::Range(0.0, 1.0));
    rater->add_option("--datapoints", config.datapoints)->check(CLI::PositiveNumber);
    rater->add_option("--threshold", config.consistency_threshold,
                      "consistency threshold for the summary line");
    rater->add_option("--responses-out", config.responses_out,
                      "per-response moment CSV (datapoint,response,mean,std,skew,kurtosis)");

    auto* train = app.add_subcommand("train", "toy policy-gradient loop with trace CSV");
    add_shared_flags(train, config);
    add_estimator_flags(train, config);
    train->add_option("--group-size", config.group_size)->check(CLI::Range(2, 10000));
    train->add_option("--lr", config.learning_rate, "learning rate (default 1e-3 exact, 1e-2 sampled)");
    train->add_option("--steps", config.steps)->check(CLI::PositiveNumber);
    train->add_option("--votes", config.votes, "judge calls per rollout (mode aggregation)")
        ->check(CLI::PositiveNumber);
    train->add_option("--batch-size", config.batch_size, "tasks per step")
        ->check(CLI::PositiveNumber);
    train->add_flag("--batch-norm", config.batch_norm, "normalize advantages across the batch");
    train->add_flag("--judge", config.with_judge, "score rollouts through the noisy judge");
    train->add_option("--noise-width", config.noise_width, "judge noise width");
    train->add_option("--outlier-rate", config.outlier_rate, "judge outlier probability")
        ->check(CLI::Range(0.0, 1.0));
    train->add_option("--mode", config.mode, "exact|sampled");

    auto* sweep = app.add_subcommand("vote-sweep",
                                     "final reward/objective across N in {1,8,16,32}");
    add_shared_flags(sweep, config);
    sweep->add_option("--norm", config.norm, "stddev|mean");
    sweep->add_option("--group-size", config.group_size)->check(CLI::Range(2, 10000));
    sweep->add_option("--lr", config.learning_rate);
    sweep->add_option("--steps", config.steps)->check(CLI::PositiveNumber);
    sweep->add_option("--batch-size", config.batch_size)->check(CLI::PositiveNumber);
    sweep->add_flag("--batch-norm", config.batch_norm);
    sweep->add_flag("--judge", config.with_judge, "score rollouts through the noisy judge");
    sweep->add_option("--noise-width", config.noise_width);
    sweep->add_option("--outlier-rate", config.outlier_rate)->check(CLI::Range(0.0, 1.0));

    // Accept `--config` (and other root flags) after the subcommand name too.
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : odrpo::cli::kExitValidation;
    }

    config.subcommand = app.get_subcommands().front()->get_name();
    return odrpo::cli::dispatch(config);
}
