#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace odrpo::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitEstimatorDomain = 3;
inline constexpr int kExitResourceGuard = 4;

struct RunConfig {
    std::string subcommand;

    // Scale: explicit levels win over the integer scale {1..scale_k}.
    int scale_k = 10;
    std::vector<double> scale_levels;

    // Estimator selection ("all" scans every estimator in curl-scan).
    std::string estimator = "odrpo";
    std::string norm = "stddev";
    std::string weights = "unit";
    bool per_bin = false;

    // Group / matrix shapes.
    int group_size = 8;      // G (advantage, train) and M (curl scan field)
    int num_responses = 8;   // rater-sim M
    int num_calls = 16;      // rater-sim N
    int k_min = 2, k_max = 5;
    int m_min = 2, m_max = 6;

    // Judge noise.
    double noise_width = -1.0;   // < 0 means "module default"
    double outlier_rate = -1.0;
    int datapoints = 1000;
    double consistency_threshold = 0.9;

    // Trainer.
    double learning_rate = -1.0;  // < 0 means per-mode default
    int steps = 200;
    int votes = 1;
    int batch_size = 1;
    bool batch_norm = false;
    bool with_judge = false;
    std::string mode = "exact";

    // Objective table.
    int objective_m = 512;
    int grid_points = 101;

    std::uint64_t seed = 0;
    int threads = 1;

    std::string input_path;
    std::string output_path;
    std::string responses_out;
    std::string weights_out;
};

int cmd_advantage(const RunConfig& config);
int cmd_curl_scan(const RunConfig& config);
int cmd_objective(const RunConfig& config);
int cmd_rater_sim(const RunConfig& config);
int cmd_train(const RunConfig& config);
int cmd_vote_sweep(const RunConfig& config);

int dispatch(const RunConfig& config);

}  // namespace odrpo::cli
