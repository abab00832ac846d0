#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "odrpo/estimators.hpp"
#include "odrpo/rater_sim.hpp"
#include "odrpo/reward_core.hpp"
#include "odrpo/theory.hpp"

namespace odrpo {

// One synthetic categorical task: answer class c earns the reward at
// class_levels[c] (identity by default), optionally rescored by a stochastic
// judge whose latent quality per class is the class's true level.
struct TaskSpec {
    RewardScale scale;
    std::vector<int> class_levels;     // 1-based level index per class
    std::optional<JudgeModel> judge;

    static TaskSpec identity(RewardScale scale);
    int num_classes() const { return static_cast<int>(class_levels.size()); }
};

struct TrainConfig {
    enum class Mode { Exact, Sampled };

    EstimatorKind estimator = EstimatorKind::Odrpo;
    Normalization norm = Normalization::StdDev;
    WeightScheme weights = WeightScheme::Unit;
    int group_size = 8;
    double learning_rate = 1e-3;   // sampled-mode default is 1e-2 (see CLI)
    int steps = 200;
    int votes_per_rollout = 1;
    bool batch_norm = false;
    Mode mode = Mode::Exact;
    std::uint64_t seed = 0;
};

struct TraceRecord {
    int step = 0;
    double objective = 0.0;        // arcsin objective of the level probabilities
    double expected_reward = 0.0;  // sum_c p_c R(level(c))
    double adv_mean = 0.0;
    double adv_std = 0.0;
    double grad_norm = 0.0;
};

struct TrainTrace {
    std::vector<TraceRecord> records;
};

// p_c = exp(theta_c - max theta) / sum: strictly positive, sums to 1.
SimplexPoint policy_probs(std::span<const double> logits);

struct SampledRollouts {
    std::vector<int> classes;       // 0-based class per rollout
    std::vector<int> level_indices; // 1-based reward level per rollout
};

// G classes i.i.d. from p; each rollout's reward level is the mode of
// `votes` judge samples (or the deterministic class level with no judge).
SampledRollouts sample_rollouts(const SimplexPoint& p, int group_size, const TaskSpec& task,
                                int votes, std::uint64_t seed);

// theta update from per-rollout advantages: delta = lr * sum_i A_i (e_{c_i} - p).
std::vector<double> policy_gradient_update(std::span<const double> logits,
                                           std::span<const double> advantages,
                                           std::span<const int> classes, double learning_rate);

std::vector<double> sampled_step(std::span<const double> logits, const TrainConfig& config,
                                 const TaskSpec& task, std::uint64_t seed);

// Deterministic ascent along the expected update field:
// theta' = theta + lr * sum_c E[f_{level(c)}] grad_theta p_c.
std::vector<double> exact_step(std::span<const double> logits, const TrainConfig& config,
                               const TaskSpec& task);

// Full loop over a batch of tasks (one logit vector per task); batch
// normalization, when enabled, spans all advantages of the step's batch.
TrainTrace run(const TrainConfig& config, const std::vector<TaskSpec>& tasks);

}  // namespace odrpo
