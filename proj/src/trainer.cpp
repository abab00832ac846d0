#include "odrpo/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "odrpo/rng.hpp"

namespace odrpo {

TaskSpec TaskSpec::identity(RewardScale scale) {
    TaskSpec task{std::move(scale), {}, std::nullopt};
    task.class_levels.resize(static_cast<std::size_t>(task.scale.size()));
    for (int c = 0; c < task.scale.size(); ++c)
        task.class_levels[static_cast<std::size_t>(c)] = c + 1;
    return task;
}

SimplexPoint policy_probs(std::span<const double> logits) {
    if (logits.empty()) throw ValidationError("policy needs at least one logit");
    double max_logit = logits[0];
    for (double t : logits) {
        if (!std::isfinite(t)) throw ValidationError("policy logits must be finite");
        max_logit = std::max(max_logit, t);
    }
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t c = 0; c < logits.size(); ++c) {
        p[c] = std::exp(logits[c] - max_logit);
        sum += p[c];
    }
    for (double& v : p) v /= sum;
    return SimplexPoint(std::move(p));
}

namespace {

// Aggregate class probabilities into reward-level probabilities.
SimplexPoint level_probs(const SimplexPoint& class_probs, const TaskSpec& task) {
    std::vector<double> q(static_cast<std::size_t>(task.scale.size()), 0.0);
    for (int c = 0; c < task.num_classes(); ++c)
        q[static_cast<std::size_t>(task.class_levels[static_cast<std::size_t>(c)] - 1)] +=
            class_probs.prob(c + 1);
    return SimplexPoint(std::move(q));
}

EstimatorField make_field(const TrainConfig& config, const TaskSpec& task) {
    switch (config.estimator) {
        case EstimatorKind::Grpo: return EstimatorField::grpo(task.scale, config.group_size);
        case EstimatorKind::MaxRl: return EstimatorField::maxrl(task.scale, config.group_size);
        default:
            return EstimatorField::odrpo(task.scale, config.group_size, config.norm,
                                         config.weights);
    }
}

AdvantageVector group_advantages(const TrainConfig& config, const RolloutGroup& group) {
    switch (config.estimator) {
        case EstimatorKind::Grpo: return grpo_advantage(group);
        case EstimatorKind::MaxRl: return maxrl_advantage(group);
        default: return odrpo_advantage(group, config.norm, config.weights);
    }
}

// Gradient of sum_i A_i log p_{c_i} w.r.t. the logits: sum_i A_i (e_{c_i} - p).
std::vector<double> advantage_gradient(const SimplexPoint& p,
                                       std::span<const double> advantages,
                                       std::span<const int> classes) {
    std::vector<double> grad(static_cast<std::size_t>(p.size()), 0.0);
    double total_advantage = 0.0;
    for (double a : advantages) total_advantage += a;
    for (std::size_t c = 0; c < grad.size(); ++c)
        grad[c] = -total_advantage * p.prob(static_cast<int>(c) + 1);
    for (std::size_t i = 0; i < advantages.size(); ++i)
        grad[static_cast<std::size_t>(classes[i])] += advantages[i];
    return grad;
}

// Gradient along the expected field: sum_c g_c grad_theta p_c with
// g_c = E[f_{level(c)}] and grad_theta p_c = p_c (e_c - p).
std::vector<double> field_gradient(const SimplexPoint& p, const TaskSpec& task,
                                   std::span<const double> field_values) {
    std::vector<double> coeff(static_cast<std::size_t>(task.num_classes()));
    double weighted_total = 0.0;
    for (int c = 0; c < task.num_classes(); ++c) {
        const int level = task.class_levels[static_cast<std::size_t>(c)];
        coeff[static_cast<std::size_t>(c)] =
            field_values[static_cast<std::size_t>(level - 1)] * p.prob(c + 1);
        weighted_total += coeff[static_cast<std::size_t>(c)];
    }
    std::vector<double> grad(static_cast<std::size_t>(task.num_classes()));
    for (int c = 0; c < task.num_classes(); ++c)
        grad[static_cast<std::size_t>(c)] =
            coeff[static_cast<std::size_t>(c)] - weighted_total * p.prob(c + 1);
    return grad;
}

std::vector<double> apply_update(std::span<const double> logits,
                                 std::span<const double> gradient, double learning_rate) {
    std::vector<double> next(logits.begin(), logits.end());
    for (std::size_t c = 0; c < next.size(); ++c) next[c] += learning_rate * gradient[c];
    return next;
}

void validate_config(const TrainConfig& config) {
    if (config.group_size < 2) throw ValidationError("group size must be >= 2");
    if (config.steps < 1) throw ValidationError("steps must be >= 1");
    if (config.votes_per_rollout < 1) throw ValidationError("votes per rollout must be >= 1");
    if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate))
        throw ValidationError("learning rate must be finite and >= 0");
}

}  // namespace

SampledRollouts sample_rollouts(const SimplexPoint& p, int group_size, const TaskSpec& task,
                                int votes, std::uint64_t seed) {
    if (group_size < 2) throw ValidationError("group size must be >= 2");
    if (votes < 1) throw ValidationError("votes per rollout must be >= 1");
    if (p.size() != task.num_classes())
        throw ValidationError("policy width does not match the task's class count");

    Rng rng(seed);
    SampledRollouts out;
    out.classes.resize(static_cast<std::size_t>(group_size));
    out.level_indices.resize(static_cast<std::size_t>(group_size));
    std::vector<int> ballots(static_cast<std::size_t>(votes));
    for (int i = 0; i < group_size; ++i) {
        const int cls = static_cast<int>(rng.categorical(p.probs()));
        out.classes[static_cast<std::size_t>(i)] = cls;
        const int true_level = task.class_levels[static_cast<std::size_t>(cls)];
        if (!task.judge) {
            out.level_indices[static_cast<std::size_t>(i)] = true_level;
            continue;
        }
        const double quality =
            static_cast<std::size_t>(cls) < task.judge->latent_qualities.size()
                ? task.judge->latent_qualities[static_cast<std::size_t>(cls)]
                : static_cast<double>(true_level);
        for (int v = 0; v < votes; ++v)
            ballots[static_cast<std::size_t>(v)] =
                task.judge->sample_score_for_quality(quality, rng);
        out.level_indices[static_cast<std::size_t>(i)] = mode_vote(ballots);
    }
    return out;
}

std::vector<double> policy_gradient_update(std::span<const double> logits,
                                           std::span<const double> advantages,
                                           std::span<const int> classes,
                                           double learning_rate) {
    if (advantages.size() != classes.size())
        throw ValidationError("advantage and class lists must have equal length");
    const auto grad = advantage_gradient(policy_probs(logits), advantages, classes);
    return apply_update(logits, grad, learning_rate);
}

std::vector<double> sampled_step(std::span<const double> logits, const TrainConfig& config,
                                 const TaskSpec& task, std::uint64_t seed) {
    validate_config(config);
    const auto p = policy_probs(logits);
    const auto rollouts =
        sample_rollouts(p, config.group_size, task, config.votes_per_rollout, seed);
    const auto group = RolloutGroup::from_level_indices(task.scale, rollouts.level_indices);
    auto advantages = group_advantages(config, group).values;
    if (config.batch_norm) advantages = batch_normalize(advantages);
    return policy_gradient_update(logits, advantages, rollouts.classes, config.learning_rate);
}

std::vector<double> exact_step(std::span<const double> logits, const TrainConfig& config,
                               const TaskSpec& task) {
    validate_config(config);
    const auto p = policy_probs(logits);
    const auto field_values = expected_field(make_field(config, task), level_probs(p, task));
    return apply_update(logits, field_gradient(p, task, field_values), config.learning_rate);
}

TrainTrace run(const TrainConfig& config, const std::vector<TaskSpec>& tasks) {
    validate_config(config);
    if (tasks.empty()) throw ValidationError("training needs at least one task");

    std::vector<std::vector<double>> thetas;
    thetas.reserve(tasks.size());
    for (const auto& task : tasks)
        thetas.emplace_back(static_cast<std::size_t>(task.num_classes()), 0.0);

    TrainTrace trace;
    trace.records.reserve(static_cast<std::size_t>(config.steps));

    for (int step = 0; step < config.steps; ++step) {
        const std::uint64_t step_seed = derive_seed(config.seed, static_cast<std::uint64_t>(step));
        std::vector<std::vector<double>> gradients(tasks.size());
        std::vector<double> signal;  // advantages (sampled) or field values (exact)

        if (config.mode == TrainConfig::Mode::Sampled) {
            // Sample every task's group first so batch normalization can span
            // the whole step's batch.
            std::vector<SampledRollouts> rollouts(tasks.size());
            std::vector<std::vector<double>> advantages(tasks.size());
            for (std::size_t t = 0; t < tasks.size(); ++t) {
                const auto p = policy_probs(thetas[t]);
                rollouts[t] = sample_rollouts(p, config.group_size, tasks[t],
                                              config.votes_per_rollout,
                                              derive_seed(step_seed, t));
                const auto group =
                    RolloutGroup::from_level_indices(tasks[t].scale, rollouts[t].level_indices);
                advantages[t] = group_advantages(config, group).values;
            }
            if (config.batch_norm) {
                std::vector<double> pooled;
                for (const auto& a : advantages) pooled.insert(pooled.end(), a.begin(), a.end());
                pooled = batch_normalize(pooled);
                std::size_t offset = 0;
                for (auto& a : advantages) {
                    std::copy_n(pooled.begin() + static_cast<std::ptrdiff_t>(offset), a.size(),
                                a.begin());
                    offset += a.size();
                }
            }
            for (std::size_t t = 0; t < tasks.size(); ++t) {
                signal.insert(signal.end(), advantages[t].begin(), advantages[t].end());
                gradients[t] = advantage_gradient(policy_probs(thetas[t]), advantages[t],
                                                  rollouts[t].classes);
            }
        } else {
            for (std::size_t t = 0; t < tasks.size(); ++t) {
                const auto p = policy_probs(thetas[t]);
                const auto field_values =
                    expected_field(make_field(config, tasks[t]), level_probs(p, tasks[t]));
                signal.insert(signal.end(), field_values.begin(), field_values.end());
                gradients[t] = field_gradient(p, tasks[t], field_values);
            }
        }

        TraceRecord record;
        record.step = step;
        double grad_sq = 0.0;
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            for (double g : gradients[t]) grad_sq += g * g;
            thetas[t] = apply_update(thetas[t], gradients[t], config.learning_rate);
            const auto p = policy_probs(thetas[t]);
            record.objective += arcsin_objective(level_probs(p, tasks[t]), tasks[t].scale);
            for (int c = 0; c < tasks[t].num_classes(); ++c)
                record.expected_reward +=
                    p.prob(c + 1) *
                    tasks[t].scale.level(tasks[t].class_levels[static_cast<std::size_t>(c)]);
        }
        record.objective /= static_cast<double>(tasks.size());
        record.expected_reward /= static_cast<double>(tasks.size());
        record.grad_norm = std::sqrt(grad_sq);
        double mean = 0.0;
        for (double v : signal) mean += v;
        mean /= static_cast<double>(signal.size());
        double var = 0.0;
        for (double v : signal) var += (v - mean) * (v - mean);
        record.adv_mean = mean;
        record.adv_std = std::sqrt(var / static_cast<double>(signal.size()));
        trace.records.push_back(record);
    }
    return trace;
}

}  // namespace odrpo
