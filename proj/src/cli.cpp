#include "odrpo/cli.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <thread>

#include "odrpo/csv.hpp"
#include "odrpo/estimators.hpp"
#include "odrpo/rater_sim.hpp"
#include "odrpo/reward_core.hpp"
#include "odrpo/rng.hpp"
#include "odrpo/theory.hpp"
#include "odrpo/trainer.hpp"
#include "odrpo/weighting.hpp"

namespace odrpo::cli {

namespace {

RewardScale make_scale(const RunConfig& config) {
    if (!config.scale_levels.empty()) return RewardScale(config.scale_levels);
    return RewardScale::integers(config.scale_k);
}

std::string fmt(double v) { return csv::format_double(v); }

std::string scale_description(const RewardScale& scale) {
    std::ostringstream out;
    out << "scale=";
    for (int k = 1; k <= scale.size(); ++k) {
        if (k > 1) out << '|';
        out << fmt(scale.level(k));
    }
    return out.str();
}

double default_or(double value, double fallback) { return value < 0.0 ? fallback : value; }

void parallel_for(int items, int threads, const std::function<void(int)>& body) {
    const int nthreads = std::max(1, std::min(threads, items));
    if (nthreads == 1) {
        for (int i = 0; i < items; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    const int chunk = (items + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
        const int begin = t * chunk;
        const int end = std::min(items, begin + chunk);
        if (begin < end)
            pool.emplace_back([&, begin, end] {
                for (int i = begin; i < end; ++i) body(i);
            });
    }
    for (auto& th : pool) th.join();
}

int run_guarded(const RunConfig& config, const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const MeanTooSmallError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEstimatorDomain;
    } catch (const TooLargeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitResourceGuard;
    } catch (const std::exception& e) {
        std::cerr << "error (" << config.subcommand << "): " << e.what() << "\n";
        return kExitValidation;
    }
}

}  // namespace

int cmd_advantage(const RunConfig& config) {
    return run_guarded(config, [&] {
        if (config.input_path.empty() || config.output_path.empty())
            throw ValidationError("advantage needs --in and --out");
        const RewardScale scale = make_scale(config);
        const auto kind = estimator_kind_from_string(config.estimator);
        const auto norm = normalization_from_string(config.norm);
        const auto scheme = weight_scheme_from_string(config.weights);
        if (config.per_bin && kind != EstimatorKind::Odrpo)
            throw ValidationError("--per-bin requires --estimator odrpo");

        const auto groups = csv::read_reward_groups(config.input_path);

        csv::Writer out(config.output_path);
        std::ostringstream cfg;
        cfg << "advantage estimator=" << config.estimator << " norm=" << config.norm
            << " weights=" << config.weights << " per_bin=" << (config.per_bin ? 1 : 0) << " "
            << scale_description(scale) << " seed=" << config.seed;
        out.comment(cfg.str());
        std::vector<std::string> header = {"group_id", "rollout", "reward", "advantage"};
        if (config.per_bin)
            for (int k = 1; k <= scale.size(); ++k) header.push_back("bin_" + std::to_string(k));
        out.header(header);

        csv::Writer* weights_out = nullptr;
        std::unique_ptr<csv::Writer> weights_writer;
        if (!config.weights_out.empty()) {
            weights_writer = std::make_unique<csv::Writer>(config.weights_out);
            weights_writer->comment(cfg.str());
            weights_writer->header({"group_id", "bin", "mu", "weight"});
            weights_out = weights_writer.get();
        }

        for (const auto& row : groups) {
            const RolloutGroup group(scale, row.rewards);
            AdvantageVector adv;
            switch (kind) {
                case EstimatorKind::Grpo: adv = grpo_advantage(group); break;
                case EstimatorKind::MaxRl: adv = maxrl_advantage(group); break;
                case EstimatorKind::Odrpo: adv = odrpo_advantage(group, norm, scheme); break;
            }
            for (int i = 0; i < group.size(); ++i) {
                std::vector<std::string> fields = {row.group_id, std::to_string(i + 1),
                                                   fmt(group.reward(i)),
                                                   fmt(adv.values[static_cast<std::size_t>(i)])};
                if (config.per_bin)
                    for (int k = 1; k <= scale.size(); ++k) fields.push_back(fmt(adv.bin(i, k)));
                out.row(fields);
            }
            if (weights_out) {
                const auto stats = bin_stats(decompose(group));
                const auto w = bin_weights(scheme, stats, group);
                for (int k = 1; k <= scale.size(); ++k)
                    weights_out->row({row.group_id, std::to_string(k),
                                      fmt(stats.bin_means[static_cast<std::size_t>(k - 1)]),
                                      fmt(w[static_cast<std::size_t>(k - 1)])});
            }
        }
    });
}

int cmd_curl_scan(const RunConfig& config) {
    return run_guarded(config, [&] {
        if (config.output_path.empty()) throw ValidationError("curl-scan needs --out");
        const auto norm = normalization_from_string(config.norm);

        struct Variant {
            EstimatorKind kind;
            WeightScheme weights;
        };
        std::vector<Variant> variants;
        if (config.estimator == "all") {
            variants = {{EstimatorKind::Grpo, WeightScheme::Unit},
                        {EstimatorKind::MaxRl, WeightScheme::Unit},
                        {EstimatorKind::Odrpo, WeightScheme::Unit},
                        {EstimatorKind::Odrpo, WeightScheme::Gini},
                        {EstimatorKind::Odrpo, WeightScheme::GiniMedian}};
        } else {
            const auto kind = estimator_kind_from_string(config.estimator);
            variants = {{kind, weight_scheme_from_string(config.weights)}};
        }

        std::vector<CurlReport> reports;
        for (const auto& variant : variants) {
            MacScanSpec spec;
            spec.kind = variant.kind;
            spec.norm = norm;
            spec.weights = variant.weights;
            spec.k_min = config.k_min;
            spec.k_max = config.k_max;
            spec.m_min = config.m_min;
            spec.m_max = config.m_max;
            auto batch = mac_scan(spec, config.threads);
            reports.insert(reports.end(), batch.begin(), batch.end());
        }
        std::stable_sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
            if (a.estimator != b.estimator) return a.estimator < b.estimator;
            if (a.num_levels != b.num_levels) return a.num_levels < b.num_levels;
            return a.group_size < b.group_size;
        });

        csv::Writer out(config.output_path);
        std::ostringstream cfg;
        cfg << "curl-scan estimator=" << config.estimator << " norm=" << config.norm
            << " K=" << config.k_min << ".." << config.k_max << " M=" << config.m_min << ".."
            << config.m_max;
        out.comment(cfg.str());
        out.header({"estimator", "K", "M", "mac", "max_abs"});
        for (const auto& r : reports)
            out.row({r.estimator, std::to_string(r.num_levels), std::to_string(r.group_size),
                     fmt(r.mac), fmt(r.max_abs)});
    });
}

int cmd_objective(const RunConfig& config) {
    return run_guarded(config, [&] {
        if (config.output_path.empty()) throw ValidationError("objective needs --out");
        if (config.objective_m < 2) throw ValidationError("objective needs M >= 2");
        if (config.grid_points < 2) throw ValidationError("objective needs >= 2 grid points");

        csv::Writer out(config.output_path);
        std::ostringstream cfg;
        cfg << "objective M=" << config.objective_m << " grid=" << config.grid_points;
        out.comment(cfg.str());
        out.header({"P", "beta", "alpha", "beta_minus_alpha", "arcsin_grad"});
        for (int i = 0; i < config.grid_points; ++i) {
            const double p = static_cast<double>(i) / (config.grid_points - 1);
            const auto ba = beta_alpha(p, config.objective_m);
            out.row({fmt(p), fmt(ba.beta), fmt(ba.alpha), fmt(ba.beta - ba.alpha),
                     fmt(arcsin_gradient(p))});
        }
    });
}

int cmd_rater_sim(const RunConfig& config) {
    return run_guarded(config, [&] {
        if (config.output_path.empty()) throw ValidationError("rater-sim needs --out");
        if (config.num_responses < 2 || config.num_calls < 2)
            throw ValidationError("rater-sim needs --responses >= 2 and --calls >= 2");
        if (config.datapoints < 1) throw ValidationError("rater-sim needs --datapoints >= 1");
        const int k = config.scale_levels.empty()
                          ? config.scale_k
                          : static_cast<int>(config.scale_levels.size());
        const double noise = default_or(config.noise_width, kDefaultNoiseWidth);
        const double outliers = default_or(config.outlier_rate, kDefaultOutlierRate);

        struct DatapointResult {
            double w = 0, chi2 = 0, p_value = 0, flip = 0;
            bool degenerate = false;
            std::vector<RowStats> rows;
        };
        std::vector<DatapointResult> results(static_cast<std::size_t>(config.datapoints));

        parallel_for(config.datapoints, config.threads, [&](int dp) {
            const std::uint64_t dp_seed = derive_seed(config.seed, static_cast<std::uint64_t>(dp));
            Rng quality_rng(derive_seed(dp_seed, 0));
            JudgeModel judge;
            judge.num_levels = k;
            judge.noise_width = noise;
            judge.outlier_rate = outliers;
            judge.latent_qualities.resize(static_cast<std::size_t>(config.num_responses));
            for (auto& q : judge.latent_qualities)
                q = 1.0 + quality_rng.uniform() * (k - 1);
            const auto matrix =
                sample_scores(judge, config.num_responses, config.num_calls, derive_seed(dp_seed, 1));
            auto& res = results[static_cast<std::size_t>(dp)];
            try {
                const auto report = kendalls_w(matrix);
                res.w = report.w;
                res.chi2 = report.chi2;
                res.p_value = report.p_value;
            } catch (const DegenerateMatrixError&) {
                res.degenerate = true;
                res.w = res.chi2 = res.p_value = std::numeric_limits<double>::quiet_NaN();
            }
            res.flip = rank_flip_rate(matrix);
            res.rows = row_stats(matrix);
        });

        std::ostringstream cfg;
        cfg << "rater-sim M=" << config.num_responses << " N=" << config.num_calls << " K=" << k
            << " noise_width=" << fmt(noise) << " outlier_rate=" << fmt(outliers)
            << " datapoints=" << config.datapoints << " seed=" << config.seed;

        csv::Writer out(config.output_path);
        out.comment(cfg.str());
        out.header({"datapoint", "W", "chi2", "p_value", "flip_rate"});
        for (int dp = 0; dp < config.datapoints; ++dp) {
            const auto& res = results[static_cast<std::size_t>(dp)];
            out.row({std::to_string(dp), fmt(res.w), fmt(res.chi2), fmt(res.p_value),
                     fmt(res.flip)});
        }
        {
            std::string responses_path = config.responses_out;
            if (responses_path.empty()) {
                responses_path = config.output_path;
                const auto dot = responses_path.rfind('.');
                if (dot != std::string::npos && responses_path.find('/', dot) == std::string::npos)
                    responses_path.resize(dot);
                responses_path += "_responses.csv";
            }
            csv::Writer rout(responses_path);
            rout.comment(cfg.str());
            rout.header({"datapoint", "response", "mean", "std", "skew", "kurtosis"});
            for (int dp = 0; dp < config.datapoints; ++dp) {
                const auto& res = results[static_cast<std::size_t>(dp)];
                for (std::size_t i = 0; i < res.rows.size(); ++i)
                    rout.row({std::to_string(dp), std::to_string(i + 1), fmt(res.rows[i].mean),
                              fmt(res.rows[i].stddev), fmt(res.rows[i].skewness),
                              fmt(res.rows[i].excess_kurtosis)});
            }
        }

        std::vector<double> ws;
        int below = 0;
        for (const auto& res : results) {
            if (res.degenerate) continue;
            ws.push_back(res.w);
            if (res.w < config.consistency_threshold) ++below;
        }
        double median = std::numeric_limits<double>::quiet_NaN();
        if (!ws.empty()) {
            std::sort(ws.begin(), ws.end());
            median = ws.size() % 2 ? ws[ws.size() / 2]
                                   : 0.5 * (ws[ws.size() / 2 - 1] + ws[ws.size() / 2]);
        }
        std::cout << "datapoints=" << config.datapoints << " median_W=" << fmt(median)
                  << " below_threshold=" << fmt(static_cast<double>(below) /
                                                std::max<std::size_t>(ws.size(), 1))
                  << " (threshold=" << fmt(config.consistency_threshold) << ")\n";
    });
}

namespace {

TrainConfig build_train_config(const RunConfig& config) {
    TrainConfig tc;
    tc.estimator = estimator_kind_from_string(config.estimator);
    tc.norm = normalization_from_string(config.norm);
    tc.weights = weight_scheme_from_string(config.weights);
    tc.group_size = config.group_size;
    tc.steps = config.steps;
    tc.votes_per_rollout = config.votes;
    tc.batch_norm = config.batch_norm;
    tc.seed = config.seed;
    if (config.mode == "exact") {
        tc.mode = TrainConfig::Mode::Exact;
        tc.learning_rate = default_or(config.learning_rate, 1e-3);
    } else if (config.mode == "sampled") {
        tc.mode = TrainConfig::Mode::Sampled;
        tc.learning_rate = default_or(config.learning_rate, 1e-2);
    } else {
        throw ValidationError("unknown mode '" + config.mode + "' (use exact|sampled)");
    }
    return tc;
}

std::vector<TaskSpec> build_tasks(const RunConfig& config, const RewardScale& scale,
                                  bool with_judge) {
    if (config.batch_size < 1) throw ValidationError("batch size must be >= 1");
    TaskSpec task = TaskSpec::identity(scale);
    if (with_judge) {
        JudgeModel judge;
        judge.num_levels = scale.size();
        judge.noise_width = default_or(config.noise_width, kDefaultNoiseWidth);
        judge.outlier_rate = default_or(config.outlier_rate, kDefaultOutlierRate);
        judge.latent_qualities.resize(static_cast<std::size_t>(scale.size()));
        for (int c = 0; c < scale.size(); ++c)
            judge.latent_qualities[static_cast<std::size_t>(c)] = c + 1;
        task.judge = judge;
    }
    return std::vector<TaskSpec>(static_cast<std::size_t>(config.batch_size), task);
}

}  // namespace

int cmd_train(const RunConfig& config) {
    return run_guarded(config, [&] {
        if (config.output_path.empty()) throw ValidationError("train needs --out");
        const RewardScale scale = make_scale(config);
        const TrainConfig tc = build_train_config(config);
        const auto tasks = build_tasks(config, scale, config.with_judge);
        const auto trace = run(tc, tasks);

        csv::Writer out(config.output_path);
        std::ostringstream cfg;
        cfg << "train mode=" << config.mode << " estimator=" << config.estimator
            << " norm=" << config.norm << " weights=" << config.weights
            << " G=" << config.group_size << " lr=" << fmt(tc.learning_rate)
            << " steps=" << config.steps << " votes=" << config.votes
            << " batch=" << config.batch_size << " batch_norm=" << (config.batch_norm ? 1 : 0)
            << " judge=" << (config.with_judge ? 1 : 0) << " " << scale_description(scale)
            << " seed=" << config.seed;
        out.comment(cfg.str());
        out.header({"step", "J", "expected_reward", "adv_mean", "adv_std", "grad_norm"});
        for (const auto& r : trace.records)
            out.row({std::to_string(r.step), fmt(r.objective), fmt(r.expected_reward),
                     fmt(r.adv_mean), fmt(r.adv_std), fmt(r.grad_norm)});
        const auto& last = trace.records.back();
        std::cout << "final J=" << fmt(last.objective)
                  << " expected_reward=" << fmt(last.expected_reward) << "\n";
    });
}

int cmd_vote_sweep(const RunConfig& config) {
    return run_guarded(config, [&] {
        if (config.output_path.empty()) throw ValidationError("vote-sweep needs --out");
        const RewardScale scale = make_scale(config);

        struct Variant {
            std::string estimator;
            std::string weights;
        };
        const std::vector<Variant> variants = {{"grpo", "unit"},
                                               {"maxrl", "unit"},
                                               {"odrpo", "unit"},
                                               {"odrpo", "gini"},
                                               {"odrpo", "gini-median"}};
        const std::vector<int> vote_counts = {1, 8, 16, 32};

        csv::Writer out(config.output_path);
        std::ostringstream cfg;
        cfg << "vote-sweep norm=" << config.norm << " G=" << config.group_size
            << " steps=" << config.steps << " batch=" << config.batch_size
            << " judge=" << (config.with_judge ? 1 : 0) << " " << scale_description(scale)
            << " seed=" << config.seed;
        out.comment(cfg.str());
        out.header({"N", "estimator", "final_J", "final_expected_reward"});

        for (int votes : vote_counts) {
            for (const auto& variant : variants) {
                RunConfig rc = config;
                rc.estimator = variant.estimator;
                rc.weights = variant.weights;
                rc.votes = votes;
                rc.mode = "sampled";
                const TrainConfig tc = build_train_config(rc);
                const auto tasks = build_tasks(rc, scale, config.with_judge);
                const auto trace = run(tc, tasks);
                const auto& last = trace.records.back();
                const std::string label =
                    variant.estimator == "odrpo" ? "odrpo-" + variant.weights : variant.estimator;
                out.row({std::to_string(votes), label, fmt(last.objective),
                         fmt(last.expected_reward)});
            }
        }
    });
}

int dispatch(const RunConfig& config) {
    if (config.subcommand == "advantage") return cmd_advantage(config);
    if (config.subcommand == "curl-scan") return cmd_curl_scan(config);
    if (config.subcommand == "objective") return cmd_objective(config);
    if (config.subcommand == "rater-sim") return cmd_rater_sim(config);
    if (config.subcommand == "train") return cmd_train(config);
    if (config.subcommand == "vote-sweep") return cmd_vote_sweep(config);
    std::cerr << "error: unknown subcommand '" << config.subcommand << "'\n";
    return kExitValidation;
}

}  // namespace odrpo::cli
