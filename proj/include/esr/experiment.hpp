#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "esr/baselines.hpp"
#include "esr/momdp.hpp"
#include "esr/policy.hpp"
#include "esr/welfare.hpp"

namespace esr {

/// kind: "ravi" | "linear" | "mixture" | "welfare_q" | "random".
struct AlgorithmSpec {
    std::string kind;
    /// Display name; defaults to kind.
    std::string label;
    /// ravi: fixed alpha; unset means the config-level alpha.
    std::optional<double> alpha;
    /// ravi with alpha "auto": target epsilon for the guarantee.
    double epsilon = 1.0;
    /// linear: weight grid.
    std::vector<std::vector<double>> weights;
    /// mixture: interval grid.
    std::vector<int> intervals;
};

/**
 * Experiment matrix. JSON keys: name, environment, train_welfare,
 * eval_welfare, algorithms, n_seeds, horizon, gamma, master_seed,
 * alpha (number or "auto"), q_learning, evaluation_episodes, threads.
 */
struct ExperimentConfig {
    std::string name = "experiment";
    nlohmann::json environment;
    nlohmann::json train_welfare;
    nlohmann::json eval_welfare;
    std::vector<AlgorithmSpec> algorithms;
    std::size_t n_seeds = 1;
    std::optional<int> horizon;
    std::optional<double> gamma;
    std::uint64_t master_seed = 0;
    /// Unset = "auto".
    std::optional<double> alpha = 1.0;
    QLearningParams q_learning;
    /// Monte-Carlo episodes when exact evaluation is too large.
    std::size_t evaluation_episodes = 1000;
    /// Seed-level workers; 0 = hardware concurrency.
    std::size_t threads = 1;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_experiment_config(const std::string& path);

/// Built-in configurations: "desk-taxi", "desk-scavenger", "figure1".
ExperimentConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

/// Instance for seed index i with the config's horizon/gamma overrides applied.
Momdp experiment_instance(const ExperimentConfig& cfg, std::size_t seed_index);

struct Evaluation {
    double value = 0.0;
    bool exact = false;
};

/// Exact ESR when the oracle guard allows it, otherwise Monte-Carlo with `episodes` rollouts.
Evaluation evaluate_esr(const Momdp& model, const WelfareFn& welfare, const Policy& policy, std::uint64_t seed,
                        std::size_t episodes, std::size_t guard = 1'000'000);

struct SeedResult {
    std::string algorithm;
    std::size_t seed = 0;
    double value = 0.0;
    bool exact = false;
    bool ok = true;
    /// Chosen hyperparameters or the failure message.
    std::string detail;
};

struct AlgorithmSummary {
    std::string algorithm;
    double mean = 0.0;
    double std = 0.0;
    std::size_t n_ok = 0;
    std::size_t n_failed = 0;
    /// Seeds on which this algorithm matched the best value (ties count).
    std::size_t best_count = 0;
    bool all_exact = true;
};

struct ExperimentReport {
    std::string name;
    std::vector<SeedResult> seeds;
    std::vector<AlgorithmSummary> summary;

    const AlgorithmSummary& find(const std::string& algorithm) const;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Recomputes summaries from per-seed results.
std::vector<AlgorithmSummary> summarize(const std::vector<SeedResult>& seeds, const std::vector<std::string>& order);

std::string summary_csv(const ExperimentReport& report);
std::string seeds_csv(const ExperimentReport& report);
std::string summary_table(const ExperimentReport& report);
nlohmann::json report_to_json(const ExperimentReport& report);

struct AblationRow {
    double alpha = 0.0;
    double mean = 0.0;
    double std = 0.0;
};

struct AblationReport {
    std::vector<AblationRow> rows;
    /// Mean of the linear-scalarized baseline when the config lists one.
    std::optional<double> linear_mean;
    std::vector<ExperimentReport> runs;
};

/// One RAVI experiment per alpha; non-RAVI algorithms in the config run once for reference.
AblationReport run_ablation(const ExperimentConfig& cfg, const std::vector<double>& alphas);
std::string ablation_csv(const AblationReport& report);
nlohmann::json ablation_to_json(const AblationReport& report);

/// %.17g formatting used by every report.
std::string format_real(double x);

}  // namespace esr
