#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "esr/momdp.hpp"
#include "esr/policy.hpp"
#include "esr/welfare.hpp"

namespace esr {

/// Cap on memoized (state, reward vector) pairs and on enumeration frontiers.
inline constexpr std::size_t kOracleGuard = 10'000'000;

class OracleTooLarge : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/**
 * Exact keys for accumulated reward. With gamma = 1 and every reward a
 * multiple of 1/D (D <= 4096), vectors are tracked as integer numerators.
 * Otherwise keys are the components rounded to 1e-12.
 */
class RewardKeyer {
  public:
    explicit RewardKeyer(const Momdp& model);

    bool exact() const { return denominator_ > 0; }
    std::int64_t denominator() const { return denominator_; }
    /// True when r can be represented exactly on the grid.
    bool on_grid(std::span<const double> r) const;
    void key(std::span<const double> r, std::vector<std::int64_t>& out) const;

  private:
    std::int64_t denominator_ = 0;
};

/// Memoized V*(s, r_acc, t) for a fixed model, welfare and horizon.
class ExactOracle {
  public:
    ExactOracle(Momdp model, WelfareFn welfare, int T = 0, std::size_t guard = kOracleGuard);

    int horizon() const { return T_; }
    const Momdp& model() const { return model_; }

    double value(StateId s, std::span<const double> r_acc, int t);
    /// Lowest-id action attaining the maximum in the recursion.
    ActionId best_action(StateId s, std::span<const double> r_acc, int t);
    std::size_t memo_size() const { return memo_.size(); }

  private:
    struct KeyHash {
        std::size_t operator()(const std::vector<std::int64_t>& k) const noexcept;
    };

    double q_value(StateId s, ActionId a, std::span<const double> r, int t);
    double recurse(StateId s, std::vector<double>& r, int t);

    Momdp model_;
    WelfareFn welfare_;
    int T_;
    std::size_t guard_;
    RewardKeyer keyer_;
    std::unordered_map<std::vector<std::int64_t>, double, KeyHash> memo_;
};

/// V*(s, r_acc, t) with T = model.horizon().
double exact_value(const Momdp& model, const WelfareFn& welfare, StateId s, std::span<const double> r_acc, int t);

struct PolicyEvaluation {
    double esr = 0.0;
    double ser = 0.0;
    RewardVec expected_return;
    /// Distinct (state, reward vector) outcomes at the end of the horizon.
    std::size_t support = 0;
};

/**
 * Exact forward enumeration over (state, accumulated reward) for T steps
 * (model horizon when T <= 0) from `start` (model start when kNoIndex).
 * Outcomes with equal state and reward key are merged, which is exact for
 * policies that condition only on (state, reward, time).
 */
PolicyEvaluation evaluate_policy(const Momdp& model, const WelfareFn& welfare, const Policy& policy, int T = 0,
                                 StateId start = kNoIndex, std::size_t guard = kOracleGuard);

double esr_of_policy(const Momdp& model, const WelfareFn& welfare, const Policy& policy, int T = 0,
                     StateId start = kNoIndex);
double ser_of_policy(const Momdp& model, const WelfareFn& welfare, const Policy& policy, int T = 0,
                     StateId start = kNoIndex);

struct TrajectoryDist {
    std::vector<std::pair<Trajectory, double>> entries;
    double total_probability() const;
};

/// Every positive-probability length-T trajectory with its probability.
TrajectoryDist trajectory_distribution(const Momdp& model, const Policy& policy, int T = 0, StateId start = kNoIndex,
                                       std::size_t guard = kOracleGuard);

/// Acts greedily on the exact recursion.
class OracleGreedyPolicy : public DeterministicPolicy {
  public:
    explicit OracleGreedyPolicy(std::shared_ptr<ExactOracle> oracle) : oracle_(std::move(oracle)) {}

    std::size_t n_actions() const override { return oracle_->model().n_actions(); }
    ActionId choose(const Decision& decision) const override {
        return oracle_->best_action(decision.state, decision.accumulated, decision.steps_remaining);
    }

  private:
    std::shared_ptr<ExactOracle> oracle_;
};

}  // namespace esr
