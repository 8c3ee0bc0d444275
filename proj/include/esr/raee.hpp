#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "esr/environments.hpp"
#include "esr/momdp.hpp"
#include "esr/policy.hpp"
#include "esr/ravi.hpp"
#include "esr/welfare.hpp"

namespace esr {

/// Default scale for the m_known formula; gives a few dozen visits on small instances.
inline constexpr double kDefaultKnownConstant = 2.5e-10;

struct RaeeConfig {
    double eps = 0.1;
    double beta = 0.1;
    /// V*(s, 0, T) supplied by the caller.
    double v_star_target = 0.0;
    std::optional<std::size_t> m_known_override;
    /// Upper bound on T-step welfare; W(T * 1) when unset and W is monotone.
    std::optional<double> g_t_max;
    double constant_c = kDefaultKnownConstant;
    /// Planning horizon T.
    int horizon = 3;
    /// Total environment steps before giving up.
    std::size_t step_budget = 100000;
    /// Planner workers.
    std::size_t threads = 1;
};

/// ceil(c (|S||A| T G / eps)^4 |A| ln(2|S|/beta)), at least |A|; the override wins.
std::size_t m_known(const RaeeConfig& cfg, std::size_t n_states, std::size_t n_actions, int T);

/// G^T_max from the config, or W(T * 1) for monotone W.
double resolve_g_t_max(const RaeeConfig& cfg, const WelfareFn& welfare, int T);

/// Visit and transition counts gathered during balanced wandering.
class ExplorationStats {
  public:
    ExplorationStats(std::size_t n_states, std::size_t n_actions, std::size_t d);

    std::size_t n_states() const { return n_states_; }
    std::size_t n_actions() const { return n_actions_; }
    std::size_t reward_dim() const { return d_; }

    void record(StateId s, ActionId a, std::span<const double> reward, StateId next);
    void mark_known(StateId s);

    std::size_t visits(StateId s) const { return visits_[s]; }
    std::size_t tries(StateId s, ActionId a) const { return tries_[s * n_actions_ + a]; }
    std::size_t next_count(StateId s, ActionId a, StateId next) const {
        return next_counts_[(s * n_actions_ + a) * n_states_ + next];
    }
    std::span<const double> reward(StateId s, ActionId a) const { return {rewards_.data() + (s * n_actions_ + a) * d_, d_}; }
    bool known(StateId s) const { return known_[s]; }
    std::size_t known_count() const;
    /// Least-tried action at s, lowest id on ties.
    ActionId least_tried(StateId s) const;

  private:
    std::size_t n_states_;
    std::size_t n_actions_;
    std::size_t d_;
    std::vector<std::size_t> visits_;
    std::vector<std::size_t> tries_;
    std::vector<std::size_t> next_counts_;
    std::vector<double> rewards_;
    std::vector<bool> known_;
};

struct InducedModel {
    Momdp model;
    /// Base state -> induced state, kNoIndex for unknown states.
    std::vector<StateId> to_induced;
    std::vector<StateId> to_base;
    StateId sink;
};

/**
 * Known states keep their empirical transitions; probability mass to
 * unknown states goes to one absorbing zero-reward sink (the last state).
 * `start` must be known.
 */
InducedModel induced_known_momdp(const ExplorationStats& stats, StateId start, int horizon, double gamma);

/// d = 1 model on the same transitions; R(s, a) = Pr(sink | s, a), so the T-step value is the escape probability.
Momdp exploration_momdp(const InducedModel& known);

/// Undiscounted finite-horizon scalar value iteration; policy[t][s] for t = 1..T, ties to the lowest id.
struct ScalarPlan {
    std::vector<std::vector<double>> values;
    std::vector<std::vector<ActionId>> policy;
};
ScalarPlan scalar_value_iteration(const Momdp& model, int T);

/// Executes a planner table built on an induced model against base-model states.
class InducedPolicy : public DeterministicPolicy {
  public:
    InducedPolicy(std::shared_ptr<const PolicyTable> table, std::vector<StateId> to_induced, StateId sink);

    std::size_t n_actions() const override { return table_->shape().n_actions; }
    ActionId choose(const Decision& decision) const override;

  private:
    std::shared_ptr<const PolicyTable> table_;
    std::vector<StateId> to_induced_;
    StateId sink_;
};

struct RaeeEvent {
    std::string phase;
    std::size_t step = 0;
    StateId state = kNoIndex;
    ActionId action = kNoIndex;
    std::size_t known = 0;
    std::optional<double> value;
};

struct RaeeResult {
    bool halted = false;
    bool timed_out = false;
    StateId halt_state = kNoIndex;
    double exploit_value = 0.0;
    std::size_t steps = 0;
    std::size_t m_known = 0;
    std::shared_ptr<const Policy> policy;
    std::vector<RaeeEvent> transcript;
};

/**
 * Explore-or-exploit with sampling access only. Unknown states are handled
 * by balanced wandering; at a known state the planner runs on the induced
 * model at resolution alpha, and the run halts if V(s, 0, T) >=
 * v_star_target - eps/2. Otherwise the fastest-escape policy runs for up to
 * T steps. Exhausting the step budget returns timed_out = true.
 */
RaeeResult run_raee(Environment& env, const RaeeConfig& cfg, const WelfareFn& welfare, double alpha);

nlohmann::json event_to_json(const RaeeEvent& e);
/// One JSON object per line.
std::string transcript_jsonl(const std::vector<RaeeEvent>& transcript);

}  // namespace esr
