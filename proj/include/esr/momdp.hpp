#pragma once

#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace esr {

using StateId = std::size_t;
using ActionId = std::size_t;

/// Accumulated (or per-step) reward vector, one component per objective.
using RewardVec = std::vector<double>;

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

/// Tolerance on sum_{s'} Pr(s'|s,a) = 1.
inline constexpr double kProbabilityTolerance = 1e-9;

class ModelError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InvalidTrajectory : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

struct Transition {
    StateId next;
    double probability;
};

struct Step {
    StateId state;
    ActionId action;
};

/// Sequence of (state, action) pairs. Documentation counts steps from 1;
/// storage is 0-based.
using Trajectory = std::vector<Step>;

class MomdpBuilder;

/**
 * Finite multi-objective MDP with deterministic vector rewards.
 *
 * Immutable after construction (see MomdpBuilder). The transition kernel is
 * stored densely; a sparse successor list (nonzero entries in ascending
 * next-state order) is derived once for the planners' inner loops.
 */
class Momdp {
  public:
    std::size_t n_states() const { return n_states_; }
    std::size_t n_actions() const { return n_actions_; }
    std::size_t reward_dim() const { return reward_dim_; }
    double gamma() const { return gamma_; }
    int horizon() const { return horizon_; }
    StateId start_state() const { return start_state_; }
    bool extended_range() const { return extended_range_; }

    double probability(StateId s, ActionId a, StateId next) const {
        return transitions_[(s * n_actions_ + a) * n_states_ + next];
    }
    std::span<const double> transition_row(StateId s, ActionId a) const {
        return {transitions_.data() + (s * n_actions_ + a) * n_states_, n_states_};
    }
    std::span<const double> reward(StateId s, ActionId a) const {
        return {rewards_.data() + (s * n_actions_ + a) * reward_dim_, reward_dim_};
    }
    std::span<const Transition> successors(StateId s, ActionId a) const {
        const std::size_t row = s * n_actions_ + a;
        return {successors_.data() + successor_offsets_[row],
                successor_offsets_[row + 1] - successor_offsets_[row]};
    }

    Momdp with_horizon(int horizon) const;
    Momdp with_start_state(StateId s) const;
    Momdp with_gamma(double gamma) const;

  private:
    friend class MomdpBuilder;
    Momdp() = default;
    void index_successors();

    std::size_t n_states_ = 0;
    std::size_t n_actions_ = 0;
    std::size_t reward_dim_ = 0;
    double gamma_ = 1.0;
    int horizon_ = 1;
    StateId start_state_ = 0;
    bool extended_range_ = false;
    std::vector<double> transitions_;
    std::vector<double> rewards_;
    std::vector<Transition> successors_;
    std::vector<std::size_t> successor_offsets_;
};

class MomdpBuilder {
  public:
    MomdpBuilder(std::size_t n_states, std::size_t n_actions, std::size_t reward_dim);

    MomdpBuilder& gamma(double g);
    MomdpBuilder& horizon(int T);
    MomdpBuilder& start_state(StateId s);
    MomdpBuilder& extended_range(bool flag);
    MomdpBuilder& transition(StateId s, ActionId a, StateId next, double p);
    MomdpBuilder& add_transition(StateId s, ActionId a, StateId next, double p);
    MomdpBuilder& reward(StateId s, ActionId a, std::span<const double> r);
    MomdpBuilder& reward(StateId s, ActionId a, std::initializer_list<double> r) {
        return reward(s, a, std::span<const double>(r.begin(), r.size()));
    }

    /// Builds without validating; use validate() to inspect violations.
    Momdp build() const;

  private:
    void check_ids(StateId s, ActionId a) const;
    Momdp model_;
};

struct Violation {
    enum class Kind {
        Dimension,
        Gamma,
        Horizon,
        StartState,
        ProbabilityRange,
        Normalization,
        RewardRange,
    };
    Kind kind;
    StateId state = kNoIndex;
    ActionId action = kNoIndex;
    StateId next = kNoIndex;
    std::string message;
};

/// Every invariant violation; empty iff the model is well-formed.
std::vector<Violation> validate(const Momdp& model);

/// Throws ModelError naming the first violation.
void require_valid(const Momdp& model);

/// Componentwise sum_{k>=1} gamma^{k-1} R(s_k, a_k).
RewardVec trajectory_return(const Momdp& model, const Trajectory& traj, double gamma);

/**
 * Smallest integer T with T >= ln(1/(delta_eps (1-gamma))) / (1-gamma),
 * clamped to 1. Beyond T steps the discounted tail is below delta_eps.
 * Throws std::domain_error for gamma >= 1 or delta_eps <= 0.
 */
int horizon_time(double gamma, double delta_eps);

}  // namespace esr
