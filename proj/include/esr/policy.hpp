#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "esr/momdp.hpp"
#include "esr/random.hpp"

namespace esr {

/// Everything a (possibly nonstationary) policy may condition on.
struct Decision {
    StateId state;
    /// Discounted reward accumulated so far, unquantized.
    std::span<const double> accumulated;
    /// Steps remaining including this one (t in the planner's convention).
    int steps_remaining;
    /// Steps already taken (0 for the first decision).
    int step_index;
};

/**
 * Shared interface consumed by rollouts, the oracle, and the harness.
 * Deterministic policies override choose(); stochastic ones fill a
 * distribution over actions.
 */
class Policy {
  public:
    virtual ~Policy() = default;

    virtual std::size_t n_actions() const = 0;
    virtual bool deterministic() const { return false; }

    /// Writes Pr(a | decision) into out (size n_actions()).
    virtual void action_probabilities(const Decision& decision, std::span<double> out) const = 0;

    /// Deterministic policies do not consume randomness.
    virtual ActionId sample(const Decision& decision, Rng& rng) const;
};

class DeterministicPolicy : public Policy {
  public:
    bool deterministic() const override { return true; }
    virtual ActionId choose(const Decision& decision) const = 0;

    void action_probabilities(const Decision& decision, std::span<double> out) const override;
    ActionId sample(const Decision& decision, Rng&) const override { return choose(decision); }
};

/// One action per state, independent of time and accumulated reward.
class StationaryPolicy : public DeterministicPolicy {
  public:
    StationaryPolicy(std::vector<ActionId> actions, std::size_t n_actions);

    std::size_t n_actions() const override { return n_actions_; }
    ActionId choose(const Decision& decision) const override;
    const std::vector<ActionId>& actions() const { return actions_; }

  private:
    std::vector<ActionId> actions_;
    std::size_t n_actions_;
};

/// Open-loop in reward: action indexed by (step, state); steps past the table wrap around.
class TimeIndexedPolicy : public DeterministicPolicy {
  public:
    TimeIndexedPolicy(std::vector<std::vector<ActionId>> by_step, std::size_t n_actions);

    std::size_t n_actions() const override { return n_actions_; }
    ActionId choose(const Decision& decision) const override;

  private:
    std::vector<std::vector<ActionId>> by_step_;
    std::size_t n_actions_;
};

class UniformRandomPolicy : public Policy {
  public:
    explicit UniformRandomPolicy(std::size_t n_actions) : n_actions_(n_actions) {}

    std::size_t n_actions() const override { return n_actions_; }
    void action_probabilities(const Decision&, std::span<double> out) const override;

  private:
    std::size_t n_actions_;
};

/// Wraps a callable; handy for tests and ad-hoc policies.
class FunctionPolicy : public DeterministicPolicy {
  public:
    using Fn = std::function<ActionId(const Decision&)>;
    FunctionPolicy(Fn fn, std::size_t n_actions) : fn_(std::move(fn)), n_actions_(n_actions) {}

    std::size_t n_actions() const override { return n_actions_; }
    ActionId choose(const Decision& decision) const override { return fn_(decision); }

  private:
    Fn fn_;
    std::size_t n_actions_;
};

/// Follows base floor(k / interval) mod n at step k.
class MixturePolicy : public Policy {
  public:
    MixturePolicy(std::vector<std::shared_ptr<const Policy>> bases, int interval);

    std::size_t n_actions() const override { return bases_.front()->n_actions(); }
    bool deterministic() const override { return all_deterministic_; }
    void action_probabilities(const Decision& decision, std::span<double> out) const override;
    ActionId sample(const Decision& decision, Rng& rng) const override;

    std::size_t active_base(int step_index) const;

  private:
    std::vector<std::shared_ptr<const Policy>> bases_;
    int interval_;
    bool all_deterministic_;
};

std::shared_ptr<const Policy> make_mixture(std::vector<std::shared_ptr<const Policy>> bases, int interval);

}  // namespace esr
