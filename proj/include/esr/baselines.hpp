#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "esr/environments.hpp"
#include "esr/policy.hpp"
#include "esr/welfare.hpp"

namespace esr {

struct QLearningParams {
    double learning_rate = 0.1;
    /// Epsilon-greedy rate, decayed linearly from start to end over the episodes.
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    std::size_t episodes = 10000;
    /// Learner-side discount for bootstrapping; independent of the model's gamma.
    double discount = 0.95;
    /// Episode length.
    int horizon = 30;
    /// Q entries start uniform in [0, init_scale).
    double init_scale = 1e-3;

    void check() const;
    double epsilon_at(std::size_t episode) const;
};

/// Vector-valued Q(s, a), one component per objective.
class QTable {
  public:
    QTable() = default;
    QTable(std::size_t n_states, std::size_t n_actions, std::size_t d);

    std::size_t n_states() const { return n_states_; }
    std::size_t n_actions() const { return n_actions_; }
    std::size_t dim() const { return d_; }
    std::span<const double> q(StateId s, ActionId a) const { return {data_.data() + (s * n_actions_ + a) * d_, d_}; }
    std::span<double> q(StateId s, ActionId a) { return {data_.data() + (s * n_actions_ + a) * d_, d_}; }
    const std::vector<double>& data() const { return data_; }

  private:
    std::size_t n_states_ = 0;
    std::size_t n_actions_ = 0;
    std::size_t d_ = 0;
    std::vector<double> data_;
};

/// Greedy on w^T Q(s, .); lowest action id on ties.
ActionId linear_greedy(const QTable& q, std::span<const double> weights, StateId s);

/// Greedy on W(r_acc + Q(s, .)); lowest action id on ties.
ActionId welfare_greedy(const QTable& q, const WelfareFn& welfare, std::span<const double> r_acc, StateId s);

struct LinearQResult {
    QTable q;
    std::shared_ptr<const StationaryPolicy> policy;
};

/// Tabular vector Q-learning with actions chosen on w^T Q; returns the greedy stationary policy.
LinearQResult train_linear_scalarized(Environment& env, std::span<const double> weights, const QLearningParams& hp,
                                      std::uint64_t seed);

/// Nonstationary policy argmax_a W(accumulated + Q(s, a)).
class WelfareQPolicy : public DeterministicPolicy {
  public:
    WelfareQPolicy(QTable q, WelfareFn welfare) : q_(std::move(q)), welfare_(std::move(welfare)) {}

    std::size_t n_actions() const override { return q_.n_actions(); }
    ActionId choose(const Decision& decision) const override {
        return welfare_greedy(q_, welfare_, decision.accumulated, decision.state);
    }
    const QTable& table() const { return q_; }

  private:
    QTable q_;
    WelfareFn welfare_;
};

struct WelfareQResult {
    std::shared_ptr<const WelfareQPolicy> policy;
};

/**
 * Welfare Q-learning: vector TD update Q(s,a) += lr (r + discount Q(s', a*) - Q(s,a))
 * where a* maximizes W(accumulated' + Q(s', .)).
 */
WelfareQResult train_welfare_q(Environment& env, const WelfareFn& welfare, const QLearningParams& hp,
                               std::uint64_t seed);

/// Linear-scalarized policies for each unit weight vector e_1, ..., e_d.
std::vector<std::shared_ptr<const Policy>> train_unit_bases(Environment& env, const QLearningParams& hp,
                                                            std::uint64_t seed);

/// Checks w >= 0 and sum(w) = 1 within 1e-9.
void check_weights(std::span<const double> weights);

}  // namespace esr
