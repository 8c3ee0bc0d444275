#include "esr/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "esr/random.hpp"

namespace esr {

void QLearningParams::check() const {
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw std::invalid_argument("learning_rate must lie in (0, 1]");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0))
        throw std::invalid_argument("exploration rates must lie in [0, 1]");
    if (!(discount >= 0.0 && discount <= 1.0)) throw std::invalid_argument("discount must lie in [0, 1]");
    if (horizon < 1) throw std::invalid_argument("episode horizon must be >= 1");
    if (!(init_scale >= 0.0)) throw std::invalid_argument("init_scale must be nonnegative");
}

double QLearningParams::epsilon_at(std::size_t episode) const {
    if (episodes <= 1) return epsilon_end;
    const double frac = static_cast<double>(episode) / static_cast<double>(episodes - 1);
    return epsilon_start + (epsilon_end - epsilon_start) * frac;
}

QTable::QTable(std::size_t n_states, std::size_t n_actions, std::size_t d)
    : n_states_(n_states), n_actions_(n_actions), d_(d), data_(n_states * n_actions * d, 0.0) {}

void check_weights(std::span<const double> weights) {
    if (weights.empty()) throw std::invalid_argument("empty weight vector");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("weights must sum to 1");
}

ActionId linear_greedy(const QTable& q, std::span<const double> weights, StateId s) {
    ActionId best_a = 0;
    double best = 0.0;
    for (ActionId a = 0; a < q.n_actions(); ++a) {
        const auto v = q.q(s, a);
        double x = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) x += weights[i] * v[i];
        if (a == 0 || x > best) {
            best = x;
            best_a = a;
        }
    }
    return best_a;
}

ActionId welfare_greedy(const QTable& q, const WelfareFn& welfare, std::span<const double> r_acc, StateId s) {
    std::vector<double> total(q.dim());
    ActionId best_a = 0;
    double best = 0.0;
    for (ActionId a = 0; a < q.n_actions(); ++a) {
        const auto v = q.q(s, a);
        for (std::size_t i = 0; i < total.size(); ++i) total[i] = r_acc[i] + v[i];
        const double x = welfare(total);
        if (a == 0 || x > best) {
            best = x;
            best_a = a;
        }
    }
    return best_a;
}

namespace {

QTable initial_table(const Environment& env, const QLearningParams& hp, Rng& rng) {
    QTable q(env.n_states(), env.n_actions(), env.reward_dim());
    for (StateId s = 0; s < env.n_states(); ++s) {
        for (ActionId a = 0; a < env.n_actions(); ++a) {
            for (double& x : q.q(s, a)) x = hp.init_scale * rng.uniform();
        }
    }
    return q;
}

/// Vector TD step; the episode's last step bootstraps from zero.
void td_update(QTable& q, const QLearningParams& hp, StateId s, ActionId a, std::span<const double> r, StateId next,
               ActionId next_a, bool terminal) {
    auto cur = q.q(s, a);
    const auto boot = q.q(next, next_a);
    for (std::size_t i = 0; i < cur.size(); ++i) {
        const double target = r[i] + (terminal ? 0.0 : hp.discount * boot[i]);
        cur[i] += hp.learning_rate * (target - cur[i]);
    }
}

/// Shared episode loop; `greedy(s, acc)` is the learner's exploitation rule.
template <class Greedy>
void q_learn(Environment& env, QTable& q, const QLearningParams& hp, Rng& rng, Greedy&& greedy) {
    const std::size_t d = env.reward_dim();
    std::vector<double> acc(d);
    for (std::size_t e = 0; e < hp.episodes; ++e) {
        const double eps = hp.epsilon_at(e);
        StateId s = env.reset();
        std::fill(acc.begin(), acc.end(), 0.0);
        double weight = 1.0;
        for (int k = 0; k < hp.horizon; ++k) {
            ActionId a;
            if (rng.uniform() < eps) {
                a = static_cast<ActionId>(rng.below(env.n_actions()));
            } else {
                a = greedy(s, acc);
            }
            const StepOutcome out = env.step(a);
            for (std::size_t i = 0; i < d; ++i) acc[i] += weight * out.reward[i];
            weight *= env.gamma();
            td_update(q, hp, s, a, out.reward, out.next, greedy(out.next, acc), k + 1 == hp.horizon);
            s = out.next;
        }
    }
}

}  // namespace

LinearQResult train_linear_scalarized(Environment& env, std::span<const double> weights, const QLearningParams& hp,
                                      std::uint64_t seed) {
    hp.check();
    check_weights(weights);
    if (weights.size() != env.reward_dim()) throw std::invalid_argument("weight vector has wrong dimension");
    Rng rng(seed);
    QTable q = initial_table(env, hp, rng);
    q_learn(env, q, hp, rng, [&](StateId s, std::span<const double>) { return linear_greedy(q, weights, s); });
    std::vector<ActionId> actions(env.n_states());
    for (StateId s = 0; s < env.n_states(); ++s) actions[s] = linear_greedy(q, weights, s);
    auto policy = std::make_shared<StationaryPolicy>(std::move(actions), env.n_actions());
    return {std::move(q), std::move(policy)};
}

WelfareQResult train_welfare_q(Environment& env, const WelfareFn& welfare, const QLearningParams& hp,
                               std::uint64_t seed) {
    hp.check();
    if (welfare.arity() != env.reward_dim()) throw std::invalid_argument("welfare arity does not match environment");
    Rng rng(seed);
    QTable q = initial_table(env, hp, rng);
    q_learn(env, q, hp, rng,
            [&](StateId s, std::span<const double> acc) { return welfare_greedy(q, welfare, acc, s); });
    return {std::make_shared<WelfareQPolicy>(std::move(q), welfare)};
}

std::vector<std::shared_ptr<const Policy>> train_unit_bases(Environment& env, const QLearningParams& hp,
                                                            std::uint64_t seed) {
    std::vector<std::shared_ptr<const Policy>> bases;
    for (std::size_t i = 0; i < env.reward_dim(); ++i) {
        std::vector<double> w(env.reward_dim(), 0.0);
        w[i] = 1.0;
        bases.push_back(train_linear_scalarized(env, w, hp, derive_seed(seed, i)).policy);
    }
    return bases;
}

}  // namespace esr
