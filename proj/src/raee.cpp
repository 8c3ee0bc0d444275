#include "esr/raee.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace esr {

std::size_t m_known(const RaeeConfig& cfg, std::size_t n_states, std::size_t n_actions, int T) {
    if (cfg.m_known_override) return *cfg.m_known_override;
    if (n_states == 0 || n_actions == 0 || T <= 0) throw std::invalid_argument("m_known needs positive sizes");
    if (!(cfg.eps > 0.0) || !(cfg.beta > 0.0) || !(cfg.constant_c > 0.0))
        throw std::invalid_argument("m_known needs positive eps, beta and constant");
    if (!cfg.g_t_max || !(*cfg.g_t_max > 0.0)) throw std::invalid_argument("m_known needs a positive g_t_max");
    const double S = static_cast<double>(n_states);
    const double A = static_cast<double>(n_actions);
    const double base = S * A * static_cast<double>(T) * *cfg.g_t_max / cfg.eps;
    const double log_term = std::log(2.0 * S / cfg.beta);
    const double raw = cfg.constant_c * std::pow(base, 4) * A * log_term;
    // Relative nudge keeps exact products from rounding up on the last ulp.
    const double m = std::ceil(raw * (1.0 - 1e-12));
    return std::max<std::size_t>(n_actions, m > 0.0 ? static_cast<std::size_t>(m) : 0);
}

double resolve_g_t_max(const RaeeConfig& cfg, const WelfareFn& welfare, int T) {
    if (cfg.g_t_max) return *cfg.g_t_max;
    if (!welfare.monotone()) throw std::invalid_argument("g_t_max must be supplied for non-monotone welfare");
    const std::vector<double> full(welfare.arity(), static_cast<double>(T));
    return welfare(full);
}

ExplorationStats::ExplorationStats(std::size_t n_states, std::size_t n_actions, std::size_t d)
    : n_states_(n_states),
      n_actions_(n_actions),
      d_(d),
      visits_(n_states, 0),
      tries_(n_states * n_actions, 0),
      next_counts_(n_states * n_actions * n_states, 0),
      rewards_(n_states * n_actions * d, 0.0),
      known_(n_states, false) {}

void ExplorationStats::record(StateId s, ActionId a, std::span<const double> reward, StateId next) {
    ++visits_[s];
    ++tries_[s * n_actions_ + a];
    ++next_counts_[(s * n_actions_ + a) * n_states_ + next];
    std::copy(reward.begin(), reward.end(), rewards_.begin() + static_cast<std::ptrdiff_t>((s * n_actions_ + a) * d_));
}

void ExplorationStats::mark_known(StateId s) { known_[s] = true; }

std::size_t ExplorationStats::known_count() const {
    std::size_t n = 0;
    for (bool k : known_) n += k ? 1 : 0;
    return n;
}

ActionId ExplorationStats::least_tried(StateId s) const {
    ActionId best = 0;
    for (ActionId a = 1; a < n_actions_; ++a) {
        if (tries(s, a) < tries(s, best)) best = a;
    }
    return best;
}

InducedModel induced_known_momdp(const ExplorationStats& stats, StateId start, int horizon, double gamma) {
    struct {
        std::vector<StateId> to_induced;
        std::vector<StateId> to_base;
        StateId sink = 0;
    } out;
    out.to_induced.assign(stats.n_states(), kNoIndex);
    for (StateId s = 0; s < stats.n_states(); ++s) {
        if (stats.known(s)) {
            out.to_induced[s] = out.to_base.size();
            out.to_base.push_back(s);
        }
    }
    if (out.to_base.empty()) throw std::logic_error("induced model needs at least one known state");
    if (start >= stats.n_states() || !stats.known(start)) throw std::invalid_argument("induced model start must be known");
    out.sink = out.to_base.size();
    const std::size_t n = out.to_base.size() + 1;
    const std::size_t nA = stats.n_actions();

    MomdpBuilder b(n, nA, stats.reward_dim());
    b.gamma(gamma).horizon(horizon).start_state(out.to_induced[start]);
    for (StateId i = 0; i < out.to_base.size(); ++i) {
        const StateId s = out.to_base[i];
        for (ActionId a = 0; a < nA; ++a) {
            const std::size_t tries = stats.tries(s, a);
            if (tries == 0) throw std::logic_error("known state has an untried action");
            std::size_t to_sink = 0;
            for (StateId next = 0; next < stats.n_states(); ++next) {
                const std::size_t c = stats.next_count(s, a, next);
                if (c == 0) continue;
                if (out.to_induced[next] == kNoIndex) {
                    to_sink += c;
                } else {
                    b.transition(i, a, out.to_induced[next], static_cast<double>(c) / static_cast<double>(tries));
                }
            }
            if (to_sink > 0) b.transition(i, a, out.sink, static_cast<double>(to_sink) / static_cast<double>(tries));
            b.reward(i, a, stats.reward(s, a));
        }
    }
    for (ActionId a = 0; a < nA; ++a) b.transition(out.sink, a, out.sink, 1.0);
    return {b.build(), std::move(out.to_induced), std::move(out.to_base), out.sink};
}

Momdp exploration_momdp(const InducedModel& known) {
    const Momdp& m = known.model;
    MomdpBuilder b(m.n_states(), m.n_actions(), 1);
    b.gamma(1.0).horizon(m.horizon()).start_state(m.start_state());
    for (StateId s = 0; s < m.n_states(); ++s) {
        for (ActionId a = 0; a < m.n_actions(); ++a) {
            for (const Transition& tr : m.successors(s, a)) b.transition(s, a, tr.next, tr.probability);
            if (s != known.sink) b.reward(s, a, {m.probability(s, a, known.sink)});
        }
    }
    return b.build();
}

ScalarPlan scalar_value_iteration(const Momdp& model, int T) {
    if (model.reward_dim() != 1) throw std::invalid_argument("scalar value iteration needs d = 1");
    const std::size_t nS = model.n_states();
    ScalarPlan plan;
    plan.values.assign(static_cast<std::size_t>(T) + 1, std::vector<double>(nS, 0.0));
    plan.policy.assign(static_cast<std::size_t>(T) + 1, std::vector<ActionId>(nS, 0));
    for (int t = 1; t <= T; ++t) {
        const auto& prev = plan.values[static_cast<std::size_t>(t) - 1];
        for (StateId s = 0; s < nS; ++s) {
            double best = 0.0;
            ActionId best_a = 0;
            for (ActionId a = 0; a < model.n_actions(); ++a) {
                long double q = model.reward(s, a)[0];
                for (const Transition& tr : model.successors(s, a)) q += tr.probability * prev[tr.next];
                if (a == 0 || static_cast<double>(q) > best) {
                    best = static_cast<double>(q);
                    best_a = a;
                }
            }
            plan.values[static_cast<std::size_t>(t)][s] = best;
            plan.policy[static_cast<std::size_t>(t)][s] = best_a;
        }
    }
    return plan;
}

InducedPolicy::InducedPolicy(std::shared_ptr<const PolicyTable> table, std::vector<StateId> to_induced, StateId sink)
    : table_(std::move(table)), to_induced_(std::move(to_induced)), sink_(sink) {}

ActionId InducedPolicy::choose(const Decision& decision) const {
    if (decision.state >= to_induced_.size()) throw std::out_of_range("state id out of range");
    const StateId s = to_induced_[decision.state];
    return act(*table_, s == kNoIndex ? sink_ : s, decision.accumulated, decision.steps_remaining);
}

RaeeResult run_raee(Environment& env, const RaeeConfig& cfg, const WelfareFn& welfare, double alpha) {
    if (!(cfg.eps > 0.0 && cfg.eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
    if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
    if (!std::isfinite(cfg.v_star_target)) throw std::invalid_argument("v_star_target must be finite");
    if (cfg.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (welfare.arity() != env.reward_dim()) throw std::invalid_argument("welfare arity does not match environment");

    RaeeConfig resolved = cfg;
    if (!resolved.m_known_override) resolved.g_t_max = resolve_g_t_max(cfg, welfare, cfg.horizon);
    const int T = cfg.horizon;
    const std::size_t nS = env.n_states();
    const std::size_t nA = env.n_actions();

    RaeeResult result;
    result.m_known = m_known(resolved, nS, nA, T);
    ExplorationStats stats(nS, nA, env.reward_dim());

    auto log = [&](const char* phase, StateId s, ActionId a, std::optional<double> value = std::nullopt) {
        result.transcript.push_back({phase, result.steps, s, a, stats.known_count(), value});
    };

    PlanOptions options;
    options.threads = cfg.threads;
    options.keep_all_values = false;

    StateId s = env.reset();
    while (true) {
        if (result.steps >= cfg.step_budget) {
            result.timed_out = true;
            log("timeout", s, kNoIndex);
            return result;
        }
        if (!stats.known(s)) {
            const ActionId a = stats.least_tried(s);
            const StepOutcome out = env.step(a);
            ++result.steps;
            stats.record(s, a, out.reward, out.next);
            log("wander", s, a);
            if (stats.visits(s) == result.m_known) {
                stats.mark_known(s);
                log("known", s, kNoIndex);
            }
            s = out.next;
            continue;
        }

        // The induced model is rebuilt for the current start state; known-state statistics are frozen.
        const InducedModel induced = induced_known_momdp(stats, s, T, env.gamma());
        const PlanResult planned = plan(induced.model, welfare, alpha, options);
        const double value = planned.start_value(induced.to_induced[s]);
        log("exploit", s, kNoIndex, value);
        if (value >= cfg.v_star_target - cfg.eps / 2.0) {
            result.halted = true;
            result.halt_state = s;
            result.exploit_value = value;
            result.policy = std::make_shared<InducedPolicy>(planned.policy, induced.to_induced, induced.sink);
            log("halt", s, kNoIndex, value);
            return result;
        }

        const ScalarPlan escape = scalar_value_iteration(exploration_momdp(induced), T);
        log("explore", s, kNoIndex, escape.values[static_cast<std::size_t>(T)][induced.to_induced[s]]);
        for (int k = 0; k < T && stats.known(s) && result.steps < cfg.step_budget; ++k) {
            const ActionId a = escape.policy[static_cast<std::size_t>(T - k)][induced.to_induced[s]];
            const StepOutcome out = env.step(a);
            ++result.steps;
            s = out.next;
        }
    }
}

nlohmann::json event_to_json(const RaeeEvent& e) {
    nlohmann::json j;
    j["phase"] = e.phase;
    j["step"] = e.step;
    j["state"] = e.state == kNoIndex ? nlohmann::json(nullptr) : nlohmann::json(e.state);
    j["action"] = e.action == kNoIndex ? nlohmann::json(nullptr) : nlohmann::json(e.action);
    j["known"] = e.known;
    j["value"] = e.value ? nlohmann::json(*e.value) : nlohmann::json(nullptr);
    return j;
}

std::string transcript_jsonl(const std::vector<RaeeEvent>& transcript) {
    std::ostringstream out;
    for (const auto& e : transcript) out << event_to_json(e).dump() << '\n';
    return out.str();
}

}  // namespace esr
