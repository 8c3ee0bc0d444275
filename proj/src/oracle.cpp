#include "esr/oracle.hpp"

#include <cmath>
#include <map>
#include <string>

namespace esr {

namespace {

constexpr double kKeyScale = 1e12;
constexpr std::int64_t kMaxDenominator = 4096;
constexpr double kGridTolerance = 1e-9;

bool near_integer(double x) { return std::abs(x - std::nearbyint(x)) <= kGridTolerance; }

}  // namespace

RewardKeyer::RewardKeyer(const Momdp& model) {
    if (model.gamma() != 1.0) return;
    for (std::int64_t D = 1; D <= kMaxDenominator; ++D) {
        bool ok = true;
        for (StateId s = 0; s < model.n_states() && ok; ++s) {
            for (ActionId a = 0; a < model.n_actions() && ok; ++a) {
                for (double r : model.reward(s, a)) {
                    if (!near_integer(r * static_cast<double>(D))) {
                        ok = false;
                        break;
                    }
                }
            }
        }
        if (ok) {
            denominator_ = D;
            return;
        }
    }
}

bool RewardKeyer::on_grid(std::span<const double> r) const {
    if (!exact()) return false;
    for (double x : r) {
        if (!near_integer(x * static_cast<double>(denominator_))) return false;
    }
    return true;
}

void RewardKeyer::key(std::span<const double> r, std::vector<std::int64_t>& out) const {
    const double scale = exact() ? static_cast<double>(denominator_) : kKeyScale;
    for (double x : r) out.push_back(std::llround(x * scale));
}

std::size_t ExactOracle::KeyHash::operator()(const std::vector<std::int64_t>& k) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::int64_t x : k) {
        h ^= static_cast<std::uint64_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
}

ExactOracle::ExactOracle(Momdp model, WelfareFn welfare, int T, std::size_t guard)
    : model_(std::move(model)),
      welfare_(std::move(welfare)),
      T_(T > 0 ? T : model_.horizon()),
      guard_(guard),
      keyer_(model_) {
    require_valid(model_);
    if (welfare_.arity() != model_.reward_dim()) throw std::invalid_argument("welfare arity does not match model");
}

double ExactOracle::value(StateId s, std::span<const double> r_acc, int t) {
    if (t < 0 || t > T_) throw std::out_of_range("steps remaining outside [0, T]");
    if (s >= model_.n_states()) throw std::out_of_range("state id out of range");
    if (r_acc.size() != model_.reward_dim()) throw std::invalid_argument("reward vector has wrong dimension");
    std::vector<double> r(r_acc.begin(), r_acc.end());
    return recurse(s, r, t);
}

ActionId ExactOracle::best_action(StateId s, std::span<const double> r_acc, int t) {
    if (t < 1 || t > T_) throw std::out_of_range("steps remaining outside [1, T]");
    ActionId best_a = 0;
    double best = 0.0;
    for (ActionId a = 0; a < model_.n_actions(); ++a) {
        const double q = q_value(s, a, r_acc, t);
        if (a == 0 || q > best) {
            best = q;
            best_a = a;
        }
    }
    return best_a;
}

double ExactOracle::q_value(StateId s, ActionId a, std::span<const double> r, int t) {
    const bool snap = keyer_.on_grid(r);
    const double D = static_cast<double>(keyer_.denominator());
    const double discount = std::pow(model_.gamma(), T_ - t);
    const auto reward = model_.reward(s, a);
    std::vector<double> next(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        next[i] = r[i] + discount * reward[i];
        if (snap) next[i] = static_cast<double>(std::llround(next[i] * D)) / D;
    }
    long double sum = 0.0L;
    for (const Transition& tr : model_.successors(s, a)) {
        std::vector<double> copy = next;
        sum += static_cast<long double>(tr.probability) * static_cast<long double>(recurse(tr.next, copy, t - 1));
    }
    return static_cast<double>(sum);
}

double ExactOracle::recurse(StateId s, std::vector<double>& r, int t) {
    if (t == 0) {
        const double w = welfare_(r);
        return w;
    }
    std::vector<std::int64_t> key;
    key.reserve(r.size() + 3);
    key.push_back(t);
    key.push_back(static_cast<std::int64_t>(s));
    const bool snap = keyer_.on_grid(r);
    key.push_back(snap ? 1 : 0);
    if (snap) {
        keyer_.key(r, key);
    } else {
        for (double x : r) key.push_back(std::llround(x * kKeyScale));
    }
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (memo_.size() >= guard_)
        throw OracleTooLarge("exact oracle exceeded " + std::to_string(guard_) + " memoized (state, reward) pairs");

    double best = 0.0;
    for (ActionId a = 0; a < model_.n_actions(); ++a) {
        const double q = q_value(s, a, r, t);
        if (a == 0 || q > best) best = q;
    }
    memo_.emplace(std::move(key), best);
    return best;
}

double exact_value(const Momdp& model, const WelfareFn& welfare, StateId s, std::span<const double> r_acc, int t) {
    ExactOracle oracle(model, welfare);
    return oracle.value(s, r_acc, t);
}

namespace {

struct Outcome {
    long double probability = 0.0L;
    std::vector<double> reward;
};

using Frontier = std::map<std::vector<std::int64_t>, Outcome>;

void add_outcome(Frontier& frontier, const RewardKeyer& keyer, StateId s, std::vector<double> r, long double p,
                 std::size_t guard) {
    const double D = static_cast<double>(keyer.denominator());
    std::vector<std::int64_t> key;
    key.reserve(r.size() + 1);
    key.push_back(static_cast<std::int64_t>(s));
    if (keyer.exact()) {
        for (double& x : r) x = static_cast<double>(std::llround(x * D)) / D;
    }
    keyer.key(r, key);
    auto [it, inserted] = frontier.try_emplace(std::move(key));
    if (inserted) {
        if (frontier.size() > guard)
            throw OracleTooLarge("policy enumeration exceeded " + std::to_string(guard) + " outcomes");
        it->second.reward = std::move(r);
    }
    it->second.probability += p;
}

StateId resolve_start(const Momdp& model, StateId start) {
    if (start == kNoIndex) return model.start_state();
    if (start >= model.n_states()) throw std::out_of_range("start state out of range");
    return start;
}

}  // namespace

PolicyEvaluation evaluate_policy(const Momdp& model, const WelfareFn& welfare, const Policy& policy, int T,
                                 StateId start, std::size_t guard) {
    require_valid(model);
    if (T <= 0) T = model.horizon();
    if (policy.n_actions() != model.n_actions()) throw std::invalid_argument("policy and model disagree on actions");
    const std::size_t d = model.reward_dim();
    const RewardKeyer keyer(model);

    Frontier frontier;
    add_outcome(frontier, keyer, resolve_start(model, start), std::vector<double>(d, 0.0), 1.0L, guard);
    std::vector<double> probs(model.n_actions());
    double discount = 1.0;
    for (int k = 0; k < T; ++k) {
        Frontier next;
        for (const auto& [key, outcome] : frontier) {
            const StateId s = static_cast<StateId>(key.front());
            policy.action_probabilities(Decision{s, outcome.reward, T - k, k}, probs);
            for (ActionId a = 0; a < model.n_actions(); ++a) {
                if (probs[a] <= 0.0) continue;
                const auto r = model.reward(s, a);
                std::vector<double> acc = outcome.reward;
                for (std::size_t i = 0; i < d; ++i) acc[i] += discount * r[i];
                for (const Transition& tr : model.successors(s, a)) {
                    add_outcome(next, keyer, tr.next, acc,
                                outcome.probability * static_cast<long double>(probs[a]) *
                                    static_cast<long double>(tr.probability),
                                guard);
                }
            }
        }
        frontier = std::move(next);
        discount *= model.gamma();
    }

    PolicyEvaluation result;
    result.expected_return.assign(d, 0.0);
    long double esr = 0.0L;
    std::vector<long double> mean(d, 0.0L);
    for (const auto& [key, outcome] : frontier) {
        esr += outcome.probability * static_cast<long double>(welfare(outcome.reward));
        for (std::size_t i = 0; i < d; ++i) mean[i] += outcome.probability * static_cast<long double>(outcome.reward[i]);
    }
    for (std::size_t i = 0; i < d; ++i) result.expected_return[i] = static_cast<double>(mean[i]);
    result.esr = static_cast<double>(esr);
    result.ser = welfare(result.expected_return);
    result.support = frontier.size();
    return result;
}

double esr_of_policy(const Momdp& model, const WelfareFn& welfare, const Policy& policy, int T, StateId start) {
    return evaluate_policy(model, welfare, policy, T, start).esr;
}

double ser_of_policy(const Momdp& model, const WelfareFn& welfare, const Policy& policy, int T, StateId start) {
    return evaluate_policy(model, welfare, policy, T, start).ser;
}

double TrajectoryDist::total_probability() const {
    long double sum = 0.0L;
    for (const auto& e : entries) sum += e.second;
    return static_cast<double>(sum);
}

TrajectoryDist trajectory_distribution(const Momdp& model, const Policy& policy, int T, StateId start,
                                       std::size_t guard) {
    require_valid(model);
    if (T <= 0) T = model.horizon();
    const std::size_t d = model.reward_dim();
    TrajectoryDist dist;
    Trajectory path;
    std::vector<double> acc(d, 0.0);

    auto expand = [&](auto& self, StateId s, int k, double p, double discount) -> void {
        if (k == T) {
            if (dist.entries.size() >= guard)
                throw OracleTooLarge("trajectory enumeration exceeded " + std::to_string(guard) + " trajectories");
            dist.entries.emplace_back(path, p);
            return;
        }
        std::vector<double> probs(model.n_actions());
        policy.action_probabilities(Decision{s, acc, T - k, k}, probs);
        for (ActionId a = 0; a < model.n_actions(); ++a) {
            if (probs[a] <= 0.0) continue;
            const auto r = model.reward(s, a);
            const std::vector<double> saved = acc;
            for (std::size_t i = 0; i < d; ++i) acc[i] += discount * r[i];
            path.push_back({s, a});
            for (const Transition& tr : model.successors(s, a))
                self(self, tr.next, k + 1, p * probs[a] * tr.probability, discount * model.gamma());
            path.pop_back();
            acc = saved;
        }
    };
    expand(expand, resolve_start(model, start), 0, 1.0, 1.0);
    return dist;
}

}  // namespace esr
