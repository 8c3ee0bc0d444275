#include "esr/rollout.hpp"

#include <cmath>
#include <stdexcept>

namespace esr {

StateId sample_next(const Momdp& model, StateId s, ActionId a, Rng& rng) {
    const auto succ = model.successors(s, a);
    if (succ.empty()) throw ModelError("no successor for state-action pair");
    const double u = rng.uniform();
    double acc = 0.0;
    for (const Transition& tr : succ) {
        acc += tr.probability;
        if (u < acc) return tr.next;
    }
    return succ.back().next;
}

RolloutReport rollout(const Momdp& model, const Policy& policy, const WelfareFn& welfare, std::uint64_t seed,
                      std::size_t episodes, int T) {
    if (T <= 0) T = model.horizon();
    if (policy.n_actions() != model.n_actions()) throw std::invalid_argument("policy and model disagree on actions");
    const std::size_t d = model.reward_dim();
    RolloutReport report;
    report.episodes.reserve(episodes);
    std::vector<double> welfare_values;
    welfare_values.reserve(episodes);
    for (std::size_t e = 0; e < episodes; ++e) {
        Rng rng(derive_seed(seed, e));
        EpisodeResult ep;
        ep.total.assign(d, 0.0);
        ep.trajectory.reserve(static_cast<std::size_t>(T));
        StateId s = model.start_state();
        double discount = 1.0;
        for (int k = 0; k < T; ++k) {
            const Decision decision{s, ep.total, T - k, k};
            const ActionId a = policy.sample(decision, rng);
            if (a >= model.n_actions()) throw std::out_of_range("policy returned an invalid action");
            ep.trajectory.push_back({s, a});
            const auto r = model.reward(s, a);
            for (std::size_t i = 0; i < d; ++i) ep.total[i] += discount * r[i];
            discount *= model.gamma();
            s = sample_next(model, s, a, rng);
        }
        ep.welfare = welfare(ep.total);
        welfare_values.push_back(ep.welfare);
        report.episodes.push_back(std::move(ep));
    }
    report.mean = mean_of(welfare_values);
    report.std = sample_std(welfare_values);
    return report;
}

double mean_of(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    // Running mean: a constant sample yields exactly that constant.
    double m = 0.0;
    std::size_t n = 0;
    for (double x : xs) m += (x - m) / static_cast<double>(++n);
    return m;
}

double sample_std(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace esr
