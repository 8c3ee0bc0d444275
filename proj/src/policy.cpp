#include "esr/policy.hpp"

#include <algorithm>
#include <stdexcept>

namespace esr {

ActionId Policy::sample(const Decision& decision, Rng& rng) const {
    std::vector<double> probs(n_actions());
    action_probabilities(decision, probs);
    return rng.categorical(probs);
}

void DeterministicPolicy::action_probabilities(const Decision& decision, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    out[choose(decision)] = 1.0;
}

StationaryPolicy::StationaryPolicy(std::vector<ActionId> actions, std::size_t n_actions)
    : actions_(std::move(actions)), n_actions_(n_actions) {
    for (ActionId a : actions_) {
        if (a >= n_actions_) throw std::invalid_argument("stationary policy action out of range");
    }
}

ActionId StationaryPolicy::choose(const Decision& decision) const {
    if (decision.state >= actions_.size()) throw std::out_of_range("state outside stationary policy");
    return actions_[decision.state];
}

TimeIndexedPolicy::TimeIndexedPolicy(std::vector<std::vector<ActionId>> by_step, std::size_t n_actions)
    : by_step_(std::move(by_step)), n_actions_(n_actions) {
    if (by_step_.empty()) throw std::invalid_argument("time-indexed policy needs at least one step");
    for (const auto& row : by_step_) {
        for (ActionId a : row) {
            if (a >= n_actions_) throw std::invalid_argument("time-indexed policy action out of range");
        }
    }
}

ActionId TimeIndexedPolicy::choose(const Decision& decision) const {
    const auto& row = by_step_[static_cast<std::size_t>(decision.step_index) % by_step_.size()];
    if (decision.state >= row.size()) throw std::out_of_range("state outside time-indexed policy");
    return row[decision.state];
}

void UniformRandomPolicy::action_probabilities(const Decision&, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(n_actions_));
}

MixturePolicy::MixturePolicy(std::vector<std::shared_ptr<const Policy>> bases, int interval)
    : bases_(std::move(bases)), interval_(interval) {
    if (bases_.empty()) throw std::invalid_argument("mixture needs at least one base policy");
    if (interval_ < 1) throw std::invalid_argument("mixture interval must be >= 1");
    all_deterministic_ = true;
    for (const auto& b : bases_) {
        if (!b) throw std::invalid_argument("null base policy");
        if (b->n_actions() != bases_.front()->n_actions())
            throw std::invalid_argument("base policies disagree on action count");
        all_deterministic_ = all_deterministic_ && b->deterministic();
    }
}

std::size_t MixturePolicy::active_base(int step_index) const {
    return static_cast<std::size_t>(step_index / interval_) % bases_.size();
}

void MixturePolicy::action_probabilities(const Decision& decision, std::span<double> out) const {
    bases_[active_base(decision.step_index)]->action_probabilities(decision, out);
}

ActionId MixturePolicy::sample(const Decision& decision, Rng& rng) const {
    return bases_[active_base(decision.step_index)]->sample(decision, rng);
}

std::shared_ptr<const Policy> make_mixture(std::vector<std::shared_ptr<const Policy>> bases, int interval) {
    return std::make_shared<MixturePolicy>(std::move(bases), interval);
}

}  // namespace esr
