#include "esr/momdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace esr {

Momdp Momdp::with_horizon(int horizon) const {
    Momdp copy = *this;
    copy.horizon_ = horizon;
    return copy;
}

Momdp Momdp::with_start_state(StateId s) const {
    Momdp copy = *this;
    copy.start_state_ = s;
    return copy;
}

Momdp Momdp::with_gamma(double gamma) const {
    Momdp copy = *this;
    copy.gamma_ = gamma;
    return copy;
}

void Momdp::index_successors() {
    successors_.clear();
    successor_offsets_.assign(n_states_ * n_actions_ + 1, 0);
    for (std::size_t row = 0; row < n_states_ * n_actions_; ++row) {
        successor_offsets_[row] = successors_.size();
        const double* p = transitions_.data() + row * n_states_;
        for (StateId next = 0; next < n_states_; ++next) {
            if (p[next] != 0.0) successors_.push_back({next, p[next]});
        }
    }
    successor_offsets_.back() = successors_.size();
}

MomdpBuilder::MomdpBuilder(std::size_t n_states, std::size_t n_actions, std::size_t reward_dim) {
    if (n_states == 0 || n_actions == 0 || reward_dim == 0)
        throw ModelError("MOMDP dimensions must be positive");
    model_.n_states_ = n_states;
    model_.n_actions_ = n_actions;
    model_.reward_dim_ = reward_dim;
    model_.transitions_.assign(n_states * n_actions * n_states, 0.0);
    model_.rewards_.assign(n_states * n_actions * reward_dim, 0.0);
}

void MomdpBuilder::check_ids(StateId s, ActionId a) const {
    if (s >= model_.n_states_ || a >= model_.n_actions_)
        throw ModelError("state/action id out of range");
}

MomdpBuilder& MomdpBuilder::gamma(double g) {
    model_.gamma_ = g;
    return *this;
}

MomdpBuilder& MomdpBuilder::horizon(int T) {
    model_.horizon_ = T;
    return *this;
}

MomdpBuilder& MomdpBuilder::start_state(StateId s) {
    model_.start_state_ = s;
    return *this;
}

MomdpBuilder& MomdpBuilder::extended_range(bool flag) {
    model_.extended_range_ = flag;
    return *this;
}

MomdpBuilder& MomdpBuilder::transition(StateId s, ActionId a, StateId next, double p) {
    check_ids(s, a);
    if (next >= model_.n_states_) throw ModelError("next state id out of range");
    model_.transitions_[(s * model_.n_actions_ + a) * model_.n_states_ + next] = p;
    return *this;
}

MomdpBuilder& MomdpBuilder::add_transition(StateId s, ActionId a, StateId next, double p) {
    check_ids(s, a);
    if (next >= model_.n_states_) throw ModelError("next state id out of range");
    model_.transitions_[(s * model_.n_actions_ + a) * model_.n_states_ + next] += p;
    return *this;
}

MomdpBuilder& MomdpBuilder::reward(StateId s, ActionId a, std::span<const double> r) {
    check_ids(s, a);
    if (r.size() != model_.reward_dim_) throw ModelError("reward vector has wrong dimension");
    std::copy(r.begin(), r.end(),
              model_.rewards_.begin() + (s * model_.n_actions_ + a) * model_.reward_dim_);
    return *this;
}

Momdp MomdpBuilder::build() const {
    Momdp m = model_;
    m.index_successors();
    return m;
}

namespace {

std::string where(StateId s, ActionId a) {
    std::ostringstream os;
    os << "(s=" << s << ", a=" << a << ")";
    return os.str();
}

}  // namespace

std::vector<Violation> validate(const Momdp& model) {
    using Kind = Violation::Kind;
    std::vector<Violation> out;
    if (model.reward_dim() < 1) out.push_back({Kind::Dimension, kNoIndex, kNoIndex, kNoIndex, "d must be >= 1"});
    if (!(model.gamma() >= 0.0 && model.gamma() <= 1.0))
        out.push_back({Kind::Gamma, kNoIndex, kNoIndex, kNoIndex, "gamma must lie in [0,1]"});
    if (model.horizon() < 1)
        out.push_back({Kind::Horizon, kNoIndex, kNoIndex, kNoIndex, "horizon must be positive"});
    if (model.start_state() >= model.n_states())
        out.push_back({Kind::StartState, model.start_state(), kNoIndex, kNoIndex,
                       "start state out of range"});

    for (StateId s = 0; s < model.n_states(); ++s) {
        for (ActionId a = 0; a < model.n_actions(); ++a) {
            const auto row = model.transition_row(s, a);
            double total = 0.0;
            for (StateId next = 0; next < row.size(); ++next) {
                const double p = row[next];
                if (!(p >= 0.0 && p <= 1.0)) {
                    out.push_back({Kind::ProbabilityRange, s, a, next,
                                   "probability outside [0,1] at " + where(s, a) +
                                       " -> " + std::to_string(next)});
                }
                total += p;
            }
            if (!(std::abs(total - 1.0) <= kProbabilityTolerance)) {
                std::ostringstream os;
                os << "transition row " << where(s, a) << " sums to " << total;
                out.push_back({Kind::Normalization, s, a, kNoIndex, os.str()});
            }
            for (double r : model.reward(s, a)) {
                const bool finite_nonneg = std::isfinite(r) && r >= 0.0;
                if (!finite_nonneg || (!model.extended_range() && r > 1.0)) {
                    std::ostringstream os;
                    os << "reward component " << r << " at " << where(s, a)
                       << (finite_nonneg ? " exceeds 1 (model not flagged extended_range)"
                                         : " is negative or not finite");
                    out.push_back({Kind::RewardRange, s, a, kNoIndex, os.str()});
                    break;
                }
            }
        }
    }
    return out;
}

void require_valid(const Momdp& model) {
    const auto violations = validate(model);
    if (!violations.empty()) throw ModelError("invalid MOMDP: " + violations.front().message);
}

RewardVec trajectory_return(const Momdp& model, const Trajectory& traj, double gamma) {
    RewardVec total(model.reward_dim(), 0.0);
    double weight = 1.0;
    for (const Step& step : traj) {
        if (step.state >= model.n_states() || step.action >= model.n_actions())
            throw InvalidTrajectory("trajectory step references an unknown state or action");
        const auto r = model.reward(step.state, step.action);
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += weight * r[i];
        weight *= gamma;
    }
    return total;
}

int horizon_time(double gamma, double delta_eps) {
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::domain_error("horizon time is undefined for gamma >= 1; supply a finite horizon");
    if (!(delta_eps > 0.0)) throw std::domain_error("delta_eps must be positive");
    const double bound = std::log(1.0 / (delta_eps * (1.0 - gamma))) / (1.0 - gamma);
    if (bound <= 0.0) return 1;
    return static_cast<int>(std::ceil(bound));
}

}  // namespace esr
