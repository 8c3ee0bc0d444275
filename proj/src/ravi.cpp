#include "esr/ravi.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "esr/parallel.hpp"

namespace esr {

namespace {

std::vector<LatticeIndex> lookup_indices(const TableShape& shape, std::span<const double> r_acc, int t) {
    if (r_acc.size() != shape.d) throw std::invalid_argument("accumulated reward has wrong dimension");
    const LatticeIndex extent = layer_extent(shape.alpha, shape.horizon, t);
    std::vector<LatticeIndex> k(shape.d);
    for (std::size_t i = 0; i < shape.d; ++i) {
        if (!(r_acc[i] >= 0.0)) throw std::invalid_argument("accumulated reward must be nonnegative");
        k[i] = floor_index(r_acc[i], shape.alpha);
        if (k[i] > extent)
            throw LatticeError("accumulated reward " + std::to_string(r_acc[i]) + " outside layer " +
                               std::to_string(t) + " of the lattice");
    }
    return k;
}

void check_layer(const TableShape& shape, int t, int lowest) {
    if (t < lowest || t > shape.horizon)
        throw std::out_of_range("steps remaining " + std::to_string(t) + " outside [" + std::to_string(lowest) +
                                ", " + std::to_string(shape.horizon) + "]");
}

}  // namespace

ValueTable::ValueTable(TableShape shape) : shape_(shape), layers_(static_cast<std::size_t>(shape.horizon) + 1) {}

double ValueTable::at(StateId s, std::span<const LatticeIndex> k, int t) const {
    check_layer(shape_, t, 0);
    if (!has_layer(t)) throw std::logic_error("value layer " + std::to_string(t) + " was not retained");
    const LayerGeometry g = shape_.layer(t);
    if (k.size() != shape_.d || !g.contains(k)) throw LatticeError("lattice point outside layer");
    return layers_[static_cast<std::size_t>(t)][g.flat_index(k) * shape_.n_states + s];
}

double ValueTable::value(StateId s, std::span<const double> r_acc, int t) const {
    check_layer(shape_, t, 0);
    const auto k = lookup_indices(shape_, r_acc, t);
    return at(s, k, t);
}

PolicyTable::PolicyTable(TableShape shape) : shape_(shape), layers_(static_cast<std::size_t>(shape.horizon) + 1) {}

ActionId PolicyTable::at(StateId s, std::span<const LatticeIndex> k, int t) const {
    check_layer(shape_, t, 1);
    const LayerGeometry g = shape_.layer(t);
    if (k.size() != shape_.d || !g.contains(k)) throw LatticeError("lattice point outside layer");
    return layers_[static_cast<std::size_t>(t)][g.flat_index(k) * shape_.n_states + s];
}

double PlanResult::start_value(StateId s) const {
    const std::vector<LatticeIndex> origin(values->shape().d, 0);
    return values->at(s, origin, values->shape().horizon);
}

PlanResult plan(const Momdp& model, const WelfareFn& welfare, double alpha, const PlanOptions& options) {
    require_valid(model);
    if (welfare.arity() != model.reward_dim())
        throw std::invalid_argument("welfare arity " + std::to_string(welfare.arity()) +
                                    " does not match reward dimension " + std::to_string(model.reward_dim()));
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be positive and finite");
    if (model.n_actions() > std::numeric_limits<PolicyTable::Entry>::max())
        throw std::invalid_argument("too many actions for the policy table");

    TableShape shape{alpha, model.horizon(), model.gamma(), model.reward_dim(), model.n_states(), model.n_actions()};
    const std::size_t nS = shape.n_states;
    const std::size_t nA = shape.n_actions;
    const std::size_t d = shape.d;
    const int T = shape.horizon;

    auto values = std::make_shared<ValueTable>(shape);
    auto policy = std::make_shared<PolicyTable>(shape);

    {
        const LayerGeometry g0 = shape.layer(0);
        auto& v0 = values->mutable_layer(0);
        v0.resize(g0.size() * nS);
        parallel_for(g0.size(), options.threads, [&](std::size_t lo, std::size_t hi) {
            LayerRange range(g0, lo, hi);
            std::vector<double> r(d);
            for (auto it = range.begin(); it != range.end(); ++it) {
                for (std::size_t i = 0; i < d; ++i) r[i] = static_cast<double>(it->indices[i]) * alpha;
                const double w = welfare(r);
                if (!std::isfinite(w))
                    throw std::domain_error("welfare is not finite at a lattice point of layer 0 (" + welfare.name() +
                                            ")");
                for (std::size_t s = 0; s < nS; ++s) v0[it.flat() * nS + s] = w;
            }
        });
    }

    std::vector<LatticeIndex> inc(nS * nA * d);
    std::vector<std::size_t> offset(nS * nA);
    for (int t = 1; t <= T; ++t) {
        const LayerGeometry g = shape.layer(t);
        const LayerGeometry gp = shape.layer(t - 1);
        const double discount = std::pow(shape.gamma, T - t);

        bool needs_check = false;
        for (std::size_t sa = 0; sa < nS * nA; ++sa) {
            const auto r = model.reward(sa / nA, sa % nA);
            std::size_t off = 0;
            for (std::size_t i = 0; i < d; ++i) {
                const LatticeIndex k = floor_index(discount * r[i], alpha);
                inc[sa * d + i] = k;
                off = off * gp.side() + static_cast<std::size_t>(k);
                if (g.extent() + k > gp.extent()) needs_check = true;
            }
            offset[sa] = off;
        }

        const std::vector<double>& prev = values->mutable_layer(t - 1);
        auto& cur = values->mutable_layer(t);
        auto& pi = policy->mutable_layer(t);
        cur.assign(g.size() * nS, 0.0);
        pi.assign(g.size() * nS, 0);

        parallel_for(g.size(), options.threads, [&](std::size_t lo, std::size_t hi) {
            LayerRange range(g, lo, hi);
            for (auto it = range.begin(); it != range.end(); ++it) {
                const auto& k = it->indices;
                const std::size_t base = gp.flat_index(k);
                for (std::size_t s = 0; s < nS; ++s) {
                    double best = 0.0;
                    ActionId best_a = 0;
                    for (std::size_t a = 0; a < nA; ++a) {
                        const std::size_t sa = s * nA + a;
                        if (needs_check) {
                            for (std::size_t i = 0; i < d; ++i) {
                                if (k[i] + inc[sa * d + i] > gp.extent())
                                    throw LatticeError("successor lattice point exceeds the layer cap; rewards "
                                                       "outside [0,1] need a smaller horizon or larger alpha");
                            }
                        }
                        const std::size_t row = base + offset[sa];
                        long double sum = 0.0L;
                        for (const Transition& tr : model.successors(s, a))
                            sum += static_cast<long double>(tr.probability) *
                                   static_cast<long double>(prev[row * nS + tr.next]);
                        const double q = static_cast<double>(sum);
                        if (a == 0 || q > best) {
                            best = q;
                            best_a = a;
                        }
                    }
                    cur[it.flat() * nS + s] = best;
                    pi[it.flat() * nS + s] = static_cast<PolicyTable::Entry>(best_a);
                }
            }
        });

        if (!options.keep_all_values) std::vector<double>().swap(values->mutable_layer(t - 1));
    }

    return {std::move(values), std::move(policy)};
}

ActionId act(const PolicyTable& policy, StateId s, std::span<const double> r_acc, int t) {
    check_layer(policy.shape(), t, 1);
    if (s >= policy.shape().n_states) throw std::out_of_range("state id out of range");
    const auto k = lookup_indices(policy.shape(), r_acc, t);
    return policy.at(s, k, t);
}

double alpha_for_guarantee(double delta_eps, int T, std::size_t d) {
    if (!(delta_eps > 0.0) || T <= 0 || d == 0) throw std::invalid_argument("alpha_for_guarantee needs positive inputs");
    const double alpha = delta_eps / (static_cast<double>(T) * static_cast<double>(d));
    return std::min(alpha, std::nextafter(1.0, 0.0));
}

RaviPolicy::RaviPolicy(std::shared_ptr<const PolicyTable> table) : table_(std::move(table)) {
    if (!table_) throw std::invalid_argument("null policy table");
}

ActionId RaviPolicy::choose(const Decision& decision) const {
    return act(*table_, decision.state, decision.accumulated, decision.steps_remaining);
}

}  // namespace esr
