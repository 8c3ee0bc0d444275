#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "esr/lattice.hpp"
#include "esr/momdp.hpp"
#include "esr/policy.hpp"
#include "esr/welfare.hpp"

namespace esr {

/// Geometry shared by value and policy tables: layer t holds n_states values per lattice point.
struct TableShape {
    double alpha = 1.0;
    int horizon = 0;
    double gamma = 1.0;
    std::size_t d = 0;
    std::size_t n_states = 0;
    std::size_t n_actions = 0;

    LayerGeometry layer(int t) const { return {d, layer_extent(alpha, horizon, t)}; }
    std::size_t layer_size(int t) const { return layer(t).size() * n_states; }

    friend bool operator==(const TableShape&, const TableShape&) = default;
};

/**
 * V(s, k, t) for t = 0..T (t = steps remaining). Layer storage is
 * point-major: entry (k, s) sits at flat(k) * n_states + s.
 * Layers dropped during planning are empty.
 */
class ValueTable {
  public:
    ValueTable() = default;
    explicit ValueTable(TableShape shape);

    const TableShape& shape() const { return shape_; }
    bool has_layer(int t) const { return !layers_.at(static_cast<std::size_t>(t)).empty(); }
    std::span<const double> layer(int t) const { return layers_.at(static_cast<std::size_t>(t)); }
    std::vector<double>& mutable_layer(int t) { return layers_.at(static_cast<std::size_t>(t)); }

    double at(StateId s, std::span<const LatticeIndex> k, int t) const;
    /// Quantizes an exact accumulated reward and looks it up.
    double value(StateId s, std::span<const double> r_acc, int t) const;

  private:
    TableShape shape_;
    std::vector<std::vector<double>> layers_;
};

/// pi(s, k, t) for t = 1..T; layer 0 is empty. Ties resolved to the lowest action id.
class PolicyTable {
  public:
    using Entry = std::uint16_t;

    PolicyTable() = default;
    explicit PolicyTable(TableShape shape);

    const TableShape& shape() const { return shape_; }
    std::span<const Entry> layer(int t) const { return layers_.at(static_cast<std::size_t>(t)); }
    std::vector<Entry>& mutable_layer(int t) { return layers_.at(static_cast<std::size_t>(t)); }

    ActionId at(StateId s, std::span<const LatticeIndex> k, int t) const;

  private:
    TableShape shape_;
    std::vector<std::vector<Entry>> layers_;
};

struct PlanOptions {
    /// Worker count; 0 = hardware concurrency.
    std::size_t threads = 1;
    /// Retain every value layer. When false only V(., ., T) survives.
    bool keep_all_values = true;
};

struct PlanResult {
    std::shared_ptr<const ValueTable> values;
    std::shared_ptr<const PolicyTable> policy;

    /// V(start, 0, T).
    double start_value(StateId s) const;
};

/**
 * Reward-aware value iteration over the accumulated-reward lattice.
 *
 * Layer t (steps remaining) reads only layer t-1. The reward collected at
 * layer t is discounted by gamma^(T - t), T = model.horizon(). Successor
 * indices are k + floor(gamma^(T-t) R(s,a) / alpha), computed on integers.
 */
PlanResult plan(const Momdp& model, const WelfareFn& welfare, double alpha, const PlanOptions& options = {});

/// Policy lookup at (s, f_alpha(r_acc), t). Throws std::out_of_range unless 1 <= t <= T.
ActionId act(const PolicyTable& policy, StateId s, std::span<const double> r_acc, int t);

/// delta_eps / (T d), clamped strictly below 1.
double alpha_for_guarantee(double delta_eps, int T, std::size_t d);

/// Executes a PolicyTable; accumulated reward stays exact and is quantized per lookup.
class RaviPolicy : public DeterministicPolicy {
  public:
    explicit RaviPolicy(std::shared_ptr<const PolicyTable> table);

    std::size_t n_actions() const override { return table_->shape().n_actions; }
    ActionId choose(const Decision& decision) const override;
    const PolicyTable& table() const { return *table_; }

  private:
    std::shared_ptr<const PolicyTable> table_;
};

}  // namespace esr
