#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "esr/momdp.hpp"
#include "esr/random.hpp"

namespace esr {

class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

namespace figure1 {
inline constexpr StateId kA = 0;
inline constexpr StateId kB = 1;
inline constexpr ActionId kStay = 0;
inline constexpr ActionId kMove = 1;
}  // namespace figure1

/// Two neighbourhoods A and B; staying serves a ride ((1,0) at A, (0,1) at B), moving earns nothing.
Momdp make_figure1(int horizon = 3, double gamma = 1.0);

enum GridAction : ActionId { kNorth = 0, kSouth = 1, kEast = 2, kWest = 3 };
inline constexpr ActionId kPickup = 4;
inline constexpr ActionId kDropoff = 5;

struct Cell {
    int x = 0;
    int y = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
};

struct TaxiConfig {
    int width = 6;
    int height = 6;
    std::size_t n_queues = 2;
    /// Explicit locations; when empty they are placed at random from `seed`.
    std::vector<Cell> spawns;
    std::vector<Cell> destinations;
    std::optional<Cell> start;
    std::uint64_t seed = 0;
    /// Probability that a move is replaced by a uniformly random move.
    double slip_prob = 0.0;
    int horizon = 30;
    double gamma = 1.0;
};

struct ScavengerConfig {
    int width = 8;
    int height = 8;
    std::size_t n_resources = 3;
    double enemy_density = 0.3;
    std::uint64_t seed = 0;
    int horizon = 12;
    double gamma = 1.0;
};

/// Resolved placement of a generated grid world.
struct TaxiLayout {
    TaxiConfig config;
    std::vector<Cell> spawns;
    std::vector<Cell> destinations;
    Cell start;
};

struct ScavengerLayout {
    ScavengerConfig config;
    Cell start;
    std::vector<Cell> resources;
    std::vector<Cell> enemies;
};

/**
 * Taxi: state = cell * (d + 1) + carrying, carrying 0 = empty, i + 1 =
 * passenger of queue i; cell = y * width + x. Actions N, S, E, W, pickup,
 * dropoff. Pickup or dropoff in the wrong place does nothing.
 */
TaxiLayout layout_taxi(const TaxiConfig& cfg);
Momdp make_taxi(const TaxiConfig& cfg);
Momdp make_taxi(const TaxiLayout& layout);
StateId taxi_state(const TaxiLayout& layout, Cell cell, std::size_t carrying);

/**
 * Scavenger hunt: state = cell * 2^n + mask, bit i set while resource i is
 * uncollected. Actions N, S, E, W; bumping a wall keeps the agent in place
 * and earns nothing. Entering an uncollected resource gives (1,0), entering
 * an enemy gives (0,1).
 */
ScavengerLayout layout_scavenger(const ScavengerConfig& cfg);
Momdp make_scavenger(const ScavengerConfig& cfg);
Momdp make_scavenger(const ScavengerLayout& layout);

/// ASCII map. Taxi: T start, a/b/... spawns, A/B/... destinations. Scavenger: S start, R resource, E enemy.
std::string describe_taxi(const TaxiLayout& layout);
std::string describe_scavenger(const ScavengerLayout& layout);

/// Random dense models for property checks. Rewards are multiples of 1/reward_denominator in [0,1].
struct RandomModelConfig {
    std::size_t n_states = 3;
    std::size_t n_actions = 2;
    std::size_t d = 2;
    int horizon = 3;
    double gamma = 1.0;
    int reward_denominator = 2;
    /// Maximum number of successors per (s, a).
    std::size_t branching = 2;
    /// Reward depends on the action only.
    bool action_only_rewards = false;
};
Momdp make_random_momdp(const RandomModelConfig& cfg, std::uint64_t seed);

TaxiConfig taxi_config_from_json(const nlohmann::json& j);
ScavengerConfig scavenger_config_from_json(const nlohmann::json& j);

/**
 * Generator spec {"kind": "figure1" | "taxi" | "scavenger" | "file", ...}.
 * `seed_offset` is added to the spec's seed so experiment seeds draw
 * distinct instances.
 */
Momdp make_environment(const nlohmann::json& spec, std::uint64_t seed_offset = 0);
std::string describe_environment(const nlohmann::json& spec, std::uint64_t seed_offset = 0);

struct StepOutcome {
    StateId next;
    RewardVec reward;
};

/// Sampling-only access: no transition probabilities are exposed.
class Environment {
  public:
    virtual ~Environment() = default;
    virtual std::size_t n_states() const = 0;
    virtual std::size_t n_actions() const = 0;
    virtual std::size_t reward_dim() const = 0;
    virtual double gamma() const = 0;
    virtual StateId reset() = 0;
    virtual StepOutcome step(ActionId a) = 0;
    virtual StateId current() const = 0;
};

/// Samples transitions from a hidden model.
class ModelEnvironment : public Environment {
  public:
    ModelEnvironment(Momdp model, std::uint64_t seed);

    std::size_t n_states() const override { return model_.n_states(); }
    std::size_t n_actions() const override { return model_.n_actions(); }
    std::size_t reward_dim() const override { return model_.reward_dim(); }
    double gamma() const override { return model_.gamma(); }
    StateId reset() override;
    StepOutcome step(ActionId a) override;
    StateId current() const override { return state_; }

  private:
    Momdp model_;
    Rng rng_;
    StateId state_;
};

}  // namespace esr
