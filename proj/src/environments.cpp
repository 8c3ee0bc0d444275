#include "esr/environments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "esr/momdp_io.hpp"
#include "esr/rollout.hpp"

namespace esr {

namespace {

int cell_id(int width, Cell c) { return c.y * width + c.x; }

Cell cell_at(int width, int id) { return {id % width, id / width}; }

bool in_grid(int width, int height, Cell c) { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }

Cell moved(int width, int height, Cell c, ActionId a) {
    Cell n = c;
    switch (a) {
        case kNorth: n.y -= 1; break;
        case kSouth: n.y += 1; break;
        case kEast: n.x += 1; break;
        case kWest: n.x -= 1; break;
        default: break;
    }
    return in_grid(width, height, n) ? n : c;
}

std::vector<int> shuffled_cells(int n, Rng& rng) {
    std::vector<int> cells(static_cast<std::size_t>(n));
    std::iota(cells.begin(), cells.end(), 0);
    for (std::size_t i = cells.size(); i > 1; --i) std::swap(cells[i - 1], cells[rng.below(i)]);
    return cells;
}

void check_grid(int width, int height) {
    if (width < 1 || height < 1) throw ConfigError("grid dimensions must be positive");
}

void check_dynamics(int horizon, double gamma) {
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
}

Cell cell_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) throw ConfigError("cells are written [x, y]");
    return {j[0].get<int>(), j[1].get<int>()};
}

std::vector<Cell> cells_from_json(const nlohmann::json& j, const char* key) {
    std::vector<Cell> out;
    if (j.contains(key)) {
        for (const auto& c : j.at(key)) out.push_back(cell_from_json(c));
    }
    return out;
}

}  // namespace

Momdp make_figure1(int horizon, double gamma) {
    using namespace figure1;
    MomdpBuilder b(2, 2, 2);
    b.gamma(gamma).horizon(horizon).start_state(kA);
    b.transition(kA, kStay, kA, 1.0).reward(kA, kStay, {1.0, 0.0});
    b.transition(kB, kStay, kB, 1.0).reward(kB, kStay, {0.0, 1.0});
    b.transition(kA, kMove, kB, 1.0);
    b.transition(kB, kMove, kA, 1.0);
    return b.build();
}

TaxiLayout layout_taxi(const TaxiConfig& cfg) {
    check_grid(cfg.width, cfg.height);
    check_dynamics(cfg.horizon, cfg.gamma);
    if (cfg.n_queues < 1) throw ConfigError("taxi needs at least one queue");
    if (!(cfg.slip_prob >= 0.0 && cfg.slip_prob <= 1.0)) throw ConfigError("slip_prob must lie in [0, 1]");
    const int n_cells = cfg.width * cfg.height;
    if (static_cast<int>(2 * cfg.n_queues) > n_cells)
        throw ConfigError("grid too small for " + std::to_string(cfg.n_queues) + " distinct spawn/destination pairs");

    TaxiLayout layout;
    layout.config = cfg;
    Rng rng(derive_seed(cfg.seed, 0x7a11));
    if (cfg.spawns.empty() && cfg.destinations.empty()) {
        const auto cells = shuffled_cells(n_cells, rng);
        for (std::size_t i = 0; i < cfg.n_queues; ++i) {
            layout.spawns.push_back(cell_at(cfg.width, cells[2 * i]));
            layout.destinations.push_back(cell_at(cfg.width, cells[2 * i + 1]));
        }
    } else {
        layout.spawns = cfg.spawns;
        layout.destinations = cfg.destinations;
    }
    if (layout.spawns.size() != cfg.n_queues || layout.destinations.size() != cfg.n_queues)
        throw ConfigError("need one spawn and one destination per queue");
    std::vector<int> used;
    for (std::size_t i = 0; i < cfg.n_queues; ++i) {
        for (Cell c : {layout.spawns[i], layout.destinations[i]}) {
            if (!in_grid(cfg.width, cfg.height, c)) throw ConfigError("taxi location outside the grid");
            used.push_back(cell_id(cfg.width, c));
        }
    }
    std::sort(used.begin(), used.end());
    if (std::adjacent_find(used.begin(), used.end()) != used.end())
        throw ConfigError("taxi spawn and destination locations must be distinct");

    layout.start = cfg.start ? *cfg.start : cell_at(cfg.width, static_cast<int>(rng.below(n_cells)));
    if (!in_grid(cfg.width, cfg.height, layout.start)) throw ConfigError("taxi start outside the grid");
    return layout;
}

StateId taxi_state(const TaxiLayout& layout, Cell cell, std::size_t carrying) {
    return static_cast<StateId>(cell_id(layout.config.width, cell)) * (layout.config.n_queues + 1) + carrying;
}

Momdp make_taxi(const TaxiConfig& cfg) { return make_taxi(layout_taxi(cfg)); }

Momdp make_taxi(const TaxiLayout& layout) {
    const TaxiConfig& cfg = layout.config;
    const std::size_t d = cfg.n_queues;
    const int n_cells = cfg.width * cfg.height;
    MomdpBuilder b(static_cast<std::size_t>(n_cells) * (d + 1), 6, d);
    b.gamma(cfg.gamma).horizon(cfg.horizon).start_state(taxi_state(layout, layout.start, 0));

    std::vector<double> unit(d, 0.0);
    for (int id = 0; id < n_cells; ++id) {
        const Cell c = cell_at(cfg.width, id);
        for (std::size_t carrying = 0; carrying <= d; ++carrying) {
            const StateId s = taxi_state(layout, c, carrying);
            for (ActionId a = kNorth; a <= kWest; ++a) {
                const double keep = 1.0 - cfg.slip_prob;
                b.add_transition(s, a, taxi_state(layout, moved(cfg.width, cfg.height, c, a), carrying), keep);
                if (cfg.slip_prob > 0.0) {
                    for (ActionId other = kNorth; other <= kWest; ++other)
                        b.add_transition(s, a, taxi_state(layout, moved(cfg.width, cfg.height, c, other), carrying),
                                         cfg.slip_prob / 4.0);
                }
            }

            std::size_t after_pickup = carrying;
            if (carrying == 0) {
                for (std::size_t q = 0; q < d; ++q) {
                    if (layout.spawns[q] == c) after_pickup = q + 1;
                }
            }
            b.transition(s, kPickup, taxi_state(layout, c, after_pickup), 1.0);

            if (carrying > 0 && layout.destinations[carrying - 1] == c) {
                b.transition(s, kDropoff, taxi_state(layout, c, 0), 1.0);
                std::fill(unit.begin(), unit.end(), 0.0);
                unit[carrying - 1] = 1.0;
                b.reward(s, kDropoff, unit);
            } else {
                b.transition(s, kDropoff, s, 1.0);
            }
        }
    }
    return b.build();
}

ScavengerLayout layout_scavenger(const ScavengerConfig& cfg) {
    check_grid(cfg.width, cfg.height);
    check_dynamics(cfg.horizon, cfg.gamma);
    if (!(cfg.enemy_density >= 0.0 && cfg.enemy_density < 1.0)) throw ConfigError("enemy_density must lie in [0, 1)");
    if (cfg.n_resources > 20) throw ConfigError("at most 20 resources (state space is cells * 2^n)");
    const int n_cells = cfg.width * cfg.height;
    if (static_cast<int>(cfg.n_resources) + 1 > n_cells)
        throw ConfigError("n_resources exceeds the cells available besides the start");
    const int n_enemies = static_cast<int>(std::lround(cfg.enemy_density * n_cells));
    if (n_enemies + static_cast<int>(cfg.n_resources) + 1 > n_cells)
        throw ConfigError("not enough cells for start, resources and enemies");

    ScavengerLayout layout;
    layout.config = cfg;
    Rng rng(derive_seed(cfg.seed, 0x5ca7));
    const auto cells = shuffled_cells(n_cells, rng);
    std::size_t next = 0;
    layout.start = cell_at(cfg.width, cells[next++]);
    for (std::size_t i = 0; i < cfg.n_resources; ++i) layout.resources.push_back(cell_at(cfg.width, cells[next++]));
    for (int i = 0; i < n_enemies; ++i) layout.enemies.push_back(cell_at(cfg.width, cells[next++]));
    return layout;
}

Momdp make_scavenger(const ScavengerConfig& cfg) { return make_scavenger(layout_scavenger(cfg)); }

Momdp make_scavenger(const ScavengerLayout& layout) {
    const ScavengerConfig& cfg = layout.config;
    const int n_cells = cfg.width * cfg.height;
    const std::size_t n = layout.resources.size();
    const std::size_t masks = std::size_t{1} << n;
    std::vector<int> resource_at(static_cast<std::size_t>(n_cells), -1);
    std::vector<bool> enemy_at(static_cast<std::size_t>(n_cells), false);
    for (std::size_t i = 0; i < n; ++i) resource_at[cell_id(cfg.width, layout.resources[i])] = static_cast<int>(i);
    for (Cell e : layout.enemies) enemy_at[cell_id(cfg.width, e)] = true;

    MomdpBuilder b(static_cast<std::size_t>(n_cells) * masks, 4, 2);
    b.gamma(cfg.gamma).horizon(cfg.horizon);
    b.start_state(static_cast<StateId>(cell_id(cfg.width, layout.start)) * masks + (masks - 1));
    for (int id = 0; id < n_cells; ++id) {
        const Cell c = cell_at(cfg.width, id);
        for (std::size_t mask = 0; mask < masks; ++mask) {
            const StateId s = static_cast<StateId>(id) * masks + mask;
            for (ActionId a = kNorth; a <= kWest; ++a) {
                const Cell to = moved(cfg.width, cfg.height, c, a);
                const int to_id = cell_id(cfg.width, to);
                std::size_t next_mask = mask;
                double resource = 0.0;
                double damage = 0.0;
                if (!(to == c)) {
                    const int r = resource_at[to_id];
                    if (r >= 0 && (mask >> r) & 1U) {
                        resource = 1.0;
                        next_mask &= ~(std::size_t{1} << r);
                    }
                    if (enemy_at[to_id]) damage = 1.0;
                }
                b.transition(s, a, static_cast<StateId>(to_id) * masks + next_mask, 1.0);
                if (resource > 0.0 || damage > 0.0) b.reward(s, a, {resource, damage});
            }
        }
    }
    return b.build();
}

std::string describe_taxi(const TaxiLayout& layout) {
    const TaxiConfig& cfg = layout.config;
    std::vector<std::string> rows(static_cast<std::size_t>(cfg.height), std::string(cfg.width, '.'));
    for (std::size_t q = 0; q < layout.spawns.size(); ++q) {
        rows[layout.spawns[q].y][layout.spawns[q].x] = static_cast<char>('a' + q % 26);
        rows[layout.destinations[q].y][layout.destinations[q].x] = static_cast<char>('A' + q % 26);
    }
    rows[layout.start.y][layout.start.x] = 'T';
    std::ostringstream out;
    out << "taxi " << cfg.width << "x" << cfg.height << ", " << cfg.n_queues << " queues\n";
    for (const auto& r : rows) out << r << '\n';
    out << "T taxi start, a.. spawns, A.. destinations\n";
    return out.str();
}

std::string describe_scavenger(const ScavengerLayout& layout) {
    const ScavengerConfig& cfg = layout.config;
    std::vector<std::string> rows(static_cast<std::size_t>(cfg.height), std::string(cfg.width, '.'));
    for (Cell c : layout.enemies) rows[c.y][c.x] = 'E';
    for (Cell c : layout.resources) rows[c.y][c.x] = 'R';
    rows[layout.start.y][layout.start.x] = 'S';
    std::ostringstream out;
    out << "scavenger " << cfg.width << "x" << cfg.height << ", " << layout.resources.size() << " resources, "
        << layout.enemies.size() << " enemies\n";
    for (const auto& r : rows) out << r << '\n';
    out << "S start, R resource, E enemy\n";
    return out.str();
}

Momdp make_random_momdp(const RandomModelConfig& cfg, std::uint64_t seed) {
    if (cfg.n_states < 1 || cfg.n_actions < 1 || cfg.d < 1 || cfg.branching < 1 || cfg.reward_denominator < 1)
        throw ConfigError("random model sizes must be positive");
    Rng rng(seed);
    MomdpBuilder b(cfg.n_states, cfg.n_actions, cfg.d);
    b.gamma(cfg.gamma).horizon(cfg.horizon).start_state(rng.below(cfg.n_states));
    const auto draw_reward = [&] {
        std::vector<double> r(cfg.d);
        for (double& x : r)
            x = static_cast<double>(rng.below(static_cast<std::uint64_t>(cfg.reward_denominator) + 1)) /
                cfg.reward_denominator;
        return r;
    };
    std::vector<std::vector<double>> per_action;
    for (ActionId a = 0; a < cfg.n_actions; ++a) per_action.push_back(draw_reward());
    for (StateId s = 0; s < cfg.n_states; ++s) {
        for (ActionId a = 0; a < cfg.n_actions; ++a) {
            const std::size_t k = 1 + rng.below(std::min(cfg.branching, cfg.n_states));
            auto targets = shuffled_cells(static_cast<int>(cfg.n_states), rng);
            std::vector<double> w(k);
            double total = 0.0;
            for (double& x : w) {
                x = 1.0 + static_cast<double>(rng.below(4));
                total += x;
            }
            for (std::size_t i = 0; i < k; ++i) b.transition(s, a, static_cast<StateId>(targets[i]), w[i] / total);
            b.reward(s, a, cfg.action_only_rewards ? per_action[a] : draw_reward());
        }
    }
    return b.build();
}

TaxiConfig taxi_config_from_json(const nlohmann::json& j) {
    TaxiConfig cfg;
    cfg.width = j.value("width", cfg.width);
    cfg.height = j.value("height", cfg.height);
    cfg.n_queues = j.value("n_queues", cfg.n_queues);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.slip_prob = j.value("slip_prob", cfg.slip_prob);
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.gamma = j.value("gamma", cfg.gamma);
    cfg.spawns = cells_from_json(j, "spawns");
    cfg.destinations = cells_from_json(j, "destinations");
    if (j.contains("start")) cfg.start = cell_from_json(j.at("start"));
    return cfg;
}

ScavengerConfig scavenger_config_from_json(const nlohmann::json& j) {
    ScavengerConfig cfg;
    cfg.width = j.value("width", cfg.width);
    cfg.height = j.value("height", cfg.height);
    cfg.n_resources = j.value("n_resources", cfg.n_resources);
    cfg.enemy_density = j.value("enemy_density", cfg.enemy_density);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.gamma = j.value("gamma", cfg.gamma);
    return cfg;
}

namespace {

RandomModelConfig random_config_from_json(const nlohmann::json& j) {
    RandomModelConfig cfg;
    cfg.n_states = j.value("n_states", cfg.n_states);
    cfg.n_actions = j.value("n_actions", cfg.n_actions);
    cfg.d = j.value("d", cfg.d);
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.gamma = j.value("gamma", cfg.gamma);
    cfg.reward_denominator = j.value("reward_denominator", cfg.reward_denominator);
    cfg.branching = j.value("branching", cfg.branching);
    cfg.action_only_rewards = j.value("action_only_rewards", cfg.action_only_rewards);
    return cfg;
}

std::string kind_of(const nlohmann::json& spec) {
    if (!spec.is_object() || !spec.contains("kind")) throw ConfigError("environment spec needs a \"kind\"");
    return spec.at("kind").get<std::string>();
}

}  // namespace

Momdp make_environment(const nlohmann::json& spec, std::uint64_t seed_offset) {
    const std::string kind = kind_of(spec);
    try {
        if (kind == "figure1") return make_figure1(spec.value("horizon", 3), spec.value("gamma", 1.0));
        if (kind == "taxi") {
            auto cfg = taxi_config_from_json(spec);
            cfg.seed += seed_offset;
            return make_taxi(cfg);
        }
        if (kind == "scavenger") {
            auto cfg = scavenger_config_from_json(spec);
            cfg.seed += seed_offset;
            return make_scavenger(cfg);
        }
        if (kind == "random")
            return make_random_momdp(random_config_from_json(spec), spec.value("seed", std::uint64_t{0}) + seed_offset);
        if (kind == "file") return read_momdp(spec.at("path").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad environment spec: ") + e.what());
    }
    throw ConfigError("unknown environment kind \"" + kind + "\"");
}

std::string describe_environment(const nlohmann::json& spec, std::uint64_t seed_offset) {
    const std::string kind = kind_of(spec);
    if (kind == "taxi") {
        auto cfg = taxi_config_from_json(spec);
        cfg.seed += seed_offset;
        return describe_taxi(layout_taxi(cfg));
    }
    if (kind == "scavenger") {
        auto cfg = scavenger_config_from_json(spec);
        cfg.seed += seed_offset;
        return describe_scavenger(layout_scavenger(cfg));
    }
    if (kind == "figure1") return "figure1: A <-> B, stay at A earns (1,0), stay at B earns (0,1)\n";
    const Momdp m = make_environment(spec, seed_offset);
    return kind + ": " + std::to_string(m.n_states()) + " states, " + std::to_string(m.n_actions()) + " actions, d=" +
           std::to_string(m.reward_dim()) + "\n";
}

ModelEnvironment::ModelEnvironment(Momdp model, std::uint64_t seed)
    : model_(std::move(model)), rng_(seed), state_(model_.start_state()) {}

StateId ModelEnvironment::reset() {
    state_ = model_.start_state();
    return state_;
}

StepOutcome ModelEnvironment::step(ActionId a) {
    if (a >= model_.n_actions()) throw std::out_of_range("action id out of range");
    const auto r = model_.reward(state_, a);
    StepOutcome out{sample_next(model_, state_, a, rng_), RewardVec(r.begin(), r.end())};
    state_ = out.next;
    return out;
}

}  // namespace esr
