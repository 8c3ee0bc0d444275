#include <doctest.h>

#include <bit>
#include <set>

#include "esr/environments.hpp"
#include "esr/momdp_io.hpp"
#include "esr/oracle.hpp"
#include "esr/random.hpp"
#include "esr/rollout.hpp"

using namespace esr;
using V = std::vector<double>;

namespace {

ScavengerLayout tiny_scavenger() {
    ScavengerLayout l;
    l.config.width = 3;
    l.config.height = 3;
    l.config.n_resources = 1;
    l.config.enemy_density = 0.0;
    l.config.horizon = 2;
    l.start = {1, 1};
    l.resources = {{1, 0}};
    return l;
}

}  // namespace

TEST_CASE("figure 1 structure") {
    const Momdp m = make_figure1();
    CHECK(validate(m).empty());
    CHECK(m.n_states() == 2);
    CHECK(m.n_actions() == 2);
    CHECK(m.reward_dim() == 2);
    CHECK(m.start_state() == figure1::kA);
    using namespace figure1;
    CHECK(V(m.reward(kA, kStay).begin(), m.reward(kA, kStay).end()) == V{1, 0});
    CHECK(V(m.reward(kB, kStay).begin(), m.reward(kB, kStay).end()) == V{0, 1});
    CHECK(V(m.reward(kA, kMove).begin(), m.reward(kA, kMove).end()) == V{0, 0});
    CHECK(m.probability(kA, kMove, kB) == 1.0);
    CHECK(m.probability(kB, kMove, kA) == 1.0);
    CHECK(exact_value(m, WelfareFn::nash(2), kA, V{0, 0}, 3) == 1.0);
}

TEST_CASE("taxi generation is valid across seeds") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        TaxiConfig cfg;
        cfg.width = cfg.height = 10;
        cfg.n_queues = 3;
        cfg.seed = seed;
        const TaxiLayout l = layout_taxi(cfg);
        std::set<std::pair<int, int>> cells;
        for (const auto& c : l.spawns) cells.insert({c.x, c.y});
        for (const auto& c : l.destinations) cells.insert({c.x, c.y});
        CHECK(cells.size() == 6);
        const Momdp m = make_taxi(l);
        CHECK(validate(m).empty());
        CHECK(m.reward_dim() == 3);
        CHECK(m.n_states() == 100 * 4);
        for (StateId s = 0; s < m.n_states(); ++s)
            for (ActionId a = 0; a < m.n_actions(); ++a) {
                const auto r = m.reward(s, a);
                double sum = 0;
                for (double x : r) {
                    CHECK((x == 0.0 || x == 1.0));
                    sum += x;
                }
                CHECK(sum <= 1.0);
            }
    }
}

TEST_CASE("taxi 3x1 single delivery") {
    TaxiConfig cfg;
    cfg.width = 3;
    cfg.height = 1;
    cfg.n_queues = 1;
    cfg.spawns = {{0, 0}};
    cfg.destinations = {{1, 0}};
    cfg.start = Cell{0, 0};
    cfg.horizon = 4;
    const Momdp m = make_taxi(cfg);
    CHECK(validate(m).empty());
    CHECK(exact_value(m, WelfareFn::linear({1.0}), m.start_state(), V{0}, 4) == 1.0);
    CHECK(exact_value(m, WelfareFn::linear({1.0}), m.start_state(), V{0}, 3) == 1.0);
    CHECK(exact_value(m, WelfareFn::linear({1.0}), m.start_state(), V{0}, 2) == 0.0);
}

TEST_CASE("taxi rewards count deliveries") {
    TaxiConfig cfg;
    cfg.n_queues = 2;
    cfg.width = cfg.height = 4;
    cfg.horizon = 60;
    cfg.seed = 3;
    const TaxiLayout l = layout_taxi(cfg);
    const Momdp m = make_taxi(l);
    const std::size_t d = 2;
    // A random policy biased towards pickup/dropoff so deliveries happen.
    const FunctionPolicy pol(
        [&](const Decision& dec) {
            const std::size_t carrying = dec.state % (d + 1);
            const StateId cell = dec.state / (d + 1);
            const Cell c{int(cell % 4), int(cell / 4)};
            if (carrying == 0) {
                for (const auto& s : l.spawns)
                    if (s == c) return kPickup;
            } else if (l.destinations[carrying - 1] == c) {
                return kDropoff;
            }
            return ActionId((dec.step_index * 7 + dec.state) % 4);
        },
        6);
    const auto rep = rollout(m, pol, WelfareFn::egalitarian(2), 9, 50);
    for (const auto& ep : rep.episodes) {
        V deliveries(d, 0.0);
        for (const auto& [s, a] : ep.trajectory) {
            const std::size_t carrying = s % (d + 1);
            const StateId cell = s / (d + 1);
            if (a == kDropoff && carrying > 0 && l.destinations[carrying - 1] == Cell{int(cell % 4), int(cell / 4)})
                deliveries[carrying - 1] += 1;
        }
        CHECK(ep.total == deliveries);
    }
}

TEST_CASE("taxi slip exercises stochastic transitions") {
    TaxiConfig cfg;
    cfg.slip_prob = 0.2;
    const Momdp m = make_taxi(cfg);
    CHECK(validate(m).empty());
    bool stochastic = false;
    for (StateId s = 0; s < m.n_states(); ++s) stochastic |= m.successors(s, kNorth).size() > 1;
    CHECK(stochastic);
}

TEST_CASE("taxi config errors") {
    TaxiConfig cfg;
    cfg.n_queues = 0;
    CHECK_THROWS_AS(make_taxi(cfg), ConfigError);
    cfg.n_queues = 1;
    cfg.spawns = {{0, 0}};
    cfg.destinations = {{0, 0}};
    CHECK_THROWS_AS(make_taxi(cfg), ConfigError);
    cfg.destinations = {{9, 0}};
    CHECK_THROWS_AS(make_taxi(cfg), ConfigError);
}

TEST_CASE("scavenger tiny example") {
    const Momdp m = make_scavenger(tiny_scavenger());
    CHECK(validate(m).empty());
    CHECK(m.n_states() == 9 * 2);
    CHECK(!m.extended_range());
    CHECK(exact_value(m, WelfareFn::rd_threshold(0), m.start_state(), V{0, 0}, 2) >= 1.0);
}

TEST_CASE("scavenger invariants") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        ScavengerConfig cfg;
        cfg.width = cfg.height = 5;
        cfg.seed = seed;
        const ScavengerLayout l = layout_scavenger(cfg);
        std::set<std::pair<int, int>> enemy;
        for (const auto& c : l.enemies) enemy.insert({c.x, c.y});
        std::set<std::pair<int, int>> res;
        for (const auto& c : l.resources) {
            CHECK(!enemy.count({c.x, c.y}));
            res.insert({c.x, c.y});
        }
        CHECK(res.size() == cfg.n_resources);
        const Momdp m = make_scavenger(l);
        CHECK(validate(m).empty());
        CHECK(m.n_states() == 25u << cfg.n_resources);
        const auto rep = rollout(m, UniformRandomPolicy(4), WelfareFn::linear({1, 0}), seed, 50);
        for (const auto& e : rep.episodes) CHECK(e.total[0] <= double(cfg.n_resources));
    }
}

TEST_CASE("scavenger without enemies never takes damage") {
    ScavengerConfig cfg;
    cfg.width = cfg.height = 4;
    cfg.n_resources = 2;
    cfg.enemy_density = 0.0;
    const Momdp m = make_scavenger(cfg);
    for (StateId s = 0; s < m.n_states(); ++s)
        for (ActionId a = 0; a < 4; ++a) CHECK(m.reward(s, a)[1] == 0.0);
}

TEST_CASE("scavenger config errors") {
    ScavengerConfig cfg;
    cfg.width = cfg.height = 2;
    cfg.n_resources = 5;
    CHECK_THROWS_AS(make_scavenger(cfg), ConfigError);
    cfg.n_resources = 1;
    cfg.enemy_density = 1.0;
    CHECK_THROWS_AS(make_scavenger(cfg), ConfigError);
}

TEST_CASE("generators are pure given seed") {
    const nlohmann::json spec{{"kind", "taxi"}, {"width", 5}, {"height", 5}, {"seed", 4}};
    CHECK(momdp_to_json(make_environment(spec)).dump() == momdp_to_json(make_environment(spec)).dump());
    CHECK(momdp_to_json(make_environment(spec, 1)).dump() != momdp_to_json(make_environment(spec)).dump());
    CHECK(describe_environment(spec) == describe_environment(spec));
    CHECK(describe_environment({{"kind", "scavenger"}}).find('\n') != std::string::npos);
}

TEST_CASE("random models are valid") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        RandomModelConfig cfg;
        cfg.gamma = 0.9;
        cfg.branching = 3;
        CHECK(validate(make_random_momdp(cfg, seed)).empty());
    }
}

TEST_CASE("model environment samples the model") {
    ModelEnvironment env(make_figure1(), 1);
    CHECK(env.reset() == figure1::kA);
    const auto out = env.step(figure1::kMove);
    CHECK(out.next == figure1::kB);
    CHECK(out.reward == V{0, 0});
    CHECK(env.current() == figure1::kB);
}
