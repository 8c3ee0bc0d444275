#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <climits>
#include <cstdint>
#include <map>

#include "esr/environments.hpp"
#include "esr/oracle.hpp"
#include "esr/raee.hpp"
#include "esr/random.hpp"

using namespace esr;
using V = std::vector<double>;

namespace {

RaeeConfig figure1_config(double v_star) {
    RaeeConfig cfg;
    cfg.eps = 0.1;
    cfg.beta = 0.1;
    cfg.v_star_target = v_star;
    cfg.m_known_override = 30;
    cfg.horizon = 3;
    return cfg;
}

/// Wraps an environment and records every step for invariant checks.
class Recorder : public Environment {
  public:
    explicit Recorder(Environment& inner) : inner_(inner) {}
    std::size_t n_states() const override { return inner_.n_states(); }
    std::size_t n_actions() const override { return inner_.n_actions(); }
    std::size_t reward_dim() const override { return inner_.reward_dim(); }
    double gamma() const override { return inner_.gamma(); }
    StateId reset() override { return inner_.reset(); }
    StepOutcome step(ActionId a) override {
        steps.push_back({inner_.current(), a});
        return inner_.step(a);
    }
    StateId current() const override { return inner_.current(); }
    Trajectory steps;

  private:
    Environment& inner_;
};

}  // namespace

TEST_CASE("m_known formula") {
    RaeeConfig cfg;
    cfg.constant_c = 1.0;
    cfg.g_t_max = 3.0;
    cfg.eps = 1.0;
    cfg.beta = 4.0 / std::exp(1.0);
    CHECK(m_known(cfg, 2, 2, 3) == 3359232);
    cfg.m_known_override = 25;
    CHECK(m_known(cfg, 2, 2, 3) == 25);
}

TEST_CASE("m_known is monotone in T") {
    RaeeConfig cfg;
    cfg.g_t_max = 2.0;
    std::size_t prev = 0;
    for (int T = 1; T < 40; ++T) {
        const std::size_t m = m_known(cfg, 5, 4, T);
        CHECK(m >= prev);
        CHECK(m >= 4);
        prev = m;
    }
}

TEST_CASE("G max defaults to W(T * 1) for monotone welfare") {
    RaeeConfig cfg;
    CHECK(resolve_g_t_max(cfg, WelfareFn::nash(2), 4) == doctest::Approx(4.0));
    CHECK_THROWS(resolve_g_t_max(cfg, WelfareFn::rd_threshold(1), 4));
    cfg.g_t_max = 7.0;
    CHECK(resolve_g_t_max(cfg, WelfareFn::rd_threshold(1), 4) == 7.0);
}

TEST_CASE("induced model with every state known matches empirical counts") {
    const Momdp m = make_figure1();
    ExplorationStats stats(2, 2, 2);
    const V rA{1, 0}, rB{0, 1}, zero{0, 0};
    for (int i = 0; i < 3; ++i) {
        stats.record(0, 0, rA, 0);
        stats.record(0, 1, zero, 1);
        stats.record(1, 0, rB, 1);
        stats.record(1, 1, zero, 0);
    }
    stats.mark_known(0);
    stats.mark_known(1);
    const InducedModel ind = induced_known_momdp(stats, 0, 3, 1.0);
    CHECK(validate(ind.model).empty());
    CHECK(ind.model.n_states() == 3);
    for (StateId s = 0; s < 2; ++s)
        for (ActionId a = 0; a < 2; ++a) {
            CHECK(ind.model.probability(s, a, ind.sink) == 0.0);
            for (StateId n = 0; n < 2; ++n) CHECK(ind.model.probability(s, a, n) == m.probability(s, a, n));
            CHECK(V(ind.model.reward(s, a).begin(), ind.model.reward(s, a).end()) ==
                  V(m.reward(s, a).begin(), m.reward(s, a).end()));
        }
    const auto escape = scalar_value_iteration(exploration_momdp(ind), 3);
    for (const auto& layer : escape.values)
        for (double v : layer) CHECK(v == 0.0);
}

TEST_CASE("mass to unknown states goes to the sink") {
    ExplorationStats stats(3, 1, 1);
    const V r{0};
    stats.record(0, 0, r, 1);
    stats.record(0, 0, r, 2);
    stats.mark_known(0);
    const InducedModel ind = induced_known_momdp(stats, 0, 2, 1.0);
    CHECK(validate(ind.model).empty());
    CHECK(ind.model.probability(0, 0, ind.sink) == 1.0);
    const auto escape = scalar_value_iteration(exploration_momdp(ind), 2);
    CHECK(escape.values[2][0] >= 1.0);
    CHECK_THROWS(induced_known_momdp(ExplorationStats(2, 1, 1), 0, 2, 1.0));
}

TEST_CASE("untried action in a known state is rejected") {
    ExplorationStats stats(1, 2, 1);
    stats.record(0, 0, V{0}, 0);
    stats.mark_known(0);
    CHECK_THROWS(induced_known_momdp(stats, 0, 1, 1.0));
}

TEST_CASE("escape policy beats every fixed-action policy") {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        // Three known states, two actions, random empirical counts that sometimes leak to unknown state 3.
        ExplorationStats stats(4, 2, 1);
        for (StateId s = 0; s < 3; ++s)
            for (ActionId a = 0; a < 2; ++a)
                for (int i = 0; i < 4; ++i) stats.record(s, a, V{0}, rng.below(4));
        for (StateId s = 0; s < 3; ++s) stats.mark_known(s);
        const InducedModel ind = induced_known_momdp(stats, 0, 3, 1.0);
        CHECK(validate(ind.model).empty());
        const Momdp ex = exploration_momdp(ind);
        const auto plan = scalar_value_iteration(ex, 3);
        // Brute force all 2^3 stationary deterministic policies; the escape value is P(reach sink).
        for (int code = 0; code < 8; ++code) {
            std::vector<ActionId> acts{ActionId(code & 1), ActionId((code >> 1) & 1), ActionId((code >> 2) & 1), 0};
            const double v = esr_of_policy(ex, WelfareFn::linear({1.0}), StationaryPolicy(acts, 2), 3, 0);
            CHECK(plan.values[3][0] >= v - 1e-12);
        }
    }
}

TEST_CASE("figure 1 run halts near optimal") {
    const Momdp m = make_figure1();
    const auto nash = WelfareFn::nash(2);
    const double v_star = exact_value(m, nash, 0, V{0, 0}, 3);
    int good = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        ModelEnvironment env(m, seed);
        const RaeeResult res = run_raee(env, figure1_config(v_star), nash, 1.0);
        REQUIRE(!res.timed_out);
        CHECK(res.halted);
        CHECK(res.m_known == 30);
        if (esr_of_policy(m, nash, *res.policy, 3, res.halt_state) >= v_star - 0.1) ++good;
    }
    CHECK(good >= 18);
}

TEST_CASE("transcript invariants") {
    const Momdp m = make_figure1();
    const auto nash = WelfareFn::nash(2);
    ModelEnvironment inner(m, 3);
    Recorder env(inner);
    const RaeeResult res = run_raee(env, figure1_config(1.0), nash, 1.0);
    REQUIRE(res.halted);

    std::size_t known = 0;
    std::map<StateId, std::size_t> visits;
    std::map<std::pair<StateId, ActionId>, std::size_t> tries;
    std::size_t wander_index = 0;
    for (const auto& e : res.transcript) {
        CHECK(e.known >= known);
        known = e.known;
        if (e.phase == "wander") {
            const auto [s, a] = env.steps.at(wander_index++);
            (void)s;
            ++visits[e.state];
            ++tries[{e.state, e.action}];
            std::size_t lo = SIZE_MAX, hi = 0;
            for (ActionId b = 0; b < 2; ++b) {
                lo = std::min(lo, tries[{e.state, b}]);
                hi = std::max(hi, tries[{e.state, b}]);
            }
            CHECK(hi - lo <= 1);
            CHECK(a == e.action);
        }
        if (e.phase == "known") CHECK(visits[e.state] == res.m_known);
    }
    const std::string log = transcript_jsonl(res.transcript);
    CHECK(std::count(log.begin(), log.end(), '\n') == long(res.transcript.size()));
    CHECK(nlohmann::json::parse(log.substr(0, log.find('\n'))).contains("phase"));
}

TEST_CASE("single state environment halts") {
    MomdpBuilder b(1, 2, 1);
    b.transition(0, 0, 0, 1).transition(0, 1, 0, 1).reward(0, 0, {1}).reward(0, 1, {0});
    const Momdp m = b.horizon(2).build();
    ModelEnvironment env(m, 1);
    RaeeConfig cfg;
    cfg.m_known_override = 6;
    cfg.horizon = 2;
    cfg.v_star_target = 2.0;
    const auto res = run_raee(env, cfg, WelfareFn::linear({1.0}), 1.0);
    CHECK(res.halted);
    CHECK(res.steps == 6);
    CHECK(esr_of_policy(m, WelfareFn::linear({1.0}), *res.policy) == 2.0);
}

TEST_CASE("unreachable target times out") {
    // State 0 is absorbing under both actions; the rewarding state 1 is never reached.
    MomdpBuilder b(2, 2, 2);
    b.transition(0, 0, 0, 1).transition(0, 1, 0, 1).transition(1, 0, 1, 1).transition(1, 1, 1, 1);
    b.reward(1, 0, {1, 1});
    const Momdp m = b.horizon(2).build();
    ModelEnvironment env(m, 1);
    RaeeConfig cfg;
    cfg.m_known_override = 4;
    cfg.horizon = 2;
    cfg.v_star_target = 1.5;
    cfg.step_budget = 500;
    const auto res = run_raee(env, cfg, WelfareFn::nash(2), 1.0);
    CHECK(res.timed_out);
    CHECK(!res.halted);
    CHECK(res.policy == nullptr);
    CHECK(res.transcript.back().phase == "timeout");
}

TEST_CASE("config validation") {
    ModelEnvironment env(make_figure1(), 1);
    RaeeConfig cfg;
    cfg.eps = 1.5;
    CHECK_THROWS(run_raee(env, cfg, WelfareFn::nash(2), 1.0));
    cfg.eps = 0.1;
    cfg.v_star_target = std::nan("");
    CHECK_THROWS(run_raee(env, cfg, WelfareFn::nash(2), 1.0));
}
