#include <doctest.h>

#include "esr/baselines.hpp"
#include "esr/environments.hpp"
#include "esr/oracle.hpp"
#include "esr/ravi.hpp"

using namespace esr;
using V = std::vector<double>;

namespace {

QLearningParams figure1_params(std::size_t episodes = 3000) {
    QLearningParams hp;
    hp.episodes = episodes;
    hp.horizon = 3;
    return hp;
}

}  // namespace

TEST_CASE("hyperparameter checks and schedule") {
    QLearningParams hp;
    CHECK_NOTHROW(hp.check());
    CHECK(hp.epsilon_at(0) == 1.0);
    CHECK(hp.epsilon_at(hp.episodes - 1) == doctest::Approx(0.05));
    hp.learning_rate = 0;
    CHECK_THROWS(hp.check());
    CHECK_THROWS(check_weights(V{0.5, 0.6}));
    CHECK_THROWS(check_weights(V{-0.5, 1.5}));
    CHECK_NOTHROW(check_weights(V{0.25, 0.75}));
}

TEST_CASE("linear scalarization on figure 1 stays in A") {
    const Momdp m = make_figure1();
    for (const V& w : {V{1, 0}, V{0.5, 0.5}}) {
        ModelEnvironment env(m, 1);
        const auto res = train_linear_scalarized(env, w, figure1_params(), 7);
        CHECK(res.policy->actions()[figure1::kA] == figure1::kStay);
        CHECK(esr_of_policy(m, WelfareFn::linear(w), *res.policy) == doctest::Approx(3.0 * w[0]));
    }
}

TEST_CASE("linear scalarization is seeded") {
    const Momdp m = make_figure1();
    ModelEnvironment e1(m, 1), e2(m, 1);
    const auto a = train_linear_scalarized(e1, V{0.3, 0.7}, figure1_params(500), 9);
    const auto b = train_linear_scalarized(e2, V{0.3, 0.7}, figure1_params(500), 9);
    CHECK(a.q.data() == b.q.data());
    CHECK(a.policy->actions() == b.policy->actions());
}

TEST_CASE("linear ESR equals SER and is zero under Nash on figure 1") {
    const Momdp m = make_figure1();
    for (const V& w : {V{1, 0}, V{0.75, 0.25}, V{0.5, 0.5}, V{0.25, 0.75}, V{0, 1}}) {
        ModelEnvironment env(m, 2);
        const auto res = train_linear_scalarized(env, w, figure1_params(), 3);
        const auto e = evaluate_policy(m, WelfareFn::linear(w), *res.policy);
        CHECK(std::abs(e.esr - e.ser) <= 1e-12);
        CHECK(esr_of_policy(m, WelfareFn::nash(2), *res.policy) == 0.0);
    }
}

TEST_CASE("mixture policy cycles bases") {
    const auto a = std::make_shared<StationaryPolicy>(std::vector<ActionId>{0, 0}, 2);
    const auto b = std::make_shared<StationaryPolicy>(std::vector<ActionId>{1, 1}, 2);
    CHECK_THROWS(make_mixture({}, 1));
    CHECK_THROWS(make_mixture({a}, 0));
    const auto single = make_mixture({a}, 2);
    const auto mix = std::dynamic_pointer_cast<const MixturePolicy>(make_mixture({a, b}, 2));
    REQUIRE(mix);
    for (int k = 0; k < 10; ++k) CHECK(mix->active_base(k) == std::size_t((k / 2) % 2));
    const V zero{0, 0};
    Rng rng(1);
    for (int k = 0; k < 6; ++k) {
        const Decision d{0, zero, 6 - k, k};
        CHECK(single->sample(d, rng) == 0);
        CHECK(mix->sample(d, rng) == ActionId((k / 2) % 2));
    }
}

TEST_CASE("mixture on figure 1 with unit bases") {
    const Momdp m = make_figure1();
    ModelEnvironment env(m, 4);
    const auto bases = train_unit_bases(env, figure1_params(), 5);
    REQUIRE(bases.size() == 2);
    const auto mix = make_mixture(bases, 1);
    const auto e = evaluate_policy(m, WelfareFn::linear({0.5, 0.5}), *mix);
    CHECK(e.expected_return[0] <= 2.0);
    CHECK(e.expected_return[1] <= 1.0);
    CHECK(esr_of_policy(m, WelfareFn::nash(2), *mix) <= 1.0);
}

TEST_CASE("welfare Q-learning finds the balanced path on figure 1") {
    // Stationary vector Q averages returns over different times-to-go; a large step size is
    // what lets the greedy rule switch actions on accumulated reward.
    const Momdp m = make_figure1();
    QLearningParams hp = figure1_params(5000);
    hp.learning_rate = 0.5;
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        ModelEnvironment env(m, seed);
        const auto res = train_welfare_q(env, WelfareFn::nash(2), hp, seed);
        if (esr_of_policy(m, WelfareFn::nash(2), *res.policy) == 1.0) ++hits;
    }
    CHECK(hits >= 8);
}

TEST_CASE("welfare Q-learning with zero episodes is still a policy") {
    const Momdp m = make_figure1();
    ModelEnvironment env(m, 6);
    QLearningParams hp = figure1_params(0);
    const auto res = train_welfare_q(env, WelfareFn::nash(2), hp, 1);
    CHECK(esr_of_policy(m, WelfareFn::nash(2), *res.policy) >= 0.0);
    ModelEnvironment env2(m, 6);
    const auto again = train_welfare_q(env2, WelfareFn::nash(2), hp, 1);
    CHECK(res.policy->table().data() == again.policy->table().data());
}

TEST_CASE("RAVI dominates baselines on figure 1 under Nash") {
    const Momdp m = make_figure1();
    const auto nash = WelfareFn::nash(2);
    const double ravi = esr_of_policy(m, nash, RaviPolicy(plan(m, nash, 1.0).policy));
    CHECK(ravi == 1.0);
    ModelEnvironment env(m, 8);
    CHECK(ravi >= esr_of_policy(m, nash, *train_linear_scalarized(env, V{0.5, 0.5}, figure1_params(), 1).policy));
    CHECK(ravi >= esr_of_policy(m, nash, *make_mixture(train_unit_bases(env, figure1_params(), 2), 1)));
    CHECK(ravi >= esr_of_policy(m, nash, *train_welfare_q(env, nash, figure1_params(), 3).policy));
}
