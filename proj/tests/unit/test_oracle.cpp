#include <doctest.h>

#include <cmath>
#include <memory>
#include <set>

#include "esr/environments.hpp"
#include "esr/oracle.hpp"
#include "esr/random.hpp"

using namespace esr;
using V = std::vector<double>;

namespace {

class RandomTablePolicy : public Policy {
  public:
    RandomTablePolicy(std::size_t n_states, std::size_t n_actions, Rng& rng) : n_actions_(n_actions) {
        probs_.resize(n_states * n_actions);
        for (std::size_t s = 0; s < n_states; ++s) {
            double total = 0.0;
            for (std::size_t a = 0; a < n_actions; ++a) total += probs_[s * n_actions + a] = 0.1 + rng.uniform();
            for (std::size_t a = 0; a < n_actions; ++a) probs_[s * n_actions + a] /= total;
        }
    }
    std::size_t n_actions() const override { return n_actions_; }
    void action_probabilities(const Decision& d, std::span<double> out) const override {
        for (std::size_t a = 0; a < n_actions_; ++a) out[a] = probs_[d.state * n_actions_ + a];
    }

  private:
    std::size_t n_actions_;
    std::vector<double> probs_;
};

Momdp two_bandit() {
    MomdpBuilder b(1, 2, 2);
    b.transition(0, 0, 0, 1.0).transition(0, 1, 0, 1.0).reward(0, 0, {1, 0}).reward(0, 1, {0, 1});
    return b.horizon(2).build();
}

Momdp random_model(std::uint64_t seed, double gamma = 1.0) {
    RandomModelConfig cfg;
    cfg.n_states = 3;
    cfg.n_actions = 2;
    cfg.horizon = 3;
    cfg.branching = 3;
    cfg.gamma = gamma;
    return make_random_momdp(cfg, seed);
}

}  // namespace

TEST_CASE("figure 1 exact values") {
    const Momdp m = make_figure1();
    const V zero{0, 0};
    CHECK(exact_value(m, WelfareFn::nash(2), figure1::kA, zero, 3) == 1.0);
    CHECK(exact_value(m, WelfareFn::egalitarian(2), figure1::kA, zero, 3) == 1.0);
    CHECK(exact_value(m, WelfareFn::linear({1, 0}), figure1::kA, zero, 3) == 3.0);
    CHECK(exact_value(m, WelfareFn::nash(2), figure1::kB, V{2, 3}, 0) == WelfareFn::nash(2)(V{2, 3}));
}

TEST_CASE("figure 1 reachable return vectors") {
    const Momdp m = make_figure1();
    // Enumerate every open-loop 3-step action sequence.
    std::set<V> seen;
    for (int code = 0; code < 8; ++code) {
        std::vector<std::vector<ActionId>> steps;
        for (int i = 0; i < 3; ++i) steps.push_back({ActionId((code >> i) & 1), ActionId((code >> i) & 1)});
        const auto dist = trajectory_distribution(m, TimeIndexedPolicy(steps, 2));
        REQUIRE(dist.entries.size() == 1);
        seen.insert(trajectory_return(m, dist.entries[0].first, 1.0));
    }
    const std::set<V> expect{{3, 0}, {2, 0}, {1, 1}, {1, 0}, {0, 1}, {0, 0}, {0, 2}};
    CHECK(seen == expect);
}

TEST_CASE("uniform random bandit ESR and SER") {
    const Momdp m = two_bandit();
    const auto nash = WelfareFn::nash(2);
    const UniformRandomPolicy pol(2);
    const auto e = evaluate_policy(m, nash, pol);
    CHECK(e.esr == doctest::Approx(0.5).epsilon(1e-15));
    // Expected return over two steps is (1, 1), so SER is 1.
    CHECK(e.ser == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(e.expected_return[0] == doctest::Approx(1.0));
    CHECK(e.expected_return[1] == doctest::Approx(1.0));
}

TEST_CASE("deterministic policy on deterministic model") {
    const Momdp m = make_figure1();
    const StationaryPolicy stay({figure1::kStay, figure1::kStay}, 2);
    CHECK(esr_of_policy(m, WelfareFn::linear({1, 0}), stay) == 3.0);
    CHECK(trajectory_distribution(m, stay).entries.size() == 1);
}

TEST_CASE("trajectory distributions sum to one") {
    Rng rng(21);
    for (std::uint64_t i = 0; i < 50; ++i) {
        const Momdp m = random_model(i);
        const RandomTablePolicy pol(m.n_states(), m.n_actions(), rng);
        const auto dist = trajectory_distribution(m, pol);
        CHECK(dist.total_probability() == doctest::Approx(1.0).epsilon(1e-9));
        const double bound = std::pow(double(m.n_actions() * m.n_states()), m.horizon());
        CHECK(double(dist.entries.size()) <= bound);
        // ESR from the distribution matches the merged forward evaluation.
        double esr = 0.0;
        const auto W = WelfareFn::nash(2);
        for (const auto& [traj, p] : dist.entries) esr += p * W(trajectory_return(m, traj, m.gamma()));
        CHECK(esr == doctest::Approx(esr_of_policy(m, W, pol)).epsilon(1e-12));
    }
}

TEST_CASE("exact value equals ESR of the oracle greedy policy") {
    for (std::uint64_t i = 0; i < 30; ++i) {
        const Momdp m = random_model(100 + i, i % 2 ? 0.9 : 1.0);
        for (const auto& W : {WelfareFn::nash(2), WelfareFn::spf(2, 1.0), WelfareFn::rd_threshold(1)}) {
            auto oracle = std::make_shared<ExactOracle>(m, W);
            const V zero{0, 0};
            const double v = oracle->value(m.start_state(), zero, m.horizon());
            CHECK(esr_of_policy(m, W, OracleGreedyPolicy(oracle)) == doctest::Approx(v).epsilon(1e-9));
        }
    }
}

TEST_CASE("ESR <= SER for concave, equal for linear") {
    Rng rng(22);
    for (std::uint64_t i = 0; i < 50; ++i) {
        const Momdp m = random_model(300 + i);
        const RandomTablePolicy pol(m.n_states(), m.n_actions(), rng);
        for (const auto& W : {WelfareFn::nash(2), WelfareFn::spf(2, 1.0), WelfareFn::egalitarian(2)}) {
            const auto e = evaluate_policy(m, W, pol);
            CHECK(e.esr <= e.ser + 1e-9);
        }
        const auto lin = evaluate_policy(m, WelfareFn::linear({0.4, 0.6}), pol);
        CHECK(std::abs(lin.esr - lin.ser) <= 1e-9);
    }
}

TEST_CASE("reward keyer") {
    const RewardKeyer grid(random_model(1));
    CHECK(grid.exact());
    CHECK(grid.denominator() == 2);
    const RewardKeyer discounted(random_model(1, 0.9));
    CHECK(!discounted.exact());
    std::vector<std::int64_t> a, b;
    discounted.key(V{0.1 + 0.2, 1}, a);
    discounted.key(V{0.3, 1}, b);
    CHECK(a == b);
}

TEST_CASE("guard raises too-large") {
    RandomModelConfig cfg;
    cfg.n_states = 4;
    cfg.n_actions = 3;
    cfg.horizon = 12;
    cfg.branching = 4;
    cfg.reward_denominator = 16;
    const Momdp m = make_random_momdp(cfg, 5);
    ExactOracle oracle(m, WelfareFn::nash(2), 0, 1000);
    CHECK_THROWS_AS(oracle.value(0, V{0, 0}, 12), OracleTooLarge);
    CHECK_THROWS_AS(evaluate_policy(m, WelfareFn::nash(2), UniformRandomPolicy(3), 0, kNoIndex, 1000), OracleTooLarge);
}
