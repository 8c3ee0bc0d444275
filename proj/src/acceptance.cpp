#include "esr/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "esr/environments.hpp"
#include "esr/experiment.hpp"
#include "esr/oracle.hpp"
#include "esr/raee.hpp"
#include "esr/ravi.hpp"
#include "esr/table_io.hpp"

namespace esr {

namespace {

constexpr double kSlack = 1e-9;
constexpr std::uint64_t kSweepSeed = 0x5eed2024;

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

/// Instance i of the seeded sweep: |S| <= 4, |A| <= 3, d = 2, T <= 5, gamma = 1, rewards on the 1/2 grid.
Momdp sweep_instance(std::size_t i) {
    Rng rng(derive_seed(kSweepSeed, i));
    RandomModelConfig cfg;
    cfg.n_states = 1 + rng.below(4);
    cfg.n_actions = 1 + rng.below(3);
    cfg.d = 2;
    cfg.horizon = 1 + static_cast<int>(rng.below(5));
    cfg.gamma = 1.0;
    cfg.reward_denominator = 2;
    cfg.branching = cfg.n_states;
    return make_random_momdp(cfg, rng.next());
}

/// Stochastic stationary policy with per-state random action distributions.
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
        std::copy_n(probs_.begin() + static_cast<std::ptrdiff_t>(d.state * n_actions_), n_actions_, out.begin());
    }

  private:
    std::size_t n_actions_;
    std::vector<double> probs_;
};

CriterionResult figure1_exactness(const AcceptanceOptions& opt) {
    const Momdp fig = make_figure1();
    std::vector<std::string> problems;
    const std::vector<double> zero(2, 0.0);

    PlanOptions po;
    po.threads = 1;
    const auto nash = WelfareFn::nash(2);
    PlanResult planned = plan(fig, nash, 1.0, po);
    if (opt.corrupt) {
        auto values = std::make_shared<ValueTable>(*planned.values);
        auto policy = std::make_shared<PolicyTable>(*planned.policy);
        for (int t = 1; t <= policy->shape().horizon; ++t) {
            auto& layer = policy->mutable_layer(t);
            std::fill(layer.begin(), layer.end(), PolicyTable::Entry{figure1::kStay});
        }
        auto& top = values->mutable_layer(values->shape().horizon);
        std::fill(top.begin(), top.end(), 0.5);
        planned = {values, policy};
    }
    const double v_nash = planned.start_value(fig.start_state());
    const double esr_nash = esr_of_policy(fig, nash, RaviPolicy(planned.policy));
    if (v_nash != 1.0) problems.push_back("Nash V(A,0,3) = " + format_real(v_nash));
    if (esr_nash != 1.0) problems.push_back("Nash policy ESR = " + format_real(esr_nash));

    const double v_lin = plan(fig, WelfareFn::linear({1.0, 0.0}), 1.0, po).start_value(fig.start_state());
    if (v_lin != 3.0) problems.push_back("Linear V = " + format_real(v_lin));
    const double v_egal = plan(fig, WelfareFn::egalitarian(2), 1.0, po).start_value(fig.start_state());
    if (v_egal != 1.0) problems.push_back("Egalitarian V = " + format_real(v_egal));

    CriterionResult r;
    r.passed = problems.empty();
    r.detail = "nash V=" + format_real(v_nash) + " esr=" + format_real(esr_nash) + ", linear V=" + format_real(v_lin) +
               ", egalitarian V=" + format_real(v_egal);
    for (const auto& p : problems) r.detail += "; " + p;
    return r;
}

CriterionResult lattice_bound_sweep(const AcceptanceOptions& opt) {
    const double alphas[] = {0.3, 0.7, 0.45, 0.35};
    std::size_t entries = 0;
    std::size_t failures = 0;
    double worst_lower = 1e300;
    double worst_upper = -1e300;
    std::string first_failure;
    for (std::size_t i = 0; i < 100; ++i) {
        const Momdp m = sweep_instance(i);
        const auto W = WelfareFn::spf(2, 1.0);
        const double alpha = alphas[i % 4];
        const double eps = epsilon_for_delta(W, alpha * 2.0);
        PlanOptions po;
        po.threads = opt.threads;
        const PlanResult planned = plan(m, W, alpha, po);
        ExactOracle oracle(m, W);
        const TableShape& shape = planned.values->shape();
        std::vector<LatticeIndex> k(2);
        std::vector<double> p(2);
        for (int t = 0; t <= shape.horizon; ++t) {
            const LayerGeometry g = shape.layer(t);
            const auto layer = planned.values->layer(t);
            for (std::size_t flat = 0; flat < g.size(); ++flat) {
                g.unflatten(flat, k);
                for (std::size_t j = 0; j < 2; ++j) p[j] = static_cast<double>(k[j]) * alpha;
                for (StateId s = 0; s < shape.n_states; ++s) {
                    const double v = layer[flat * shape.n_states + s];
                    const double vs = oracle.value(s, p, t);
                    ++entries;
                    const double lower = v - (vs - t * eps);
                    const double upper = v - vs;
                    worst_lower = std::min(worst_lower, lower);
                    worst_upper = std::max(worst_upper, upper);
                    if (lower < -kSlack || upper > kSlack) {
                        if (first_failure.empty())
                            first_failure = "instance " + std::to_string(i) + " t=" + std::to_string(t) +
                                            " V=" + format_real(v) + " V*=" + format_real(vs);
                        ++failures;
                    }
                }
            }
        }
    }
    CriterionResult r;
    r.passed = failures == 0;
    r.detail = std::to_string(entries) + " entries, " + std::to_string(failures) + " violations, min(V - V* + t eps)=" +
               fmt("%.3g", worst_lower) + ", max(V - V*)=" + fmt("%.3g", worst_upper);
    if (!first_failure.empty()) r.detail += "; first: " + first_failure;
    return r;
}

CriterionResult policy_bound(const AcceptanceOptions& opt) {
    const double eps = 0.1;
    std::size_t failures = 0;
    double worst = 1e300;
    for (std::size_t i = 0; i < 100; ++i) {
        const Momdp m = sweep_instance(i);
        const auto W = WelfareFn::spf(2, 1.0);
        const double alpha = alpha_for_guarantee(delta_for_epsilon(W, eps), m.horizon(), 2);
        PlanOptions po;
        po.threads = opt.threads;
        po.keep_all_values = false;
        const PlanResult planned = plan(m, W, alpha, po);
        const double esr = esr_of_policy(m, W, RaviPolicy(planned.policy));
        const std::vector<double> zero(2, 0.0);
        const double vstar = exact_value(m, W, m.start_state(), zero, m.horizon());
        const double margin = esr - (vstar - eps);
        worst = std::min(worst, margin);
        if (margin < -kSlack) ++failures;
    }
    CriterionResult r;
    r.passed = failures == 0;
    r.detail = "100 instances, " + std::to_string(failures) + " below V* - 0.1, min(ESR - V* + eps)=" + fmt("%.6g", worst);
    return r;
}

CriterionResult alpha_convergence(const AcceptanceOptions& opt) {
    const double alphas[] = {0.25, 1.0 / 16.0, 1.0 / 64.0};
    std::size_t failures = 0;
    double worst_final = 0.0;
    std::string first_failure;
    for (std::size_t i = 0; i < 20; ++i) {
        const Momdp m = sweep_instance(i);
        const auto W = WelfareFn::spf(2, 1.0);
        const std::vector<double> zero(2, 0.0);
        const double vstar = exact_value(m, W, m.start_state(), zero, m.horizon());
        double prev_gap = 1e300;
        std::string gaps;
        bool ok = true;
        for (double alpha : alphas) {
            PlanOptions po;
            po.threads = opt.threads;
            po.keep_all_values = false;
            const PlanResult planned = plan(m, W, alpha, po);
            const double gap = vstar - esr_of_policy(m, W, RaviPolicy(planned.policy));
            gaps += (gaps.empty() ? "" : " ") + fmt("%.3g", gap);
            if (gap > prev_gap + kSlack) ok = false;
            prev_gap = gap;
        }
        worst_final = std::max(worst_final, prev_gap);
        if (prev_gap > 1e-6) ok = false;
        if (!ok) {
            ++failures;
            if (first_failure.empty()) first_failure = "instance " + std::to_string(i) + " gaps " + gaps;
        }
    }
    CriterionResult r;
    r.passed = failures == 0;
    r.detail = "20 instances, " + std::to_string(failures) + " failures, max gap at 1/64 = " + fmt("%.3g", worst_final);
    if (!first_failure.empty()) r.detail += "; first: " + first_failure;
    return r;
}

std::string describe_summary(const ExperimentReport& rep) {
    std::string out;
    for (const auto& s : rep.summary)
        out += (out.empty() ? "" : ", ") + s.algorithm + " " + fmt("%.4f", s.mean) + "+-" + fmt("%.4f", s.std) +
               " best " + std::to_string(s.best_count) + (s.n_failed ? " failed " + std::to_string(s.n_failed) : "");
    return out;
}

CriterionResult table1_ordering(const AcceptanceOptions& opt) {
    ExperimentConfig cfg = preset_config("desk-taxi");
    cfg.threads = opt.threads;
    const auto rep = run_experiment(cfg);
    const auto& ravi = rep.find("ravi");
    const auto& mix = rep.find("mixture");
    const auto& lin = rep.find("linear");
    CriterionResult r;
    const bool no_failures = ravi.n_failed + mix.n_failed + lin.n_failed == 0;
    r.passed = no_failures && ravi.mean > mix.mean && mix.mean > lin.mean && ravi.best_count >= 16;
    r.detail = describe_summary(rep);
    return r;
}

CriterionResult table2_ordering(const AcceptanceOptions& opt) {
    ExperimentConfig cfg = preset_config("desk-scavenger");
    cfg.threads = opt.threads;
    const auto rep = run_experiment(cfg);
    const auto& ravi = rep.find("ravi");
    const auto& wq = rep.find("welfare_q");
    const auto& lin = rep.find("linear");
    CriterionResult r;
    const bool no_failures = ravi.n_failed + wq.n_failed + lin.n_failed == 0;
    r.passed = no_failures && ravi.mean >= wq.mean && ravi.mean >= lin.mean && ravi.best_count >= 14;
    r.detail = describe_summary(rep);
    return r;
}

CriterionResult horizon_tail(const AcceptanceOptions&) {
    const double eps = 0.05;
    const auto W = WelfareFn::spf(2, 1.0);
    const double gamma = 0.9;
    const int T = horizon_time(gamma, delta_for_epsilon(W, eps));
    double worst = 0.0;
    std::size_t checks = 0;
    for (std::size_t i = 0; i < 10; ++i) {
        Rng rng(derive_seed(kSweepSeed ^ 0x40, i));
        RandomModelConfig cfg;
        cfg.n_states = 3;
        cfg.n_actions = 2 + rng.below(2);
        cfg.d = 2;
        cfg.horizon = T;
        cfg.gamma = gamma;
        cfg.reward_denominator = 4;
        cfg.branching = 3;
        cfg.action_only_rewards = true;
        const Momdp m = make_random_momdp(cfg, rng.next());
        for (std::size_t j = 0; j < 5; ++j) {
            std::vector<std::vector<ActionId>> steps;
            for (int k = 0; k < T + 50; ++k) steps.push_back(std::vector<ActionId>(3, rng.below(cfg.n_actions)));
            const TimeIndexedPolicy pi(steps, cfg.n_actions);
            const double short_run = esr_of_policy(m, W, pi, T);
            const double long_run = esr_of_policy(m, W, pi, T + 50);
            worst = std::max(worst, std::abs(long_run - short_run));
            ++checks;
        }
    }
    CriterionResult r;
    r.passed = worst <= eps;
    r.detail = "T=" + std::to_string(T) + ", " + std::to_string(checks) +
               " open-loop policies on 10 stochastic models, max |V_T - V_{T+50}| = " + fmt("%.4g", worst);
    return r;
}

CriterionResult jensen(const AcceptanceOptions&) {
    std::size_t checks = 0;
    double worst_gap = -1e300;
    double worst_linear = 0.0;
    for (std::size_t i = 0; i < 50; ++i) {
        Rng rng(derive_seed(kSweepSeed ^ 0x50, i));
        RandomModelConfig cfg;
        cfg.n_states = 1 + rng.below(3);
        cfg.n_actions = 1 + rng.below(3);
        cfg.d = 2;
        cfg.horizon = 1 + static_cast<int>(rng.below(4));
        cfg.gamma = i % 2 ? 0.9 : 1.0;
        cfg.reward_denominator = 4;
        cfg.branching = cfg.n_states;
        const Momdp m = make_random_momdp(cfg, rng.next());
        const UniformRandomPolicy uniform(cfg.n_actions);
        const RandomTablePolicy table(cfg.n_states, cfg.n_actions, rng);
        for (const Policy* pi : {static_cast<const Policy*>(&uniform), static_cast<const Policy*>(&table)}) {
            const auto nash = evaluate_policy(m, WelfareFn::nash(2), *pi);
            const auto lin = evaluate_policy(m, WelfareFn::linear({0.3, 0.7}), *pi);
            worst_gap = std::max(worst_gap, nash.esr - nash.ser);
            worst_linear = std::max(worst_linear, std::abs(lin.esr - lin.ser));
            ++checks;
        }
    }
    CriterionResult r;
    r.passed = worst_gap <= kSlack && worst_linear <= kSlack;
    r.detail = std::to_string(checks) + " policy evaluations, max(ESR - SER) nash = " + fmt("%.3g", worst_gap) +
               ", max |ESR - SER| linear = " + fmt("%.3g", worst_linear);
    return r;
}

CriterionResult parallel_determinism(const AcceptanceOptions&) {
    std::size_t mismatches = 0;
    std::size_t bytes = 0;
    for (std::size_t i = 0; i < 10; ++i) {
        RandomModelConfig cfg;
        cfg.n_states = 5;
        cfg.n_actions = 3;
        cfg.d = 2;
        cfg.horizon = 5;
        cfg.gamma = i % 2 ? 0.95 : 1.0;
        cfg.reward_denominator = 10;
        cfg.branching = 3;
        const Momdp m = make_random_momdp(cfg, derive_seed(kSweepSeed ^ 0x90, i));
        const auto W = WelfareFn::spf(2, 1.0);
        std::string blobs[2];
        const std::size_t workers[2] = {1, 8};
        for (int j = 0; j < 2; ++j) {
            PlanOptions po;
            po.threads = workers[j];
            const PlanResult planned = plan(m, W, 0.1, po);
            std::ostringstream out;
            write_tables(out, *planned.values, *planned.policy);
            blobs[j] = out.str();
        }
        bytes += blobs[0].size();
        if (blobs[0] != blobs[1]) ++mismatches;
    }
    CriterionResult r;
    r.passed = mismatches == 0;
    r.detail = "10 instances, " + std::to_string(bytes) + " bytes compared, " + std::to_string(mismatches) + " mismatches";
    return r;
}

CriterionResult raee_desk(const AcceptanceOptions&) {
    const Momdp fig = make_figure1();
    const auto W = WelfareFn::nash(2);
    const std::vector<double> zero(2, 0.0);
    RaeeConfig cfg;
    cfg.eps = 0.1;
    cfg.beta = 0.1;
    cfg.m_known_override = 30;
    cfg.horizon = fig.horizon();
    cfg.v_star_target = exact_value(fig, W, fig.start_state(), zero, fig.horizon());
    std::size_t good = 0;
    std::size_t bad = 0;
    std::size_t timeouts = 0;
    for (std::size_t i = 0; i < 50; ++i) {
        ModelEnvironment env(fig, derive_seed(kSweepSeed ^ 0xa0, i));
        const RaeeResult res = run_raee(env, cfg, W, 1.0);
        if (res.timed_out) {
            ++timeouts;
            continue;
        }
        const double esr = esr_of_policy(fig, W, *res.policy, fig.horizon(), res.halt_state);
        if (esr >= cfg.v_star_target - cfg.eps - kSlack) {
            ++good;
        } else {
            ++bad;
        }
    }
    CriterionResult r;
    r.passed = good >= 45 && bad == 0;
    r.detail = "50 runs: " + std::to_string(good) + " halted within eps, " + std::to_string(bad) +
               " violated the bound, " + std::to_string(timeouts) + " timed out";
    return r;
}

CriterionResult ablation(const AcceptanceOptions& opt) {
    ExperimentConfig cfg = preset_config("desk-taxi");
    cfg.threads = opt.threads;
    std::vector<AlgorithmSpec> algos;
    for (const auto& a : cfg.algorithms) {
        if (a.kind == "ravi" || a.kind == "linear") algos.push_back(a);
    }
    cfg.algorithms = algos;
    cfg.train_welfare = {{"kind", "spf"}, {"lambda", kSpfAblationLambda}};
    const AblationReport rep = run_ablation(cfg, {0.4, 0.6, 0.8, 1.0, 1.2});
    CriterionResult r;
    r.passed = rep.linear_mean.has_value() && rep.rows.size() == 5;
    std::string curve;
    for (const auto& row : rep.rows) {
        if (!rep.linear_mean || !(row.mean > *rep.linear_mean)) r.passed = false;
        curve += (curve.empty() ? "" : ", ") + fmt("%.2g", row.alpha) + ":" + fmt("%.4f", row.mean);
    }
    r.detail = "curve " + curve + "; linear mean " + (rep.linear_mean ? fmt("%.4f", *rep.linear_mean) : "missing");
    return r;
}

struct Entry {
    CriterionInfo info;
    std::function<CriterionResult(const AcceptanceOptions&)> fn;
};

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = {
        {{1, "figure1"}, figure1_exactness},   {{2, "lattice_bounds"}, lattice_bound_sweep},
        {{3, "policy_bound"}, policy_bound},     {{4, "convergence"}, alpha_convergence},
        {{5, "taxi"}, table1_ordering},        {{6, "scavenger"}, table2_ordering},
        {{7, "horizon"}, horizon_tail},       {{8, "jensen"}, jensen},
        {{9, "determinism"}, parallel_determinism}, {{10, "raee"}, raee_desk},
        {{11, "ablation"}, ablation},
    };
    return entries;
}

}  // namespace

const std::vector<CriterionInfo>& acceptance_criteria() {
    static const std::vector<CriterionInfo> infos = [] {
        std::vector<CriterionInfo> out;
        for (const auto& e : registry()) out.push_back(e.info);
        return out;
    }();
    return infos;
}

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
    for (const auto& e : registry()) {
        if (e.info.id != id) continue;
        const auto start = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = e.fn(options);
        } catch (const std::exception& ex) {
            r.passed = false;
            r.detail = std::string("error: ") + ex.what();
        }
        r.id = id;
        r.name = e.info.name;
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        // Runtime budgets stated alongside the criteria.
        const double budget = id == 1 ? 1.0 : id == 2 ? 300.0 : id == 5 ? 900.0 : id == 10 ? 120.0 : 0.0;
        if (budget > 0.0 && r.seconds > budget) {
            r.passed = false;
            r.detail += "; over the " + fmt("%.0f", budget) + " s budget";
        }
        return r;
    }
    throw std::out_of_range("no acceptance criterion " + std::to_string(id));
}

std::vector<CriterionResult> run_suite(const std::string& suite, const AcceptanceOptions& options) {
    std::vector<CriterionResult> out;
    if (suite == "corrupt") {
        AcceptanceOptions o = options;
        o.corrupt = true;
        out.push_back(run_criterion(1, o));
        return out;
    }
    for (const auto& info : acceptance_criteria()) {
        if (suite == "all" || suite == info.name || suite == std::to_string(info.id))
            out.push_back(run_criterion(info.id, options));
    }
    if (out.empty()) throw std::invalid_argument("unknown verify suite \"" + suite + "\"");
    return out;
}

std::string format_result(const CriterionResult& r) {
    char head[96];
    std::snprintf(head, sizeof head, "%s %2d %-12s (%.3f s)  ", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                  r.seconds);
    return head + r.detail;
}

nlohmann::json results_to_json(const std::vector<CriterionResult>& results) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : results)
        j.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"seconds", r.seconds}, {"detail", r.detail}});
    return j;
}

}  // namespace esr
