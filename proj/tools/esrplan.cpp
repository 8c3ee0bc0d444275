// esrplan: plan, evaluate and benchmark expected-scalarized-return policies.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "esr/acceptance.hpp"
#include "esr/environments.hpp"
#include "esr/experiment.hpp"
#include "esr/momdp_io.hpp"
#include "esr/oracle.hpp"
#include "esr/raee.hpp"
#include "esr/ravi.hpp"
#include "esr/rollout.hpp"
#include "esr/table_io.hpp"

using namespace esr;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kValidation = 2, kTimeout = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Accepts a JSON object or a bare kind name ("nash", "taxi", ...).
json parse_spec(const std::string& text) {
    if (!text.empty() && text.front() == '{') return json::parse(text);
    return json{{"kind", text}};
}

Momdp load_model(const std::string& model_path, const std::string& env_spec, std::uint64_t seed) {
    if (!model_path.empty()) return read_momdp(model_path);
    if (!env_spec.empty()) return make_environment(parse_spec(env_spec), seed);
    throw UsageError("give --model FILE or --env SPEC");
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << text;
}

double resolve_alpha(const std::string& alpha, const WelfareFn& W, double epsilon, const Momdp& m) {
    if (alpha == "auto") return alpha_for_guarantee(delta_for_epsilon(W, epsilon), m.horizon(), m.reward_dim());
    return std::stod(alpha);
}

ExperimentConfig load_config(const std::string& config, const std::string& preset) {
    if (!config.empty()) return load_experiment_config(config);
    if (!preset.empty()) return preset_config(preset);
    throw UsageError("give --config FILE or --preset NAME");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reward-aware value iteration for expected scalarized return"};
    app.require_subcommand(1);

    std::string model_path, env_spec, welfare_spec = "nash", alpha = "1", out, format = "table", tables_path;
    std::string config, preset, suite = "all", alphas_text = "0.4,0.6,0.8,1.0,1.2";
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    std::size_t episodes = 100;
    double epsilon = 1.0;
    bool seed_given = false;

    auto add_model = [&](CLI::App* c) {
        c->add_option("--model", model_path, "MOMDP interchange file");
        c->add_option("--env", env_spec, "environment spec: JSON object or kind name");
    };
    auto add_common = [&](CLI::App* c) {
        c->add_option("--out", out, "output path (stdout when omitted)");
        c->add_option("--threads", threads, "worker threads, 0 = all cores");
        c->add_option("--format", format, "csv, json or table")->check(CLI::IsMember({"csv", "json", "table"}));
        c->add_option_function<std::uint64_t>(
            "--seed", [&](const std::uint64_t& s) { seed = s, seed_given = true; }, "seed");
    };

    auto* plan_cmd = app.add_subcommand("plan", "build value/policy tables and print V(start, 0, T)");
    add_model(plan_cmd);
    add_common(plan_cmd);
    plan_cmd->add_option("--welfare", welfare_spec, "welfare: JSON object or kind name");
    plan_cmd->add_option("--alpha", alpha, "lattice resolution or \"auto\"");
    plan_cmd->add_option("--epsilon", epsilon, "target error for --alpha auto");
    plan_cmd->add_option("--tables", tables_path, "write the binary table container here");

    auto* rollout_cmd = app.add_subcommand("rollout", "Monte-Carlo rollouts of a saved policy table");
    add_model(rollout_cmd);
    add_common(rollout_cmd);
    rollout_cmd->add_option("--tables", tables_path, "table container from plan")->required();
    rollout_cmd->add_option("--welfare", welfare_spec, "evaluation welfare");
    rollout_cmd->add_option("--episodes", episodes, "episode count");

    auto* exp_cmd = app.add_subcommand("experiment", "run a seeded experiment matrix");
    add_common(exp_cmd);
    exp_cmd->add_option("--config", config, "experiment config JSON");
    exp_cmd->add_option("--preset", preset, "desk-taxi, desk-scavenger or figure1");
    bool print_config = false;
    exp_cmd->add_flag("--print-config", print_config, "print the resolved config as JSON and exit");

    auto* ablate_cmd = app.add_subcommand("ablate", "RAVI value for a list of alphas");
    add_common(ablate_cmd);
    ablate_cmd->add_option("--config", config, "experiment config JSON");
    ablate_cmd->add_option("--preset", preset, "desk-taxi, desk-scavenger or figure1");
    ablate_cmd->add_option("--alphas", alphas_text, "comma-separated alphas");

    auto* verify_cmd = app.add_subcommand("verify", "run acceptance suites");
    add_common(verify_cmd);
    verify_cmd->add_option("--suite", suite, "criterion name or id, all, or corrupt");

    auto* gen_cmd = app.add_subcommand("generate", "write an environment as MOMDP JSON");
    add_common(gen_cmd);
    gen_cmd->add_option("--env", env_spec, "environment spec")->required();

    auto* describe_cmd = app.add_subcommand("describe", "print an environment map");
    add_common(describe_cmd);
    describe_cmd->add_option("--env", env_spec, "environment spec")->required();

    auto* raee_cmd = app.add_subcommand("raee", "explore-or-exploit against a sampled environment");
    add_model(raee_cmd);
    add_common(raee_cmd);
    RaeeConfig raee_cfg;
    std::size_t m_override = 0;
    std::string vstar = "oracle";
    raee_cmd->add_option("--welfare", welfare_spec, "welfare");
    raee_cmd->add_option("--alpha", alpha, "lattice resolution or \"auto\"");
    raee_cmd->add_option("--eps", raee_cfg.eps, "target suboptimality");
    raee_cmd->add_option("--beta", raee_cfg.beta, "failure probability");
    raee_cmd->add_option("--m-known", m_override, "override m_known (0 = formula)");
    raee_cmd->add_option("--vstar", vstar, "V*(s,0,T) or \"oracle\"");
    raee_cmd->add_option("--budget", raee_cfg.step_budget, "step budget");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (*plan_cmd) {
            const Momdp m = load_model(model_path, env_spec, seed);
            const auto violations = validate(m);
            if (!violations.empty()) {
                for (const auto& v : violations) std::cerr << "invalid model: " << v.message << '\n';
                return kValidation;
            }
            const WelfareFn W = welfare_from_json(parse_spec(welfare_spec), m.reward_dim());
            const double a = resolve_alpha(alpha, W, epsilon, m);
            PlanOptions po;
            po.threads = threads;
            const PlanResult planned = plan(m, W, a, po);
            if (!tables_path.empty()) save_tables(tables_path, planned);
            const double v = planned.start_value(m.start_state());
            if (format == "json") {
                emit(json{{"alpha", a}, {"value", v}, {"horizon", m.horizon()}}.dump(2) + "\n", out);
            } else if (format == "csv") {
                emit("alpha,value\n" + format_real(a) + "," + format_real(v) + "\n", out);
            } else {
                emit(format_real(v) + "\n", out);
            }
            return kOk;
        }
        if (*rollout_cmd) {
            const Momdp m = load_model(model_path, env_spec, 0);
            require_valid(m);
            const PlanResult tables = load_tables(tables_path);
            const WelfareFn W = welfare_from_json(parse_spec(welfare_spec), m.reward_dim());
            const RolloutReport rep = rollout(m, RaviPolicy(tables.policy), W, seed, episodes);
            std::ostringstream s;
            if (format == "csv") {
                s << "episode,welfare\n";
                for (std::size_t i = 0; i < rep.episodes.size(); ++i)
                    s << i << ',' << format_real(rep.episodes[i].welfare) << '\n';
            } else if (format == "json") {
                json j{{"mean", rep.mean}, {"std", rep.std}, {"welfare", json::array()}};
                for (const auto& e : rep.episodes) j["welfare"].push_back(e.welfare);
                s << j.dump(2) << '\n';
            } else {
                s << "episodes " << rep.episodes.size() << "  mean " << format_real(rep.mean) << "  std "
                  << format_real(rep.std) << '\n';
            }
            emit(s.str(), out);
            return kOk;
        }
        if (*exp_cmd) {
            ExperimentConfig cfg = load_config(config, preset);
            if (seed_given) cfg.master_seed = seed;
            if (exp_cmd->count("--threads")) cfg.threads = threads;
            if (print_config) {
                emit(experiment_config_to_json(cfg).dump(2) + "\n", out);
                return kOk;
            }
            const ExperimentReport rep = run_experiment(cfg);
            if (format == "csv") {
                emit(summary_csv(rep), out);
                if (!out.empty()) emit(seeds_csv(rep), out + ".seeds.csv");
            } else if (format == "json") {
                emit(report_to_json(rep).dump(2) + "\n", out);
            } else {
                emit(summary_table(rep), out);
            }
            return kOk;
        }
        if (*ablate_cmd) {
            ExperimentConfig cfg = load_config(config, preset);
            if (seed_given) cfg.master_seed = seed;
            if (ablate_cmd->count("--threads")) cfg.threads = threads;
            std::vector<double> alphas;
            std::stringstream ss(alphas_text);
            for (std::string tok; std::getline(ss, tok, ',');) alphas.push_back(std::stod(tok));
            const AblationReport rep = run_ablation(cfg, alphas);
            if (format == "json") {
                emit(ablation_to_json(rep).dump(2) + "\n", out);
            } else {
                std::string text = ablation_csv(rep);
                if (format == "table" && rep.linear_mean) text += "linear baseline mean " + format_real(*rep.linear_mean) + "\n";
                emit(text, out);
            }
            return kOk;
        }
        if (*verify_cmd) {
            AcceptanceOptions opt;
            opt.threads = threads;
            const auto results = run_suite(suite, opt);
            if (format == "json") {
                emit(results_to_json(results).dump(2) + "\n", out);
            } else {
                std::string text;
                for (const auto& r : results) text += format_result(r) + "\n";
                emit(text, out);
            }
            return kOk;
        }
        if (*gen_cmd) {
            const Momdp m = make_environment(parse_spec(env_spec), seed);
            emit(momdp_to_json(m).dump(2) + "\n", out);
            return kOk;
        }
        if (*describe_cmd) {
            emit(describe_environment(parse_spec(env_spec), seed), out);
            return kOk;
        }
        if (*raee_cmd) {
            const Momdp m = load_model(model_path, env_spec, 0);
            require_valid(m);
            const WelfareFn W = welfare_from_json(parse_spec(welfare_spec), m.reward_dim());
            raee_cfg.horizon = m.horizon();
            raee_cfg.threads = threads;
            if (m_override > 0) raee_cfg.m_known_override = m_override;
            if (vstar == "oracle") {
                const std::vector<double> zero(m.reward_dim(), 0.0);
                raee_cfg.v_star_target = exact_value(m, W, m.start_state(), zero, m.horizon());
            } else {
                raee_cfg.v_star_target = std::stod(vstar);
            }
            const double a = resolve_alpha(alpha, W, raee_cfg.eps / 2.0, m);
            ModelEnvironment env(m, seed);
            const RaeeResult res = run_raee(env, raee_cfg, W, a);
            emit(transcript_jsonl(res.transcript), out);
            if (res.timed_out) {
                std::cerr << "raee: step budget exhausted after " << res.steps << " steps\n";
                return kTimeout;
            }
            std::cerr << "raee: halted at state " << res.halt_state << " after " << res.steps
                      << " steps, exploit value " << format_real(res.exploit_value) << '\n';
            return kOk;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    }
    return kUsage;
}
