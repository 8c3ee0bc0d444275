#include "esr/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "esr/environments.hpp"
#include "esr/oracle.hpp"
#include "esr/parallel.hpp"
#include "esr/random.hpp"
#include "esr/ravi.hpp"
#include "esr/rollout.hpp"

namespace esr {

namespace {

constexpr double kTieTolerance = 1e-9;

const std::set<std::string> kAlgorithmKinds = {"ravi", "linear", "mixture", "welfare_q", "random"};

std::vector<std::vector<double>> default_weight_grid(std::size_t d) {
    std::vector<std::vector<double>> grid;
    if (d == 2) {
        for (double w : {1.0, 0.75, 0.5, 0.25, 0.0}) grid.push_back({w, 1.0 - w});
        return grid;
    }
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<double> w(d, 0.0);
        w[i] = 1.0;
        grid.push_back(w);
    }
    grid.push_back(std::vector<double>(d, 1.0 / static_cast<double>(d)));
    return grid;
}

std::string join_weights(const std::vector<double>& w) {
    std::string out = "w=(";
    for (std::size_t i = 0; i < w.size(); ++i) out += (i ? " " : "") + format_real(w[i]);
    return out + ")";
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

AlgorithmSpec algorithm_from_json(const nlohmann::json& j) {
    AlgorithmSpec spec;
    if (j.is_string()) {
        spec.kind = j.get<std::string>();
    } else {
        spec.kind = j.at("kind").get<std::string>();
        spec.label = j.value("label", std::string());
        if (j.contains("alpha")) {
            if (j.at("alpha").is_string()) {
                if (j.at("alpha").get<std::string>() != "auto") throw ConfigError("alpha must be a number or \"auto\"");
                spec.alpha.reset();
            } else {
                spec.alpha = j.at("alpha").get<double>();
            }
        }
        spec.epsilon = j.value("epsilon", spec.epsilon);
        if (j.contains("weights")) spec.weights = j.at("weights").get<std::vector<std::vector<double>>>();
        if (j.contains("intervals")) spec.intervals = j.at("intervals").get<std::vector<int>>();
    }
    if (!kAlgorithmKinds.count(spec.kind)) throw ConfigError("unknown algorithm kind \"" + spec.kind + "\"");
    if (spec.label.empty()) spec.label = spec.kind;
    return spec;
}

nlohmann::json algorithm_to_json(const AlgorithmSpec& spec) {
    nlohmann::json j{{"kind", spec.kind}, {"label", spec.label}};
    if (spec.alpha) j["alpha"] = *spec.alpha;
    if (spec.kind == "ravi") j["epsilon"] = spec.epsilon;
    if (!spec.weights.empty()) j["weights"] = spec.weights;
    if (!spec.intervals.empty()) j["intervals"] = spec.intervals;
    return j;
}

QLearningParams q_params_from_json(const nlohmann::json& j) {
    QLearningParams hp;
    hp.learning_rate = j.value("learning_rate", hp.learning_rate);
    hp.epsilon_start = j.value("epsilon_start", hp.epsilon_start);
    hp.epsilon_end = j.value("epsilon_end", hp.epsilon_end);
    hp.episodes = j.value("episodes", hp.episodes);
    hp.discount = j.value("discount", hp.discount);
    hp.init_scale = j.value("init_scale", hp.init_scale);
    return hp;
}

nlohmann::json q_params_to_json(const QLearningParams& hp) {
    return {{"learning_rate", hp.learning_rate}, {"epsilon_start", hp.epsilon_start},
            {"epsilon_end", hp.epsilon_end},     {"episodes", hp.episodes},
            {"discount", hp.discount},           {"init_scale", hp.init_scale}};
}

const char* kPresetTaxi = R"({
  "name": "desk-taxi",
  "environment": {"kind": "taxi", "width": 6, "height": 6, "n_queues": 2, "seed": 0},
  "horizon": 30,
  "gamma": 1.0,
  "train_welfare": {"kind": "spf", "lambda": 1e-7},
  "eval_welfare": {"kind": "nash"},
  "alpha": 1.0,
  "algorithms": [
    {"kind": "ravi"},
    {"kind": "mixture", "intervals": [1, 2, 3, 4, 6, 8, 10, 15]},
    {"kind": "linear", "weights": [[1, 0], [0.75, 0.25], [0.5, 0.5], [0.25, 0.75], [0, 1]]}
  ],
  "n_seeds": 20,
  "master_seed": 20240601,
  "q_learning": {"episodes": 10000, "learning_rate": 0.1, "epsilon_start": 1.0, "epsilon_end": 0.05, "discount": 0.95},
  "evaluation_episodes": 1000,
  "threads": 0
})";

const char* kPresetScavenger = R"({
  "name": "desk-scavenger",
  "environment": {"kind": "scavenger", "width": 8, "height": 8, "n_resources": 3, "enemy_density": 0.3, "seed": 0},
  "horizon": 12,
  "gamma": 1.0,
  "train_welfare": {"kind": "cobb_douglas", "alpha": 0.5, "beta": 0.5},
  "eval_welfare": {"kind": "cobb_douglas", "alpha": 0.5, "beta": 0.5},
  "alpha": 1.0,
  "algorithms": [
    {"kind": "ravi"},
    {"kind": "welfare_q"},
    {"kind": "linear", "weights": [[1, 0], [0.75, 0.25], [0.5, 0.5], [0.25, 0.75], [0, 1]]}
  ],
  "n_seeds": 20,
  "master_seed": 20240602,
  "q_learning": {"episodes": 10000, "learning_rate": 0.1, "epsilon_start": 1.0, "epsilon_end": 0.05, "discount": 0.95},
  "evaluation_episodes": 1000,
  "threads": 0
})";

const char* kPresetFigure1 = R"({
  "name": "figure1",
  "environment": {"kind": "figure1"},
  "horizon": 3,
  "gamma": 1.0,
  "train_welfare": {"kind": "nash"},
  "eval_welfare": {"kind": "nash"},
  "alpha": 1.0,
  "algorithms": [
    {"kind": "ravi"},
    {"kind": "mixture", "intervals": [1, 2, 3]},
    {"kind": "linear"},
    {"kind": "welfare_q"},
    {"kind": "random"}
  ],
  "n_seeds": 1,
  "master_seed": 1,
  "q_learning": {"episodes": 2000},
  "threads": 1
})";

}  // namespace

std::string format_real(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    try {
        cfg.name = j.value("name", cfg.name);
        cfg.environment = j.at("environment");
        cfg.eval_welfare = j.at(j.contains("eval_welfare") ? "eval_welfare" : "welfare");
        cfg.train_welfare = j.contains("train_welfare") ? j.at("train_welfare") : cfg.eval_welfare;
        for (const auto& a : j.at("algorithms")) cfg.algorithms.push_back(algorithm_from_json(a));
        cfg.n_seeds = j.value("n_seeds", cfg.n_seeds);
        if (j.contains("horizon")) cfg.horizon = j.at("horizon").get<int>();
        if (j.contains("gamma")) cfg.gamma = j.at("gamma").get<double>();
        cfg.master_seed = j.value("master_seed", cfg.master_seed);
        if (j.contains("alpha")) {
            if (j.at("alpha").is_string()) {
                if (j.at("alpha").get<std::string>() != "auto") throw ConfigError("alpha must be a number or \"auto\"");
                cfg.alpha.reset();
            } else {
                cfg.alpha = j.at("alpha").get<double>();
            }
        }
        if (j.contains("q_learning")) cfg.q_learning = q_params_from_json(j.at("q_learning"));
        cfg.evaluation_episodes = j.value("evaluation_episodes", cfg.evaluation_episodes);
        cfg.threads = j.value("threads", cfg.threads);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad experiment config: ") + e.what());
    }
    if (cfg.n_seeds < 1) throw ConfigError("n_seeds must be >= 1");
    if (cfg.algorithms.empty()) throw ConfigError("config lists no algorithms");
    std::set<std::string> labels;
    for (const auto& a : cfg.algorithms) {
        if (!labels.insert(a.label).second) throw ConfigError("duplicate algorithm label \"" + a.label + "\"");
    }
    if (cfg.horizon && *cfg.horizon < 1) throw ConfigError("horizon must be >= 1");
    if (cfg.gamma && !(*cfg.gamma >= 0.0 && *cfg.gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
    return cfg;
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["name"] = cfg.name;
    j["environment"] = cfg.environment;
    j["train_welfare"] = cfg.train_welfare;
    j["eval_welfare"] = cfg.eval_welfare;
    j["algorithms"] = nlohmann::json::array();
    for (const auto& a : cfg.algorithms) j["algorithms"].push_back(algorithm_to_json(a));
    j["n_seeds"] = cfg.n_seeds;
    if (cfg.horizon) j["horizon"] = *cfg.horizon;
    if (cfg.gamma) j["gamma"] = *cfg.gamma;
    j["master_seed"] = cfg.master_seed;
    j["alpha"] = cfg.alpha ? nlohmann::json(*cfg.alpha) : nlohmann::json("auto");
    j["q_learning"] = q_params_to_json(cfg.q_learning);
    j["evaluation_episodes"] = cfg.evaluation_episodes;
    j["threads"] = cfg.threads;
    return j;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return experiment_config_from_json(j);
}

ExperimentConfig preset_config(const std::string& name) {
    if (name == "desk-taxi") return experiment_config_from_json(nlohmann::json::parse(kPresetTaxi));
    if (name == "desk-scavenger") return experiment_config_from_json(nlohmann::json::parse(kPresetScavenger));
    if (name == "figure1") return experiment_config_from_json(nlohmann::json::parse(kPresetFigure1));
    throw ConfigError("unknown preset \"" + name + "\"");
}

std::vector<std::string> preset_names() { return {"desk-taxi", "desk-scavenger", "figure1"}; }

Momdp experiment_instance(const ExperimentConfig& cfg, std::size_t seed_index) {
    Momdp m = make_environment(cfg.environment, seed_index);
    if (cfg.horizon) m = m.with_horizon(*cfg.horizon);
    if (cfg.gamma) m = m.with_gamma(*cfg.gamma);
    return m;
}

Evaluation evaluate_esr(const Momdp& model, const WelfareFn& welfare, const Policy& policy, std::uint64_t seed,
                        std::size_t episodes, std::size_t guard) {
    try {
        return {evaluate_policy(model, welfare, policy, model.horizon(), kNoIndex, guard).esr, true};
    } catch (const OracleTooLarge&) {
        return {rollout(model, policy, welfare, seed, episodes).mean, false};
    }
}

namespace {

struct Context {
    const ExperimentConfig& cfg;
    const Momdp& model;
    const WelfareFn& train;
    const WelfareFn& eval;
    std::uint64_t stream;
    QLearningParams hp;
};

SeedResult run_algorithm(const Context& ctx, const AlgorithmSpec& spec, std::size_t algo_index, std::size_t seed) {
    SeedResult r;
    r.algorithm = spec.label;
    r.seed = seed;
    const std::uint64_t algo_stream = derive_seed(ctx.stream, algo_index + 1);
    const std::uint64_t eval_seed = derive_seed(algo_stream, 0xe7a1);
    auto evaluate = [&](const Policy& p) {
        return evaluate_esr(ctx.model, ctx.eval, p, eval_seed, ctx.cfg.evaluation_episodes);
    };

    if (spec.kind == "ravi") {
        double alpha;
        if (spec.alpha) {
            alpha = *spec.alpha;
        } else if (ctx.cfg.alpha) {
            alpha = *ctx.cfg.alpha;
        } else {
            alpha = alpha_for_guarantee(delta_for_epsilon(ctx.train, spec.epsilon), ctx.model.horizon(),
                                        ctx.model.reward_dim());
        }
        PlanOptions options;
        options.keep_all_values = false;
        const PlanResult planned = plan(ctx.model, ctx.train, alpha, options);
        const Evaluation e = evaluate(RaviPolicy(planned.policy));
        r.value = e.value;
        r.exact = e.exact;
        r.detail = "alpha=" + format_real(alpha);
    } else if (spec.kind == "linear") {
        const auto grid = spec.weights.empty() ? default_weight_grid(ctx.model.reward_dim()) : spec.weights;
        bool first = true;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            ModelEnvironment env(ctx.model, derive_seed(algo_stream, 2 * g));
            const auto trained = train_linear_scalarized(env, grid[g], ctx.hp, derive_seed(algo_stream, 2 * g + 1));
            const Evaluation e = evaluate(*trained.policy);
            if (first || e.value > r.value) {
                r.value = e.value;
                r.exact = e.exact;
                r.detail = join_weights(grid[g]);
                first = false;
            }
        }
    } else if (spec.kind == "mixture") {
        ModelEnvironment env(ctx.model, derive_seed(algo_stream, 0));
        const auto bases = train_unit_bases(env, ctx.hp, derive_seed(algo_stream, 1));
        const std::vector<int> intervals = spec.intervals.empty() ? std::vector<int>{1, 2, 4, 8} : spec.intervals;
        bool first = true;
        for (int interval : intervals) {
            const auto mixture = make_mixture(bases, interval);
            const Evaluation e = evaluate(*mixture);
            if (first || e.value > r.value) {
                r.value = e.value;
                r.exact = e.exact;
                r.detail = "I=" + std::to_string(interval);
                first = false;
            }
        }
    } else if (spec.kind == "welfare_q") {
        ModelEnvironment env(ctx.model, derive_seed(algo_stream, 0));
        const auto trained = train_welfare_q(env, ctx.train, ctx.hp, derive_seed(algo_stream, 1));
        const Evaluation e = evaluate(*trained.policy);
        r.value = e.value;
        r.exact = e.exact;
    } else if (spec.kind == "random") {
        const Evaluation e = evaluate(UniformRandomPolicy(ctx.model.n_actions()));
        r.value = e.value;
        r.exact = e.exact;
    }
    return r;
}

std::vector<std::string> labels_of(const ExperimentConfig& cfg) {
    std::vector<std::string> labels;
    for (const auto& a : cfg.algorithms) labels.push_back(a.label);
    return labels;
}

}  // namespace

const AlgorithmSummary& ExperimentReport::find(const std::string& algorithm) const {
    for (const auto& s : summary) {
        if (s.algorithm == algorithm) return s;
    }
    throw std::out_of_range("no algorithm \"" + algorithm + "\" in report");
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    const std::size_t n_algos = cfg.algorithms.size();
    std::vector<SeedResult> results(cfg.n_seeds * n_algos);
    parallel_for(cfg.n_seeds, cfg.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t seed = lo; seed < hi; ++seed) {
            std::optional<Momdp> model;
            std::optional<WelfareFn> train;
            std::optional<WelfareFn> eval;
            std::string setup_error;
            try {
                model = experiment_instance(cfg, seed);
                train = welfare_from_json(cfg.train_welfare, model->reward_dim());
                eval = welfare_from_json(cfg.eval_welfare, model->reward_dim());
            } catch (const std::exception& e) {
                setup_error = e.what();
            }
            for (std::size_t j = 0; j < n_algos; ++j) {
                SeedResult& out = results[seed * n_algos + j];
                if (!setup_error.empty()) {
                    out = {cfg.algorithms[j].label, seed, 0.0, false, false, setup_error};
                    continue;
                }
                QLearningParams hp = cfg.q_learning;
                hp.horizon = model->horizon();
                const Context ctx{cfg, *model, *train, *eval, derive_seed(cfg.master_seed, seed), hp};
                try {
                    out = run_algorithm(ctx, cfg.algorithms[j], j, seed);
                } catch (const std::exception& e) {
                    out = {cfg.algorithms[j].label, seed, 0.0, false, false, e.what()};
                }
            }
        }
    });
    ExperimentReport report;
    report.name = cfg.name;
    report.seeds = std::move(results);
    report.summary = summarize(report.seeds, labels_of(cfg));
    return report;
}

std::vector<AlgorithmSummary> summarize(const std::vector<SeedResult>& seeds, const std::vector<std::string>& order) {
    std::map<std::size_t, double> best;
    for (const auto& r : seeds) {
        if (!r.ok) continue;
        auto [it, inserted] = best.try_emplace(r.seed, r.value);
        if (!inserted) it->second = std::max(it->second, r.value);
    }
    std::vector<AlgorithmSummary> out;
    for (const auto& name : order) {
        AlgorithmSummary s;
        s.algorithm = name;
        std::vector<double> values;
        for (const auto& r : seeds) {
            if (r.algorithm != name) continue;
            if (!r.ok) {
                ++s.n_failed;
                continue;
            }
            values.push_back(r.value);
            s.all_exact = s.all_exact && r.exact;
            if (r.value >= best.at(r.seed) - kTieTolerance) ++s.best_count;
        }
        s.n_ok = values.size();
        s.mean = mean_of(values);
        s.std = sample_std(values);
        out.push_back(s);
    }
    return out;
}

std::string summary_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "algorithm,mean,std,n_ok,n_failed,best_count,evaluation\n";
    for (const auto& s : report.summary) {
        out << csv_field(s.algorithm) << ',' << format_real(s.mean) << ',' << format_real(s.std) << ',' << s.n_ok << ','
            << s.n_failed << ',' << s.best_count << ',' << (s.all_exact ? "exact" : "monte_carlo") << '\n';
    }
    return out.str();
}

std::string seeds_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "algorithm,seed,welfare,evaluation,status,detail\n";
    for (const auto& r : report.seeds) {
        out << csv_field(r.algorithm) << ',' << r.seed << ',' << format_real(r.value) << ','
            << (r.exact ? "exact" : "monte_carlo") << ',' << (r.ok ? "ok" : "failed") << ',' << csv_field(r.detail)
            << '\n';
    }
    return out.str();
}

std::string summary_table(const ExperimentReport& report) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-16s %12s %12s %6s %6s %6s  %s\n", "algorithm", "mean", "std", "ok", "failed",
                  "best", "evaluation");
    out << report.name << '\n' << line;
    for (const auto& s : report.summary) {
        std::snprintf(line, sizeof line, "%-16s %12.6f %12.6f %6zu %6zu %6zu  %s\n", s.algorithm.c_str(), s.mean, s.std,
                      s.n_ok, s.n_failed, s.best_count, s.all_exact ? "exact" : "monte_carlo");
        out << line;
    }
    return out.str();
}

nlohmann::json report_to_json(const ExperimentReport& report) {
    nlohmann::json j;
    j["name"] = report.name;
    j["summary"] = nlohmann::json::array();
    for (const auto& s : report.summary) {
        j["summary"].push_back({{"algorithm", s.algorithm},
                                {"mean", s.mean},
                                {"std", s.std},
                                {"n_ok", s.n_ok},
                                {"n_failed", s.n_failed},
                                {"best_count", s.best_count},
                                {"evaluation", s.all_exact ? "exact" : "monte_carlo"}});
    }
    j["seeds"] = nlohmann::json::array();
    for (const auto& r : report.seeds) {
        j["seeds"].push_back({{"algorithm", r.algorithm},
                              {"seed", r.seed},
                              {"welfare", r.value},
                              {"evaluation", r.exact ? "exact" : "monte_carlo"},
                              {"status", r.ok ? "ok" : "failed"},
                              {"detail", r.detail}});
    }
    return j;
}

AblationReport run_ablation(const ExperimentConfig& cfg, const std::vector<double>& alphas) {
    if (alphas.empty()) throw ConfigError("ablation needs at least one alpha");
    std::vector<AlgorithmSpec> ravi;
    std::vector<AlgorithmSpec> others;
    for (const auto& a : cfg.algorithms) (a.kind == "ravi" ? ravi : others).push_back(a);
    if (ravi.empty()) {
        AlgorithmSpec spec;
        spec.kind = spec.label = "ravi";
        ravi.push_back(spec);
    }

    AblationReport report;
    if (!others.empty()) {
        ExperimentConfig base = cfg;
        base.algorithms = others;
        report.runs.push_back(run_experiment(base));
        for (const auto& a : others) {
            if (a.kind == "linear") {
                report.linear_mean = report.runs.back().find(a.label).mean;
                break;
            }
        }
    }
    for (double alpha : alphas) {
        ExperimentConfig run = cfg;
        AlgorithmSpec spec = ravi.front();
        spec.alpha = alpha;
        run.algorithms = {spec};
        run.name = cfg.name + " alpha=" + format_real(alpha);
        report.runs.push_back(run_experiment(run));
        const auto& s = report.runs.back().summary.front();
        report.rows.push_back({alpha, s.mean, s.std});
    }
    return report;
}

std::string ablation_csv(const AblationReport& report) {
    std::ostringstream out;
    out << "alpha,mean,std\n";
    for (const auto& r : report.rows) out << format_real(r.alpha) << ',' << format_real(r.mean) << ',' << format_real(r.std) << '\n';
    return out.str();
}

nlohmann::json ablation_to_json(const AblationReport& report) {
    nlohmann::json j;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : report.rows) j["rows"].push_back({{"alpha", r.alpha}, {"mean", r.mean}, {"std", r.std}});
    j["linear_mean"] = report.linear_mean ? nlohmann::json(*report.linear_mean) : nlohmann::json(nullptr);
    return j;
}

}  // namespace esr
