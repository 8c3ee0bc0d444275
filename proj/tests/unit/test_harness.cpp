#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "esr/rollout.hpp"

#include "esr/acceptance.hpp"
#include "esr/environments.hpp"
#include "esr/experiment.hpp"
#include "esr/momdp_io.hpp"
#include "esr/oracle.hpp"

using namespace esr;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ExperimentConfig small_taxi(std::size_t seeds = 3) {
    ExperimentConfig cfg = preset_config("desk-taxi");
    cfg.environment = {{"kind", "taxi"}, {"width", 3}, {"height", 3}, {"n_queues", 2}, {"seed", 0}};
    cfg.horizon = 8;
    cfg.n_seeds = seeds;
    cfg.q_learning.episodes = 300;
    cfg.q_learning.horizon = 8;
    cfg.threads = 1;
    return cfg;
}

fs::path tmp_dir() {
    const char* env = std::getenv("ESR_TEST_TMP");
    fs::path p = fs::path(env ? env : fs::temp_directory_path().string()) / "harness_tmp";
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Cli {
    int code;
    std::string out;
};

Cli run_cli(const std::string& args) {
    const char* bin = std::getenv("ESRPLAN_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "ESRPLAN_BIN not set");
    const fs::path out = tmp_dir() / "cli_stdout.txt";
    const std::string cmd = std::string(bin) + " " + args + " > " + out.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out)};
}

}  // namespace

TEST_CASE("identical config gives byte-identical CSV") {
    const auto cfg = small_taxi();
    const auto a = run_experiment(cfg), b = run_experiment(cfg);
    CHECK(summary_csv(a) == summary_csv(b));
    CHECK(seeds_csv(a) == seeds_csv(b));
    auto par = cfg;
    par.threads = 4;
    const auto c = run_experiment(par);
    CHECK(summary_csv(a) == summary_csv(c));
    CHECK(seeds_csv(a) == seeds_csv(c));
}

TEST_CASE("summary means match per-seed values") {
    const auto rep = run_experiment(small_taxi(4));
    for (const auto& s : rep.summary) {
        std::vector<double> xs;
        for (const auto& r : rep.seeds)
            if (r.algorithm == s.algorithm && r.ok) xs.push_back(r.value);
        REQUIRE(xs.size() == s.n_ok);
        CHECK(std::abs(mean_of(xs) - s.mean) <= 1e-12);
        CHECK(std::abs(sample_std(xs) - s.std) <= 1e-12);
    }
}

TEST_CASE("one seed gives zero std") {
    const auto rep = run_experiment(small_taxi(1));
    for (const auto& s : rep.summary) CHECK(s.std == 0.0);
}

TEST_CASE("figure 1 preset ordering") {
    const auto rep = run_experiment(preset_config("figure1"));
    CHECK(rep.find("ravi").mean == 1.0);
    CHECK(rep.find("linear").mean == 0.0);
    for (const auto& s : rep.summary) CHECK(s.mean <= 1.0);
    for (const auto& s : rep.summary) CHECK(s.all_exact);
}

TEST_CASE("per-seed failures are recorded and the run continues") {
    auto cfg = small_taxi(2);
    AlgorithmSpec broken;
    broken.kind = "ravi";
    broken.label = "broken";
    broken.alpha = -1.0;
    cfg.algorithms.push_back(broken);
    const auto rep = run_experiment(cfg);
    CHECK(rep.find("broken").n_failed == 2);
    CHECK(rep.find("ravi").n_ok == 2);
}

TEST_CASE("ablation") {
    auto cfg = small_taxi(2);
    const auto one = run_ablation(cfg, {1.0});
    REQUIRE(one.rows.size() == 1);
    CHECK(one.rows[0].mean == run_experiment(cfg).find("ravi").mean);
    REQUIRE(one.linear_mean);

    const auto three = run_ablation(cfg, {0.4, 0.8, 1.2});
    CHECK(three.rows.size() == 3);
    CHECK(ablation_csv(three).rfind("alpha,mean,std\n", 0) == 0);

    auto tiny = preset_config("figure1");
    tiny.train_welfare = tiny.eval_welfare = {{"kind", "spf"}, {"lambda", 1.0}};
    tiny.algorithms = {tiny.algorithms.front()};
    const auto fine = run_ablation(tiny, {1.0 / 64});
    const double v_star = exact_value(make_figure1(), WelfareFn::spf(2, 1.0), 0, std::vector<double>{0, 0}, 3);
    CHECK(std::abs(fine.rows[0].mean - v_star) <= 1e-6);
}

TEST_CASE("config validation") {
    json j = experiment_config_to_json(small_taxi());
    CHECK_NOTHROW(experiment_config_from_json(j));
    CHECK(experiment_config_to_json(experiment_config_from_json(j)) == j);
    json bad = j;
    bad["n_seeds"] = 0;
    CHECK_THROWS_AS(experiment_config_from_json(bad), ConfigError);
    bad = j;
    bad["algorithms"] = json::array({{{"kind", "dqn"}}});
    CHECK_THROWS_AS(experiment_config_from_json(bad), ConfigError);
    CHECK_THROWS_AS(preset_config("nope"), ConfigError);
    for (const auto& name : preset_names()) CHECK_NOTHROW(preset_config(name));
}

TEST_CASE("verify suites") {
    const auto ok = run_suite("figure1");
    REQUIRE(ok.size() == 1);
    CHECK(ok[0].passed);
    const auto bad = run_suite("corrupt");
    REQUIRE(bad.size() == 1);
    CHECK(!bad[0].passed);
    CHECK(format_result(bad[0]).find("figure1") != std::string::npos);
    CHECK(results_to_json(bad)[0]["passed"] == false);
}

TEST_CASE("cli plan, validation and usage errors") {
    const fs::path dir = tmp_dir();
    const std::string model = (dir / "figure1.json").string();
    REQUIRE(run_cli("generate --env figure1 --out " + model).code == 0);

    const auto plan = run_cli("plan --model " + model + " --welfare nash --alpha 1 --tables " + (dir / "t.bin").string());
    CHECK(plan.code == 0);
    CHECK(plan.out == "1\n");

    const auto rollout = run_cli("rollout --model " + model + " --tables " + (dir / "t.bin").string() +
                                 " --welfare nash --episodes 5 --format json");
    CHECK(rollout.code == 0);
    CHECK(json::parse(rollout.out)["mean"] == 1.0);

    const auto autoa = run_cli("plan --model " + model +
                               " --welfare '{\"kind\":\"spf\",\"lambda\":1}' --alpha auto --epsilon 0.6 --format json");
    CHECK(autoa.code == 0);
    CHECK(json::parse(autoa.out)["alpha"].get<double>() == doctest::Approx(0.05));

    json broken = momdp_to_json(make_figure1());
    broken["transitions"][0]["p"] = 0.5;
    std::ofstream(dir / "broken.json") << broken.dump();
    const auto invalid = run_cli("plan --model " + (dir / "broken.json").string());
    CHECK(invalid.code == 2);
    CHECK(invalid.out.find("(s=") != std::string::npos);

    CHECK(run_cli("plan --bogus").code == 1);
    CHECK(run_cli("").code == 1);
    CHECK(run_cli("plan").code == 1);
    CHECK(run_cli("experiment --preset nope").code == 2);
}

TEST_CASE("cli experiment output is deterministic") {
    const fs::path dir = tmp_dir();
    std::ofstream(dir / "cfg.json") << experiment_config_to_json(small_taxi(2)).dump(2);
    const std::string base = "experiment --config " + (dir / "cfg.json").string() + " --format csv --threads 2 --out ";
    REQUIRE(run_cli(base + (dir / "a.csv").string()).code == 0);
    REQUIRE(run_cli(base + (dir / "b.csv").string()).code == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(slurp(dir / "a.csv.seeds.csv") == slurp(dir / "b.csv.seeds.csv"));
    const auto reseeded = run_cli("experiment --config " + (dir / "cfg.json").string() + " --format csv --seed 99");
    CHECK(reseeded.code == 0);
}

TEST_CASE("cli verify, describe and raee") {
    const auto v = run_cli("verify --suite figure1");
    CHECK(v.code == 0);
    CHECK(v.out.rfind("PASS", 0) == 0);
    const auto c = run_cli("verify --suite corrupt --format json");
    CHECK(c.code == 0);
    CHECK(json::parse(c.out)[0]["passed"] == false);

    CHECK(run_cli("describe --env scavenger").code == 0);
    const auto printed = run_cli("experiment --preset desk-taxi --print-config");
    CHECK(printed.code == 0);
    CHECK(experiment_config_from_json(json::parse(printed.out)).n_seeds == 20);

    const auto ok = run_cli("raee --env figure1 --welfare nash --m-known 30 --seed 1");
    CHECK(ok.code == 0);
    CHECK(ok.out.find("\"phase\":\"halt\"") != std::string::npos);
    const auto timeout = run_cli("raee --env figure1 --welfare nash --m-known 30 --vstar 5 --budget 300");
    CHECK(timeout.code == 3);
}
