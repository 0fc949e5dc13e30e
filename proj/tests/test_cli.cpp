#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sardonics/model.hpp"

namespace fs = std::filesystem;
using namespace sardonics;

namespace {

const std::string kBinary = CLI_BINARY_PATH;

int run_cli(const std::string& args) {
    const std::string cmd = kBinary + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name)
        : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("generate writes a loadable model and echoes the config") {
    TempDir dir("cli_generate");
    const fs::path cfg = dir.path / "gen.cfg";
    write_file(cfg,
               "model.kind = torus2d\n"
               "model.side = 4\n"
               "model.coupling = random\n"
               "model.field = const:0\n"
               "model.beta = 1.0\n"
               "model.seed = 7\n");
    REQUIRE(run_cli("generate --config " + cfg.string() + " --out " +
                    (dir.path / "out").string()) == 0);
    const IsingModel model = load_model_file((dir.path / "out/model.txt").string());
    CHECK(model.num_spins() == 16);
    CHECK(model.edges().size() == 32);
    CHECK(slurp(dir.path / "out/config.txt") == slurp(cfg));
}

TEST_CASE("run emits traces and summaries for each seed") {
    TempDir dir("cli_run");
    const fs::path cfg = dir.path / "run.cfg";
    write_file(cfg,
               "model.kind = torus2d\n"
               "model.side = 4\n"
               "model.coupling = random\n"
               "model.field = random\n"
               "model.seed = 3\n"
               "sampler = sardonics\n"
               "params.kl = 1\n"
               "params.ku = 6\n"
               "params.gammaL = 0.95\n"
               "params.gammaH = 1.1\n"
               "params.pLL = 0.7\n"
               "params.pHL = 0.2\n"
               "params.pLH = 0.1\n");
    REQUIRE(run_cli("run --config " + cfg.string() + " --steps 600 --max-lag 50" +
                    " --seed 1 --seed 2 --out " + (dir.path / "out").string()) == 0);
    for (int seed : {1, 2}) {
        const std::string trace =
            slurp(dir.path / ("out/trace_seed" + std::to_string(seed) + ".csv"));
        CHECK(trace.rfind("step,energy,accepted,walk_length\n", 0) == 0);
        const std::string summary =
            slurp(dir.path / ("out/summary_seed" + std::to_string(seed) + ".txt"));
        CHECK(summary.find("acceptance_rate") != std::string::npos);
        CHECK(summary.find("acf_area") != std::string::npos);
    }
}

TEST_CASE("reruns with the same seed are byte identical") {
    TempDir dir("cli_deterministic");
    const fs::path cfg = dir.path / "run.cfg";
    write_file(cfg,
               "model.kind = torus2d\n"
               "model.side = 4\n"
               "model.coupling = random\n"
               "model.seed = 5\n"
               "sampler = sardonics\n"
               "params.kl = 1\n"
               "params.ku = 5\n");
    const std::string common = "run --config " + cfg.string() +
                               " --steps 500 --seed 9 --out ";
    REQUIRE(run_cli(common + (dir.path / "a").string()) == 0);
    REQUIRE(run_cli(common + (dir.path / "b").string()) == 0);
    CHECK(slurp(dir.path / "a/trace_seed9.csv") ==
          slurp(dir.path / "b/trace_seed9.csv"));
}

TEST_CASE("run supports the baseline samplers") {
    TempDir dir("cli_baselines");
    const fs::path cfg = dir.path / "run.cfg";
    for (const std::string sampler : {"gibbs", "swendsen-wang"}) {
        write_file(cfg,
                   "model.kind = torus2d\n"
                   "model.side = 3\n"
                   "model.coupling = random\n"
                   "model.seed = 2\n"
                   "sampler = " + sampler + "\n");
        CHECK(run_cli("run --config " + cfg.string() + " --steps 200 --seed 4" +
                      " --out " + (dir.path / sampler).string()) == 0);
    }
    // block-gibbs needs a bipartite model
    write_file(cfg,
               "model.kind = rbm\n"
               "model.visible = 6\n"
               "model.hidden = 4\n"
               "model.scale = 0.3\n"
               "model.seed = 2\n"
               "sampler = block-gibbs\n");
    CHECK(run_cli("run --config " + cfg.string() + " --steps 200 --seed 4 --out " +
                  (dir.path / "bg").string()) == 0);
}

TEST_CASE("adapt produces a policy usable by run") {
    TempDir dir("cli_adapt");
    const fs::path cfg = dir.path / "adapt.cfg";
    write_file(cfg,
               "model.kind = torus2d\n"
               "model.side = 4\n"
               "model.coupling = random\n"
               "model.field = random\n"
               "model.seed = 6\n"
               "adapt.iterations = 5\n"
               "adapt.n_init = 3\n"
               "adapt.chain_steps = 200\n"
               "adapt.max_lag = 30\n");
    REQUIRE(run_cli("adapt --config " + cfg.string() + " --seed 13 --out " +
                    (dir.path / "out").string()) == 0);
    CHECK(fs::exists(dir.path / "out/policy.txt"));
    const std::string log = slurp(dir.path / "out/adapt_log.csv");
    CHECK(log.find("best_so_far") != std::string::npos);
    // header plus one line per iteration
    CHECK(std::count(log.begin(), log.end(), '\n') == 6);
    const std::string traces = slurp(dir.path / "out/adapt_traces.csv");
    CHECK(std::count(traces.begin(), traces.end(), '\n') == 1 + 5 * 200);

    const fs::path run_cfg = dir.path / "run.cfg";
    write_file(run_cfg,
               "model.kind = torus2d\n"
               "model.side = 4\n"
               "model.coupling = random\n"
               "model.field = random\n"
               "model.seed = 6\n"
               "sampler = sardonics\n"
               "policy = " + (dir.path / "out/policy.txt").string() + "\n");
    CHECK(run_cli("run --config " + run_cfg.string() + " --steps 300 --seed 2" +
                  " --out " + (dir.path / "run_out").string()) == 0);
}

TEST_CASE("compare writes an ACF table covering every sampler") {
    TempDir dir("cli_compare");
    const fs::path cfg = dir.path / "cmp.cfg";
    write_file(cfg,
               "model.kind = torus2d\n"
               "model.side = 3\n"
               "model.coupling = random\n"
               "model.seed = 4\n"
               "samplers = sardonics, gibbs\n"
               "params.kl = 1\n"
               "params.ku = 4\n");
    REQUIRE(run_cli("compare --config " + cfg.string() +
                    " --steps 500 --max-lag 20 --seed 1 --seed 2 --out " +
                    (dir.path / "out").string()) == 0);
    const std::string table = slurp(dir.path / "out/acf_table.csv");
    CHECK(table.rfind("lag,sardonics,gibbs\n", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 22);
    const std::string areas = slurp(dir.path / "out/acf_areas.csv");
    CHECK(std::count(areas.begin(), areas.end(), '\n') == 1 + 2 * 2);
    CHECK(fs::exists(dir.path / "out/trace_gibbs_seed2.csv"));
}

TEST_CASE("compare rejects a single sampler") {
    TempDir dir("cli_compare_bad");
    const fs::path cfg = dir.path / "cmp.cfg";
    write_file(cfg,
               "model.kind = torus2d\n"
               "model.side = 3\n"
               "model.seed = 1\n"
               "samplers = gibbs\n");
    CHECK(run_cli("compare --config " + cfg.string() + " --steps 100 --out " +
                  (dir.path / "out").string()) != 0);
}

TEST_CASE("verify quick succeeds") {
    CHECK(run_cli("verify quick") == 0);
}

TEST_CASE("bad inputs fail with a nonzero exit") {
    TempDir dir("cli_bad");
    const fs::path cfg = dir.path / "bad.cfg";
    write_file(cfg, "model.kind = hypercube9000\n");
    CHECK(run_cli("run --config " + cfg.string() + " --steps 10 --out " +
                  (dir.path / "out").string()) != 0);
    write_file(cfg, "model.kind torus2d\n");
    CHECK(run_cli("run --config " + cfg.string() + " --out " +
                  (dir.path / "out").string()) != 0);
    CHECK(run_cli("run --config no_such_file.cfg") != 0);
}
