// Experiment driver: generate models, run and compare samplers, adapt
// kernel parameters, and verify correctness properties.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "sardonics/baselines.hpp"
#include "sardonics/bayesopt.hpp"
#include "sardonics/diagnostics.hpp"
#include "sardonics/model.hpp"
#include "sardonics/saw.hpp"
#include "sardonics/weight_tree.hpp"

namespace fs = std::filesystem;
using namespace sardonics;

namespace {

// ---------------------------------------------------------------------------
// configuration: flat "key = value" text, CLI flags override keys

struct Config {
    std::map<std::string, std::string> values;
    std::string raw_text;

    bool has(const std::string& key) const { return values.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback) const {
        auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }
    std::string require(const std::string& key) const {
        auto it = values.find(key);
        if (it == values.end())
            throw std::runtime_error("missing config key: " + key);
        return it->second;
    }
    double get_num(const std::string& key, double fallback) const {
        return has(key) ? std::stod(require(key)) : fallback;
    }
    long get_int(const std::string& key, long fallback) const {
        return has(key) ? std::stol(require(key)) : fallback;
    }
    void set(const std::string& key, const std::string& value) {
        values[key] = value;
    }
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

Config load_config(const std::string& path) {
    Config cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream raw;
    std::string line;
    while (std::getline(in, line)) {
        raw << line << '\n';
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("expected 'key = value': " + line);
        cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    cfg.raw_text = raw.str();
    return cfg;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// ---------------------------------------------------------------------------
// model construction from config

ValueSpec parse_value_spec(const std::string& s) {
    if (s == "random") return ValueSpec::random_sign();
    if (s.rfind("const:", 0) == 0) return ValueSpec::constant(std::stod(s.substr(6)));
    throw std::runtime_error("bad value spec (want const:<c> or random): " + s);
}

IsingModel build_model(const Config& cfg) {
    const std::string kind = cfg.require("model.kind");
    const double beta = cfg.get_num("model.beta", 1.0);
    const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("model.seed", 1));
    const ValueSpec coupling = parse_value_spec(cfg.get("model.coupling", "const:1"));
    const ValueSpec field = parse_value_spec(cfg.get("model.field", "const:0"));
    if (kind == "torus2d")
        return make_torus_2d(static_cast<int>(cfg.get_int("model.side", 16)), coupling,
                             field, beta, seed);
    if (kind == "cube3d")
        return make_cube_3d(static_cast<int>(cfg.get_int("model.side", 9)), coupling,
                            field, beta, seed);
    if (kind == "chimera")
        return make_chimera(static_cast<int>(cfg.get_int("model.rows", 4)),
                            static_cast<int>(cfg.get_int("model.cols", 4)), coupling,
                            field, beta, seed);
    if (kind == "rbm")
        return make_bipartite_rbm(static_cast<int>(cfg.get_int("model.visible", 16)),
                                  static_cast<int>(cfg.get_int("model.hidden", 8)),
                                  cfg.get_num("model.scale", 0.1), beta, seed);
    if (kind == "rbm-file")
        return make_bipartite_rbm_from_file(cfg.require("model.path"), beta);
    if (kind == "file") return load_model_file(cfg.require("model.path"));
    throw std::runtime_error("unknown model kind: " + kind);
}

KernelParams params_from_config(const Config& cfg, int num_spins) {
    KernelParams p;
    p.k_lower = static_cast<int>(cfg.get_int("params.kl", 1));
    p.k_upper = static_cast<int>(cfg.get_int("params.ku", std::min(8L, (long)num_spins)));
    p.gamma_low = cfg.get_num("params.gammaL", 1.0);
    p.gamma_high = cfg.get_num("params.gammaH", p.gamma_low);
    p.p_ll = cfg.get_num("params.pLL", 1.0);
    p.p_hl = cfg.get_num("params.pHL", 0.0);
    p.p_lh = cfg.get_num("params.pLH", 0.0);
    p.n_segments = static_cast<int>(cfg.get_int("params.N", 1));
    p.validate(num_spins);
    return p;
}

// ---------------------------------------------------------------------------
// trace running

struct TraceRow {
    long step;
    double energy;
    bool accepted;
    int walk_length;
};

struct RunResult {
    std::vector<double> energies;  // every step
    std::vector<TraceRow> trace;   // strided
    double acceptance_rate = 0.0;
    double wall_seconds = 0.0;
};

// One comparison step is one kernel application: a single-site update for
// Gibbs, a layer-pair resample for block Gibbs, one cluster update for
// Swendsen-Wang and one walk move for SARDONICS.
RunResult run_sampler(const IsingModel& model, const std::string& sampler,
                      const Config& cfg, long steps, long stride,
                      std::uint64_t chain_seed) {
    RunResult out;
    out.energies.reserve(steps);
    std::mt19937_64 rng(chain_seed);
    SpinState state = random_state(model.num_spins(), rng);
    const auto start = std::chrono::steady_clock::now();
    long accepted = 0;

    auto record = [&](long step, double e, bool acc, int wl) {
        out.energies.push_back(e);
        accepted += acc;
        if (step % stride == 0) out.trace.push_back({step, e, acc, wl});
    };

    if (sampler == "sardonics") {
        ParamPolicy policy;
        if (cfg.has("policy"))
            policy = load_policy(cfg.require("policy"));
        else
            policy = ParamPolicy::fixed(params_from_config(cfg, model.num_spins()));
        // cold random starts freeze the walk kernel; thermalize first
        const long warmup = cfg.get_int("warmup", 100);
        for (long s = 0; s < warmup; ++s) gibbs_sweep(model, state, rng);
        run_chain(model, state, policy, steps, rng,
                  [&](long s, double e, bool a, int w) { record(s, e, a, w); });
    } else if (sampler == "sardonics-adaptive") {
        // adaptation occupies the burn-in prefix, sampling phase follows
        const double burn_in = cfg.get_num("burn_in", 0.2);
        AdaptOptions opts;
        opts.iterations = static_cast<int>(cfg.get_int("adapt.iterations", 40));
        opts.n_init = static_cast<int>(cfg.get_int("adapt.n_init", 15));
        opts.max_lag = static_cast<int>(cfg.get_int("adapt.max_lag", 100));
        opts.acq_budget = static_cast<int>(cfg.get_int("adapt.acq_budget", 800));
        opts.warmup_sweeps = cfg.get_int("adapt.warmup", 100);
        opts.seed = chain_seed;
        const long adapt_budget = std::lround(burn_in * steps);
        opts.chain_steps = std::max<long>(opts.max_lag + 1,
                                          adapt_budget / opts.iterations);
        const ParamSpace space = ParamSpace::defaults(model.num_spins());
        long step = 0;
        opts.sink = [&](int, long, double e, bool a, int w) {
            record(step++, e, a, w);
        };
        AdaptResult adapted = adapt(model, space, opts);
        const double mean = adapted.rewards.mean();
        GpSurrogate surrogate(adapted.inputs,
                              (adapted.rewards.array() - mean).matrix(),
                              adapted.hypers);
        ParamPolicy policy = boltzmann_policy(
            surrogate, space, static_cast<int>(cfg.get_int("policy.candidates", 20)),
            rng);
        const long remaining = steps - step;
        if (remaining > 0)
            run_chain(model, adapted.final_state, policy, remaining, rng,
                      [&](long s, double e, bool a, int w) {
                          record(step + s, e, a, w);
                      });
    } else if (sampler == "gibbs") {
        // one step resamples a single site
        const bool random_scan = cfg.get("gibbs.order", "systematic") == "random";
        const int m = model.num_spins();
        for (long s = 0; s < steps; ++s) {
            int i = static_cast<int>(s % m);
            if (random_scan) {
                i = static_cast<int>(uniform01(rng) * m);
                if (i >= m) i = m - 1;
            }
            gibbs_site_update(model, state, i, rng);
            record(s, energy(model, state), true, 1);
        }
    } else if (sampler == "block-gibbs") {
        for (long s = 0; s < steps; ++s) {
            block_gibbs_sweep(model, state, rng);
            record(s, energy(model, state), true, model.num_spins());
        }
    } else if (sampler == "swendsen-wang") {
        for (long s = 0; s < steps; ++s) {
            SpinState before = state;
            swendsen_wang_step(model, state, rng);
            record(s, energy(model, state), true, hamming_distance(before, state));
        }
    } else {
        throw std::runtime_error("unknown sampler: " + sampler);
    }

    out.acceptance_rate = static_cast<double>(accepted) / steps;
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return out;
}

void write_trace(const fs::path& path, const std::vector<TraceRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << std::setprecision(17) << "step,energy,accepted,walk_length\n";
    for (const auto& r : rows)
        out << r.step << ',' << r.energy << ',' << (r.accepted ? 1 : 0) << ','
            << r.walk_length << '\n';
}

void echo_config(const Config& cfg, const fs::path& dir) {
    std::ofstream out(dir / "config.txt");
    if (cfg.raw_text.empty()) {
        for (const auto& [k, v] : cfg.values) out << k << " = " << v << '\n';
    } else {
        out << cfg.raw_text;
    }
}

std::vector<std::uint64_t> seeds_from(const Config& cfg,
                                      const std::vector<long>& flag_seeds) {
    if (!flag_seeds.empty())
        return {flag_seeds.begin(), flag_seeds.end()};
    std::vector<std::uint64_t> seeds;
    for (const auto& s : split_list(cfg.get("seeds", "1")))
        seeds.push_back(std::stoull(s));
    return seeds;
}

// ---------------------------------------------------------------------------
// commands

int cmd_generate(const Config& cfg, const std::string& out_dir) {
    const IsingModel model = build_model(cfg);
    fs::create_directories(out_dir);
    const fs::path path = fs::path(out_dir) / cfg.get("model.out", "model.txt");
    save_model(model, path.string());
    echo_config(cfg, out_dir);
    std::cout << "wrote " << path.string() << " (" << model.num_spins() << " spins, "
              << model.edges().size() << " edges)\n";
    return 0;
}

int cmd_run(const Config& cfg, const std::string& out_dir,
            const std::vector<long>& flag_seeds) {
    const IsingModel model = build_model(cfg);
    const std::string sampler = cfg.get("sampler", "sardonics");
    const long steps = cfg.get_int("steps", 10000);
    const long stride = std::max(1L, cfg.get_int("stride", 1));
    const int max_lag = static_cast<int>(cfg.get_int("max_lag", 100));
    const double burn_in = cfg.get_num("burn_in", 0.2);
    fs::create_directories(out_dir);
    echo_config(cfg, out_dir);

    for (std::uint64_t seed : seeds_from(cfg, flag_seeds)) {
        const RunResult r = run_sampler(model, sampler, cfg, steps, stride, seed);
        write_trace(fs::path(out_dir) / ("trace_seed" + std::to_string(seed) + ".csv"),
                    r.trace);
        const long burn = std::lround(burn_in * steps);
        std::span<const double> tail(r.energies.data() + burn,
                                     r.energies.size() - burn);
        double mean_energy = 0.0;
        for (double e : tail) mean_energy += e;
        mean_energy /= static_cast<double>(tail.size());
        std::ofstream summary(fs::path(out_dir) /
                              ("summary_seed" + std::to_string(seed) + ".txt"));
        summary << std::setprecision(17);
        summary << "sampler = " << sampler << '\n'
                << "steps = " << steps << '\n'
                << "acceptance_rate = " << r.acceptance_rate << '\n'
                << "mean_energy = " << mean_energy << '\n'
                << "acf_area = " << acf_area(tail, max_lag) << '\n'
                << "wall_time_s = " << r.wall_seconds << '\n';
        std::cout << "seed " << seed << ": acceptance " << r.acceptance_rate
                  << ", mean energy " << mean_energy << '\n';
    }
    return 0;
}

int cmd_adapt(const Config& cfg, const std::string& out_dir,
              const std::vector<long>& flag_seeds) {
    const IsingModel model = build_model(cfg);
    fs::create_directories(out_dir);
    echo_config(cfg, out_dir);
    const auto seeds = seeds_from(cfg, flag_seeds);

    AdaptOptions opts;
    opts.iterations = static_cast<int>(cfg.get_int("adapt.iterations", 40));
    opts.n_init = static_cast<int>(cfg.get_int("adapt.n_init", 15));
    opts.chain_steps = cfg.get_int("adapt.chain_steps", 1000);
    opts.max_lag = static_cast<int>(cfg.get_int("adapt.max_lag", 100));
    opts.acq_budget = static_cast<int>(cfg.get_int("adapt.acq_budget", 800));
    opts.warmup_sweeps = cfg.get_int("adapt.warmup", 100);
    opts.seed = seeds.front();

    std::ofstream traces(fs::path(out_dir) / "adapt_traces.csv");
    traces << std::setprecision(17) << "iteration,step,energy\n";
    opts.sink = [&](int it, long s, double e, bool, int) {
        traces << it << ',' << s << ',' << e << '\n';
    };
    const ParamSpace space = ParamSpace::defaults(model.num_spins());
    const AdaptResult result = adapt(model, space, opts);

    std::ofstream log(fs::path(out_dir) / "adapt_log.csv");
    log << std::setprecision(17)
        << "iteration,kl,ku,gammaL,gammaH,pLL,pHL,pLH,N,reward,best_so_far,"
           "psi0,psi1,psi2,psi3,psi4,psi5,psi6,amplitude,noise_std\n";
    for (std::size_t i = 0; i < result.log.size(); ++i) {
        const auto& e = result.log[i];
        const auto& p = e.params;
        log << i << ',' << p.k_lower << ',' << p.k_upper << ',' << p.gamma_low << ','
            << p.gamma_high << ',' << p.p_ll << ',' << p.p_hl << ',' << p.p_lh << ','
            << p.n_segments << ',' << e.reward << ',' << e.best_so_far;
        for (int d = 0; d < ParamSpace::kDims; ++d)
            log << ',' << e.hypers.length_scales[d];
        log << ',' << e.hypers.amplitude << ',' << e.hypers.noise_std << '\n';
    }

    std::mt19937_64 rng(seeds.front() ^ 0x9e3779b97f4a7c15ULL);
    const double mean = result.rewards.mean();
    GpSurrogate surrogate(result.inputs, (result.rewards.array() - mean).matrix(),
                          result.hypers);
    const ParamPolicy policy = boltzmann_policy(
        surrogate, space, static_cast<int>(cfg.get_int("policy.candidates", 20)), rng);
    save_policy(policy, (fs::path(out_dir) / "policy.txt").string());

    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < result.log.size(); ++i)
        if (result.log[i].reward > best) best = result.log[i].reward, best_i = i;
    const auto& bp = result.log[best_i].params;
    std::cout << "best reward " << best << " at kl=" << bp.k_lower
              << " ku=" << bp.k_upper << " gammaL=" << bp.gamma_low
              << " gammaH=" << bp.gamma_high << " N=" << bp.n_segments << '\n';
    return 0;
}

int cmd_compare(const Config& cfg, const std::string& out_dir,
                const std::vector<long>& flag_seeds) {
    const IsingModel model = build_model(cfg);
    const auto samplers = split_list(cfg.require("samplers"));
    if (samplers.size() < 2)
        throw std::runtime_error("compare needs at least two samplers");
    const long steps = cfg.get_int("steps", 10000);
    const long stride = std::max(1L, cfg.get_int("stride", 1));
    const int max_lag = static_cast<int>(cfg.get_int("max_lag", 100));
    const double burn_in = cfg.get_num("burn_in", 0.2);
    const auto seeds = seeds_from(cfg, flag_seeds);
    fs::create_directories(out_dir);
    echo_config(cfg, out_dir);

    std::vector<std::vector<double>> mean_acf(samplers.size(),
                                              std::vector<double>(max_lag + 1, 0.0));
    std::ofstream areas(fs::path(out_dir) / "acf_areas.csv");
    areas << std::setprecision(17) << "sampler,seed,acf_area\n";
    for (std::size_t si = 0; si < samplers.size(); ++si) {
        for (std::uint64_t seed : seeds) {
            const RunResult r =
                run_sampler(model, samplers[si], cfg, steps, stride, seed);
            write_trace(fs::path(out_dir) / ("trace_" + samplers[si] + "_seed" +
                                             std::to_string(seed) + ".csv"),
                        r.trace);
            const long burn = std::lround(burn_in * steps);
            std::span<const double> tail(r.energies.data() + burn,
                                         r.energies.size() - burn);
            const AcfCurve curve = acf(tail, max_lag);
            for (int t = 0; t <= max_lag; ++t) mean_acf[si][t] += curve.rho[t];
            double area = 0.0;
            for (int t = 1; t <= max_lag; ++t) area += curve.rho[t];
            areas << samplers[si] << ',' << seed << ',' << area << '\n';
        }
        for (double& v : mean_acf[si]) v /= static_cast<double>(seeds.size());
    }

    std::ofstream table(fs::path(out_dir) / "acf_table.csv");
    table << std::setprecision(17) << "lag";
    for (const auto& s : samplers) table << ',' << s;
    table << '\n';
    for (int t = 0; t <= max_lag; ++t) {
        table << t;
        for (std::size_t si = 0; si < samplers.size(); ++si)
            table << ',' << mean_acf[si][t];
        table << '\n';
    }
    std::cout << "wrote " << (fs::path(out_dir) / "acf_table.csv").string() << '\n';
    return 0;
}

// correctness properties, printed one per line with the measured residual
int cmd_verify(const std::string& level) {
    int failures = 0;
    auto report = [&](const std::string& name, bool ok, double residual,
                      double threshold) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << "  residual=" << residual
                  << "  threshold=" << threshold << '\n';
        if (!ok) ++failures;
    };

    // pathwise + marginal detailed balance on a random frustrated M=6 model
    {
        const IsingModel model(6,
                               {{0, 1, 1}, {1, 2, -1}, {2, 3, 1}, {3, 4, -1},
                                {4, 5, 1}, {5, 0, -1}, {0, 3, 1}, {1, 4, -1}},
                               {0.3, -0.2, 0.1, 0.0, -0.4, 0.25}, 1.0);
        const double path_res = max_pathwise_db_residual(model, 2, 0.5);
        report("pathwise-detailed-balance", path_res < 1e-10, path_res, 1e-10);

        const auto kernel = exact_sardonics_kernel(model, 2, 0.5);
        const auto pi = exact_distribution(model);
        double marg_res = 0.0;
        for (std::size_t x = 0; x < pi.size(); ++x)
            for (std::size_t y = 0; y < pi.size(); ++y)
                marg_res = std::max(
                    marg_res, std::abs(pi[x] * kernel[x][y] - pi[y] * kernel[y][x]));
        report("marginal-detailed-balance", marg_res < 1e-9, marg_res, 1e-9);
    }

    // effective vs marginal acceptance inequality, M=5, k=3
    {
        const IsingModel model(5,
                               {{0, 1, 1}, {1, 2, -1}, {2, 3, 1}, {3, 4, -1},
                                {4, 0, 1}, {0, 2, -1}},
                               {0.2, -0.1, 0.0, 0.3, -0.2}, 1.0);
        double worst = -1.0;
        for (std::uint32_t x = 0; x < 32; ++x) {
            const SpinState x0 = state_from_index(x, 5);
            for (const SpinState& x1 : hamming_shell(x0, 3)) {
                const AlphaPair a = effective_vs_marginal_alpha(model, x0, x1, 0.7);
                worst = std::max(worst, a.effective - a.marginal);
            }
        }
        report("effective-alpha-inequality", worst <= 1e-12, worst, 1e-12);
    }

    // weighted-sampling structure vs linear-scan shadow array
    {
        std::mt19937_64 rng(11);
        long mismatches = 0;
        for (int script = 0; script < 100; ++script) {
            const int n = 1 + static_cast<int>(uniform01(rng) * 40);
            std::vector<double> shadow(n);
            for (auto& w : shadow) w = uniform01(rng) * 3.0;
            WeightTree tree(shadow);
            for (int op = 0; op < 60; ++op) {
                if (uniform01(rng) < 0.4) {
                    const int i = static_cast<int>(uniform01(rng) * n);
                    const double w = uniform01(rng) < 0.2 ? 0.0 : uniform01(rng) * 3.0;
                    shadow[i] = w;
                    tree.update(i, w);
                    continue;
                }
                double total = 0.0;
                for (double w : shadow) total += w;
                if (total <= 0.0) continue;
                const double u = uniform01(rng);
                const double target = u * total;
                double acc = 0.0;
                std::size_t expect = 0;
                for (std::size_t i = 0; i < shadow.size(); ++i) {
                    acc += shadow[i];
                    if (target < acc) {
                        expect = i;
                        break;
                    }
                    expect = i;
                }
                mismatches += tree.sample(u) != expect;
            }
        }
        report("weight-tree-oracle", mismatches == 0,
               static_cast<double>(mismatches), 0.0);
    }

    if (level == "full") {
        // long-run stationarity against the exact distribution
        const IsingModel model(8,
                               {{0, 1, 1}, {1, 2, -1}, {2, 3, 1}, {3, 4, -1},
                                {4, 5, 1}, {5, 6, -1}, {6, 7, 1}, {7, 0, -1},
                                {0, 4, 1}, {2, 6, -1}},
                               {0.2, 0.0, -0.3, 0.1, 0.0, 0.25, -0.1, 0.0}, 1.0);
        const auto pi = exact_distribution(model);
        const long steps = 400000;
        {
            std::mt19937_64 rng(5);
            std::vector<double> counts(256, 0.0);
            KernelParams p;
            p.k_lower = 1;
            p.k_upper = 4;
            p.gamma_low = 0.9;
            p.gamma_high = 1.1;
            p.p_ll = 0.7;
            p.p_hl = 0.2;
            p.p_lh = 0.1;
            SardonicsKernel kernel(model);
            kernel.reset(random_state(8, rng));
            for (long s = 0; s < steps; ++s) {
                kernel.step(p, rng);
                counts[state_index(kernel.state())] += 1.0;
            }
            for (auto& c : counts) c /= steps;
            const double tv = tv_distance(counts, pi);
            report("stationarity-sardonics", tv < 0.02, tv, 0.02);
        }
        {
            std::mt19937_64 rng(6);
            std::vector<double> counts(256, 0.0);
            SpinState state = random_state(8, rng);
            for (long s = 0; s < steps; ++s) {
                gibbs_sweep(model, state, rng);
                counts[state_index(state)] += 1.0;
            }
            for (auto& c : counts) c /= steps;
            const double tv = tv_distance(counts, pi);
            report("stationarity-gibbs", tv < 0.02, tv, 0.02);
        }
        {
            std::mt19937_64 rng(7);
            std::vector<double> counts(256, 0.0);
            SpinState state = random_state(8, rng);
            for (long s = 0; s < steps; ++s) {
                swendsen_wang_step(model, state, rng);
                counts[state_index(state)] += 1.0;
            }
            for (auto& c : counts) c /= steps;
            const double tv = tv_distance(counts, pi);
            report("stationarity-swendsen-wang", tv < 0.02, tv, 0.02);
        }
    }

    std::cout << (failures == 0 ? "verify: all checks passed\n"
                                : "verify: FAILURES present\n");
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equilibrium Monte Carlo sampling of binary-valued systems"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", verify_level = "quick";
    std::vector<long> flag_seeds;
    long flag_steps = -1, flag_stride = -1, flag_max_lag = -1;
    double flag_burn_in = -1.0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config file");
        cmd->add_option("--seed", flag_seeds, "chain seed (repeatable)");
        cmd->add_option("--steps", flag_steps, "number of sampler steps");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--stride", flag_stride, "trace stride");
        cmd->add_option("--max-lag", flag_max_lag, "ACF maximum lag");
        cmd->add_option("--burn-in", flag_burn_in, "discarded prefix fraction");
    };

    auto* generate = app.add_subcommand("generate", "write a model file");
    auto* run = app.add_subcommand("run", "run one sampler, emit traces");
    auto* adapt_cmd = app.add_subcommand("adapt", "adapt kernel parameters");
    auto* compare = app.add_subcommand("compare", "compare samplers by energy ACF");
    auto* verify = app.add_subcommand("verify", "run correctness suites");
    for (auto* cmd : {generate, run, adapt_cmd, compare}) add_common(cmd);
    verify->add_option("level", verify_level, "quick or full")
        ->check(CLI::IsMember({"quick", "full"}));

    CLI11_PARSE(app, argc, argv);

    try {
        Config cfg = load_config(config_path);
        if (flag_steps >= 0) cfg.set("steps", std::to_string(flag_steps));
        if (flag_stride >= 0) cfg.set("stride", std::to_string(flag_stride));
        if (flag_max_lag >= 0) cfg.set("max_lag", std::to_string(flag_max_lag));
        if (flag_burn_in >= 0) cfg.set("burn_in", std::to_string(flag_burn_in));

        if (app.got_subcommand(generate)) return cmd_generate(cfg, out_dir);
        if (app.got_subcommand(run)) return cmd_run(cfg, out_dir, flag_seeds);
        if (app.got_subcommand(adapt_cmd)) return cmd_adapt(cfg, out_dir, flag_seeds);
        if (app.got_subcommand(compare)) return cmd_compare(cfg, out_dir, flag_seeds);
        if (app.got_subcommand(verify)) return cmd_verify(verify_level);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
