#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>
#include <sstream>

#include "sardonics/baselines.hpp"
#include "sardonics/bayesopt.hpp"
#include "sardonics/diagnostics.hpp"
#include "sardonics/model.hpp"
#include "sardonics/saw.hpp"

namespace py = pybind11;
using namespace sardonics;

namespace {

SpinState to_state(const std::vector<int>& values) {
    SpinState s;
    s.reserve(values.size());
    for (int v : values) {
        if (v != 1 && v != -1) throw std::invalid_argument("spins must be +-1");
        s.push_back(static_cast<std::int8_t>(v));
    }
    return s;
}

std::vector<int> from_state(const SpinState& s) {
    return {s.begin(), s.end()};
}

ValueSpec spec_from_string(const std::string& text) {
    if (text == "random") return ValueSpec::random_sign();
    if (text.rfind("const:", 0) == 0)
        return ValueSpec::constant(std::stod(text.substr(6)));
    throw std::invalid_argument("value spec must be 'random' or 'const:<c>'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Equilibrium Monte Carlo sampling of binary-valued systems";

    py::class_<Edge>(m, "Edge")
        .def(py::init([](int i, int j, double coupling) {
                 return Edge{i, j, coupling};
             }),
             py::arg("i"), py::arg("j"), py::arg("coupling"))
        .def_readonly("i", &Edge::i)
        .def_readonly("j", &Edge::j)
        .def_readonly("coupling", &Edge::coupling);

    py::class_<IsingModel>(m, "IsingModel")
        .def(py::init<int, std::vector<Edge>, std::vector<double>, double, int>(),
             py::arg("num_spins"), py::arg("edges"), py::arg("fields"),
             py::arg("beta"), py::arg("bipartition") = 0)
        .def_property_readonly("num_spins", &IsingModel::num_spins)
        .def_property_readonly("beta", &IsingModel::beta)
        .def_property_readonly("bipartition", &IsingModel::bipartition)
        .def_property_readonly("edges", &IsingModel::edges)
        .def_property_readonly("fields", &IsingModel::fields)
        .def("__repr__", [](const IsingModel& model) {
            std::ostringstream out;
            out << "IsingModel(num_spins=" << model.num_spins()
                << ", edges=" << model.edges().size() << ", beta=" << model.beta()
                << ")";
            return out.str();
        });

    m.def("make_torus_2d",
          [](int side, const std::string& coupling, const std::string& field,
             double beta, std::uint64_t seed) {
              return make_torus_2d(side, spec_from_string(coupling),
                                   spec_from_string(field), beta, seed);
          },
          py::arg("side"), py::arg("coupling") = "random",
          py::arg("field") = "const:0", py::arg("beta") = 1.0, py::arg("seed") = 1);
    m.def("make_cube_3d",
          [](int side, const std::string& coupling, const std::string& field,
             double beta, std::uint64_t seed) {
              return make_cube_3d(side, spec_from_string(coupling),
                                  spec_from_string(field), beta, seed);
          },
          py::arg("side"), py::arg("coupling") = "random",
          py::arg("field") = "const:0", py::arg("beta") = 1.0, py::arg("seed") = 1);
    m.def("make_chimera",
          [](int rows, int cols, const std::string& coupling, const std::string& field,
             double beta, std::uint64_t seed) {
              return make_chimera(rows, cols, spec_from_string(coupling),
                                  spec_from_string(field), beta, seed);
          },
          py::arg("rows"), py::arg("cols"), py::arg("coupling") = "random",
          py::arg("field") = "const:0", py::arg("beta") = 1.0, py::arg("seed") = 1);
    m.def("make_bipartite_rbm", &make_bipartite_rbm, py::arg("n_visible"),
          py::arg("n_hidden"), py::arg("weight_scale"), py::arg("beta") = 1.0,
          py::arg("seed") = 1);
    m.def("load_model", &load_model_file, py::arg("path"));
    m.def("save_model",
          [](const IsingModel& model, const std::string& path) {
              save_model(model, path);
          },
          py::arg("model"), py::arg("path"));

    m.def("energy",
          [](const IsingModel& model, const std::vector<int>& state) {
              return energy(model, to_state(state));
          },
          py::arg("model"), py::arg("state"));
    m.def("random_state",
          [](int num_spins, std::uint64_t seed) {
              return from_state(random_state(num_spins, seed));
          },
          py::arg("num_spins"), py::arg("seed"));
    m.def("exact_distribution", &exact_distribution, py::arg("model"));
    m.def("acf",
          [](const std::vector<double>& series, int max_lag) {
              return acf(series, max_lag).rho;
          },
          py::arg("series"), py::arg("max_lag"));
    m.def("acf_area",
          [](const std::vector<double>& series, int max_lag) {
              return acf_area(series, max_lag);
          },
          py::arg("series"), py::arg("max_lag"));
    m.def("tv_distance",
          [](const std::vector<double>& p, const std::vector<double>& q) {
              return tv_distance(p, q);
          },
          py::arg("p"), py::arg("q"));

    py::class_<KernelParams>(m, "KernelParams")
        .def(py::init([](int k_lower, int k_upper, double gamma_low,
                         double gamma_high, double p_ll, double p_hl, double p_lh,
                         int n_segments) {
                 KernelParams p;
                 p.k_lower = k_lower;
                 p.k_upper = k_upper;
                 p.gamma_low = gamma_low;
                 p.gamma_high = gamma_high;
                 p.p_ll = p_ll;
                 p.p_hl = p_hl;
                 p.p_lh = p_lh;
                 p.n_segments = n_segments;
                 return p;
             }),
             py::arg("k_lower") = 1, py::arg("k_upper") = 1,
             py::arg("gamma_low") = 1.0, py::arg("gamma_high") = 1.0,
             py::arg("p_ll") = 1.0, py::arg("p_hl") = 0.0, py::arg("p_lh") = 0.0,
             py::arg("n_segments") = 1)
        .def_readwrite("k_lower", &KernelParams::k_lower)
        .def_readwrite("k_upper", &KernelParams::k_upper)
        .def_readwrite("gamma_low", &KernelParams::gamma_low)
        .def_readwrite("gamma_high", &KernelParams::gamma_high)
        .def_readwrite("p_ll", &KernelParams::p_ll)
        .def_readwrite("p_hl", &KernelParams::p_hl)
        .def_readwrite("p_lh", &KernelParams::p_lh)
        .def_readwrite("n_segments", &KernelParams::n_segments)
        .def("validate", &KernelParams::validate, py::arg("num_spins"));

    // runs a fixed-parameter chain and returns the per-step energy trace
    m.def("run_sardonics",
          [](const IsingModel& model, const KernelParams& params, long steps,
             std::uint64_t seed) {
              std::mt19937_64 rng(seed);
              std::vector<double> energies;
              energies.reserve(steps);
              run_chain(model, random_state(model.num_spins(), rng),
                        ParamPolicy::fixed(params), steps, rng,
                        [&](long, double e, bool, int) { energies.push_back(e); });
              return energies;
          },
          py::arg("model"), py::arg("params"), py::arg("steps"), py::arg("seed"));

    m.def("run_gibbs",
          [](const IsingModel& model, long sweeps, std::uint64_t seed) {
              std::mt19937_64 rng(seed);
              SpinState state = random_state(model.num_spins(), rng);
              std::vector<double> energies;
              energies.reserve(sweeps);
              for (long s = 0; s < sweeps; ++s) {
                  gibbs_sweep(model, state, rng);
                  energies.push_back(energy(model, state));
              }
              return energies;
          },
          py::arg("model"), py::arg("sweeps"), py::arg("seed"));

    m.def("run_swendsen_wang",
          [](const IsingModel& model, long steps, std::uint64_t seed) {
              std::mt19937_64 rng(seed);
              SpinState state = random_state(model.num_spins(), rng);
              std::vector<double> energies;
              energies.reserve(steps);
              for (long s = 0; s < steps; ++s) {
                  swendsen_wang_step(model, state, rng);
                  energies.push_back(energy(model, state));
              }
              return energies;
          },
          py::arg("model"), py::arg("steps"), py::arg("seed"));

    // adaptation loop; returns (params dicts, rewards, final incumbent)
    m.def("adapt",
          [](const IsingModel& model, int iterations, int n_init, long chain_steps,
             int max_lag, std::uint64_t seed) {
              AdaptOptions opts;
              opts.iterations = iterations;
              opts.n_init = n_init;
              opts.chain_steps = chain_steps;
              opts.max_lag = max_lag;
              opts.seed = seed;
              const ParamSpace space = ParamSpace::defaults(model.num_spins());
              const AdaptResult result = adapt(model, space, opts);
              py::list log;
              for (const auto& entry : result.log) {
                  py::dict row;
                  row["params"] = entry.params;
                  row["reward"] = entry.reward;
                  row["best_so_far"] = entry.best_so_far;
                  log.append(row);
              }
              return log;
          },
          py::arg("model"), py::arg("iterations") = 20, py::arg("n_init") = 5,
          py::arg("chain_steps") = 1000, py::arg("max_lag") = 100,
          py::arg("seed") = 0);
}
