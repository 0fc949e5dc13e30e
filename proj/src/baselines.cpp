#include "sardonics/baselines.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace sardonics {

namespace {

struct UnionFind {
    std::vector<int> parent;

    explicit UnionFind(int n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

void gibbs_site_update(const IsingModel& model, SpinState& state, int i,
                       std::mt19937_64& rng) {
    const double f = local_field(model, state, i);
    const double p_up = 1.0 / (1.0 + std::exp(-2.0 * model.beta() * f));
    state[i] = uniform01(rng) < p_up ? std::int8_t{1} : std::int8_t{-1};
}

void gibbs_sweep(const IsingModel& model, SpinState& state, std::mt19937_64& rng,
                 ScanOrder order) {
    const int m = model.num_spins();
    if (static_cast<int>(state.size()) != m)
        throw std::invalid_argument("state length does not match model dimension");
    if (order == ScanOrder::Systematic) {
        for (int i = 0; i < m; ++i) gibbs_site_update(model, state, i, rng);
    } else {
        for (int n = 0; n < m; ++n) {
            int i = static_cast<int>(uniform01(rng) * m);
            if (i >= m) i = m - 1;
            gibbs_site_update(model, state, i, rng);
        }
    }
}

void block_gibbs_sweep(const IsingModel& model, SpinState& state,
                       std::mt19937_64& rng) {
    if (!model.has_bipartition())
        throw std::invalid_argument("block-Gibbs requires a bipartite model");
    const int m = model.num_spins();
    if (static_cast<int>(state.size()) != m)
        throw std::invalid_argument("state length does not match model dimension");
    const int split = model.bipartition();
    for (int i = split; i < m; ++i) gibbs_site_update(model, state, i, rng);
    for (int i = 0; i < split; ++i) gibbs_site_update(model, state, i, rng);
}

void swendsen_wang_step(const IsingModel& model, SpinState& state,
                        std::mt19937_64& rng) {
    const int m = model.num_spins();
    if (static_cast<int>(state.size()) != m)
        throw std::invalid_argument("state length does not match model dimension");
    const int ghost = m;  // virtual site carrying the field couplings
    UnionFind uf(m + 1);
    const double beta = model.beta();
    for (const auto& e : model.edges()) {
        if (e.coupling * state[e.i] * state[e.j] <= 0.0) continue;  // unsatisfied
        const double p_bond = 1.0 - std::exp(-2.0 * beta * std::abs(e.coupling));
        if (uniform01(rng) < p_bond) uf.unite(e.i, e.j);
    }
    const auto& h = model.fields();
    for (int i = 0; i < m; ++i) {
        if (h[i] == 0.0) continue;
        if (h[i] * state[i] <= 0.0) continue;  // ghost edge unsatisfied
        const double p_bond = 1.0 - std::exp(-2.0 * beta * std::abs(h[i]));
        if (uniform01(rng) < p_bond) uf.unite(i, ghost);
    }
    // one coin per cluster root; the ghost's cluster stays fixed
    std::vector<signed char> flip_root(m + 1, -1);
    flip_root[uf.find(ghost)] = 0;
    for (int i = 0; i < m; ++i) {
        const int root = uf.find(i);
        if (flip_root[root] == -1)
            flip_root[root] = uniform01(rng) < 0.5 ? 1 : 0;
        if (flip_root[root]) state[i] = static_cast<std::int8_t>(-state[i]);
    }
}

}  // namespace sardonics
