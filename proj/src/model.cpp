#include "sardonics/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sardonics {

IsingModel::IsingModel(int num_spins, std::vector<Edge> edges,
                       std::vector<double> fields, double beta, int bipartition)
    : num_spins_(num_spins),
      edges_(std::move(edges)),
      fields_(std::move(fields)),
      beta_(beta),
      bipartition_(bipartition) {
    if (num_spins_ < 1) throw std::invalid_argument("model needs at least one spin");
    if (!(beta_ > 0.0)) throw std::invalid_argument("beta must be positive");
    if (static_cast<int>(fields_.size()) != num_spins_)
        throw std::invalid_argument("field vector length does not match spin count");
    if (bipartition_ < 0 || bipartition_ > num_spins_)
        throw std::invalid_argument("bipartition size out of range");

    for (auto& e : edges_) {
        if (e.i == e.j) throw std::invalid_argument("self-loop edge");
        if (e.i > e.j) std::swap(e.i, e.j);
        if (e.i < 0 || e.j >= num_spins_)
            throw std::invalid_argument("edge index out of range");
        if (!std::isfinite(e.coupling))
            throw std::invalid_argument("non-finite coupling");
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    for (std::size_t k = 1; k < edges_.size(); ++k)
        if (edges_[k].i == edges_[k - 1].i && edges_[k].j == edges_[k - 1].j)
            throw std::invalid_argument("duplicate edge");

    std::vector<int> degree(num_spins_, 0);
    for (const auto& e : edges_) {
        ++degree[e.i];
        ++degree[e.j];
    }
    adj_offsets_.assign(num_spins_ + 1, 0);
    for (int i = 0; i < num_spins_; ++i) adj_offsets_[i + 1] = adj_offsets_[i] + degree[i];
    adj_.resize(edges_.size() * 2);
    std::vector<int> cursor(adj_offsets_.begin(), adj_offsets_.end() - 1);
    for (const auto& e : edges_) {
        adj_[cursor[e.i]++] = {e.j, e.coupling};
        adj_[cursor[e.j]++] = {e.i, e.coupling};
    }
}

std::span<const Neighbor> IsingModel::neighbors(int i) const {
    return {adj_.data() + adj_offsets_[i],
            static_cast<std::size_t>(adj_offsets_[i + 1] - adj_offsets_[i])};
}

double IsingModel::average_degree() const {
    return 2.0 * static_cast<double>(edges_.size()) / num_spins_;
}

namespace {

void check_state(const IsingModel& model, const SpinState& state) {
    if (static_cast<int>(state.size()) != model.num_spins())
        throw std::invalid_argument("state length does not match model dimension");
}

void check_index(const IsingModel& model, int i) {
    if (i < 0 || i >= model.num_spins())
        throw std::out_of_range("spin index out of range");
}

}  // namespace

double energy(const IsingModel& model, const SpinState& state) {
    check_state(model, state);
    double e = 0.0;
    for (const auto& edge : model.edges())
        e -= edge.coupling * state[edge.i] * state[edge.j];
    const auto& h = model.fields();
    for (int i = 0; i < model.num_spins(); ++i) e -= h[i] * state[i];
    return e;
}

double local_field(const IsingModel& model, const SpinState& state, int i) {
    check_state(model, state);
    check_index(model, i);
    double f = model.fields()[i];
    for (const auto& nb : model.neighbors(i)) f += nb.coupling * state[nb.index];
    return f;
}

double flip_delta(const IsingModel& model, const SpinState& state, int i) {
    return 2.0 * state[i] * local_field(model, state, i);
}

SpinState apply_flip(SpinState state, int i) {
    if (i < 0 || i >= static_cast<int>(state.size()))
        throw std::out_of_range("spin index out of range");
    state[i] = static_cast<std::int8_t>(-state[i]);
    return state;
}

SpinState apply_flip(SpinState state, std::span<const int> indices) {
    for (int i : indices) state = apply_flip(std::move(state), i);
    return state;
}

std::vector<int> agreement_set(const SpinState& x, const SpinState& y) {
    if (x.size() != y.size()) throw std::invalid_argument("state length mismatch");
    std::vector<int> agree;
    agree.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] == y[i]) agree.push_back(static_cast<int>(i));
    return agree;
}

int hamming_distance(const SpinState& x, const SpinState& y) {
    if (x.size() != y.size()) throw std::invalid_argument("state length mismatch");
    int d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) d += x[i] != y[i];
    return d;
}

namespace {

double draw_value(const ValueSpec& spec, std::mt19937_64& rng) {
    switch (spec.kind) {
        case ValueSpec::Kind::Constant:
            return spec.value;
        case ValueSpec::Kind::RandomSign:
            return (rng() & 1) ? 1.0 : -1.0;
    }
    throw std::logic_error("unknown value spec");
}

IsingModel from_lattice(std::vector<Edge> edges, int num_spins, ValueSpec coupling,
                        ValueSpec field, double beta, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    // couplings first in edge order, then fields in index order
    for (auto& e : edges) e.coupling = draw_value(coupling, rng);
    std::vector<double> h(num_spins);
    for (auto& v : h) v = draw_value(field, rng);
    return IsingModel(num_spins, std::move(edges), std::move(h), beta);
}

}  // namespace

IsingModel make_torus_2d(int side, ValueSpec coupling, ValueSpec field, double beta,
                         std::uint64_t seed) {
    if (side < 3) throw std::invalid_argument("torus side must be >= 3");
    const int n = side * side;
    std::vector<Edge> edges;
    edges.reserve(2 * n);
    auto at = [side](int x, int y) { return ((x + side) % side) * side + (y + side) % side; };
    for (int x = 0; x < side; ++x)
        for (int y = 0; y < side; ++y) {
            edges.push_back({at(x, y), at(x + 1, y), 0.0});
            edges.push_back({at(x, y), at(x, y + 1), 0.0});
        }
    return from_lattice(std::move(edges), n, coupling, field, beta, seed);
}

IsingModel make_cube_3d(int side, ValueSpec coupling, ValueSpec field, double beta,
                        std::uint64_t seed) {
    if (side < 3) throw std::invalid_argument("cube side must be >= 3");
    const int n = side * side * side;
    std::vector<Edge> edges;
    edges.reserve(3 * n);
    auto at = [side](int x, int y, int z) {
        return (((x + side) % side) * side + (y + side) % side) * side + (z + side) % side;
    };
    for (int x = 0; x < side; ++x)
        for (int y = 0; y < side; ++y)
            for (int z = 0; z < side; ++z) {
                edges.push_back({at(x, y, z), at(x + 1, y, z), 0.0});
                edges.push_back({at(x, y, z), at(x, y + 1, z), 0.0});
                edges.push_back({at(x, y, z), at(x, y, z + 1), 0.0});
            }
    return from_lattice(std::move(edges), n, coupling, field, beta, seed);
}

IsingModel make_bipartite_rbm(int n_visible, int n_hidden, double weight_scale,
                              double beta, std::uint64_t seed) {
    if (n_visible < 1 || n_hidden < 1)
        throw std::invalid_argument("layer sizes must be >= 1");
    const int n = n_visible + n_hidden;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, weight_scale);
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(n_visible) * n_hidden);
    for (int v = 0; v < n_visible; ++v)
        for (int h = 0; h < n_hidden; ++h)
            edges.push_back({v, n_visible + h, gauss(rng)});
    return IsingModel(n, std::move(edges), std::vector<double>(n, 0.0), beta, n_visible);
}

IsingModel make_bipartite_rbm_from_file(const std::string& path, double beta) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open weight file: " + path);
    std::string tag;
    int n_visible = 0, n_hidden = 0;
    if (!(in >> tag >> n_visible >> n_hidden) || tag != "rbm")
        throw std::runtime_error("malformed weight file header: " + path);
    if (n_visible < 1 || n_hidden < 1)
        throw std::runtime_error("weight file declares empty layer: " + path);
    std::vector<double> w(static_cast<std::size_t>(n_visible) * n_hidden);
    std::vector<double> b(n_visible), c(n_hidden);
    for (auto& x : w)
        if (!(in >> x)) throw std::runtime_error("truncated weight matrix: " + path);
    for (auto& x : b)
        if (!(in >> x)) throw std::runtime_error("truncated visible biases: " + path);
    for (auto& x : c)
        if (!(in >> x)) throw std::runtime_error("truncated hidden biases: " + path);

    const int n = n_visible + n_hidden;
    std::vector<Edge> edges;
    edges.reserve(w.size());
    std::vector<double> fields(n, 0.0);
    for (int v = 0; v < n_visible; ++v) {
        fields[v] = b[v] / 2.0;
        for (int h = 0; h < n_hidden; ++h) {
            const double wij = w[static_cast<std::size_t>(v) * n_hidden + h];
            edges.push_back({v, n_visible + h, wij / 4.0});
            fields[v] += wij / 4.0;
            fields[n_visible + h] += wij / 4.0;
        }
    }
    for (int h = 0; h < n_hidden; ++h) fields[n_visible + h] += c[h] / 2.0;
    return IsingModel(n, std::move(edges), std::move(fields), beta, n_visible);
}

IsingModel make_chimera(int rows, int cols, ValueSpec coupling, ValueSpec field,
                        double beta, std::uint64_t seed) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("chimera grid must be >= 1x1");
    const int n = rows * cols * 8;
    auto cell = [cols](int r, int c) { return (r * cols + c) * 8; };
    std::vector<Edge> edges;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const int base = cell(r, c);
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    edges.push_back({base + a, base + 4 + b, 0.0});
            if (c + 1 < cols)
                for (int b = 0; b < 4; ++b)
                    edges.push_back({base + 4 + b, cell(r, c + 1) + 4 + b, 0.0});
            if (r + 1 < rows)
                for (int a = 0; a < 4; ++a)
                    edges.push_back({base + a, cell(r + 1, c) + a, 0.0});
        }
    return from_lattice(std::move(edges), n, coupling, field, beta, seed);
}

SpinState random_state(int num_spins, std::mt19937_64& rng) {
    if (num_spins < 1) throw std::invalid_argument("state needs at least one spin");
    SpinState s(num_spins);
    for (auto& v : s) v = (rng() & 1) ? std::int8_t{1} : std::int8_t{-1};
    return s;
}

SpinState random_state(int num_spins, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return random_state(num_spins, rng);
}

}  // namespace sardonics
