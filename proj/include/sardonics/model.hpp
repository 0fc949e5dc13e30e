#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace sardonics {

// Spin configuration; every entry is -1 or +1.
using SpinState = std::vector<std::int8_t>;

struct Edge {
    int i = 0;
    int j = 0;
    double coupling = 0.0;
};

struct Neighbor {
    int index;
    double coupling;
};

/// Binary energy model E(s) = -sum_{(i,j)} J_ij s_i s_j - sum_i h_i s_i,
/// sampled from the Boltzmann distribution pi ~ exp(-beta * E).
/// Immutable after construction; safe to share between chains.
class IsingModel {
public:
    // Edges are stored with i < j, sorted lexicographically. Throws on
    // self-loops, duplicate pairs, out-of-range indices or beta <= 0.
    // bipartition > 0 declares the first `bipartition` spins as one layer
    // of a bipartite model (enables block-Gibbs).
    IsingModel(int num_spins, std::vector<Edge> edges, std::vector<double> fields,
               double beta, int bipartition = 0);

    int num_spins() const { return num_spins_; }
    double beta() const { return beta_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<double>& fields() const { return fields_; }
    int bipartition() const { return bipartition_; }
    bool has_bipartition() const { return bipartition_ > 0; }
    double average_degree() const;

    std::span<const Neighbor> neighbors(int i) const;

private:
    int num_spins_;
    std::vector<Edge> edges_;
    std::vector<double> fields_;
    double beta_;
    int bipartition_;
    // CSR-style adjacency derived from edges_
    std::vector<int> adj_offsets_;
    std::vector<Neighbor> adj_;
};

double energy(const IsingModel& model, const SpinState& state);

// f_i = sum_{j in N(i)} J_ij s_j + h_i
double local_field(const IsingModel& model, const SpinState& state, int i);

// E(F(state, i)) - E(state) = 2 s_i * local_field(i), O(degree(i)).
double flip_delta(const IsingModel& model, const SpinState& state, int i);

SpinState apply_flip(SpinState state, int i);
SpinState apply_flip(SpinState state, std::span<const int> indices);

// P(x, y) = { i | x_i = y_i }
std::vector<int> agreement_set(const SpinState& x, const SpinState& y);

int hamming_distance(const SpinState& x, const SpinState& y);

// Constant value or a uniform draw from {-1, +1}, for couplings and fields.
struct ValueSpec {
    enum class Kind { Constant, RandomSign };
    Kind kind = Kind::Constant;
    double value = 0.0;

    static ValueSpec constant(double c) { return {Kind::Constant, c}; }
    static ValueSpec random_sign() { return {Kind::RandomSign, 0.0}; }
};

// Periodic L x L grid: L^2 spins, 2L^2 edges, degree 4. Requires L >= 3.
IsingModel make_torus_2d(int side, ValueSpec coupling, ValueSpec field, double beta,
                         std::uint64_t seed);

// Periodic L x L x L lattice: L^3 spins, 3L^3 edges, degree 6. Requires L >= 3.
IsingModel make_cube_3d(int side, ValueSpec coupling, ValueSpec field, double beta,
                        std::uint64_t seed);

// Complete bipartite model with gaussian couplings of the given scale and
// zero fields; visible layer occupies indices [0, n_visible).
IsingModel make_bipartite_rbm(int n_visible, int n_hidden, double weight_scale,
                              double beta, std::uint64_t seed);

// Bipartite model from externally trained weights over {0,1} units.
// Converted to the +-1 convention: J = W/4, visible h_i = b_i/2 + sum_j W_ij/4,
// hidden h_j = c_j/2 + sum_i W_ij/4 (additive constant dropped).
// File format: header "rbm n_visible n_hidden", then n_v*n_h weights row-major,
// n_v visible biases, n_h hidden biases, whitespace separated.
IsingModel make_bipartite_rbm_from_file(const std::string& path, double beta);

// Grid of K_{4,4} unit cells (8 spins each). Within a cell the left half
// {0..3} couples completely to the right half {4..7}; horizontally adjacent
// cells couple corresponding right-half spins, vertically adjacent cells
// couple corresponding left-half spins.
IsingModel make_chimera(int rows, int cols, ValueSpec coupling, ValueSpec field,
                        double beta, std::uint64_t seed);

SpinState random_state(int num_spins, std::uint64_t seed);
SpinState random_state(int num_spins, std::mt19937_64& rng);

// Line-oriented text format:
//   ising M beta
//   e i j J           (0-based, i < j, lexicographically sorted)
//   h i value         (nonzero fields, sorted by index)
//   bipartition k     (optional)
void save_model(const IsingModel& model, std::ostream& out);
void save_model(const IsingModel& model, const std::string& path);
IsingModel load_model(std::istream& in);
IsingModel load_model_file(const std::string& path);

// uniform double in [0, 1) from the top 53 bits of the generator
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace sardonics
