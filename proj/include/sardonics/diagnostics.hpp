#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sardonics/model.hpp"
#include "sardonics/saw.hpp"

namespace sardonics {

struct EnergyTrace {
    std::vector<double> energies;
    std::vector<char> accepted;
    long step_stride = 1;
};

struct AcfCurve {
    std::vector<double> rho;   // lags 0..max_lag
    bool zero_variance = false;
};

// Biased (1/n) autocorrelation estimator with full-sample mean. A constant
// series sets the zero-variance flag and reports rho(t > 0) = 0.
AcfCurve acf(std::span<const double> series, int max_lag);

// Signed sum of rho(t) for t = 1..max_lag; the adaptation reward is its
// negation. A constant series scores 0.
double acf_area(std::span<const double> series, int max_lag);

// (1/2) sum |p_i - q_i|; both arguments must sum to 1 within 1e-6.
double tv_distance(std::span<const double> p, std::span<const double> q);

// State index encoding for exhaustive enumeration: bit i set means s_i = +1.
SpinState state_from_index(std::uint32_t index, int num_spins);
std::uint32_t state_index(const SpinState& state);

// All states at Hamming distance n from the center (size binomial(M, n)).
std::vector<SpinState> hamming_shell(const SpinState& center, int distance);

// Boltzmann distribution over all 2^M states; requires M <= 20.
std::vector<double> exact_distribution(const IsingModel& model);

// log f(x_end, path | x0) at the given bias, computed with a dense per-step
// softmax over full energies. Independent of the incremental SawEngine route.
double oracle_saw_logprob(const IsingModel& model, const SpinState& x0,
                          const SawPath& path, double gamma);

// Marginal transition matrix of the two-SAW move (one segment, single gamma,
// fixed walk length k) obtained by enumerating every SAW-pair realization,
// its proposal density and pathwise acceptance; rejected mass accumulates on
// the diagonal. Throws if the enumeration exceeds the budget.
std::vector<std::vector<double>> exact_sardonics_kernel(const IsingModel& model,
                                                        int k, double gamma,
                                                        long long budget = 10'000'000);

// Largest per-realization violation of pathwise detailed balance,
// max |pi(x0) K(x1,sigma|x0) - pi(x1) K(x0,R(sigma)|x1)|, over every state
// and SAW-pair realization of the same restricted kernel.
double max_pathwise_db_residual(const IsingModel& model, int k, double gamma,
                                long long budget = 10'000'000);

struct AlphaPair {
    double effective = 0.0;  // path-expected pathwise acceptance
    double marginal = 0.0;   // MH acceptance for the marginalized proposal
};

// Both acceptance rates between x0 and x1 for a single SAW of length equal
// to their Hamming distance, by exhausting all allowable walks. Throws when
// x0 = x1 (no walk of positive length connects a state to itself).
AlphaPair effective_vs_marginal_alpha(const IsingModel& model, const SpinState& x0,
                                      const SpinState& x1, double gamma,
                                      long long budget = 10'000'000);

}  // namespace sardonics
