#pragma once

#include <Eigen/Dense>
#include <array>
#include <random>
#include <string>
#include <vector>

#include "sardonics/model.hpp"
#include "sardonics/saw.hpp"

namespace sardonics {

/// Search box for the seven free kernel parameters
/// (k_l, k_u, gamma_L, gamma_H, p_LL, p_HL, N); p_LH is implied by the
/// simplex constraint. Integer dimensions are treated as continuous during
/// surrogate modelling and rounded at instantiation.
class ParamSpace {
public:
    static constexpr int kDims = 7;

    // Default bounds: k_l in {1..70}, k_u in {2..120}, gamma_L in
    // [0.89, 1.05], gamma_H in [0.9, 1.15], mixture weights on the simplex,
    // N in {1..5}; k_u is additionally capped at the model dimension.
    static ParamSpace defaults(int num_spins);

    ParamSpace(std::array<double, kDims> lower, std::array<double, kDims> upper,
               int num_spins);

    int num_spins() const { return num_spins_; }
    const std::array<double, kDims>& lower() const { return lower_; }
    const std::array<double, kDims>& upper() const { return upper_; }

    // Maps a unit-box point to a feasible KernelParams: denormalize, round
    // integer dimensions, then repair (k_u := max(k_u, k_l) capped at M,
    // gamma_H := max(gamma_H, gamma_L), mixture projected onto the triangle
    // p_LL + p_HL <= 1, irreducibility restored by widening the length set).
    KernelParams instantiate(const Eigen::VectorXd& unit_point) const;

    // Unit-box coordinates of a parameter setting (inverse of instantiate up
    // to repair).
    Eigen::VectorXd normalize(const KernelParams& params) const;

private:
    std::array<double, kDims> lower_;
    std::array<double, kDims> upper_;
    int num_spins_;
};

// Latin hypercube design over the unit box: n points, each dimension
// stratified into n equal bins with exactly one point per bin.
std::vector<Eigen::VectorXd> lhs_init(const ParamSpace& space, int n,
                                      std::mt19937_64& rng);

struct GpHypers {
    Eigen::VectorXd length_scales;  // one per dimension
    double amplitude = 1.0;         // signal standard deviation
    double noise_std = 0.1;
};

/// Zero-mean Gaussian process with the anisotropic squared-exponential (ARD)
/// kernel amplitude^2 exp(-1/2 sum ((a_d-b_d)/psi_d)^2) over unit-box inputs;
/// caches the Cholesky factor of K + sigma^2 I.
class GpSurrogate {
public:
    GpSurrogate(Eigen::MatrixXd inputs, Eigen::VectorXd targets, GpHypers hypers);

    // Hyper-parameter fit by multi-start coordinate ascent on the marginal
    // likelihood; the result is never worse than the initial hypers.
    static GpSurrogate fit(const Eigen::MatrixXd& inputs,
                           const Eigen::VectorXd& targets, const GpHypers& initial,
                           std::mt19937_64& rng);

    // Predictive mean and variance (clamped at zero). With no observations
    // returns the prior (0, amplitude^2).
    std::pair<double, double> predict(const Eigen::VectorXd& theta) const;

    double log_marginal_likelihood() const { return log_marginal_; }
    const GpHypers& hypers() const { return hypers_; }
    const Eigen::MatrixXd& inputs() const { return inputs_; }
    const Eigen::VectorXd& targets() const { return targets_; }
    long num_observations() const { return inputs_.rows(); }

private:
    Eigen::MatrixXd inputs_;   // n x d
    Eigen::VectorXd targets_;
    GpHypers hypers_;
    Eigen::LLT<Eigen::MatrixXd> chol_;
    Eigen::VectorXd alpha_;    // (K + sigma^2 I)^{-1} z
    double log_marginal_ = 0.0;
};

// EI = (mu - best) Phi(u) + sigma phi(u), u = (mu - best)/sigma, in the
// maximization convention (reward = negated ACF area); max(0, mu - best)
// in the zero-variance limit.
double expected_improvement(const GpSurrogate& surrogate, const Eigen::VectorXd& theta,
                            double best_reward);

// Derivative-free rectangle-subdivision maximization of EI over the unit box
// (points repaired to feasibility before evaluation). Deterministic; the
// result never scores below the box center.
Eigen::VectorXd acq_optimize(const GpSurrogate& surrogate, const ParamSpace& space,
                             double best_reward, int budget);

struct AdaptationEntry {
    KernelParams params;
    Eigen::VectorXd unit_point;
    double reward = 0.0;       // negated ACF area of the evaluation trace
    double best_so_far = 0.0;
    GpHypers hypers;           // surrogate hypers in force when proposing
};

using AdaptSink = std::function<void(int iteration, long step, double energy,
                                     bool accepted, int walk_length)>;

struct AdaptOptions {
    int iterations = 20;       // I, total evaluations (hard-capped)
    int n_init = 5;            // Latin hypercube seeding points
    long chain_steps = 1000;   // L, steps per evaluation
    int max_lag = 100;         // ACF objective lag
    int acq_budget = 300;      // acquisition evaluations per proposal
    long warmup_sweeps = 100;  // Gibbs sweeps thermalizing the start state
    std::uint64_t seed = 0;
    AdaptSink sink;            // per-step evaluation trace consumer
};

struct AdaptResult {
    std::vector<AdaptationEntry> log;
    Eigen::MatrixXd inputs;
    Eigen::VectorXd rewards;
    GpHypers hypers;
    SpinState final_state;
};

// Adaptation loop: LHS seeding, then EI-driven proposals; each evaluation
// runs the kernel for chain_steps steps (warm-started from the previous
// evaluation's final state) and scores the energy trace.
AdaptResult adapt(const IsingModel& model, const ParamSpace& space,
                  const AdaptOptions& options);

// Discrete policy over candidate parameter settings with mass proportional
// to exp(posterior mean): observed inputs plus fresh LHS draws up to
// n_candidates total.
ParamPolicy boltzmann_policy(const GpSurrogate& surrogate, const ParamSpace& space,
                             int n_candidates, std::mt19937_64& rng);

// Policy serialization: header line, then one candidate per line
// (k_l k_u gamma_L gamma_H p_LL p_HL p_LH N probability).
void save_policy(const ParamPolicy& policy, const std::string& path);
ParamPolicy load_policy(const std::string& path);

}  // namespace sardonics
