#pragma once

#include <functional>
#include <optional>
#include <random>
#include <tuple>
#include <vector>

#include "sardonics/model.hpp"
#include "sardonics/weight_tree.hpp"

namespace sardonics {

/// Ordered sequence of distinct flip indices: a self-avoiding walk in state
/// space, each flip leaving the agreement set with the start state.
struct SawPath {
    std::vector<int> flips;
};

SawPath reversed(const SawPath& path);

/// Tunable parameters of one SARDONICS transition kernel.
struct KernelParams {
    int k_lower = 1;
    int k_upper = 1;
    double gamma_low = 1.0;
    double gamma_high = 1.0;
    double p_ll = 1.0;   // pair sampled at (gamma_low, gamma_low)
    double p_hl = 0.0;   // (gamma_high, gamma_low): escape then descend
    double p_lh = 0.0;   // (gamma_low, gamma_high): helps HL moves get accepted
    int n_segments = 1;

    // Throws unless 1 <= k_lower <= k_upper <= num_spins, gamma_high >=
    // gamma_low >= 0, mixture weights on the simplex, 1 <= n_segments <= 5,
    // and the walk-length set keeps the chain irreducible (k_lower == 1 or
    // k_upper > k_lower).
    void validate(int num_spins) const;
};

struct SegmentRecord {
    SawPath first;
    SawPath second;
};

struct ProposalRecord {
    std::vector<SegmentRecord> segments;
    SpinState proposed_state;
    double log_forward = 0.0;
    double log_reverse = 0.0;
    int walk_length = 0;
};

namespace detail {

// Weighted flip-candidate store; tree-backed for sparse models, flat
// recompute for dense ones (crossover at average degree M/4).
class CandidateStore {
public:
    CandidateStore(std::size_t capacity, bool use_tree);
    void assign(const std::vector<double>& weights);
    void update(std::size_t i, double w);
    double total() const;
    std::size_t sample(double u) const;

private:
    std::optional<WeightTree> tree_;
    std::optional<FlatWeightStore> flat_;
};

}  // namespace detail

/// Incremental machinery shared by SAW sampling and replay evaluation: a
/// working spin configuration, the per-spin flip-delta cache, running energy
/// and a pair of candidate stores (one per gamma level).
class SawEngine {
public:
    explicit SawEngine(const IsingModel& model);

    void load(const SpinState& state);  // full recompute
    void resync();                      // recompute caches from current spins
    const SpinState& state() const { return spins_; }
    double current_energy() const { return energy_; }
    const IsingModel& model() const { return *model_; }

    struct PathLogProb {
        double low = 0.0;   // log f(path) at gamma_low
        double high = 0.0;  // log f(path) at gamma_high
    };

    // Draws a SAW of length k, selecting flips from the gamma_high store when
    // use_high is set, and advances the engine to the walk's end state.
    // Returns the path's log density under both gamma levels.
    PathLogProb sample_saw(int k, double gamma_low, double gamma_high, bool use_high,
                           std::mt19937_64& rng, SawPath& out);

    // Replays a fixed path, advancing the engine along it. Throws on repeated
    // or out-of-range indices.
    PathLogProb eval_saw(const SawPath& path, double gamma_low, double gamma_high);

    // Applies the flips without computing densities.
    void apply_path(const SawPath& path);

private:
    void begin_saw(double gamma_low, double gamma_high);
    void end_saw();
    void flip(int index, bool maintain_stores);
    void refresh_offsets();
    double weight_of(int j, double gamma, double offset) const;
    std::pair<double, double> step_logprob(int index) const;

    const IsingModel* model_;
    bool use_tree_;
    SpinState spins_;
    std::vector<double> delta_;  // flip_delta per spin wrt spins_
    double energy_ = 0.0;
    detail::CandidateStore store_low_;
    detail::CandidateStore store_high_;
    double gamma_low_ = 0.0, gamma_high_ = 0.0;
    double offset_low_ = 0.0, offset_high_ = 0.0;
    std::vector<char> in_path_;
    std::vector<int> current_path_;
    std::vector<double> scratch_low_, scratch_high_;
};

// One energy-biased SAW from x0: at step i the candidate set is exactly the
// not-yet-flipped indices, and candidate l is drawn with probability
// softmax(-gamma * E(F(u_{i-1}, l))). Returns (path, end state, log density).
std::tuple<SawPath, SpinState, double> sample_saw(const IsingModel& model,
                                                  const SpinState& x0, int k,
                                                  double gamma, std::mt19937_64& rng);

// log f(x1, path | x0) for a fixed path; equals what sample_saw would have
// reported had it drawn this path.
double saw_logprob(const IsingModel& model, const SpinState& x0, const SawPath& path,
                   double gamma);

// log of the three-component pair density
//   p_ll f(.;gL,gL) + p_hl f(.;gH,gL) + p_lh f(.;gL,gH)
// where f(pair; ga, gb) = f(y, first | x0, ga) * f(x1, second | y, gb).
double pair_log_mixture(const IsingModel& model, const SpinState& x0,
                        const SawPath& first, const SawPath& second,
                        const KernelParams& params);

/// Persistent-state SARDONICS kernel for driving a chain.
class SardonicsKernel {
public:
    explicit SardonicsKernel(const IsingModel& model);

    void reset(const SpinState& state);
    const SpinState& state() const { return engine_.state(); }
    double current_energy() const { return engine_.current_energy(); }

    struct Outcome {
        bool accepted = false;
        int walk_length = 0;
        double energy = 0.0;
    };

    // One move: N mixture-pair segments proposed forward, reverse density
    // evaluated under the full mixture with segments reversed and each pair's
    // paths reversed and swapped, Metropolis-Hastings test on the joint space.
    Outcome step(const KernelParams& params, std::mt19937_64& rng);
    Outcome step(const KernelParams& params, std::mt19937_64& rng,
                 ProposalRecord* record);

private:
    SawEngine engine_;
    long steps_since_resync_ = 0;
};

// Single-shot convenience wrapper around SardonicsKernel.
std::tuple<SpinState, ProposalRecord, bool> sardonics_step(const IsingModel& model,
                                                           const SpinState& state,
                                                           const KernelParams& params,
                                                           std::mt19937_64& rng);

/// Discrete distribution over kernel parameter settings; a fixed-parameter
/// chain is the one-point policy.
struct ParamPolicy {
    std::vector<KernelParams> options;
    std::vector<double> probs;

    static ParamPolicy fixed(const KernelParams& params);
    const KernelParams& draw(std::mt19937_64& rng) const;
    void validate(int num_spins) const;
};

struct ChainSummary {
    long steps = 0;
    long accepted = 0;
    double acceptance_rate = 0.0;
    double final_energy = 0.0;
    SpinState final_state;
};

using TraceSink =
    std::function<void(long step, double energy, bool accepted, int walk_length)>;

ChainSummary run_chain(const IsingModel& model, const SpinState& initial,
                       const ParamPolicy& policy, long steps, std::mt19937_64& rng,
                       const TraceSink& sink = {});

}  // namespace sardonics
