#include "sardonics/bayesopt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "sardonics/baselines.hpp"
#include "sardonics/diagnostics.hpp"

namespace sardonics {

namespace {

constexpr double kMinLengthScale = 1e-3;
constexpr double kMaxLengthScale = 1e2;
constexpr double kMinNoise = 1e-6;
constexpr double kMaxNoise = 10.0;
constexpr double kMinAmplitude = 1e-3;
constexpr double kMaxAmplitude = 1e3;

int round_clamped(double v, double lo, double hi) {
    return static_cast<int>(std::llround(std::clamp(v, lo, hi)));
}

}  // namespace

ParamSpace ParamSpace::defaults(int num_spins) {
    const double m = num_spins;
    std::array<double, kDims> lo = {1, 2, 0.89, 0.90, 0, 0, 1};
    std::array<double, kDims> hi = {std::min(70.0, m), std::min(120.0, m),
                                    1.05, 1.15, 1, 1, 5};
    return ParamSpace(lo, hi, num_spins);
}

ParamSpace::ParamSpace(std::array<double, kDims> lower, std::array<double, kDims> upper,
                       int num_spins)
    : lower_(lower), upper_(upper), num_spins_(num_spins) {
    if (num_spins_ < 2) throw std::invalid_argument("parameter space needs M >= 2");
    for (int d = 0; d < kDims; ++d)
        if (!(upper_[d] >= lower_[d]))
            throw std::invalid_argument("inverted parameter bounds");
}

KernelParams ParamSpace::instantiate(const Eigen::VectorXd& unit_point) const {
    if (unit_point.size() != kDims)
        throw std::invalid_argument("parameter point has wrong dimension");
    std::array<double, kDims> raw;
    for (int d = 0; d < kDims; ++d) {
        const double u = std::clamp(unit_point[d], 0.0, 1.0);
        raw[d] = lower_[d] + u * (upper_[d] - lower_[d]);
    }
    KernelParams p;
    p.k_lower = round_clamped(raw[0], lower_[0], upper_[0]);
    p.k_upper = round_clamped(raw[1], lower_[1], upper_[1]);
    p.k_upper = std::min(std::max(p.k_upper, p.k_lower), num_spins_);
    p.k_lower = std::min(p.k_lower, p.k_upper);
    if (p.k_lower > 1 && p.k_upper == p.k_lower) {
        // widen the length set so single-bit displacements stay reachable
        if (p.k_upper < std::min(static_cast<int>(upper_[1]), num_spins_))
            ++p.k_upper;
        else
            --p.k_lower;
    }
    p.gamma_low = raw[2];
    p.gamma_high = std::max(raw[3], p.gamma_low);
    double p_ll = std::clamp(raw[4], 0.0, 1.0);
    double p_hl = std::clamp(raw[5], 0.0, 1.0);
    const double sum = p_ll + p_hl;
    if (sum > 1.0) {
        p_ll /= sum;
        p_hl /= sum;
    }
    p.p_ll = p_ll;
    p.p_hl = p_hl;
    p.p_lh = std::max(0.0, 1.0 - p_ll - p_hl);
    p.n_segments = round_clamped(raw[6], lower_[6], upper_[6]);
    p.validate(num_spins_);
    return p;
}

Eigen::VectorXd ParamSpace::normalize(const KernelParams& params) const {
    std::array<double, kDims> raw = {
        static_cast<double>(params.k_lower), static_cast<double>(params.k_upper),
        params.gamma_low, params.gamma_high, params.p_ll, params.p_hl,
        static_cast<double>(params.n_segments)};
    Eigen::VectorXd u(kDims);
    for (int d = 0; d < kDims; ++d) {
        const double span = upper_[d] - lower_[d];
        u[d] = span > 0.0 ? std::clamp((raw[d] - lower_[d]) / span, 0.0, 1.0) : 0.0;
    }
    return u;
}

std::vector<Eigen::VectorXd> lhs_init(const ParamSpace& space, int n,
                                      std::mt19937_64& rng) {
    (void)space;
    if (n < 2) throw std::invalid_argument("Latin hypercube needs n >= 2");
    std::vector<Eigen::VectorXd> points(n, Eigen::VectorXd(ParamSpace::kDims));
    std::vector<int> perm(n);
    for (int d = 0; d < ParamSpace::kDims; ++d) {
        for (int i = 0; i < n; ++i) perm[i] = i;
        for (int i = n - 1; i > 0; --i) {
            int j = static_cast<int>(uniform01(rng) * (i + 1));
            if (j > i) j = i;
            std::swap(perm[i], perm[j]);
        }
        for (int i = 0; i < n; ++i)
            points[i][d] = (perm[i] + uniform01(rng)) / n;
    }
    return points;
}

namespace {

double ard_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                  const Eigen::VectorXd& length_scales) {
    double q = 0.0;
    for (int d = 0; d < a.size(); ++d) {
        const double r = (a[d] - b[d]) / length_scales[d];
        q += r * r;
    }
    return std::exp(-0.5 * q);
}

}  // namespace

GpSurrogate::GpSurrogate(Eigen::MatrixXd inputs, Eigen::VectorXd targets,
                         GpHypers hypers)
    : inputs_(std::move(inputs)), targets_(std::move(targets)),
      hypers_(std::move(hypers)) {
    const long n = inputs_.rows();
    if (targets_.size() != n) throw std::invalid_argument("observation size mismatch");
    if (n == 0) {
        log_marginal_ = 0.0;
        return;
    }
    if (hypers_.length_scales.size() != inputs_.cols())
        throw std::invalid_argument("length-scale dimension mismatch");

    const double signal_var = hypers_.amplitude * hypers_.amplitude;
    Eigen::MatrixXd cov(n, n);
    for (long i = 0; i < n; ++i)
        for (long j = i; j < n; ++j)
            cov(i, j) = cov(j, i) =
                signal_var *
                ard_kernel(inputs_.row(i), inputs_.row(j), hypers_.length_scales);
    const double noise_var = hypers_.noise_std * hypers_.noise_std;
    cov.diagonal().array() += noise_var;

    double jitter = 1e-8 * cov.diagonal().maxCoeff();
    for (int attempt = 0;; ++attempt) {
        chol_.compute(cov);
        if (chol_.info() == Eigen::Success) break;
        if (attempt >= 3) throw std::runtime_error("covariance not positive definite");
        cov.diagonal().array() += jitter;
        jitter *= 10.0;
    }
    alpha_ = chol_.solve(targets_);
    const double log_det =
        chol_.matrixLLT().diagonal().array().log().sum();
    log_marginal_ = -0.5 * targets_.dot(alpha_) - log_det -
                    0.5 * n * std::log(2.0 * M_PI);
}

std::pair<double, double> GpSurrogate::predict(const Eigen::VectorXd& theta) const {
    const double signal_var = hypers_.amplitude * hypers_.amplitude;
    const long n = inputs_.rows();
    if (n == 0) return {0.0, signal_var};
    Eigen::VectorXd k(n);
    for (long i = 0; i < n; ++i)
        k[i] = signal_var * ard_kernel(theta, inputs_.row(i), hypers_.length_scales);
    const double mu = k.dot(alpha_);
    const Eigen::VectorXd v = chol_.matrixL().solve(k);
    const double var = signal_var - v.squaredNorm();
    return {mu, std::max(var, 0.0)};
}

GpSurrogate GpSurrogate::fit(const Eigen::MatrixXd& inputs,
                             const Eigen::VectorXd& targets, const GpHypers& initial,
                             std::mt19937_64& rng) {
    if (inputs.rows() < 2) throw std::invalid_argument("fit needs >= 2 observations");
    const int d = static_cast<int>(inputs.cols());

    auto clamp_hypers = [&](GpHypers h) {
        for (int i = 0; i < d; ++i)
            h.length_scales[i] =
                std::clamp(h.length_scales[i], kMinLengthScale, kMaxLengthScale);
        h.amplitude = std::clamp(h.amplitude, kMinAmplitude, kMaxAmplitude);
        h.noise_std = std::clamp(h.noise_std, kMinNoise, kMaxNoise);
        return h;
    };
    auto score = [&](const GpHypers& h) {
        return GpSurrogate(inputs, targets, h).log_marginal_likelihood();
    };

    GpHypers best = clamp_hypers(initial);
    double best_score = score(best);

    // target spread guides the amplitude starts
    const double target_rms = std::max(
        std::sqrt(targets.squaredNorm() / static_cast<double>(targets.size())),
        kMinAmplitude);

    std::vector<GpHypers> starts = {best};
    {
        GpHypers h = best;
        h.amplitude = target_rms;
        starts.push_back(clamp_hypers(h));
    }
    for (int s = 0; s < 3; ++s) {
        GpHypers h;
        h.length_scales = Eigen::VectorXd(d);
        for (int i = 0; i < d; ++i)
            h.length_scales[i] = std::exp(std::log(0.05) +
                                          uniform01(rng) * std::log(2.0 / 0.05));
        h.amplitude =
            target_rms * std::exp((uniform01(rng) - 0.5) * std::log(9.0));
        h.noise_std = target_rms * std::exp(std::log(1e-3) +
                                            uniform01(rng) * std::log(0.5 / 1e-3));
        starts.push_back(clamp_hypers(h));
    }

    const double factors[] = {2.0, 0.5, 1.25, 0.8};
    for (const auto& start : starts) {
        GpHypers current = start;
        double current_score = score(current);
        for (int round = 0; round < 3; ++round) {
            for (int dim = 0; dim <= d + 1; ++dim) {
                for (double f : factors) {
                    GpHypers trial = current;
                    if (dim < d)
                        trial.length_scales[dim] *= f;
                    else if (dim == d)
                        trial.amplitude *= f;
                    else
                        trial.noise_std *= f;
                    trial = clamp_hypers(trial);
                    const double s = score(trial);
                    if (s > current_score) {
                        current = trial;
                        current_score = s;
                    }
                }
            }
        }
        if (current_score > best_score) {
            best = current;
            best_score = current_score;
        }
    }
    return GpSurrogate(inputs, targets, best);
}

double expected_improvement(const GpSurrogate& surrogate, const Eigen::VectorXd& theta,
                            double best_reward) {
    const auto [mu, var] = surrogate.predict(theta);
    const double sigma = std::sqrt(var);
    const double gap = mu - best_reward;
    if (sigma < 1e-12) return std::max(0.0, gap);
    const double u = gap / sigma;
    const double cdf = 0.5 * std::erfc(-u / std::sqrt(2.0));
    const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
    return std::max(0.0, gap * cdf + sigma * pdf);
}

namespace {

struct Rect {
    Eigen::VectorXd center;
    Eigen::VectorXd sides;
    double value = 0.0;

    double max_side() const { return sides.maxCoeff(); }
};

}  // namespace

Eigen::VectorXd acq_optimize(const GpSurrogate& surrogate, const ParamSpace& space,
                             double best_reward, int budget) {
    if (budget < 1) throw std::invalid_argument("acquisition budget must be >= 1");
    const int d = ParamSpace::kDims;
    // every point is repaired to feasibility before scoring
    auto repaired = [&](const Eigen::VectorXd& u) {
        return space.normalize(space.instantiate(u));
    };
    auto eval = [&](const Eigen::VectorXd& u) {
        return expected_improvement(surrogate, repaired(u), best_reward);
    };

    std::vector<Rect> rects;
    Rect root{Eigen::VectorXd::Constant(d, 0.5), Eigen::VectorXd::Constant(d, 1.0)};
    root.value = eval(root.center);
    rects.push_back(root);
    int evals = 1;

    Eigen::VectorXd best_point = repaired(root.center);
    double best_value = root.value;

    // low-discrepancy probes reach box corners that rectangle centers only
    // approach at depths the trisection budget cannot afford
    const int halton_budget = budget / 3;
    const int bases[ParamSpace::kDims] = {2, 3, 5, 7, 11, 13, 17};
    for (int i = 1; i <= halton_budget; ++i) {
        Eigen::VectorXd u(d);
        for (int j = 0; j < d; ++j) {
            double f = 1.0, v = 0.0;
            for (int n = i; n > 0; n /= bases[j]) {
                f /= bases[j];
                v += f * (n % bases[j]);
            }
            u[j] = v;
        }
        const double value = eval(u);
        ++evals;
        if (value > best_value) {
            best_value = value;
            best_point = repaired(u);
        }
    }

    while (evals < budget) {
        // best rectangle among those of the largest current size
        double largest = 0.0;
        for (const auto& r : rects) largest = std::max(largest, r.max_side());
        std::size_t pick = rects.size();
        for (std::size_t i = 0; i < rects.size(); ++i) {
            if (rects[i].max_side() < largest * (1.0 - 1e-12)) continue;
            if (pick == rects.size() || rects[i].value > rects[pick].value) pick = i;
        }
        Rect parent = rects[pick];
        rects.erase(rects.begin() + static_cast<long>(pick));

        int axis = 0;
        parent.sides.maxCoeff(&axis);
        const double step = parent.sides[axis] / 3.0;
        parent.sides[axis] = step;
        for (int dir : {-1, 0, 1}) {
            Rect child = parent;
            child.center[axis] += dir * step;
            if (dir != 0) {
                child.value = eval(child.center);
                ++evals;
                if (child.value > best_value) {
                    best_value = child.value;
                    best_point = repaired(child.center);
                }
            }
            rects.push_back(child);
            if (evals >= budget && dir >= 0) break;
        }
    }
    return best_point;
}

AdaptResult adapt(const IsingModel& model, const ParamSpace& space,
                  const AdaptOptions& options) {
    if (options.n_init < 2 || options.iterations < options.n_init)
        throw std::invalid_argument("need iterations >= n_init >= 2");
    if (options.chain_steps <= options.max_lag)
        throw std::invalid_argument("evaluation chain shorter than the ACF lag");

    std::mt19937_64 rng(options.seed);
    SpinState state = random_state(model.num_spins(), rng);
    // steep initial descents are rejected almost surely under the pathwise
    // acceptance rule, so thermalize the start state with single-site sweeps
    for (long s = 0; s < options.warmup_sweeps; ++s)
        gibbs_sweep(model, state, rng);

    const auto design = lhs_init(space, options.n_init, rng);

    AdaptResult result;
    Eigen::MatrixXd inputs(options.iterations, ParamSpace::kDims);
    Eigen::VectorXd rewards(options.iterations);
    GpHypers hypers;
    hypers.length_scales = Eigen::VectorXd::Constant(ParamSpace::kDims, 0.3);
    hypers.noise_std = 0.1;

    double best_reward = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < options.iterations; ++i) {
        Eigen::VectorXd unit_point;
        if (i < options.n_init) {
            unit_point = design[i];
        } else {
            // GP is fitted on centered rewards; exp-mean policies and EI are
            // invariant to the shift
            const Eigen::VectorXd z = rewards.head(i);
            const double mean = z.mean();
            GpSurrogate surrogate = GpSurrogate::fit(
                inputs.topRows(i), (z.array() - mean).matrix(), hypers, rng);
            hypers = surrogate.hypers();
            // plug-in incumbent: rewards are noisy, so anchor improvement on
            // the posterior mean at the observed points, not the raw best
            double incumbent = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < i; ++j)
                incumbent =
                    std::max(incumbent, surrogate.predict(inputs.row(j)).first);
            unit_point =
                acq_optimize(surrogate, space, incumbent, options.acq_budget);
        }
        const KernelParams params = space.instantiate(unit_point);
        const Eigen::VectorXd theta = space.normalize(params);

        // refresh the start state so a setting whose chain got stuck does not
        // poison the measurements of every following evaluation
        for (int s = 0; s < 5; ++s) gibbs_sweep(model, state, rng);

        std::vector<double> energies;
        energies.reserve(options.chain_steps);
        const auto summary = run_chain(
            model, state, ParamPolicy::fixed(params), options.chain_steps, rng,
            [&](long s, double e, bool acc, int wl) {
                energies.push_back(e);
                if (options.sink) options.sink(i, s, e, acc, wl);
            });
        state = summary.final_state;  // warm-start the next evaluation

        // a chain that barely moves produces a near-constant trace whose ACF
        // area is deceptively small (0 for a fully frozen chain, by
        // convention); below 1% acceptance replace it with a penalty that is
        // never better than the worst honest area and that degrades further
        // as acceptance drops, so the surrogate sees a slope toward regions
        // where the kernel moves at all
        const double lag = static_cast<double>(options.max_lag);
        const double reward =
            summary.accepted * 100 < summary.steps
                ? -lag * (2.0 - 100.0 * summary.acceptance_rate)
                : -acf_area(energies, options.max_lag);
        inputs.row(i) = theta;
        rewards[i] = reward;
        best_reward = std::max(best_reward, reward);
        result.log.push_back({params, theta, reward, best_reward, hypers});
    }

    const double mean = rewards.mean();
    GpSurrogate surrogate = GpSurrogate::fit(
        inputs, (rewards.array() - mean).matrix(), hypers, rng);
    result.inputs = inputs;
    result.rewards = rewards;
    result.hypers = surrogate.hypers();
    result.final_state = state;
    return result;
}

ParamPolicy boltzmann_policy(const GpSurrogate& surrogate, const ParamSpace& space,
                             int n_candidates, std::mt19937_64& rng) {
    if (n_candidates < 1) throw std::invalid_argument("need at least one candidate");
    std::vector<Eigen::VectorXd> candidates;
    for (long i = 0; i < surrogate.num_observations(); ++i)
        candidates.emplace_back(surrogate.inputs().row(i));
    const int fresh = n_candidates - static_cast<int>(candidates.size());
    if (fresh >= 2) {
        for (const auto& p : lhs_init(space, fresh, rng)) candidates.push_back(p);
    } else if (fresh == 1) {
        Eigen::VectorXd p(ParamSpace::kDims);
        for (int d = 0; d < ParamSpace::kDims; ++d) p[d] = uniform01(rng);
        candidates.push_back(p);
    }

    ParamPolicy policy;
    std::vector<double> mu(candidates.size());
    double mu_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const KernelParams params = space.instantiate(candidates[i]);
        policy.options.push_back(params);
        mu[i] = surrogate.predict(space.normalize(params)).first;
        mu_max = std::max(mu_max, mu[i]);
    }
    double total = 0.0;
    for (double& v : mu) {
        v = std::exp(v - mu_max);
        total += v;
    }
    for (double v : mu) policy.probs.push_back(v / total);
    return policy;
}

void save_policy(const ParamPolicy& policy, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << std::setprecision(17);
    out << "policy " << policy.options.size() << '\n';
    for (std::size_t i = 0; i < policy.options.size(); ++i) {
        const auto& p = policy.options[i];
        out << p.k_lower << ' ' << p.k_upper << ' ' << p.gamma_low << ' '
            << p.gamma_high << ' ' << p.p_ll << ' ' << p.p_hl << ' ' << p.p_lh << ' '
            << p.n_segments << ' ' << policy.probs[i] << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

ParamPolicy load_policy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open policy file: " + path);
    std::string tag;
    std::size_t n = 0;
    if (!(in >> tag >> n) || tag != "policy")
        throw std::runtime_error("malformed policy header: " + path);
    ParamPolicy policy;
    for (std::size_t i = 0; i < n; ++i) {
        KernelParams p;
        double prob;
        if (!(in >> p.k_lower >> p.k_upper >> p.gamma_low >> p.gamma_high >> p.p_ll >>
              p.p_hl >> p.p_lh >> p.n_segments >> prob))
            throw std::runtime_error("truncated policy file: " + path);
        policy.options.push_back(p);
        policy.probs.push_back(prob);
    }
    return policy;
}

}  // namespace sardonics
