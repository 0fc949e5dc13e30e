#include "sardonics/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace sardonics {

AcfCurve acf(std::span<const double> series, int max_lag) {
    const long n = static_cast<long>(series.size());
    if (max_lag < 1) throw std::invalid_argument("max_lag must be >= 1");
    if (n <= max_lag) throw std::invalid_argument("series shorter than max_lag + 1");
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : series) var += (v - mean) * (v - mean);
    var /= n;

    AcfCurve curve;
    curve.rho.assign(max_lag + 1, 0.0);
    // a constant series leaves only rounding residue in the variance; the
    // residue of the accumulated mean grows with the series length
    const double eps = std::numeric_limits<double>::epsilon();
    const double residue = eps * (std::abs(mean) + 1.0);
    if (var <= residue * residue * static_cast<double>(n)) {
        curve.zero_variance = true;
        return curve;
    }
    curve.rho[0] = 1.0;
    for (int t = 1; t <= max_lag; ++t) {
        double c = 0.0;
        for (long i = 0; i + t < n; ++i)
            c += (series[i] - mean) * (series[i + t] - mean);
        curve.rho[t] = (c / n) / var;
    }
    return curve;
}

double acf_area(std::span<const double> series, int max_lag) {
    const AcfCurve curve = acf(series, max_lag);
    double area = 0.0;
    for (int t = 1; t <= max_lag; ++t) area += curve.rho[t];
    return area;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("distribution size mismatch");
    double sp = 0.0, sq = 0.0, d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        sp += p[i];
        sq += q[i];
        d += std::abs(p[i] - q[i]);
    }
    if (std::abs(sp - 1.0) > 1e-6 || std::abs(sq - 1.0) > 1e-6)
        throw std::invalid_argument("arguments must be probability vectors");
    return d / 2.0;
}

SpinState state_from_index(std::uint32_t index, int num_spins) {
    SpinState s(num_spins);
    for (int i = 0; i < num_spins; ++i)
        s[i] = (index >> i) & 1u ? std::int8_t{1} : std::int8_t{-1};
    return s;
}

std::uint32_t state_index(const SpinState& state) {
    std::uint32_t idx = 0;
    for (std::size_t i = 0; i < state.size(); ++i)
        if (state[i] > 0) idx |= 1u << i;
    return idx;
}

std::vector<SpinState> hamming_shell(const SpinState& center, int distance) {
    const int m = static_cast<int>(center.size());
    if (distance < 0 || distance > m)
        throw std::invalid_argument("shell distance out of range");
    std::vector<SpinState> shell;
    std::vector<int> picks;
    std::function<void(int)> rec = [&](int start) {
        if (static_cast<int>(picks.size()) == distance) {
            shell.push_back(apply_flip(center, picks));
            return;
        }
        for (int i = start; i < m; ++i) {
            picks.push_back(i);
            rec(i + 1);
            picks.pop_back();
        }
    };
    rec(0);
    return shell;
}

std::vector<double> exact_distribution(const IsingModel& model) {
    const int m = model.num_spins();
    if (m > 20) throw std::invalid_argument("exact distribution capped at M = 20");
    const std::uint32_t n = 1u << m;
    std::vector<double> logw(n);
    double max_logw = -std::numeric_limits<double>::infinity();
    for (std::uint32_t x = 0; x < n; ++x) {
        logw[x] = -model.beta() * energy(model, state_from_index(x, m));
        max_logw = std::max(max_logw, logw[x]);
    }
    double z = 0.0;
    for (std::uint32_t x = 0; x < n; ++x) z += std::exp(logw[x] - max_logw);
    const double log_z = max_logw + std::log(z);
    std::vector<double> pi(n);
    for (std::uint32_t x = 0; x < n; ++x) pi[x] = std::exp(logw[x] - log_z);
    return pi;
}

namespace {

double logsumexp(std::span<const double> v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

// Depth-first enumeration of all length-k SAWs from x0, visiting each with
// its dense-softmax log density and end state. `state` and `used` are
// mutated in place and restored on return.
struct SawEnumerator {
    const IsingModel& model;
    double gamma;
    int k;
    SpinState state;
    std::vector<char> used;
    std::vector<int> path;
    double running_energy;
    std::function<void(const std::vector<int>&, double, const SpinState&,
                       double /*end energy*/)>
        visit;

    SawEnumerator(const IsingModel& m, const SpinState& x0, int k_, double g)
        : model(m), gamma(g), k(k_), state(x0), used(m.num_spins(), 0),
          running_energy(energy(m, x0)) {}

    void run() { rec(0.0); }

    void rec(double log_density) {
        if (static_cast<int>(path.size()) == k) {
            visit(path, log_density, state, running_energy);
            return;
        }
        const int m = model.num_spins();
        std::vector<double> exponents;
        std::vector<int> candidates;
        exponents.reserve(m);
        candidates.reserve(m);
        for (int j = 0; j < m; ++j) {
            if (used[j]) continue;
            exponents.push_back(-gamma * (running_energy + flip_delta(model, state, j)));
            candidates.push_back(j);
        }
        const double lse = logsumexp(exponents);
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            const int j = candidates[c];
            const double step_lp = exponents[c] - lse;
            const double d = flip_delta(model, state, j);
            used[j] = 1;
            path.push_back(j);
            state[j] = static_cast<std::int8_t>(-state[j]);
            running_energy += d;
            rec(log_density + step_lp);
            running_energy -= d;
            state[j] = static_cast<std::int8_t>(-state[j]);
            path.pop_back();
            used[j] = 0;
        }
    }
};

long long count_perm(int m, int k) {
    long long p = 1;
    for (int i = 0; i < k; ++i) p *= (m - i);
    return p;
}

}  // namespace

double oracle_saw_logprob(const IsingModel& model, const SpinState& x0,
                          const SawPath& path, double gamma) {
    const int m = model.num_spins();
    SpinState state = x0;
    std::vector<char> used(m, 0);
    double running_energy = energy(model, x0);
    double lp = 0.0;
    for (int idx : path.flips) {
        if (idx < 0 || idx >= m) throw std::out_of_range("path index out of range");
        if (used[idx]) throw std::invalid_argument("repeated index in path");
        std::vector<double> exponents;
        double chosen = 0.0;
        for (int j = 0; j < m; ++j) {
            if (used[j]) continue;
            const double e = -gamma * (running_energy + flip_delta(model, state, j));
            exponents.push_back(e);
            if (j == idx) chosen = e;
        }
        lp += chosen - logsumexp(exponents);
        running_energy += flip_delta(model, state, idx);
        used[idx] = 1;
        state[idx] = static_cast<std::int8_t>(-state[idx]);
    }
    return lp;
}

namespace {

// Shared enumeration over every (state, SAW-pair) realization of the
// restricted kernel. For each realization reports forward density, reverse
// density and start/end energies.
void for_each_pair_realization(
    const IsingModel& model, int k, double gamma, long long budget,
    const std::function<void(std::uint32_t x0, std::uint32_t x1, double log_fwd,
                             double log_rev, double e0, double e1)>& visit) {
    const int m = model.num_spins();
    if (m > 20) throw std::invalid_argument("enumeration capped at M = 20");
    const std::uint32_t n = 1u << m;
    const long long per_state = count_perm(m, k) * count_perm(m, k);
    if (per_state * static_cast<long long>(n) > budget)
        throw std::invalid_argument("enumeration budget exceeded");

    for (std::uint32_t x = 0; x < n; ++x) {
        const SpinState x0 = state_from_index(x, m);
        const double e0 = energy(model, x0);
        SawEnumerator outer(model, x0, k, gamma);
        outer.visit = [&](const std::vector<int>& path1, double ld1,
                          const SpinState& mid, double /*e_mid*/) {
            SawEnumerator inner(model, mid, k, gamma);
            inner.visit = [&](const std::vector<int>& path2, double ld2,
                              const SpinState& end, double e_end) {
                SawPath r2{{path2.rbegin(), path2.rend()}};
                SawPath r1{{path1.rbegin(), path1.rend()}};
                const double lr1 = oracle_saw_logprob(model, end, r2, gamma);
                const SpinState back_mid = apply_flip(end, r2.flips);
                const double lr2 = oracle_saw_logprob(model, back_mid, r1, gamma);
                visit(x, state_index(end), ld1 + ld2, lr1 + lr2, e0, e_end);
            };
            inner.run();
        };
        outer.run();
    }
}

}  // namespace

std::vector<std::vector<double>> exact_sardonics_kernel(const IsingModel& model,
                                                        int k, double gamma,
                                                        long long budget) {
    const std::uint32_t n = 1u << model.num_spins();
    std::vector<std::vector<double>> kernel(n, std::vector<double>(n, 0.0));
    const double beta = model.beta();
    for_each_pair_realization(
        model, k, gamma, budget,
        [&](std::uint32_t x0, std::uint32_t x1, double log_fwd, double log_rev,
            double e0, double e1) {
            const double alpha =
                std::min(1.0, std::exp(beta * (e0 - e1) + log_rev - log_fwd));
            const double p = std::exp(log_fwd);
            kernel[x0][x1] += p * alpha;
            kernel[x0][x0] += p * (1.0 - alpha);
        });
    return kernel;
}

double max_pathwise_db_residual(const IsingModel& model, int k, double gamma,
                                long long budget) {
    const std::vector<double> pi = exact_distribution(model);
    const double beta = model.beta();
    double worst = 0.0;
    for_each_pair_realization(
        model, k, gamma, budget,
        [&](std::uint32_t x0, std::uint32_t x1, double log_fwd, double log_rev,
            double e0, double e1) {
            const double log_ratio = beta * (e0 - e1) + log_rev - log_fwd;
            const double alpha_fwd = std::min(1.0, std::exp(log_ratio));
            const double alpha_rev = std::min(1.0, std::exp(-log_ratio));
            const double lhs = pi[x0] * std::exp(log_fwd) * alpha_fwd;
            const double rhs = pi[x1] * std::exp(log_rev) * alpha_rev;
            worst = std::max(worst, std::abs(lhs - rhs));
        });
    return worst;
}

AlphaPair effective_vs_marginal_alpha(const IsingModel& model, const SpinState& x0,
                                      const SpinState& x1, double gamma,
                                      long long budget) {
    const int k = hamming_distance(x0, x1);
    if (k == 0)
        throw std::invalid_argument("states coincide; no positive-length walk");
    long long paths = 1;
    for (int i = 2; i <= k; ++i) paths *= i;
    if (paths * 2 > budget) throw std::invalid_argument("enumeration budget exceeded");

    std::vector<int> differ;
    for (std::size_t i = 0; i < x0.size(); ++i)
        if (x0[i] != x1[i]) differ.push_back(static_cast<int>(i));

    const double e0 = energy(model, x0);
    const double e1 = energy(model, x1);
    const double beta = model.beta();

    // every ordering of the differing bits is an allowable walk
    std::vector<int> perm = differ;
    std::sort(perm.begin(), perm.end());
    double f_fwd = 0.0, f_rev = 0.0, eff_num = 0.0;
    do {
        const SawPath path{perm};
        const SawPath rpath = reversed(path);
        const double lf = oracle_saw_logprob(model, x0, path, gamma);
        const double lr = oracle_saw_logprob(model, x1, rpath, gamma);
        f_fwd += std::exp(lf);
        f_rev += std::exp(lr);
        const double alpha_path =
            std::min(1.0, std::exp(beta * (e0 - e1) + lr - lf));
        eff_num += std::exp(lf) * alpha_path;
    } while (std::next_permutation(perm.begin(), perm.end()));

    AlphaPair out;
    out.effective = eff_num / f_fwd;
    out.marginal = std::min(1.0, std::exp(beta * (e0 - e1)) * f_rev / f_fwd);
    return out;
}

}  // namespace sardonics
