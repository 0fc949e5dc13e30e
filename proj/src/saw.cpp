#include "sardonics/saw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sardonics {

namespace {

constexpr double kExponentGuard = 500.0;  // weight dynamic-range guard
constexpr long kResyncInterval = 4096;    // full cache recompute cadence

double logsumexp(const double* terms, int n) {
    double m = terms[0];
    for (int i = 1; i < n; ++i) m = std::max(m, terms[i]);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::exp(terms[i] - m);
    return m + std::log(s);
}

double mixture_log(const SawEngine::PathLogProb& a, const SawEngine::PathLogProb& b,
                   const KernelParams& p) {
    double terms[3];
    int n = 0;
    if (p.p_ll > 0.0) terms[n++] = std::log(p.p_ll) + a.low + b.low;
    if (p.p_hl > 0.0) terms[n++] = std::log(p.p_hl) + a.high + b.low;
    if (p.p_lh > 0.0) terms[n++] = std::log(p.p_lh) + a.low + b.high;
    if (n == 0) throw std::logic_error("mixture has no positive component");
    return logsumexp(terms, n);
}

int draw_length(const KernelParams& p, std::mt19937_64& rng) {
    const int span = p.k_upper - p.k_lower + 1;
    int offset = static_cast<int>(uniform01(rng) * span);
    if (offset >= span) offset = span - 1;
    return p.k_lower + offset;
}

enum class PairType { LL, HL, LH };

PairType draw_pair_type(const KernelParams& p, std::mt19937_64& rng) {
    const double u = uniform01(rng);
    if (u < p.p_ll) return PairType::LL;
    if (u < p.p_ll + p.p_hl) return PairType::HL;
    return PairType::LH;
}

}  // namespace

SawPath reversed(const SawPath& path) {
    SawPath r = path;
    std::reverse(r.flips.begin(), r.flips.end());
    return r;
}

void KernelParams::validate(int num_spins) const {
    if (k_lower < 1 || k_lower > k_upper || k_upper > num_spins)
        throw std::invalid_argument("walk lengths must satisfy 1 <= k_l <= k_u <= M");
    if (!(gamma_low >= 0.0) || !(gamma_high >= gamma_low))
        throw std::invalid_argument("bias parameters must satisfy gamma_H >= gamma_L >= 0");
    if (p_ll < 0.0 || p_hl < 0.0 || p_lh < 0.0 ||
        std::abs(p_ll + p_hl + p_lh - 1.0) > 1e-12)
        throw std::invalid_argument("mixture weights must lie on the simplex");
    if (n_segments < 1 || n_segments > 5)
        throw std::invalid_argument("segment count must be in 1..5");
    // fixed walk length > 1 loses irreducibility
    if (k_lower > 1 && k_upper == k_lower)
        throw std::invalid_argument(
            "length set {k} with k > 1 is not irreducible; need k_l = 1 or k_u > k_l");
}

namespace detail {

CandidateStore::CandidateStore(std::size_t capacity, bool use_tree) {
    if (use_tree)
        tree_.emplace(capacity);
    else
        flat_.emplace(capacity);
}

void CandidateStore::assign(const std::vector<double>& weights) {
    if (tree_)
        tree_->assign(weights);
    else
        flat_->assign(weights);
}

void CandidateStore::update(std::size_t i, double w) {
    if (tree_)
        tree_->update(i, w);
    else
        flat_->update(i, w);
}

double CandidateStore::total() const { return tree_ ? tree_->total() : flat_->total(); }

std::size_t CandidateStore::sample(double u) const {
    return tree_ ? tree_->sample(u) : flat_->sample(u);
}

}  // namespace detail

SawEngine::SawEngine(const IsingModel& model)
    : model_(&model),
      use_tree_(model.average_degree() < model.num_spins() / 4.0),
      spins_(model.num_spins(), 1),
      delta_(model.num_spins(), 0.0),
      store_low_(model.num_spins(), use_tree_),
      store_high_(model.num_spins(), use_tree_),
      in_path_(model.num_spins(), 0),
      scratch_low_(model.num_spins(), 0.0),
      scratch_high_(model.num_spins(), 0.0) {
    resync();
}

void SawEngine::load(const SpinState& state) {
    if (static_cast<int>(state.size()) != model_->num_spins())
        throw std::invalid_argument("state length does not match model dimension");
    for (auto v : state)
        if (v != 1 && v != -1) throw std::invalid_argument("spins must be -1 or +1");
    spins_ = state;
    resync();
}

void SawEngine::resync() {
    energy_ = energy(*model_, spins_);
    for (int i = 0; i < model_->num_spins(); ++i)
        delta_[i] = flip_delta(*model_, spins_, i);
}

double SawEngine::weight_of(int j, double gamma, double offset) const {
    const double e = offset - gamma * delta_[j];
    return std::exp(e);
}

void SawEngine::begin_saw(double gamma_low, double gamma_high) {
    gamma_low_ = gamma_low;
    gamma_high_ = gamma_high;
    refresh_offsets();
}

void SawEngine::refresh_offsets() {
    const int m = model_->num_spins();
    double min_low = std::numeric_limits<double>::infinity();
    double min_high = min_low;
    for (int j = 0; j < m; ++j) {
        if (in_path_[j]) continue;
        min_low = std::min(min_low, gamma_low_ * delta_[j]);
        min_high = std::min(min_high, gamma_high_ * delta_[j]);
    }
    offset_low_ = std::isfinite(min_low) ? min_low : 0.0;
    offset_high_ = std::isfinite(min_high) ? min_high : 0.0;
    for (int j = 0; j < m; ++j) {
        scratch_low_[j] = in_path_[j] ? 0.0 : weight_of(j, gamma_low_, offset_low_);
        scratch_high_[j] = in_path_[j] ? 0.0 : weight_of(j, gamma_high_, offset_high_);
    }
    store_low_.assign(scratch_low_);
    store_high_.assign(scratch_high_);
}

std::pair<double, double> SawEngine::step_logprob(int index) const {
    const double lp_low =
        (offset_low_ - gamma_low_ * delta_[index]) - std::log(store_low_.total());
    const double lp_high =
        (offset_high_ - gamma_high_ * delta_[index]) - std::log(store_high_.total());
    return {lp_low, lp_high};
}

void SawEngine::flip(int index, bool maintain_stores) {
    energy_ += delta_[index];
    spins_[index] = static_cast<std::int8_t>(-spins_[index]);
    delta_[index] = -delta_[index];
    for (const auto& nb : model_->neighbors(index))
        delta_[nb.index] += 4.0 * nb.coupling * spins_[index] * spins_[nb.index];

    if (!maintain_stores) return;
    in_path_[index] = 1;
    current_path_.push_back(index);
    store_low_.update(index, 0.0);
    store_high_.update(index, 0.0);
    bool needs_refresh = false;
    for (const auto& nb : model_->neighbors(index)) {
        const int j = nb.index;
        if (in_path_[j]) continue;
        const double e_low = offset_low_ - gamma_low_ * delta_[j];
        const double e_high = offset_high_ - gamma_high_ * delta_[j];
        if (std::abs(e_low) > kExponentGuard || std::abs(e_high) > kExponentGuard) {
            needs_refresh = true;
            break;
        }
        store_low_.update(j, std::exp(e_low));
        store_high_.update(j, std::exp(e_high));
    }
    if (needs_refresh) refresh_offsets();
}

void SawEngine::end_saw() {
    for (int idx : current_path_) in_path_[idx] = 0;
    current_path_.clear();
}

SawEngine::PathLogProb SawEngine::sample_saw(int k, double gamma_low,
                                             double gamma_high, bool use_high,
                                             std::mt19937_64& rng, SawPath& out) {
    if (k < 1 || k > model_->num_spins())
        throw std::invalid_argument("walk length must be in 1..M");
    out.flips.clear();
    out.flips.reserve(k);
    begin_saw(gamma_low, gamma_high);
    PathLogProb lp;
    for (int i = 0; i < k; ++i) {
        const double u = uniform01(rng);
        const int idx =
            static_cast<int>((use_high ? store_high_ : store_low_).sample(u));
        const auto [l, h] = step_logprob(idx);
        lp.low += l;
        lp.high += h;
        out.flips.push_back(idx);
        flip(idx, true);
    }
    end_saw();
    return lp;
}

SawEngine::PathLogProb SawEngine::eval_saw(const SawPath& path, double gamma_low,
                                           double gamma_high) {
    if (static_cast<int>(path.flips.size()) > model_->num_spins())
        throw std::invalid_argument("path longer than model dimension");
    begin_saw(gamma_low, gamma_high);
    PathLogProb lp;
    for (int idx : path.flips) {
        if (idx < 0 || idx >= model_->num_spins())
            throw std::out_of_range("path index out of range");
        if (in_path_[idx]) {
            end_saw();
            throw std::invalid_argument("repeated index in path");
        }
        const auto [l, h] = step_logprob(idx);
        lp.low += l;
        lp.high += h;
        flip(idx, true);
    }
    end_saw();
    return lp;
}

void SawEngine::apply_path(const SawPath& path) {
    for (int idx : path.flips) {
        if (idx < 0 || idx >= model_->num_spins())
            throw std::out_of_range("path index out of range");
        flip(idx, false);
    }
}

std::tuple<SawPath, SpinState, double> sample_saw(const IsingModel& model,
                                                  const SpinState& x0, int k,
                                                  double gamma, std::mt19937_64& rng) {
    SawEngine engine(model);
    engine.load(x0);
    SawPath path;
    const auto lp = engine.sample_saw(k, gamma, gamma, false, rng, path);
    return {std::move(path), engine.state(), lp.low};
}

double saw_logprob(const IsingModel& model, const SpinState& x0, const SawPath& path,
                   double gamma) {
    SawEngine engine(model);
    engine.load(x0);
    return engine.eval_saw(path, gamma, gamma).low;
}

double pair_log_mixture(const IsingModel& model, const SpinState& x0,
                        const SawPath& first, const SawPath& second,
                        const KernelParams& params) {
    SawEngine engine(model);
    engine.load(x0);
    const auto a = engine.eval_saw(first, params.gamma_low, params.gamma_high);
    const auto b = engine.eval_saw(second, params.gamma_low, params.gamma_high);
    return mixture_log(a, b, params);
}

SardonicsKernel::SardonicsKernel(const IsingModel& model) : engine_(model) {}

void SardonicsKernel::reset(const SpinState& state) {
    engine_.load(state);
    steps_since_resync_ = 0;
}

SardonicsKernel::Outcome SardonicsKernel::step(const KernelParams& params,
                                               std::mt19937_64& rng) {
    return step(params, rng, nullptr);
}

SardonicsKernel::Outcome SardonicsKernel::step(const KernelParams& params,
                                               std::mt19937_64& rng,
                                               ProposalRecord* record) {
    const IsingModel& model = engine_.model();
    params.validate(model.num_spins());

    const double e0 = engine_.current_energy();

    struct Seg {
        SawPath first, second;
        SawEngine::PathLogProb lp_first, lp_second;
    };
    std::vector<Seg> segs(params.n_segments);
    int walk_length = 0;
    for (auto& seg : segs) {
        const PairType type = draw_pair_type(params, rng);
        const int k1 = draw_length(params, rng);
        const int k2 = draw_length(params, rng);
        seg.lp_first = engine_.sample_saw(k1, params.gamma_low, params.gamma_high,
                                          type == PairType::HL, rng, seg.first);
        seg.lp_second = engine_.sample_saw(k2, params.gamma_low, params.gamma_high,
                                           type == PairType::LH, rng, seg.second);
        walk_length += k1 + k2;
    }
    const double e1 = engine_.current_energy();
    if (record) record->proposed_state = engine_.state();

    double log_forward = 0.0;
    for (const auto& seg : segs)
        log_forward += mixture_log(seg.lp_first, seg.lp_second, params);

    // Reverse proposal: segments in reverse order, each pair's paths reversed
    // and swapped. The replay walks the engine back to the starting state.
    double log_reverse = 0.0;
    for (auto it = segs.rbegin(); it != segs.rend(); ++it) {
        const auto lr1 = engine_.eval_saw(reversed(it->second), params.gamma_low,
                                          params.gamma_high);
        const auto lr2 = engine_.eval_saw(reversed(it->first), params.gamma_low,
                                          params.gamma_high);
        log_reverse += mixture_log(lr1, lr2, params);
    }

    const double log_alpha =
        model.beta() * (e0 - e1) + log_reverse - log_forward;
    const double u = uniform01(rng);
    const bool accepted = u <= 0.0 || std::log(u) < log_alpha;

    if (record) {
        record->segments.clear();
        for (const auto& seg : segs) record->segments.push_back({seg.first, seg.second});
        record->log_forward = log_forward;
        record->log_reverse = log_reverse;
        record->walk_length = walk_length;
    }

    if (accepted) {
        for (const auto& seg : segs) {
            engine_.apply_path(seg.first);
            engine_.apply_path(seg.second);
        }
    }

    if (++steps_since_resync_ >= kResyncInterval) {
        engine_.resync();
        steps_since_resync_ = 0;
    }
    return {accepted, walk_length, engine_.current_energy()};
}

std::tuple<SpinState, ProposalRecord, bool> sardonics_step(const IsingModel& model,
                                                           const SpinState& state,
                                                           const KernelParams& params,
                                                           std::mt19937_64& rng) {
    SardonicsKernel kernel(model);
    kernel.reset(state);
    ProposalRecord record;
    const auto outcome = kernel.step(params, rng, &record);
    // on rejection the record still carries the proposal; the chain stays put
    return {outcome.accepted ? kernel.state() : state, std::move(record),
            outcome.accepted};
}

ParamPolicy ParamPolicy::fixed(const KernelParams& params) {
    return {{params}, {1.0}};
}

const KernelParams& ParamPolicy::draw(std::mt19937_64& rng) const {
    if (options.empty()) throw std::logic_error("empty parameter policy");
    if (options.size() == 1) return options.front();
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < options.size(); ++i) {
        acc += probs[i];
        if (u < acc) return options[i];
    }
    return options.back();
}

void ParamPolicy::validate(int num_spins) const {
    if (options.empty()) throw std::invalid_argument("empty parameter policy");
    if (probs.size() != options.size())
        throw std::invalid_argument("policy weight count mismatch");
    double sum = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw std::invalid_argument("negative policy weight");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("policy weights must sum to 1");
    for (const auto& opt : options) opt.validate(num_spins);
}

ChainSummary run_chain(const IsingModel& model, const SpinState& initial,
                       const ParamPolicy& policy, long steps, std::mt19937_64& rng,
                       const TraceSink& sink) {
    if (steps < 1) throw std::invalid_argument("need at least one step");
    policy.validate(model.num_spins());
    SardonicsKernel kernel(model);
    kernel.reset(initial);
    long accepted = 0;
    double last_energy = kernel.current_energy();
    for (long s = 0; s < steps; ++s) {
        const KernelParams& params = policy.draw(rng);
        const auto outcome = kernel.step(params, rng);
        accepted += outcome.accepted;
        last_energy = outcome.energy;
        if (sink) sink(s, outcome.energy, outcome.accepted, outcome.walk_length);
    }
    return {steps, accepted, static_cast<double>(accepted) / steps, last_energy,
            kernel.state()};
}

}  // namespace sardonics
