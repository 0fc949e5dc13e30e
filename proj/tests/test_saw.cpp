#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "sardonics/diagnostics.hpp"
#include "sardonics/model.hpp"
#include "sardonics/saw.hpp"

using namespace sardonics;

namespace {

IsingModel frustrated6() {
    return IsingModel(6,
                      {{0, 1, 1}, {1, 2, -1}, {2, 3, 1}, {3, 4, -1}, {4, 5, 1},
                       {5, 0, -1}, {0, 3, 1}, {1, 4, -1}},
                      {0.3, -0.2, 0.1, 0.0, -0.4, 0.25}, 1.0);
}

}  // namespace

TEST_CASE("KernelParams validation") {
    KernelParams p;
    p.k_lower = 2;
    p.k_upper = 4;
    p.gamma_low = 0.9;
    p.gamma_high = 1.1;
    p.p_ll = 0.6;
    p.p_hl = 0.3;
    p.p_lh = 0.1;
    CHECK_NOTHROW(p.validate(6));

    SUBCASE("k range") {
        p.k_upper = 7;
        CHECK_THROWS(p.validate(6));
    }
    SUBCASE("gamma ordering") {
        p.gamma_high = 0.5;
        CHECK_THROWS(p.validate(6));
    }
    SUBCASE("simplex") {
        p.p_ll = 0.9;
        CHECK_THROWS(p.validate(6));
    }
    SUBCASE("irreducibility needs k_lower 1 or a length range") {
        p.k_lower = p.k_upper = 2;
        CHECK_THROWS(p.validate(6));
        p.k_lower = 1;
        CHECK_NOTHROW(p.validate(6));
    }
    SUBCASE("segment count") {
        p.n_segments = 6;
        CHECK_THROWS(p.validate(6));
    }
}

TEST_CASE("sample_saw paths are self-avoiding and reach the right state") {
    const IsingModel model = frustrated6();
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const SpinState x0 = random_state(6, rng);
        auto [path, end, lp] = sample_saw(model, x0, 4, 0.8, rng);
        REQUIRE(path.flips.size() == 4);
        std::vector<char> seen(6, 0);
        for (int i : path.flips) {
            CHECK(!seen[i]);
            seen[i] = 1;
        }
        CHECK(end == apply_flip(x0, path.flips));
        CHECK(lp <= 0.0);
    }
}

TEST_CASE("saw_logprob matches the dense-softmax oracle") {
    const IsingModel model = frustrated6();
    std::mt19937_64 rng(2);
    for (double gamma : {0.0, 0.5, 1.0}) {
        for (int trial = 0; trial < 100; ++trial) {
            const SpinState x0 = random_state(6, rng);
            auto [path, end, lp] = sample_saw(model, x0, 3, gamma, rng);
            const double engine_lp = saw_logprob(model, x0, path, gamma);
            const double oracle_lp = oracle_saw_logprob(model, x0, path, gamma);
            CHECK(lp == doctest::Approx(oracle_lp).epsilon(1e-11));
            CHECK(engine_lp == doctest::Approx(oracle_lp).epsilon(1e-11));
        }
    }
}

TEST_CASE("gamma zero gives uniform candidate choice") {
    const IsingModel model = frustrated6();
    const SpinState x0(6, std::int8_t{1});
    // any length-3 walk has density 1/6 * 1/5 * 1/4
    std::mt19937_64 rng(3);
    auto [path, end, lp] = sample_saw(model, x0, 3, 0.0, rng);
    CHECK(lp == doctest::Approx(std::log(1.0 / 120.0)).epsilon(1e-12));
}

TEST_CASE("path densities over a shell sum to one") {
    const IsingModel model = frustrated6();
    const SpinState x0 = random_state(6, 8);
    for (double gamma : {0.3, 1.0}) {
        double total = 0.0;
        // sum of f over all ordered length-2 walks must be 1
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b) {
                if (a == b) continue;
                total += std::exp(saw_logprob(model, x0, SawPath{{a, b}}, gamma));
            }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("eval_saw restores state and reports both gamma levels") {
    const IsingModel model = frustrated6();
    SawEngine engine(model);
    std::mt19937_64 rng(4);
    const SpinState x0 = random_state(6, rng);
    engine.load(x0);
    const SawPath path{{2, 0, 5}};
    const auto lp = engine.eval_saw(path, 0.7, 1.2);
    CHECK(lp.low == doctest::Approx(oracle_saw_logprob(model, x0, path, 0.7))
                        .epsilon(1e-11));
    CHECK(lp.high == doctest::Approx(oracle_saw_logprob(model, x0, path, 1.2))
                         .epsilon(1e-11));
    CHECK(engine.state() == apply_flip(x0, path.flips));
    CHECK(engine.current_energy() ==
          doctest::Approx(energy(model, engine.state())).epsilon(1e-12));

    // replaying the reversed path walks back to x0
    engine.eval_saw(reversed(path), 0.7, 1.2);
    CHECK(engine.state() == x0);
}

TEST_CASE("eval_saw rejects malformed paths") {
    const IsingModel model = frustrated6();
    SawEngine engine(model);
    engine.load(SpinState(6, std::int8_t{1}));
    CHECK_THROWS(engine.eval_saw(SawPath{{1, 1}}, 1.0, 1.0));
    CHECK_THROWS(engine.eval_saw(SawPath{{0, 9}}, 1.0, 1.0));
}

TEST_CASE("pair_log_mixture combines components correctly") {
    const IsingModel model = frustrated6();
    const SpinState x0 = random_state(6, 5);
    const SawPath first{{1, 4}};
    const SpinState mid = apply_flip(x0, first.flips);
    const SawPath second{{4, 2}};

    KernelParams p;
    p.gamma_low = 0.8;
    p.gamma_high = 1.3;
    p.p_ll = 0.5;
    p.p_hl = 0.3;
    p.p_lh = 0.2;

    const double f1_l = oracle_saw_logprob(model, x0, first, p.gamma_low);
    const double f1_h = oracle_saw_logprob(model, x0, first, p.gamma_high);
    const double f2_l = oracle_saw_logprob(model, mid, second, p.gamma_low);
    const double f2_h = oracle_saw_logprob(model, mid, second, p.gamma_high);
    const double expected = std::log(p.p_ll * std::exp(f1_l + f2_l) +
                                     p.p_hl * std::exp(f1_h + f2_l) +
                                     p.p_lh * std::exp(f1_l + f2_h));
    CHECK(pair_log_mixture(model, x0, first, second, p) ==
          doctest::Approx(expected).epsilon(1e-11));
}

TEST_CASE("uniform target accepts every proposal") {
    // zero couplings and fields: pi is uniform and f is symmetric, so the
    // acceptance ratio is exactly 1
    const IsingModel model(5, {}, std::vector<double>(5, 0.0), 1.0);
    std::mt19937_64 rng(6);
    SardonicsKernel kernel(model);
    kernel.reset(random_state(5, rng));
    KernelParams p;
    p.k_lower = 1;
    p.k_upper = 3;
    p.gamma_low = 0.9;
    p.gamma_high = 1.1;
    p.p_ll = 0.6;
    p.p_hl = 0.25;
    p.p_lh = 0.15;
    p.n_segments = 2;
    for (int i = 0; i < 500; ++i) CHECK(kernel.step(p, rng).accepted);
}

TEST_CASE("proposal record is consistent") {
    const IsingModel model = frustrated6();
    std::mt19937_64 rng(7);
    SardonicsKernel kernel(model);
    KernelParams p;
    p.k_lower = 2;
    p.k_upper = 4;
    p.gamma_low = 0.7;
    p.gamma_high = 1.1;
    p.p_ll = 0.5;
    p.p_hl = 0.3;
    p.p_lh = 0.2;
    p.n_segments = 2;

    for (int trial = 0; trial < 300; ++trial) {
        const SpinState x0 = random_state(6, rng);
        kernel.reset(x0);
        ProposalRecord record;
        const auto outcome = kernel.step(p, rng, &record);
        REQUIRE(record.segments.size() == 2);

        // proposed state equals x0 with all segment flips applied in order
        SpinState replay = x0;
        int total_len = 0;
        for (const auto& seg : record.segments) {
            replay = apply_flip(replay, seg.first.flips);
            replay = apply_flip(replay, seg.second.flips);
            total_len += static_cast<int>(seg.first.flips.size() +
                                          seg.second.flips.size());
        }
        CHECK(record.proposed_state == replay);
        CHECK(record.walk_length == total_len);
        CHECK(kernel.state() == (outcome.accepted ? record.proposed_state : x0));
        CHECK(outcome.energy ==
              doctest::Approx(energy(model, kernel.state())).epsilon(1e-12));

        // forward density matches the oracle mixture product over segments
        double fwd = 0.0, rev = 0.0;
        SpinState cur = x0;
        for (const auto& seg : record.segments) {
            fwd += pair_log_mixture(model, cur, seg.first, seg.second, p);
            cur = apply_flip(cur, seg.first.flips);
            cur = apply_flip(cur, seg.second.flips);
        }
        // reverse: segments in reverse order, each pair reversed and swapped
        for (auto it = record.segments.rbegin(); it != record.segments.rend(); ++it) {
            const SawPath r_first = reversed(it->second);
            const SawPath r_second = reversed(it->first);
            rev += pair_log_mixture(model, cur, r_first, r_second, p);
            cur = apply_flip(cur, r_first.flips);
            cur = apply_flip(cur, r_second.flips);
        }
        CHECK(cur == x0);
        CHECK(record.log_forward == doctest::Approx(fwd).epsilon(1e-10));
        CHECK(record.log_reverse == doctest::Approx(rev).epsilon(1e-10));
    }
}

TEST_CASE("sardonics_step wrapper matches kernel semantics") {
    const IsingModel model = frustrated6();
    std::mt19937_64 rng(8);
    const SpinState x0 = random_state(6, rng);
    KernelParams p;
    p.k_lower = 1;
    p.k_upper = 3;
    auto [next, record, accepted] = sardonics_step(model, x0, p, rng);
    CHECK(next == (accepted ? record.proposed_state : x0));
}

TEST_CASE("run_chain bookkeeping and trace sink") {
    const IsingModel model = frustrated6();
    std::mt19937_64 rng(9);
    KernelParams p;
    p.k_lower = 1;
    p.k_upper = 3;
    const ParamPolicy policy = ParamPolicy::fixed(p);
    long calls = 0;
    const ChainSummary summary =
        run_chain(model, random_state(6, 10), policy, 400, rng,
                  [&](long step, double e, bool, int) {
                      CHECK(step == calls);
                      ++calls;
                      CHECK(std::isfinite(e));
                  });
    CHECK(calls == 400);
    CHECK(summary.steps == 400);
    CHECK(summary.acceptance_rate ==
          doctest::Approx(summary.accepted / 400.0).epsilon(1e-12));
    CHECK(summary.final_energy ==
          doctest::Approx(energy(model, summary.final_state)).epsilon(1e-12));
}

TEST_CASE("chains are reproducible for equal seeds") {
    const IsingModel model = frustrated6();
    KernelParams p;
    p.k_lower = 1;
    p.k_upper = 4;
    p.gamma_low = 0.9;
    p.gamma_high = 1.1;
    p.p_ll = 0.7;
    p.p_hl = 0.2;
    p.p_lh = 0.1;
    const ParamPolicy policy = ParamPolicy::fixed(p);
    std::vector<double> trace_a, trace_b;
    {
        std::mt19937_64 rng(33);
        run_chain(model, random_state(6, 1), policy, 300, rng,
                  [&](long, double e, bool, int) { trace_a.push_back(e); });
    }
    {
        std::mt19937_64 rng(33);
        run_chain(model, random_state(6, 1), policy, 300, rng,
                  [&](long, double e, bool, int) { trace_b.push_back(e); });
    }
    CHECK(trace_a == trace_b);
}

TEST_CASE("ParamPolicy validation and draw") {
    KernelParams p;
    p.k_lower = 1;
    p.k_upper = 2;
    ParamPolicy policy;
    policy.options = {p, p};
    policy.probs = {0.6, 0.4};
    CHECK_NOTHROW(policy.validate(6));
    policy.probs = {0.6, 0.6};
    CHECK_THROWS(policy.validate(6));
    policy.probs = {0.6, 0.4};
    std::mt19937_64 rng(1);
    std::map<double, int> seen;
    for (int i = 0; i < 100; ++i) policy.draw(rng);
}

TEST_CASE("long-run empirical distribution matches pi") {
    const IsingModel model = frustrated6();
    const auto pi = exact_distribution(model);
    std::mt19937_64 rng(12);
    SardonicsKernel kernel(model);
    kernel.reset(random_state(6, rng));
    KernelParams p;
    p.k_lower = 1;
    p.k_upper = 3;
    p.gamma_low = 0.9;
    p.gamma_high = 1.1;
    p.p_ll = 0.6;
    p.p_hl = 0.25;
    p.p_lh = 0.15;
    p.n_segments = 2;
    const long n = 200000;
    std::vector<double> counts(64, 0.0);
    for (long i = 0; i < n; ++i) {
        kernel.step(p, rng);
        counts[state_index(kernel.state())] += 1.0;
    }
    for (auto& c : counts) c /= n;
    CHECK(tv_distance(counts, pi) < 0.02);
}
