#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "sardonics/model.hpp"

using namespace sardonics;

TEST_CASE("energy matches brute-force sum") {
    const IsingModel model(4, {{0, 1, 0.5}, {1, 2, -1.0}, {0, 3, 2.0}},
                           {0.1, -0.2, 0.0, 0.3}, 1.0);
    const SpinState s = {1, -1, 1, -1};
    // -J01 s0 s1 - J12 s1 s2 - J03 s0 s3 - sum h_i s_i
    const double expected = -(0.5 * 1 * -1) - (-1.0 * -1 * 1) - (2.0 * 1 * -1) -
                            (0.1 * 1 + -0.2 * -1 + 0.0 * 1 + 0.3 * -1);
    CHECK(energy(model, s) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("flip_delta agrees with recomputed energy difference") {
    std::mt19937_64 rng(3);
    const IsingModel model =
        make_torus_2d(4, ValueSpec::random_sign(), ValueSpec::random_sign(), 1.0, 9);
    SpinState s = random_state(model.num_spins(), rng);
    for (int i = 0; i < model.num_spins(); ++i) {
        const double e0 = energy(model, s);
        const SpinState flipped = apply_flip(s, i);
        CHECK(flip_delta(model, s, i) ==
              doctest::Approx(energy(model, flipped) - e0).epsilon(1e-12));
    }
}

TEST_CASE("local field and flip delta relation") {
    std::mt19937_64 rng(4);
    const IsingModel model = make_bipartite_rbm(6, 4, 0.5, 1.0, 2);
    SpinState s = random_state(model.num_spins(), rng);
    for (int i = 0; i < model.num_spins(); ++i)
        CHECK(flip_delta(model, s, i) ==
              doctest::Approx(2.0 * s[i] * local_field(model, s, i)).epsilon(1e-12));
}

TEST_CASE("constructor validation") {
    CHECK_THROWS(IsingModel(2, {{0, 0, 1.0}}, {0, 0}, 1.0));        // self loop
    CHECK_THROWS(IsingModel(2, {{0, 1, 1.0}, {1, 0, 2.0}}, {0, 0}, 1.0));  // dup
    CHECK_THROWS(IsingModel(2, {{0, 5, 1.0}}, {0, 0}, 1.0));        // range
    CHECK_THROWS(IsingModel(2, {}, {0, 0}, -1.0));                  // beta
    CHECK_THROWS(IsingModel(2, {}, {0.0}, 1.0));                    // field size
}

TEST_CASE("torus counts and degrees") {
    const IsingModel m = make_torus_2d(4, ValueSpec::constant(1.0),
                                       ValueSpec::constant(0.0), 1.0, 1);
    CHECK(m.num_spins() == 16);
    CHECK(m.edges().size() == 32);
    for (int i = 0; i < 16; ++i) CHECK(m.neighbors(i).size() == 4);
}

TEST_CASE("cube counts and degrees") {
    const IsingModel m = make_cube_3d(3, ValueSpec::constant(-1.0),
                                      ValueSpec::constant(0.0), 0.5, 1);
    CHECK(m.num_spins() == 27);
    CHECK(m.edges().size() == 81);
    for (int i = 0; i < 27; ++i) CHECK(m.neighbors(i).size() == 6);
}

TEST_CASE("chimera counts and degrees") {
    const IsingModel m = make_chimera(4, 4, ValueSpec::random_sign(),
                                      ValueSpec::constant(0.0), 1.0, 5);
    CHECK(m.num_spins() == 128);
    // 16 cells x 16 in-cell edges, 12 horizontal links x 4, 12 vertical x 4
    CHECK(m.edges().size() == 352);
    for (const Edge& e : m.edges()) CHECK(std::abs(e.coupling) == 1.0);
    std::vector<int> degree(128, 0);
    for (const Edge& e : m.edges()) {
        ++degree[e.i];
        ++degree[e.j];
    }
    int deg5 = 0, deg6 = 0;
    for (int d : degree) {
        CHECK(d >= 5);
        CHECK(d <= 6);
        d == 5 ? ++deg5 : ++deg6;
    }
    // boundary cells have one missing inter-cell link on the relevant half
    CHECK(deg5 == 64);
    CHECK(deg6 == 64);
}

TEST_CASE("bipartite rbm layout") {
    const IsingModel m = make_bipartite_rbm(5, 3, 0.2, 1.0, 7);
    CHECK(m.num_spins() == 8);
    CHECK(m.bipartition() == 5);
    CHECK(m.edges().size() == 15);
    for (const Edge& e : m.edges()) {
        CHECK(e.i < 5);
        CHECK(e.j >= 5);
    }
}

TEST_CASE("rbm file conversion") {
    // 2 visible, 1 hidden over {0,1} units with weights W, biases b, c.
    // P(v,h) ~ exp(v'Wh + b'v + c'h); the +-1 model must preserve ratios.
    std::ostringstream file;
    file << "rbm 2 1\n"
         << "0.8 -0.4\n"     // W11 W21 (row-major over visible)
         << "0.3 -0.1\n"     // visible biases
         << "0.5\n";         // hidden bias
    const std::string path = "rbm_test_tmp.txt";
    {
        std::ofstream out(path);
        out << file.str();
    }
    const IsingModel m = make_bipartite_rbm_from_file(path, 1.0);
    std::remove(path.c_str());
    CHECK(m.num_spins() == 3);
    CHECK(m.bipartition() == 2);

    const double W[2] = {0.8, -0.4}, b[2] = {0.3, -0.1}, c = 0.5;
    // compare log-probability differences across all 8 configurations
    auto logp01 = [&](int v0, int v1, int h) {
        return v0 * W[0] * h + v1 * W[1] * h + b[0] * v0 + b[1] * v1 + c * h;
    };
    auto to_pm = [](int u) { return static_cast<std::int8_t>(u ? 1 : -1); };
    const double ref = logp01(0, 0, 0);
    const SpinState base = {to_pm(0), to_pm(0), to_pm(0)};
    const double e_base = energy(m, base);
    for (int v0 = 0; v0 < 2; ++v0)
        for (int v1 = 0; v1 < 2; ++v1)
            for (int h = 0; h < 2; ++h) {
                const SpinState s = {to_pm(v0), to_pm(v1), to_pm(h)};
                CHECK(-(energy(m, s) - e_base) ==
                      doctest::Approx(logp01(v0, v1, h) - ref).epsilon(1e-12));
            }
}

TEST_CASE("generator determinism") {
    const IsingModel a = make_torus_2d(5, ValueSpec::random_sign(),
                                       ValueSpec::random_sign(), 1.3, 42);
    const IsingModel b = make_torus_2d(5, ValueSpec::random_sign(),
                                       ValueSpec::random_sign(), 1.3, 42);
    REQUIRE(a.edges().size() == b.edges().size());
    for (std::size_t k = 0; k < a.edges().size(); ++k)
        CHECK(a.edges()[k].coupling == b.edges()[k].coupling);
    CHECK(a.fields() == b.fields());
}

TEST_CASE("save and load round trip") {
    const IsingModel a = make_chimera(2, 3, ValueSpec::random_sign(),
                                      ValueSpec::random_sign(), 0.7, 11);
    std::ostringstream out;
    save_model(a, out);
    std::istringstream in(out.str());
    const IsingModel b = load_model(in);
    CHECK(b.num_spins() == a.num_spins());
    CHECK(b.beta() == a.beta());
    CHECK(b.bipartition() == a.bipartition());
    REQUIRE(b.edges().size() == a.edges().size());
    for (std::size_t k = 0; k < a.edges().size(); ++k) {
        CHECK(b.edges()[k].i == a.edges()[k].i);
        CHECK(b.edges()[k].j == a.edges()[k].j);
        CHECK(b.edges()[k].coupling == a.edges()[k].coupling);
    }
    CHECK(b.fields() == a.fields());
}

TEST_CASE("agreement set and hamming distance") {
    const SpinState x = {1, -1, 1, -1, 1};
    const SpinState y = {1, 1, 1, 1, 1};
    CHECK(agreement_set(x, y) == std::vector<int>{0, 2, 4});
    CHECK(hamming_distance(x, y) == 2);
    CHECK(hamming_distance(x, x) == 0);
}

TEST_CASE("random_state is reproducible and valid") {
    const SpinState a = random_state(50, 123);
    const SpinState b = random_state(50, 123);
    CHECK(a == b);
    for (auto s : a) CHECK((s == 1 || s == -1));
}
