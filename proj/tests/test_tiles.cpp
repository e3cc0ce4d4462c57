#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "carleson/tiles.hpp"

using namespace carleson;

namespace {

// Random undilated tile: time scale in [0, kmax], frequency indices near 0.
Tile random_tile(std::mt19937_64& rng, int d, int kmax = 4, int freq_range = 8) {
    std::int64_t k = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(kmax + 1));
    std::int64_t n = static_cast<std::int64_t>(rng() % (1ull << k));
    std::vector<DyadicInterval> alphas;
    for (int j = 0; j < d; ++j) {
        auto idx = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(2 * freq_range)) -
                   freq_range;
        alphas.push_back({-k, idx});
    }
    return make_tile(DyadicInterval{k, n}, alphas);
}

Tile tile_d2_unit() {
    // d=2, I=[0,1), alpha1=[2,3), alpha2=[5,6)
    return make_tile(DyadicInterval{0, 0}, {DyadicInterval{0, 2}, DyadicInterval{0, 5}});
}

}  // namespace

TEST_CASE("contains_poly") {
    Tile P = tile_d2_unit();
    CHECK(contains_poly(P, Poly({2.6, 3.0})));   // values 2.6, 5.6
    CHECK(!contains_poly(P, Poly::constant(3.5)));
    CHECK(contains_poly(P, central_poly(P)));
    CHECK_THROWS(contains_poly(P, Poly({0, 0, 1})));
}

TEST_CASE("central_poly") {
    Tile P = tile_d2_unit();
    Poly q = central_poly(P);
    CHECK(q.coeff(0) == doctest::Approx(2.5));
    CHECK(q.coeff(1) == doctest::Approx(3.0));

    Tile P1 = make_tile(DyadicInterval{0, 0}, {DyadicInterval{0, 4}});
    CHECK(central_poly(P1).coeff(0) == doctest::Approx(4.5));

    // d=3: centers (0,0,1) at nodes (0,1,0.5) -> 4y - 4y^2. Built from real
    // alphas directly.
    Tile P3;
    P3.time = DyadicInterval{0, 0};
    P3.alphas = {{-0.5, 0.5}, {-0.5, 0.5}, {0.5, 1.5}};
    Poly q3 = central_poly(P3);
    CHECK(q3.coeff(0) == doctest::Approx(0.0));
    CHECK(q3.coeff(1) == doctest::Approx(4.0));
    CHECK(q3.coeff(2) == doctest::Approx(-4.0));
}

TEST_CASE("neighbors") {
    std::mt19937_64 rng(2);
    Tile P1 = random_tile(rng, 1);
    CHECK(neighbors(P1).size() == 3);
    Tile P2 = random_tile(rng, 2);
    auto nb = neighbors(P2);
    CHECK(nb.size() == 9);
    bool self = false;
    for (const auto& t : nb) self = self || t == P2;
    CHECK(self);
    CHECK_THROWS(neighbors(dilate(P2, 2.0)));
}

TEST_CASE("ceil_fn") {
    CHECK(ceil_fn(0) == 1.0);
    CHECK(ceil_fn(3) == 0.25);
    CHECK(ceil_fn(-1) == 0.5);
}

TEST_CASE("leq basics") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 50; ++i) {
        Tile P = random_tile(rng, 2);
        CHECK(leq(P, P));
    }
    Tile A = make_tile(DyadicInterval{0, 0}, {DyadicInterval{0, 0}});
    Tile B = make_tile(DyadicInterval{0, 0}, {DyadicInterval{0, 4}});
    CHECK(!leq(A, B));

    // d=1: P1 box [0,2) on I=[0,0.5) vs P2 box [1,2) on [0,1): q = 1.5 fits.
    Tile C;
    C.time = DyadicInterval{1, 0};
    C.alphas = {{0.0, 2.0}};
    Tile D = make_tile(DyadicInterval{0, 0}, {DyadicInterval{0, 1}});
    CHECK(leq(C, D));
}

TEST_CASE("adjacent half-open boxes do not overlap") {
    // Constant boxes [0,1) and [1,2): sharing only the endpoint is not enough.
    Tile A = make_tile(DyadicInterval{0, 0}, {DyadicInterval{0, 0}});
    Tile B = make_tile(DyadicInterval{0, 0}, {DyadicInterval{0, 1}});
    CHECK(!leq(A, B));
    CHECK(!leq(B, A));
}

TEST_CASE("order relations: reflexive, transitive, implication") {
    std::mt19937_64 rng(8);
    int checked = 0;
    for (int trial = 0; trial < 4000; ++trial) {
        int d = 1 + static_cast<int>(rng() % 2);
        Tile P1 = random_tile(rng, d, 3, 4);
        Tile P2 = random_tile(rng, d, 3, 4);
        CHECK(trianglelefteq(P1, P1));
        if (trianglelefteq(P1, P2)) {
            CHECK(leq(P1, P2));
            ++checked;
        }
    }
    CHECK(checked > 0);  // the implication must actually fire sometimes

    // Transitivity of trianglelefteq on random triples.
    for (int trial = 0; trial < 4000; ++trial) {
        int d = 1 + static_cast<int>(rng() % 2);
        Tile A = random_tile(rng, d, 2, 3);
        Tile B = random_tile(rng, d, 2, 3);
        Tile C = random_tile(rng, d, 2, 3);
        if (trianglelefteq(A, B) && trianglelefteq(B, C)) CHECK(trianglelefteq(A, C));
    }
}

TEST_CASE("dilation monotonicity of membership") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> U(-1, 1);
    std::uniform_real_distribution<double> A(1.0, 5.0);
    int hits = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        int d = 1 + static_cast<int>(rng() % 3);
        Tile P = random_tile(rng, d, 3, 3);
        Poly q = central_poly(P) + Poly({U(rng), U(rng)});
        Poly qt(std::vector<double>(q.coeffs()));
        if (qt.degree() > d - 1) continue;
        bool in = contains_poly(P, qt);
        if (!in) continue;
        ++hits;
        CHECK(contains_poly(dilate(P, A(rng)), qt));
    }
    CHECK(hits > 100);
}

TEST_CASE("pair_delta") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 20; ++i) {
        Tile P = random_tile(rng, 2);
        auto pf = pair_delta(P, P);
        CHECK(pf.delta == 0.0);
        CHECK(pf.ceil_delta == 1.0);
    }
    // d=1, |I|=1, boxes [0,1) and [4,5): inner gap 3, constant in y.
    Tile A = make_tile(DyadicInterval{0, 0}, {DyadicInterval{0, 0}});
    Tile B = make_tile(DyadicInterval{0, 0}, {DyadicInterval{0, 4}});
    auto pf = pair_delta(A, B);
    CHECK(pf.delta == doctest::Approx(3.0));
    CHECK(pf.ceil_delta == doctest::Approx(0.25));

    // Overlapping boxes at all nodes: delta = 0.
    Tile C = make_tile(DyadicInterval{1, 0}, {DyadicInterval{-1, 0}});
    Tile D = make_tile(DyadicInterval{0, 0}, {DyadicInterval{0, 1}});
    CHECK(pair_delta(C, D).delta == 0.0);
}

TEST_CASE("pair_delta refinement stability") {
    std::mt19937_64 rng(31);
    int reported = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        Tile A = random_tile(rng, 2, 3, 6);
        Tile B = random_tile(rng, 2, 3, 6);
        double d1 = pair_delta(A, B, 257).delta;
        double d2 = pair_delta(A, B, 513).delta;
        if (d1 < 0.01) {
            ++reported;  // small-delta pairs reported, not asserted
            continue;
        }
        CHECK(std::abs(d2 - d1) < 0.01 * d1 + 1e-9);
    }
    CHECK(reported >= 0);
}

TEST_CASE("delta_q_P") {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 20; ++i) {
        Tile P = random_tile(rng, 2);
        CHECK(delta_q_P(central_poly(P), P) == 0.0);
    }
    Tile A = make_tile(DyadicInterval{0, 0}, {DyadicInterval{0, 0}});
    CHECK(delta_q_P(Poly::constant(10), A) == doctest::Approx(9.0));
    CHECK(delta_q_P(Poly::constant(0.5), A) == 0.0);  // q in P
}

TEST_CASE("interaction_poly") {
    Tile P = tile_d2_unit();
    CHECK(interaction_poly(P, P).is_zero());
    Tile Q = make_tile(DyadicInterval{0, 0}, {DyadicInterval{0, 2}, DyadicInterval{0, 3}});
    Poly f = interaction_poly(P, Q);
    Poly g = interaction_poly(Q, P);
    for (int i = 0; i <= 2; ++i) CHECK(f.coeff(i) == doctest::Approx(-g.coeff(i)));
}

TEST_CASE("delta_equivalence") {
    Tile P = tile_d2_unit();
    auto r = delta_equivalence_check(P, P);
    CHECK(r.lhs == doctest::Approx(1.0));
    CHECK(r.rhs == doctest::Approx(1.0));
    CHECK(r.ratio == doctest::Approx(1.0));

    std::mt19937_64 rng(51);
    double cmax = 0.0;
    for (int trial = 0; trial < 2000; ++trial) {
        Tile A = random_tile(rng, 2, 3, 5);
        Tile B = random_tile(rng, 2, 3, 5);
        auto e = delta_equivalence_check(A, B);
        double c = std::max(e.ratio, 1.0 / e.ratio);
        cmax = std::max(cmax, c);
    }
    CHECK(cmax < 1e4);  // finite measured constant; value is reported by the harness
}

TEST_CASE("lemma C bound with scale invariance") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> U(-1, 1);
    const int d = 2;
    const double bound = std::pow(13.0, d - 1) * std::pow(static_cast<double>(d), 2 * d);
    double first_const = -1.0;
    for (int k = 2; k <= 8; ++k) {
        double worst = 0.0;
        std::mt19937_64 local(99);  // same draws per scale for invariance
        for (int trial = 0; trial < 1000; ++trial) {
            std::int64_t n = static_cast<std::int64_t>(local() % (1ull << k));
            std::vector<DyadicInterval> alphas;
            for (int j = 0; j < d; ++j)
                alphas.push_back({-k, static_cast<std::int64_t>(local() % 8)});
            Tile P = make_tile(DyadicInterval{static_cast<std::int64_t>(k), n}, alphas);
            // Random q in P: interpolate values inside each alpha.
            auto box = tile_box(P);
            std::uniform_real_distribution<double> V(-0.999, 0.999);
            std::vector<double> vals;
            for (int j = 0; j < d; ++j)
                vals.push_back(box.centers[static_cast<std::size_t>(j)] +
                               V(local) * box.half_widths[static_cast<std::size_t>(j)]);
            Poly q = lagrange(box.nodes, vals);
            REQUIRE(contains_poly(P, q));
            double v = dist_sup(q, central_poly(P), enlarged(P.time)) * P.time.length();
            CHECK(v <= bound);
            worst = std::max(worst, v);
        }
        if (first_const < 0)
            first_const = worst;
        else
            CHECK(worst == doctest::Approx(first_const).epsilon(1e-9));
    }
}

TEST_CASE("tile serialization") {
    std::mt19937_64 rng(71);
    std::vector<Tile> tiles;
    for (int i = 0; i < 50; ++i) tiles.push_back(random_tile(rng, 3));
    std::stringstream ss;
    write_tiles(ss, tiles);
    auto back = read_tiles(ss);
    REQUIRE(back.size() == tiles.size());
    for (std::size_t i = 0; i < tiles.size(); ++i) CHECK(back[i] == tiles[i]);
}

TEST_CASE("geometric tile sampling") {
    Tile P = tile_d2_unit();
    auto rows = sample_geometric_tile(P, 16);
    REQUIRE(rows.size() == 16);
    Poly q = central_poly(P);
    for (const auto& r : rows) {
        CHECK(P.time.contains_point(r.x));
        CHECK(r.center == doctest::Approx(q.eval(r.x)));
        CHECK(r.radius == doctest::Approx(0.5));
    }
}
