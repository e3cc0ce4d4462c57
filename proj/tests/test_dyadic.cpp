#include "doctest.h"

#include <random>

#include "carleson/dyadic.hpp"

using namespace carleson;

TEST_CASE("center") {
    CHECK(center(RealInterval{0, 1}) == 0.5);
    CHECK(center(RealInterval{0.25, 0.5}) == 0.375);
    CHECK(center(RealInterval{-1, 1}) == 0.0);
}

TEST_CASE("brothers") {
    DyadicInterval I{1, 0};  // [0, 0.5)
    CHECK(I.right_brother().lo() == 0.5);
    CHECK(I.right_brother().hi() == 1.0);
    CHECK(I.left_brother().lo() == -0.5);
    DyadicInterval J{1, 1};  // [0.5, 1)
    CHECK(J.right_brother().lo() == 1.0);
    CHECK(J.right_brother().hi() == 1.5);
    CHECK(J.left_brother() == I);
    DyadicInterval U{0, 0};
    CHECK(U.right_brother().index == 1);
    CHECK(U.left_brother().index == -1);
}

TEST_CASE("dilate") {
    auto t = dilate(RealInterval{0, 1}, 13.0);
    CHECK(t.lo == -6.0);
    CHECK(t.hi == 7.0);
    auto u = dilate(RealInterval{0.25, 0.5}, 2.0);
    CHECK(u.lo == 0.125);
    CHECK(u.hi == 0.625);
    auto v = dilate(RealInterval{0.25, 0.5}, 1.0);
    CHECK(v.lo == 0.25);
    CHECK(v.hi == 0.5);
    CHECK_THROWS(dilate(RealInterval{0, 1}, 0.0));
}

TEST_CASE("star") {
    auto s = star(DyadicInterval{2, 0});  // [0, 0.25)
    CHECK(s.right.lo == 1.0);
    CHECK(s.right.hi == 1.5);
    CHECK(s.left.lo == -1.25);
    CHECK(s.left.hi == -0.75);
    auto u = star(DyadicInterval{0, 0});  // [0, 1)
    CHECK(u.right.lo == 4.0);
    CHECK(u.right.hi == 6.0);
    CHECK(u.left.lo == -5.0);
    CHECK(u.left.hi == -3.0);
    // |I*| = 4|I|, dist(I*, I) = 3|I|
    for (std::int64_t k = 0; k <= 6; ++k) {
        DyadicInterval I{k, 1};
        auto st = star(I);
        CHECK(st.left.length() + st.right.length() == doctest::Approx(4 * I.length()));
        CHECK(st.right.lo - I.hi() == doctest::Approx(3 * I.length()));
        CHECK(I.lo() - st.left.hi == doctest::Approx(3 * I.length()));
    }
}

TEST_CASE("node_points") {
    auto n3 = node_points(RealInterval{0, 1}, 3).points;
    CHECK(n3 == std::vector<double>{0, 1, 0.5});
    auto n5 = node_points(RealInterval{0, 1}, 5).points;
    CHECK(n5 == std::vector<double>{0, 1, 0.5, 0.25, 0.75});
    auto n8 = node_points(RealInterval{0, 1}, 8).points;
    CHECK(n8 == std::vector<double>{0, 1, 0.5, 0.25, 0.75, 0.125, 0.375, 0.625});
    CHECK_THROWS(node_points(RealInterval{0, 1}, 0));
}

TEST_CASE("node system gap and closure, d <= 8") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::int64_t k = static_cast<std::int64_t>(rng() % 8);
        std::int64_t n = static_cast<std::int64_t>(rng() % (1ull << k));
        DyadicInterval I{k, n};
        for (int d = 1; d <= 8; ++d) {
            auto ns = node_points(I, d);
            REQUIRE(ns.size() == d);
            for (double x : ns.points) {
                CHECK(x >= I.lo());
                CHECK(x <= I.hi());
            }
            if (d >= 2) CHECK(ns.min_gap() >= I.length() / (2.0 * d));
        }
    }
}

TEST_CASE("equal-scale dyadic intervals are disjoint or identical") {
    for (std::int64_t n = 0; n < 16; ++n)
        for (std::int64_t m = 0; m < 16; ++m) {
            DyadicInterval a{4, n}, b{4, m};
            bool same = a == b;
            bool disjoint = a.hi() <= b.lo() || b.hi() <= a.lo();
            CHECK((same || disjoint));
        }
}

TEST_CASE("containment is exact") {
    DyadicInterval I{4, 5};
    CHECK(I.contained_in(I.parent()));
    CHECK(I.contained_in(DyadicInterval{0, 0}));
    CHECK(!I.contained_in(DyadicInterval{5, 10}));
    CHECK(I.left_child().contained_in(I));
    CHECK(I.right_child().contained_in(I));
    CHECK(!I.right_brother().contained_in(I));
}

TEST_CASE("largest_dyadic_in") {
    auto a = largest_dyadic_in(RealInterval{0.3, 0.9});
    CHECK(a == DyadicInterval{2, 2});  // [0.5, 0.75)
    auto b = largest_dyadic_in(RealInterval{0, 1});
    CHECK(b == DyadicInterval{0, 0});
    auto c = largest_dyadic_in(RealInterval{0.1, 0.6});
    CHECK(c == DyadicInterval{2, 1});  // [0.25, 0.5)
    CHECK_THROWS(largest_dyadic_in(RealInterval{0.3, 0.3}));
}

TEST_CASE("dilate composes multiplicatively") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.1, 5.0);
    for (int i = 0; i < 500; ++i) {
        RealInterval I{U(rng), 0};
        I.hi = I.lo + U(rng);
        double a = U(rng), b = U(rng);
        auto lhs = dilate(dilate(I, a), b);
        auto rhs = dilate(I, a * b);
        CHECK(lhs.lo == doctest::Approx(rhs.lo).epsilon(1e-12));
        CHECK(lhs.hi == doctest::Approx(rhs.hi).epsilon(1e-12));
    }
}
