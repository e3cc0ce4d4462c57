#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "carleson/forest.hpp"
#include "carleson/operators.hpp"

using namespace carleson;

namespace {

Tile mk(std::int64_t k, std::int64_t idx, const std::vector<std::int64_t>& freq) {
    std::vector<DyadicInterval> alphas;
    for (auto f : freq) alphas.push_back({-k, f});
    return make_tile({k, idx}, alphas);
}

MassTile mt(const Tile& t, double a0) { return {t, a0}; }

std::size_t tree_member_total(const std::vector<TreeT>& trees) {
    std::size_t n = 0;
    for (const auto& t : trees) n += t.members.size();
    return n;
}

}  // namespace

TEST_CASE("rho and parameter validation") {
    CHECK(rho_for_p(2.0) == doctest::Approx(1.0));
    CHECK(rho_for_p(1.5) == doctest::Approx(0.5));
    CHECK(rho_for_p(4.0) == doctest::Approx(0.75));
    CHECK_THROWS_AS(rho_for_p(1.0), std::invalid_argument);

    MassParams ok;
    CHECK_NOTHROW(ok.validate());
    MassParams bad_n = ok;
    bad_n.N = 0;
    CHECK_THROWS_AS(bad_n.validate(), std::invalid_argument);
    MassParams bad_rho = ok;
    bad_rho.rho = 0.0;
    CHECK_THROWS_AS(bad_rho.validate(), std::invalid_argument);
    MassParams big_rho = ok;
    big_rho.p = 1.5;
    big_rho.rho = 0.9;  // cap at p=1.5 is 0.5
    CHECK_THROWS_AS(big_rho.validate(), std::invalid_argument);
    MassParams bad_k = ok;
    bad_k.K = 0.0;
    CHECK_THROWS_AS(bad_k.validate(), std::invalid_argument);
}

TEST_CASE("mass basics") {
    Tile T = mk(0, 0, {0});
    Tile A = mk(1, 0, {0});
    Tile B = mk(2, 0, {0});

    std::vector<MassTile> uni = {mt(T, 0.25), mt(A, 0.5), mt(B, 0.125)};
    // Own density is always reachable through P' = P.
    CHECK(mass(A, uni) >= 0.5);
    CHECK(mass(B, uni) >= 0.125);
    // Upper bound 1 and the exhaustive two-element cross-check.
    for (const auto& u : uni) CHECK(mass(u.tile, uni) <= 1.0 + 1e-12);
    std::vector<MassTile> two = {mt(B, 0.125), mt(T, 0.25)};
    PairFactor pf = pair_delta(dilate(B, 2.0), dilate(T, 2.0));
    double expect = std::max(0.125, 0.25 * std::pow(pf.ceil_delta, 12));
    CHECK(mass(B, two) == doctest::Approx(expect));

    // Empty E everywhere gives zero mass.
    std::vector<MassTile> zero = {mt(T, 0.0), mt(A, 0.0)};
    CHECK(mass(A, zero) == 0.0);

    // Antitone under universe shrinkage.
    std::vector<MassTile> small = {mt(B, 0.125)};
    CHECK(mass(B, small) <= mass(B, uni) + 1e-12);

    // No tile containing the queried time interval.
    std::vector<MassTile> disjoint = {mt(A, 0.5)};
    CHECK_THROWS_AS(mass(T, disjoint), std::invalid_argument);
}

TEST_CASE("mass levels") {
    Tile T = mk(0, 0, {0});
    std::vector<MassTile> u1 = {mt(T, 1.0)};
    MassLevels l1 = mass_levels(u1);
    CHECK(l1.masses[0] == doctest::Approx(1.0));
    CHECK(l1.levels[0] == 0);

    std::vector<MassTile> u2 = {mt(T, 0.3)};
    MassLevels l2 = mass_levels(u2);
    CHECK(l2.levels[0] == 1);

    std::vector<MassTile> u3 = {mt(T, 0.0)};
    CHECK(mass_levels(u3).levels[0] == -1);

    // Every tile lands in exactly one level class.
    std::vector<MassTile> u4 = {mt(T, 0.6), mt(mk(1, 0, {0}), 0.2),
                                mt(mk(1, 1, {0}), 0.0)};
    MassLevels l4 = mass_levels(u4);
    std::size_t total = 0;
    for (int n = -1; n < 8; ++n) total += l4.level_members(n).size();
    CHECK(total == u4.size());
    for (std::size_t i = 0; i < u4.size(); ++i) {
        double a = l4.masses[i];
        int n = l4.levels[i];
        if (n < 0) {
            CHECK(a == 0.0);
        } else {
            CHECK(a <= std::ldexp(1.0, -n));
            if (n > 0) CHECK(a > std::ldexp(1.0, -n - 1));
        }
    }
}

TEST_CASE("maximal tile selection") {
    // Incomparable qualifying tiles: all kept.
    std::vector<MassTile> inc = {mt(mk(1, 0, {0}), 0.5), mt(mk(1, 1, {5}), 0.5)};
    CHECK(select_maximal(inc, 0).size() == 2);

    // Strict chain: only the larger survives.
    std::vector<MassTile> chain = {mt(mk(1, 0, {0}), 0.5), mt(mk(0, 0, {0}), 0.5)};
    auto kept = select_maximal(chain, 0);
    REQUIRE(kept.size() == 1);
    CHECK(chain[kept[0]].tile.time.scale == 0);

    // A lower density floor admits more tiles but maximality still filters.
    CHECK(select_maximal(chain, 3).size() == 1);
    std::vector<MassTile> weak = {mt(mk(1, 0, {0}), 0.1)};
    CHECK(select_maximal(weak, 0).empty());  // floor 1/2
    CHECK(select_maximal({}, 0).empty());
}

TEST_CASE("counting function and overlap set") {
    MassParams params;  // K=4, rho=1, M=3

    // Disjoint tops: counts at most one, overlap set empty.
    std::vector<MassTile> disjoint = {mt(mk(1, 0, {0}), 0.5), mt(mk(1, 1, {0}), 0.5)};
    CountingReport r1 = counting_and_gn(disjoint, 0, params, 5);
    CHECK(*std::max_element(r1.counts.begin(), r1.counts.end()) == 1);
    CHECK(r1.gn_cells.empty());
    CHECK(r1.threshold == doctest::Approx(4.0));

    // Five equal tops on [0, 1/2): count 5 there, threshold 4 exceeded.
    std::vector<MassTile> stack(5, mt(mk(1, 0, {0}), 0.5));
    CountingReport r2 = counting_and_gn(stack, 0, params, 5);
    CHECK(r2.gn_measure == doctest::Approx(0.5));
    CHECK(r2.counts.front() == 5);
    CHECK(r2.counts.back() == 0);
    // Mean oscillation is maximized on the whole interval: 2 * (5/2) * 1/2.
    CHECK(r2.bmo_norm == doctest::Approx(2.5));
    // Both reported level-set estimates dominate the measured set.
    CHECK(r2.gn_measure <= r2.cheb_bound + 1e-12);
    CHECK(r2.gn_measure <= r2.vector_bound + 1e-12);
    CHECK(r1.gn_measure <= r1.cheb_bound + 1e-12);
    CHECK(r1.gn_measure <= r1.vector_bound + 1e-12);
}

TEST_CASE("triangle filter") {
    // A strict chain of three nested tiles.
    std::vector<MassTile> level = {mt(mk(1, 0, {0}), 0.5), mt(mk(2, 0, {0}), 0.5),
                                   mt(mk(3, 0, {0}), 0.5)};
    CountingReport empty_gn;
    empty_gn.grid_m = 3;

    // No tops: everything is residue, layered by chain depth.
    TriangleSplit s1 = triangle_filter(level, {}, 5, empty_gn);
    CHECK(s1.p0.empty());
    CHECK(s1.stranded.empty());
    CHECK(s1.antichains.size() == 3);  // min(chain length, n)
    for (const auto& layer : s1.antichains) {
        CHECK(layer.size() == 1);
        for (std::size_t a : layer)
            for (std::size_t b : layer)
                if (a != b)
                    CHECK(!(leq(level[a].tile, level[b].tile) &&
                            !leq(level[b].tile, level[a].tile)));
    }

    // n = 2 forbids two strict ascents: the deepest tile is stranded.
    TriangleSplit s2 = triangle_filter(level, {}, 2, empty_gn);
    REQUIRE(s2.stranded.size() == 1);
    CHECK(level[s2.stranded[0]].tile.time.scale == 3);
    CHECK(s2.antichains.size() == 2);

    // With a top above everything the whole level clusters.
    std::vector<MassTile> tops = {mt(mk(0, 0, {0}), 0.5)};
    TriangleSplit s3 = triangle_filter(level, tops, 5, empty_gn);
    CHECK(s3.p0.size() == 3);
    CHECK(s3.antichains.empty());
    // Empty overlap set: nothing dropped.
    CHECK(s3.png == s3.p0);

    // Overlap cells covering the deepest tile's interval drop it.
    CountingReport gn;
    gn.grid_m = 3;
    gn.gn_cells = {0};  // [0, 1/8) = time interval of the scale-3 tile
    TriangleSplit s4 = triangle_filter(level, tops, 5, gn);
    CHECK(s4.png.size() == 2);
    for (std::size_t i : s4.png) CHECK(level[i].tile.time.scale != 3);
}

TEST_CASE("geometric union") {
    Tile a = mk(1, 0, {0});
    Tile b = mk(1, 0, {2});
    Tile u = geometric_union({a, b});
    CHECK(u.alphas[0].lo == doctest::Approx(0.0));
    CHECK(u.alphas[0].hi == doctest::Approx(6.0));
    CHECK(u.time == a.time);
    CHECK_THROWS_AS(geometric_union({a, mk(1, 1, {0})}), std::invalid_argument);
    CHECK_THROWS_AS(geometric_union({}), std::invalid_argument);
}

TEST_CASE("tree certification") {
    Tile top = mk(0, 0, {0});
    std::vector<Tile> members = {mk(1, 0, {0}), mk(2, 0, {0})};
    std::vector<Tile> ambient = members;
    ambient.push_back(top);
    TreeCertificate good = certify_tree(top, members, ambient);
    CHECK(good.pass());
    CHECK(good.witness.empty());

    // A member with a far-away frequency violates the dilate condition.
    std::vector<Tile> bad = members;
    bad.push_back(mk(2, 1, {4000}));
    TreeCertificate fail = certify_tree(top, bad, ambient);
    CHECK(!fail.cond_dilate);
    CHECK(!fail.witness.empty());

    // Convexity violation: the middle of a sandwich is ambient but missing.
    std::vector<Tile> gap = {mk(3, 0, {0}), mk(1, 0, {0})};
    std::vector<Tile> ambient2 = {mk(3, 0, {0}), mk(2, 0, {0}), mk(1, 0, {0})};
    TreeCertificate conv = certify_tree(top, gap, ambient2);
    CHECK(!conv.cond_convex);
}

TEST_CASE("forest construction") {
    MassParams params;

    SUBCASE("single top, one tree") {
        std::vector<MassTile> tops = {mt(mk(0, 0, {0}), 0.5)};
        std::vector<MassTile> png = {mt(mk(1, 0, {0}), 0.5), mt(mk(2, 0, {0}), 0.5),
                                     mt(mk(2, 1, {0}), 0.5), mt(mk(3, 0, {0}), 0.5)};
        ForestBuild fb = build_forest(png, tops, params, 0);
        CHECK(fb.no_top.empty());
        REQUIRE(fb.layers.size() == 1);
        const ForestLayer& layer = fb.layers[0];
        CHECK(layer.prop_a);
        CHECK(layer.prop_b);
        CHECK(layer.prop_c);
        CHECK(layer.merge_bound_ok);
        // Conservation inside the layer: discard set plus tree members.
        CHECK(layer.discarded.size() + tree_member_total(layer.trees) == png.size());
        for (const auto& tree : layer.trees) CHECK(tree.cert.pass());
        CHECK(!fb.to_json().empty());
    }

    SUBCASE("two disjoint tops, two trees, no merge") {
        std::vector<MassTile> tops = {mt(mk(1, 0, {0}), 0.5), mt(mk(1, 1, {0}), 0.5)};
        std::vector<MassTile> png = {
            mt(mk(2, 0, {0}), 0.5), mt(mk(3, 0, {0}), 0.5), mt(mk(4, 0, {0}), 0.5),
            mt(mk(2, 2, {0}), 0.5), mt(mk(3, 4, {0}), 0.5), mt(mk(4, 8, {0}), 0.5)};
        ForestBuild fb = build_forest(png, tops, params, 0);
        REQUIRE(fb.layers.size() == 1);
        const ForestLayer& layer = fb.layers[0];
        CHECK(layer.trees.size() == 2);
        CHECK(layer.max_merge == 1);
        CHECK(layer.discarded.size() + tree_member_total(layer.trees) == png.size());
        for (const auto& tree : layer.trees) {
            CHECK(tree.cert.pass());
            for (const auto& m : tree.members)
                CHECK(m.time.contained_in(tree.top.time));
        }
    }
}

TEST_CASE("tree separation") {
    auto singleton = [](const Tile& t) {
        TreeT tree;
        tree.top = t;
        tree.members = {t};
        return tree;
    };

    // Disjoint top time intervals: vacuous pass.
    SeparationReport v =
        separation_check(singleton(mk(1, 0, {0})), singleton(mk(1, 1, {0})), 0.1);
    CHECK(v.pass);
    CHECK(v.vacuous);

    // A tree against itself fails with the top as witness.
    TreeT self = singleton(mk(0, 0, {0}));
    SeparationReport f = separation_check(self, self, 0.5);
    CHECK(!f.pass);
    CHECK(f.witness_value == doctest::Approx(1.0));

    // Far-apart frequency boxes on the same interval separate.
    SeparationReport s =
        separation_check(singleton(mk(0, 0, {0})), singleton(mk(0, 0, {100000})), 0.1);
    CHECK(s.pass);
    CHECK(!s.vacuous);
}

TEST_CASE("normality trimming and rows") {
    MassParams params;
    params.K = 0.85;
    params.M = 1;
    double delta = 0.9;

    SUBCASE("one deep tree packs into one row") {
        TreeT tree;
        tree.top = mk(0, 0, {0});
        tree.members = {mk(15, 16384, {0})};  // tiny, central: normal
        RowsResult rr = normalize_and_rows({tree}, params, delta);
        REQUIRE(rr.rows.size() == 1);
        REQUIRE(rr.rows[0].size() == 1);
        CHECK(rr.rows[0][0].members.size() == 1);
        CHECK(rr.trimmed.empty());
        CHECK(rr.row_bound_ok);
        // Collar measure matches the arithmetic bound.
        CHECK(rr.f_n_measure == doctest::Approx(rr.f_n_bound));
        CHECK(!rr.to_json().empty());
    }

    SUBCASE("shallow members are trimmed as non-normal") {
        TreeT tree;
        tree.top = mk(0, 0, {0});
        tree.members = {mk(2, 1, {0})};  // far too large to be normal
        RowsResult rr = normalize_and_rows({tree}, params, delta);
        CHECK(rr.trimmed.size() == 1);
        CHECK(rr.rows.size() == 1);
        CHECK(rr.rows[0][0].members.empty());
    }

    SUBCASE("disjoint tops share a row") {
        TreeT t1, t2;
        t1.top = mk(1, 0, {0});
        t2.top = mk(1, 1, {0});
        RowsResult rr = normalize_and_rows({t1, t2}, params, delta);
        CHECK(rr.rows.size() == 1);
        CHECK(rr.rows[0].size() == 2);
    }

    SUBCASE("chain pruning splits into antichain layers") {
        MassParams pr;
        pr.K = 0.9;
        pr.M = 1;
        double d2 = 0.89;  // L = 100 log2(0.9/0.89) ~ 1.6
        TreeT tree;
        tree.top = mk(0, 0, {0});
        for (int k = 1; k <= 5; ++k) tree.members.push_back(mk(k, 0, {0}));
        RowsResult rr = normalize_and_rows({tree}, pr, d2);
        std::size_t plus = 0, minus = 0;
        for (const auto& l : rr.plus_layers) plus += l.size();
        for (const auto& l : rr.minus_layers) minus += l.size();
        CHECK(rr.plus_layers.size() <= 2);   // <= ceil(L)
        CHECK(rr.minus_layers.size() <= 2);
        CHECK(plus == 2);
        CHECK(minus == 2);
        // Antichain property within each layer.
        for (const auto& l : rr.plus_layers)
            for (const auto& a : l)
                for (const auto& b : l)
                    if (!(a == b)) CHECK(!(leq(a, b) && !leq(b, a)));
        // Conservation of members.
        std::size_t kept = 0;
        for (const auto& row : rr.rows)
            for (const auto& t : row) kept += t.members.size();
        CHECK(plus + minus + rr.trimmed.size() + kept == tree.members.size());
    }

    CHECK_THROWS_AS(normalize_and_rows({}, params, 1.5), std::invalid_argument);
}

TEST_CASE("forest certificate") {
    MassParams params;
    params.K = 0.85;
    params.M = 1;
    double delta = 0.9;

    TreeT t1, t2;
    t1.top = mk(1, 0, {0});
    t1.members = {mk(3, 0, {0})};
    t2.top = mk(1, 1, {0});
    t2.members = {mk(3, 4, {0})};
    std::vector<MassTile> uni = {mt(t1.top, 0.4), mt(t1.members[0], 0.4),
                                 mt(t2.top, 0.4), mt(t2.members[0], 0.4),
                                 mt(mk(0, 0, {0}), 0.4)};
    RowsResult rows = normalize_and_rows({t1, t2}, params, delta);
    ForestCertificate cert = certify_forest({t1, t2}, uni, params, 1, delta, rows);
    CHECK(cert.mass_ok);
    CHECK(cert.separation_ok);  // disjoint tops, vacuous
    CHECK(cert.overlap_ok);
    CHECK(cert.rows_ok);
    CHECK(cert.pass());
    CHECK(!cert.to_json().empty());

    // Duplicated tree: separation fails with a recorded witness.
    ForestCertificate bad = certify_forest({t1, t1}, uni, params, 1, delta, rows);
    CHECK(!bad.separation_ok);
    CHECK(bad.first_failure.rfind("separation", 0) == 0);
}

TEST_CASE("pipeline on a generated corpus") {
    // Phase data produces tiles and densities; the decomposition stages must
    // conserve every tile.
    PhaseAssignment sigma;
    sigma.m = 6;
    sigma.d = 1;
    sigma.a.resize(std::size_t{1} << 6);
    for (std::size_t c = 0; c < sigma.a.size(); ++c)
        sigma.a[c] = {c < 32 ? 12.0 : -20.0};

    std::vector<MassTile> universe;
    for (int k = 0; k <= 3; ++k)
        for (const auto& t : active_tiles(sigma, k))
            universe.push_back({t, compute_EP(t, sigma).a0});
    REQUIRE(!universe.empty());

    MassParams params;
    MassLevels levels = mass_levels(universe, params.N);
    std::size_t seen = 0;
    for (int n = -1; n < 40; ++n) seen += levels.level_members(n).size();
    CHECK(seen == universe.size());

    // Work the most populated level through the whole pipeline.
    int best_n = 0;
    std::size_t best = 0;
    for (int n = 0; n < 40; ++n) {
        auto members = levels.level_members(n).size();
        if (members > best) {
            best = members;
            best_n = n;
        }
    }
    REQUIRE(best > 0);

    auto top_idx = select_maximal(universe, best_n);
    std::vector<MassTile> tops;
    for (auto i : top_idx) tops.push_back(universe[i]);
    std::vector<MassTile> level;
    for (auto i : levels.level_members(best_n)) level.push_back(universe[i]);

    CountingReport gn = counting_and_gn(tops, best_n, params, 6);
    TriangleSplit split = triangle_filter(level, tops, best_n, gn);
    std::size_t layered = 0;
    for (const auto& l : split.antichains) layered += l.size();
    CHECK(split.p0.size() + layered + split.stranded.size() == level.size());

    std::vector<MassTile> png;
    for (auto i : split.png) png.push_back(level[i]);
    ForestBuild fb = build_forest(png, tops, params, best_n);
    std::size_t placed = fb.no_top.size();
    for (const auto& layer : fb.layers) {
        placed += layer.discarded.size() + tree_member_total(layer.trees);
        CHECK(layer.prop_a);
        CHECK(layer.prop_b);
        CHECK(layer.prop_c);
        for (const auto& tree : layer.trees) CHECK(tree.cert.pass());
    }
    CHECK(placed == png.size());

    // Rows stage runs and conserves members on every layer.
    for (const auto& layer : fb.layers) {
        if (layer.trees.empty()) continue;
        RowsResult rr = normalize_and_rows(layer.trees, params, 0.5);
        std::size_t plus = 0, minus = 0, kept = 0;
        for (const auto& l : rr.plus_layers) plus += l.size();
        for (const auto& l : rr.minus_layers) minus += l.size();
        for (const auto& row : rr.rows)
            for (const auto& t : row) kept += t.members.size();
        CHECK(plus + minus + rr.trimmed.size() + kept ==
              tree_member_total(layer.trees));
        CHECK(rr.row_bound_ok);
    }
}
