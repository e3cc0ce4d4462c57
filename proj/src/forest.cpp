#include "carleson/forest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace carleson {

namespace {

using json = nlohmann::json;

bool strictly_less(const Tile& a, const Tile& b) {
    return leq(a, b) && !leq(b, a);
}

bool same_time(const Tile& a, const Tile& b) { return a.time == b.time; }

bool times_disjoint(const DyadicInterval& a, const DyadicInterval& b) {
    return !a.contained_in(b) && !b.contained_in(a);
}

// Longest strict chain strictly above / below each tile, via memoized DFS
// on the precomputed strict-order matrix.
std::vector<int> chain_depths(const std::vector<const Tile*>& tiles, bool above) {
    std::size_t n = tiles.size();
    std::vector<std::vector<bool>> lt(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) lt[i][j] = strictly_less(*tiles[i], *tiles[j]);
    std::vector<int> depth(n, -1);
    std::function<int(std::size_t)> rec = [&](std::size_t i) -> int {
        if (depth[i] >= 0) return depth[i];
        depth[i] = 0;
        int best = 0;
        for (std::size_t j = 0; j < n; ++j) {
            bool edge = above ? lt[i][j] : lt[j][i];
            if (edge) best = std::max(best, 1 + rec(j));
        }
        return depth[i] = best;
    };
    for (std::size_t i = 0; i < n; ++i) rec(i);
    return depth;
}

json tile_json(const Tile& t) {
    json j;
    j["time"] = {t.time.scale, t.time.index};
    j["dilation"] = t.dilation;
    json a = json::array();
    for (const auto& al : t.alphas) a.push_back({al.lo, al.hi});
    j["alphas"] = a;
    return j;
}

}  // namespace

double rho_for_p(double p) {
    if (p <= 1.0) throw std::invalid_argument("p must exceed 1");
    if (p == 2.0) return 1.0;
    return std::min(1.0, std::abs(p - 1.0) / (2.0 * std::abs(2.0 - p)));
}

void MassParams::validate() const {
    if (N < 1) throw std::invalid_argument("N must be at least 1");
    if (!(K > 0.0) || M <= 0) throw std::invalid_argument("K and M must be positive");
    if (!(p > 1.0)) throw std::invalid_argument("p must exceed 1");
    double cap = rho_for_p(p);
    if (!(rho > 0.0) || rho > cap + 1e-12)
        throw std::invalid_argument("rho out of range for this p");
}

double mass(const Tile& P, const std::vector<MassTile>& universe, int N) {
    bool any = false;
    double best = 0.0;
    Tile p2 = dilate(P, 2.0);
    for (const auto& u : universe) {
        if (!P.time.contained_in(u.tile.time)) continue;
        any = true;
        if (u.a0 <= 0.0) continue;
        PairFactor pf = pair_delta(p2, dilate(u.tile, 2.0));
        best = std::max(best, u.a0 * std::pow(pf.ceil_delta, N));
    }
    if (!any)
        throw std::invalid_argument("mass: universe has no tile containing the time interval");
    return best;
}

std::vector<std::size_t> MassLevels::level_members(int n) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < levels.size(); ++i)
        if (levels[i] == n) out.push_back(i);
    return out;
}

MassLevels mass_levels(const std::vector<MassTile>& universe, int N) {
    MassLevels out;
    out.masses.reserve(universe.size());
    out.levels.reserve(universe.size());
    for (const auto& mt : universe) {
        double a = mass(mt.tile, universe, N);
        out.masses.push_back(a);
        if (a <= 0.0) {
            out.levels.push_back(-1);
            continue;
        }
        int n = static_cast<int>(std::floor(-std::log2(a)));
        while (a > std::ldexp(1.0, -n)) --n;       // rounding guards for the
        while (a <= std::ldexp(1.0, -n - 1)) ++n;  // half-open level bands
        out.levels.push_back(std::max(n, 0));
    }
    return out;
}

std::vector<std::size_t> select_maximal(const std::vector<MassTile>& universe, int n) {
    double floor_a0 = std::ldexp(1.0, -n - 1);
    std::vector<std::size_t> qual;
    for (std::size_t i = 0; i < universe.size(); ++i)
        if (universe[i].a0 >= floor_a0) qual.push_back(i);
    std::vector<std::size_t> out;
    for (std::size_t i : qual) {
        bool maximal = true;
        for (std::size_t j : qual) {
            if (i == j) continue;
            if (leq(universe[i].tile, universe[j].tile) &&
                !leq(universe[j].tile, universe[i].tile)) {
                maximal = false;
                break;
            }
        }
        if (maximal) out.push_back(i);
    }
    return out;
}

CountingReport counting_and_gn(const std::vector<MassTile>& tops, int n,
                               const MassParams& params, int grid_m) {
    if (grid_m < 0 || grid_m > 24) throw std::invalid_argument("bad grid size");
    params.validate();
    CountingReport r;
    r.grid_m = grid_m;
    r.threshold = std::pow(2.0, (1.0 + params.rho) * n) * params.K;
    std::size_t cells = std::size_t{1} << grid_m;
    double h = 1.0 / static_cast<double>(cells);
    r.counts.assign(cells, 0);
    std::vector<double> hl(cells, 0.0);  // sum of maximal-function powers
    double rho_prime = params.rho / 2.0;
    for (const auto& t : tops) {
        RealInterval I = t.tile.time.as_real();
        for (std::size_t c = 0; c < cells; ++c) {
            double x = (static_cast<double>(c) + 0.5) * h;
            if (I.contains(x)) r.counts[c] += 1;
            double dist = x < I.lo ? I.lo - x : (x >= I.hi ? x - I.hi : 0.0);
            double star = I.length() / (I.length() + dist);
            hl[c] += std::pow(star, 1.0 + rho_prime);
        }
    }
    double int_nm = 0.0, int_sm = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
        if (static_cast<double>(r.counts[c]) >= r.threshold) r.gn_cells.push_back(c);
        int_nm += std::pow(static_cast<double>(r.counts[c]), params.M) * h;
        int_sm += std::pow(hl[c], params.M) * h;
    }
    r.gn_measure = static_cast<double>(r.gn_cells.size()) * h;
    double tm = std::pow(r.threshold, -params.M);
    r.cheb_bound = tm * int_nm;
    r.vector_bound = tm * int_sm;
    // Dyadic BMO: mean oscillation over every grid-aligned dyadic interval.
    double bmo = 0.0;
    for (int s = 0; s <= grid_m; ++s) {
        std::size_t per = cells >> s;
        for (std::size_t k = 0; k < (std::size_t{1} << s); ++k) {
            double avg = 0.0;
            for (std::size_t c = k * per; c < (k + 1) * per; ++c)
                avg += static_cast<double>(r.counts[c]);
            avg /= static_cast<double>(per);
            double osc = 0.0;
            for (std::size_t c = k * per; c < (k + 1) * per; ++c)
                osc += std::abs(static_cast<double>(r.counts[c]) - avg);
            bmo = std::max(bmo, osc / static_cast<double>(per));
        }
    }
    r.bmo_norm = bmo;
    return r;
}

TriangleSplit triangle_filter(const std::vector<MassTile>& level_tiles,
                              const std::vector<MassTile>& tops, int n,
                              const CountingReport& gn) {
    TriangleSplit out;
    std::size_t sz = level_tiles.size();
    std::vector<bool> clustered(sz, false);
    for (std::size_t i = 0; i < sz; ++i) {
        Tile p4 = dilate(level_tiles[i].tile, 4.0);
        for (const auto& t : tops) {
            if (trianglelefteq(p4, t.tile) && !trianglelefteq(t.tile, p4)) {
                clustered[i] = true;
                break;
            }
        }
        if (clustered[i]) out.p0.push_back(i);
    }
    // Chain condition within the whole level, then depth layering of the
    // residue within itself.
    std::vector<const Tile*> ptrs;
    ptrs.reserve(sz);
    for (const auto& mt : level_tiles) ptrs.push_back(&mt.tile);
    std::vector<int> above = chain_depths(ptrs, true);
    std::vector<std::size_t> residue;
    for (std::size_t i = 0; i < sz; ++i) {
        if (clustered[i]) continue;
        if (n > 0 && above[i] >= n)
            out.stranded.push_back(i);
        else
            residue.push_back(i);
    }
    std::vector<const Tile*> rptrs;
    rptrs.reserve(residue.size());
    for (std::size_t i : residue) rptrs.push_back(&level_tiles[i].tile);
    std::vector<int> rdepth = chain_depths(rptrs, false);
    std::vector<std::vector<std::size_t>> layers;
    for (std::size_t r = 0; r < residue.size(); ++r) {
        auto depth = static_cast<std::size_t>(rdepth[r]);
        if (layers.size() <= depth) layers.resize(depth + 1);
        layers[depth].push_back(residue[r]);
    }
    out.antichains = std::move(layers);
    // Drop clustered tiles whose time interval sits inside the overlap set.
    std::set<std::size_t> gset(gn.gn_cells.begin(), gn.gn_cells.end());
    std::size_t cells = std::size_t{1} << gn.grid_m;
    for (std::size_t i : out.p0) {
        RealInterval I = level_tiles[i].tile.time.as_real();
        auto first = static_cast<std::size_t>(
            std::floor(I.lo * static_cast<double>(cells)));
        auto last = static_cast<std::size_t>(
            std::ceil(I.hi * static_cast<double>(cells)));
        last = std::min(last, cells);
        bool inside = first < last;
        for (std::size_t c = first; c < last && inside; ++c)
            inside = gset.count(c) > 0;
        if (!inside) out.png.push_back(i);
    }
    return out;
}

Tile geometric_union(const std::vector<Tile>& tiles) {
    if (tiles.empty()) throw std::invalid_argument("geometric_union: empty input");
    Tile out = tiles.front();
    out.dyadic_alphas.clear();
    for (std::size_t i = 1; i < tiles.size(); ++i) {
        if (!same_time(tiles[i], out))
            throw std::invalid_argument("geometric_union: mixed time intervals");
        for (int j = 0; j < out.d(); ++j) {
            out.alphas[j].lo = std::min(out.alphas[j].lo, tiles[i].alphas[j].lo);
            out.alphas[j].hi = std::max(out.alphas[j].hi, tiles[i].alphas[j].hi);
        }
    }
    return out;
}

TreeCertificate certify_tree(const Tile& top, const std::vector<Tile>& members,
                             const std::vector<Tile>& ambient) {
    TreeCertificate cert;
    cert.cond_dilate = true;
    cert.cond_neighbors = true;
    cert.cond_convex = true;
    Tile top10 = dilate(top, 10.0);
    auto is_member = [&](const Tile& t) {
        return std::any_of(members.begin(), members.end(),
                           [&](const Tile& m) { return m == t; });
    };
    for (const auto& P : members) {
        if (!leq(dilate(P, 1.5), top10)) {
            cert.cond_dilate = false;
            if (cert.witness.empty())
                cert.witness = "dilate: " + serialize_tile(P);
            break;
        }
    }
    for (const auto& P : members) {
        for (const auto& nb : neighbors(P)) {
            if (!leq(dilate(nb, 1.5), top)) continue;
            bool in_ambient = std::any_of(ambient.begin(), ambient.end(),
                                          [&](const Tile& t) { return t == nb; });
            if (in_ambient && !is_member(nb)) {
                cert.cond_neighbors = false;
                if (cert.witness.empty())
                    cert.witness = "neighbor: " + serialize_tile(nb);
                break;
            }
        }
        if (!cert.cond_neighbors) break;
    }
    for (const auto& t : ambient) {
        if (is_member(t)) continue;
        bool has_below = false, has_above = false;
        for (const auto& m : members) {
            if (!has_below && leq(m, t)) has_below = true;
            if (!has_above && leq(t, m)) has_above = true;
            if (has_below && has_above) break;
        }
        if (has_below && has_above) {
            cert.cond_convex = false;
            if (cert.witness.empty())
                cert.witness = "convex: " + serialize_tile(t);
            break;
        }
    }
    return cert;
}

ForestBuild build_forest(const std::vector<MassTile>& png_tiles,
                         const std::vector<MassTile>& tops,
                         const MassParams& params, int n) {
    params.validate();
    ForestBuild out;
    out.b_cap = static_cast<int>(
        std::ceil(std::log2(1.0 + static_cast<double>(tops.size()))));
    out.b_cap_alt = 2.0 * n * std::log2(std::max(params.K, 2.0));
    std::vector<std::vector<std::size_t>> by_j(
        static_cast<std::size_t>(out.b_cap) + 1);
    for (std::size_t i = 0; i < png_tiles.size(); ++i) {
        Tile p4 = dilate(png_tiles[i].tile, 4.0);
        int b = 0;
        for (const auto& t : tops)
            if (trianglelefteq(p4, t.tile)) ++b;
        if (b == 0) {
            out.no_top.push_back(i);
            continue;
        }
        auto j = static_cast<std::size_t>(std::floor(std::log2(b)));
        if (j >= by_j.size()) by_j.resize(j + 1);
        by_j[j].push_back(i);
    }
    double cd = default_cd(std::max(
        png_tiles.empty() ? 1 : png_tiles.front().tile.d(), 1));
    for (std::size_t j = 0; j < by_j.size(); ++j) {
        if (by_j[j].empty()) continue;
        ForestLayer layer;
        layer.j = static_cast<int>(j);
        const auto& idx = by_j[j];
        std::size_t sz = idx.size();
        std::vector<Tile> four;
        four.reserve(sz);
        for (std::size_t i : idx) four.push_back(dilate(png_tiles[i].tile, 4.0));
        // Top candidates: maximal 4-dilates under the footnote convention.
        std::vector<std::size_t> cand;  // positions within idx
        for (std::size_t a = 0; a < sz; ++a) {
            bool maximal = true;
            for (std::size_t b = 0; b < sz && maximal; ++b)
                if (a != b && leq(four[a], four[b]) && !leq(four[b], four[a]))
                    maximal = false;
            if (maximal) cand.push_back(a);
        }
        for (std::size_t a : cand) layer.layer_tops.push_back(png_tiles[idx[a]].tile);
        // Structural properties of the candidate system.
        layer.prop_a = true;
        for (std::size_t a : cand)
            for (std::size_t b : cand)
                if (a != b && leq(four[a], four[b]) &&
                    !(png_tiles[idx[a]].tile.time == png_tiles[idx[b]].tile.time))
                    layer.prop_a = false;
        layer.prop_b = true;
        for (std::size_t a = 0; a < sz; ++a) {
            bool found = false;
            for (std::size_t c : cand)
                if (leq(four[a], four[c])) { found = true; break; }
            layer.prop_b = layer.prop_b && found;
        }
        layer.prop_c = true;
        for (std::size_t a = 0; a < sz; ++a)
            for (std::size_t c1 : cand)
                for (std::size_t c2 : cand) {
                    if (c1 >= c2) continue;
                    if (trianglelefteq(four[a], four[c1]) &&
                        trianglelefteq(four[a], four[c2]) &&
                        !(leq(four[c1], four[c2]) && leq(four[c2], four[c1])))
                        layer.prop_c = false;
                }
        // Three-clause discard set.
        std::vector<bool> discard(sz, false);
        std::vector<Tile> half3(sz);
        for (std::size_t a = 0; a < sz; ++a)
            half3[a] = dilate(png_tiles[idx[a]].tile, 1.5);
        for (std::size_t a = 0; a < sz; ++a) {
            bool below_some = false, equal_scale_top = false;
            for (std::size_t c : cand) {
                const Tile& topc = png_tiles[idx[c]].tile;
                if (leq(half3[a], topc)) {
                    below_some = true;
                    if (topc.time.scale == png_tiles[idx[a]].tile.time.scale)
                        equal_scale_top = true;
                }
            }
            bool minimal = true;
            for (std::size_t b = 0; b < sz && minimal; ++b)
                if (a != b && strictly_less(png_tiles[idx[b]].tile, png_tiles[idx[a]].tile))
                    minimal = false;
            discard[a] = !below_some || equal_scale_top || minimal;
            if (discard[a]) layer.discarded.push_back(idx[a]);
        }
        // Assign survivors to the first candidate they sit below.
        std::vector<std::vector<std::size_t>> s_sets(cand.size());
        for (std::size_t a = 0; a < sz; ++a) {
            if (discard[a]) continue;
            for (std::size_t ci = 0; ci < cand.size(); ++ci) {
                if (leq(half3[a], png_tiles[idx[cand[ci]]].tile)) {
                    s_sets[ci].push_back(a);
                    break;
                }
            }
        }
        // Linkage between clusters, then connected components.
        std::size_t nc = cand.size();
        std::vector<std::vector<bool>> linked(nc, std::vector<bool>(nc, false));
        for (std::size_t k = 0; k < nc; ++k)
            for (std::size_t l = 0; l < nc; ++l) {
                if (k == l || s_sets[k].empty() || s_sets[l].empty()) continue;
                Tile topl10 = dilate(png_tiles[idx[cand[l]]].tile, 10.0);
                Tile topk10 = dilate(png_tiles[idx[cand[k]]].tile, 10.0);
                bool rel = false;
                for (std::size_t a : s_sets[k])
                    if (leq(dilate(png_tiles[idx[a]].tile, 2.0), topl10)) { rel = true; break; }
                for (std::size_t a : s_sets[l])
                    if (!rel && leq(dilate(png_tiles[idx[a]].tile, 2.0), topk10)) rel = true;
                if (rel) linked[k][l] = linked[l][k] = true;
            }
        std::vector<int> comp(nc, -1);
        int ncomp = 0;
        for (std::size_t k = 0; k < nc; ++k) {
            if (comp[k] >= 0 || s_sets[k].empty()) continue;
            std::vector<std::size_t> stack{k};
            comp[k] = ncomp;
            while (!stack.empty()) {
                std::size_t cur = stack.back();
                stack.pop_back();
                for (std::size_t l = 0; l < nc; ++l)
                    if (linked[cur][l] && comp[l] < 0 && !s_sets[l].empty()) {
                        comp[l] = ncomp;
                        stack.push_back(l);
                    }
            }
            ++ncomp;
        }
        layer.max_merge = 0;
        std::vector<Tile> ambient;
        ambient.reserve(sz);
        for (std::size_t i : idx) ambient.push_back(png_tiles[i].tile);
        for (int c = 0; c < ncomp; ++c) {
            TreeT tree;
            std::size_t merged = 0;
            std::size_t top_pos = nc;  // candidate with the widest time interval
            for (std::size_t k = 0; k < nc; ++k) {
                if (comp[k] != c) continue;
                ++merged;
                for (std::size_t a : s_sets[k])
                    tree.members.push_back(png_tiles[idx[a]].tile);
                if (top_pos == nc ||
                    png_tiles[idx[cand[k]]].tile.time.scale <
                        png_tiles[idx[cand[top_pos]]].tile.time.scale)
                    top_pos = k;
            }
            tree.top = png_tiles[idx[cand[top_pos]]].tile;
            layer.max_merge = std::max(layer.max_merge, merged);
            tree.cert = certify_tree(tree.top, tree.members, ambient);
            layer.trees.push_back(std::move(tree));
        }
        layer.merge_bound_ok = static_cast<double>(layer.max_merge) <= cd;
        out.layers.push_back(std::move(layer));
    }
    return out;
}

SeparationReport separation_check(const TreeT& t1, const TreeT& t2, double delta) {
    SeparationReport r;
    if (times_disjoint(t1.top.time, t2.top.time)) {
        r.vacuous = true;
        return r;
    }
    auto clause = [&](const TreeT& from, const TreeT& against) {
        for (const auto& P : from.members) {
            if (!P.time.contained_in(against.top.time)) continue;
            PairFactor pf = pair_delta(P, against.top);
            if (!(pf.ceil_delta < delta)) {
                r.pass = false;
                r.witness = P;
                r.witness_value = pf.ceil_delta;
                return;
            }
        }
    };
    clause(t1, t2);
    if (r.pass) clause(t2, t1);
    return r;
}

RowsResult normalize_and_rows(const std::vector<TreeT>& trees,
                              const MassParams& params, double delta) {
    params.validate();
    if (!(delta > 0.0) || !(delta < 1.0))
        throw std::invalid_argument("delta must lie in (0,1)");
    RowsResult out;
    double L = 100.0 * params.M * std::log2(params.K / delta);
    auto capl = static_cast<long>(std::ceil(std::max(L, 1.0)));
    auto cap = static_cast<std::size_t>(capl);
    // Chain pruning over the union of all members.
    std::vector<const Tile*> all;
    std::vector<std::pair<std::size_t, std::size_t>> owner;  // (tree, member)
    for (std::size_t t = 0; t < trees.size(); ++t)
        for (std::size_t m = 0; m < trees[t].members.size(); ++m) {
            all.push_back(&trees[t].members[m]);
            owner.emplace_back(t, m);
        }
    std::vector<int> above = chain_depths(all, true);
    std::vector<int> below = chain_depths(all, false);
    enum class Fate { Plus, Minus, Keep };
    std::vector<Fate> fate(all.size(), Fate::Keep);
    out.plus_layers.resize(cap);
    out.minus_layers.resize(cap);
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (static_cast<double>(above[i]) < L) {
            fate[i] = Fate::Plus;
            out.plus_layers[std::min<std::size_t>(above[i], cap - 1)].push_back(*all[i]);
        } else if (static_cast<double>(below[i]) < L) {
            fate[i] = Fate::Minus;
            out.minus_layers[std::min<std::size_t>(below[i], cap - 1)].push_back(*all[i]);
        }
    }
    while (!out.plus_layers.empty() && out.plus_layers.back().empty())
        out.plus_layers.pop_back();
    while (!out.minus_layers.empty() && out.minus_layers.back().empty())
        out.minus_layers.pop_back();
    // Boundary collars and normality trimming.
    double frac = std::pow(delta, 100.0) * std::pow(params.K, -2.0 * params.M);
    std::vector<TreeT> trimmed_trees;
    out.f_n_bound = 0.0;
    for (std::size_t t = 0; t < trees.size(); ++t) {
        RealInterval I0 = trees[t].top.time.as_real();
        double margin = 100.0 * frac * I0.length();
        out.f_n.push_back({I0.lo, std::min(I0.lo + margin, I0.hi)});
        out.f_n.push_back({std::max(I0.hi - margin, I0.lo), I0.hi});
        out.f_n_bound += 200.0 * frac * I0.length();
        TreeT kept;
        kept.top = trees[t].top;
        kept.cert = trees[t].cert;
        for (std::size_t m = 0; m < trees[t].members.size(); ++m) {
            std::size_t flat = 0;
            for (; flat < owner.size(); ++flat)
                if (owner[flat] == std::make_pair(t, m)) break;
            if (fate[flat] != Fate::Keep) continue;
            const Tile& P = trees[t].members[m];
            RealInterval I = P.time.as_real();
            bool in_collar =
                (I.hi <= I0.lo + margin && I.lo >= I0.lo) ||
                (I.lo >= I0.hi - margin && I.hi <= I0.hi);
            double dist = std::min(I.lo - I0.lo, I0.hi - I.hi);
            bool normal = I.length() <= frac * I0.length() &&
                          dist > 20.0 * frac * I0.length();
            if (in_collar || !normal)
                out.trimmed.push_back(P);
            else
                kept.members.push_back(P);
        }
        trimmed_trees.push_back(std::move(kept));
    }
    // Merge the collar pieces and measure them.
    std::sort(out.f_n.begin(), out.f_n.end(),
              [](const RealInterval& a, const RealInterval& b) { return a.lo < b.lo; });
    std::vector<RealInterval> merged;
    for (const auto& piece : out.f_n) {
        if (piece.empty()) continue;
        if (!merged.empty() && piece.lo <= merged.back().hi)
            merged.back().hi = std::max(merged.back().hi, piece.hi);
        else
            merged.push_back(piece);
    }
    out.f_n = std::move(merged);
    out.f_n_measure = 0.0;
    for (const auto& piece : out.f_n) out.f_n_measure += piece.length();
    // Greedy first-fit row packing by disjoint tops.
    std::sort(trimmed_trees.begin(), trimmed_trees.end(),
              [](const TreeT& a, const TreeT& b) {
                  if (a.top.time.lo() != b.top.time.lo())
                      return a.top.time.lo() < b.top.time.lo();
                  return a.top.time.scale < b.top.time.scale;
              });
    for (auto& tree : trimmed_trees) {
        bool placed = false;
        for (auto& row : out.rows) {
            bool ok = true;
            for (const auto& other : row)
                ok = ok && times_disjoint(tree.top.time, other.top.time);
            if (ok) {
                row.push_back(tree);
                placed = true;
                break;
            }
        }
        if (!placed) out.rows.push_back({tree});
    }
    out.row_bound = params.K * std::pow(delta, -(1.0 + params.rho));
    out.row_bound_ok = static_cast<double>(out.rows.size()) <= out.row_bound;
    return out;
}

ForestCertificate certify_forest(const std::vector<TreeT>& trees,
                                 const std::vector<MassTile>& universe,
                                 const MassParams& params, int n, double delta,
                                 const RowsResult& rows) {
    ForestCertificate cert;
    cert.mass_ok = true;
    double bound = std::ldexp(1.0, -n) * (1.0 + 1e-9);
    for (const auto& tree : trees) {
        for (const auto& P : tree.members) {
            if (mass(P, universe, params.N) > bound) {
                cert.mass_ok = false;
                if (cert.first_failure.empty())
                    cert.first_failure = "mass: " + serialize_tile(P);
            }
        }
    }
    cert.separation_ok = true;
    for (std::size_t a = 0; a < trees.size(); ++a)
        for (std::size_t b = a + 1; b < trees.size(); ++b) {
            SeparationReport sr = separation_check(trees[a], trees[b], delta);
            if (!sr.pass) {
                cert.separation_ok = false;
                if (cert.first_failure.empty())
                    cert.first_failure = "separation: " + serialize_tile(sr.witness);
            }
        }
    // Top overlap measured as the max pointwise count at top endpoints.
    cert.overlap_ok = true;
    double threshold = std::pow(2.0, (1.0 + params.rho) * n) * params.K;
    for (const auto& tree : trees) {
        double x = tree.top.time.center();
        int count = 0;
        for (const auto& other : trees)
            if (other.top.time.as_real().contains(x)) ++count;
        if (static_cast<double>(count) > threshold) {
            cert.overlap_ok = false;
            if (cert.first_failure.empty())
                cert.first_failure = "overlap: " + serialize_tile(tree.top);
        }
    }
    cert.row_count = rows.rows.size();
    cert.rows_ok = rows.row_bound_ok;
    if (!cert.rows_ok && cert.first_failure.empty())
        cert.first_failure = "rows: count exceeds bound";
    return cert;
}

std::string ForestBuild::to_json() const {
    json j;
    j["b_cap"] = b_cap;
    j["b_cap_alt"] = b_cap_alt;
    j["no_top"] = no_top;
    json layers_j = json::array();
    for (const auto& layer : layers) {
        json lj;
        lj["j"] = layer.j;
        lj["discarded"] = layer.discarded;
        lj["prop_a"] = layer.prop_a;
        lj["prop_b"] = layer.prop_b;
        lj["prop_c"] = layer.prop_c;
        lj["max_merge"] = layer.max_merge;
        lj["merge_bound_ok"] = layer.merge_bound_ok;
        json tops_j = json::array();
        for (const auto& t : layer.layer_tops) tops_j.push_back(tile_json(t));
        lj["layer_tops"] = tops_j;
        json trees_j = json::array();
        for (const auto& tree : layer.trees) {
            json tj;
            tj["top"] = tile_json(tree.top);
            tj["size"] = tree.members.size();
            tj["cert_pass"] = tree.cert.pass();
            tj["cert_witness"] = tree.cert.witness;
            trees_j.push_back(tj);
        }
        lj["trees"] = trees_j;
        layers_j.push_back(lj);
    }
    j["layers"] = layers_j;
    return j.dump(2);
}

std::string RowsResult::to_json() const {
    json j;
    json rows_j = json::array();
    for (const auto& row : rows) {
        json rj = json::array();
        for (const auto& tree : row) {
            json tj;
            tj["top"] = tile_json(tree.top);
            tj["size"] = tree.members.size();
            rj.push_back(tj);
        }
        rows_j.push_back(rj);
    }
    j["rows"] = rows_j;
    j["plus_layer_sizes"] = json::array();
    for (const auto& l : plus_layers) j["plus_layer_sizes"].push_back(l.size());
    j["minus_layer_sizes"] = json::array();
    for (const auto& l : minus_layers) j["minus_layer_sizes"].push_back(l.size());
    j["trimmed"] = trimmed.size();
    json fj = json::array();
    for (const auto& piece : f_n) fj.push_back({piece.lo, piece.hi});
    j["f_n"] = fj;
    j["f_n_measure"] = f_n_measure;
    j["f_n_bound"] = f_n_bound;
    j["row_bound"] = row_bound;
    j["row_bound_ok"] = row_bound_ok;
    return j.dump(2);
}

std::string ForestCertificate::to_json() const {
    json j;
    j["mass_ok"] = mass_ok;
    j["separation_ok"] = separation_ok;
    j["overlap_ok"] = overlap_ok;
    j["rows_ok"] = rows_ok;
    j["row_count"] = row_count;
    j["first_failure"] = first_failure;
    j["pass"] = pass();
    return j.dump(2);
}

}  // namespace carleson
