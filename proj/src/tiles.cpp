#include "carleson/tiles.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace carleson {

namespace {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

Rational rat_from_double(double x) {
    if (x == 0.0) return Rational(0);
    int e = 0;
    double m = std::frexp(x, &e);  // x = m * 2^e, |m| in [0.5, 1)
    auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
    int shift = e - 53;
    Rational r(mant);
    if (shift >= 0)
        r *= Rational(BigInt(1) << shift);
    else
        r /= Rational(BigInt(1) << (-shift));
    return r;
}

}  // namespace

bool Tile::operator==(const Tile& o) const {
    if (!(time == o.time) || d() != o.d()) return false;
    for (int j = 0; j < d(); ++j)
        if (alphas[static_cast<std::size_t>(j)].lo != o.alphas[static_cast<std::size_t>(j)].lo ||
            alphas[static_cast<std::size_t>(j)].hi != o.alphas[static_cast<std::size_t>(j)].hi)
            return false;
    return true;
}

Tile make_tile(const DyadicInterval& time, const std::vector<DyadicInterval>& alphas) {
    Tile t;
    t.time = time;
    t.dyadic_alphas = alphas;
    for (const auto& a : alphas) {
        if (a.scale != -time.scale)
            throw std::invalid_argument("make_tile: |alpha| must equal |I|^-1");
        t.alphas.push_back(a.as_real());
    }
    return t;
}

Tile dilate(const Tile& P, double a) {
    if (!(a > 0.0)) throw std::invalid_argument("dilate: factor must be positive");
    Tile t;
    t.time = P.time;
    t.dilation = P.dilation * a;
    for (const auto& al : P.alphas) t.alphas.push_back(dilate(al, a));
    if (t.dilation == 1.0 && P.undilated()) t.dyadic_alphas = P.dyadic_alphas;
    return t;
}

TileBox tile_box(const Tile& P) {
    TileBox b;
    b.nodes = P.nodes().points;
    for (const auto& a : P.alphas) {
        b.centers.push_back(a.center());
        b.half_widths.push_back(0.5 * a.length());
    }
    return b;
}

double ceil_fn(double x) { return 1.0 / (1.0 + std::abs(x)); }

bool contains_poly(const Tile& P, const Poly& q) {
    if (q.degree() > P.d() - 1)
        throw std::invalid_argument("contains_poly: degree exceeds d-1");
    auto ns = P.nodes();
    for (int j = 0; j < P.d(); ++j)
        if (!P.alphas[static_cast<std::size_t>(j)].contains(q.eval(ns.points[static_cast<std::size_t>(j)])))
            return false;
    return true;
}

Poly central_poly(const Tile& P) {
    auto box = tile_box(P);
    return lagrange(box.nodes, box.centers);
}

std::vector<Tile> neighbors(const Tile& P) {
    if (!P.undilated()) throw std::invalid_argument("neighbors: dilated tile");
    int d = P.d();
    std::vector<Tile> out;
    std::vector<int> choice(static_cast<std::size_t>(d), 0);  // 0 keep, 1 right, 2 left
    while (true) {
        std::vector<DyadicInterval> alphas;
        for (int j = 0; j < d; ++j) {
            DyadicInterval a = P.dyadic_alphas[static_cast<std::size_t>(j)];
            if (choice[static_cast<std::size_t>(j)] == 1) a = a.right_brother();
            if (choice[static_cast<std::size_t>(j)] == 2) a = a.left_brother();
            alphas.push_back(a);
        }
        out.push_back(make_tile(P.time, alphas));
        int k = 0;
        while (k < d && ++choice[static_cast<std::size_t>(k)] == 3) {
            choice[static_cast<std::size_t>(k)] = 0;
            ++k;
        }
        if (k == d) break;
    }
    return out;
}

namespace {

// One inequality sum_k a_k v_k <= b (strict when flagged).
struct FmRow {
    std::vector<Rational> a;
    Rational b;
    bool strict = false;
};

// Fourier-Motzkin feasibility over the rationals; greedy variable order,
// normalized dedup between eliminations.
bool fm_feasible(std::vector<FmRow> rows, std::size_t nvars) {
    std::vector<bool> alive(nvars, true);
    for (std::size_t round = 0; round < nvars; ++round) {
        // Pick the live variable minimizing the pos*neg product.
        std::size_t best = nvars;
        std::size_t best_cost = static_cast<std::size_t>(-1);
        for (std::size_t k = 0; k < nvars; ++k) {
            if (!alive[k]) continue;
            std::size_t pos = 0, neg = 0;
            for (const auto& r : rows) {
                if (r.a[k] > 0) ++pos;
                if (r.a[k] < 0) ++neg;
            }
            std::size_t cost = pos * neg + pos + neg;
            if (cost < best_cost) {
                best_cost = cost;
                best = k;
            }
        }
        std::size_t k = best;
        alive[k] = false;
        std::vector<FmRow> pos, neg, rest;
        for (auto& r : rows) {
            if (r.a[k] > 0)
                pos.push_back(std::move(r));
            else if (r.a[k] < 0)
                neg.push_back(std::move(r));
            else
                rest.push_back(std::move(r));
        }
        for (const auto& p : pos) {
            for (const auto& n : neg) {
                FmRow c;
                c.a.resize(nvars);
                // p: a_k v_k <= b_p - rest_p ; n: a_k v_k >= ... combine.
                Rational wp = -n.a[k];  // > 0
                Rational wn = p.a[k];   // > 0
                for (std::size_t i = 0; i < nvars; ++i)
                    c.a[i] = wp * p.a[i] + wn * n.a[i];
                c.b = wp * p.b + wn * n.b;
                c.strict = p.strict || n.strict;
                bool zero = true;
                for (const auto& v : c.a)
                    if (v != 0) {
                        zero = false;
                        break;
                    }
                if (zero) {
                    if (c.b < 0 || (c.strict && c.b == 0)) return false;
                } else {
                    rest.push_back(std::move(c));
                }
            }
        }
        // Dedup after normalization (first nonzero coefficient -> +-1).
        std::map<std::vector<Rational>, std::pair<Rational, bool>> uniq;
        for (auto& r : rest) {
            Rational scale;
            for (const auto& v : r.a)
                if (v != 0) {
                    scale = abs(v);
                    break;
                }
            if (scale == 0) continue;
            for (auto& v : r.a) v /= scale;
            r.b /= scale;
            auto it = uniq.find(r.a);
            if (it == uniq.end() || r.b < it->second.first ||
                (r.b == it->second.first && r.strict))
                uniq[r.a] = {r.b, r.strict};
        }
        rows.clear();
        for (auto& [a, bs] : uniq) {
            FmRow r;
            r.a = a;
            r.b = bs.first;
            r.strict = bs.second;
            rows.push_back(std::move(r));
        }
    }
    for (const auto& r : rows)
        if (r.b < 0 || (r.strict && r.b == 0)) return false;
    return true;
}

// Lagrange basis values l_j(x) for the given nodes, exactly in rationals.
std::vector<Rational> basis_values_exact(const std::vector<double>& nodes, double x) {
    std::vector<Rational> out(nodes.size(), Rational(1));
    Rational rx = rat_from_double(x);
    std::vector<Rational> rn;
    for (double n : nodes) rn.push_back(rat_from_double(n));
    for (std::size_t j = 0; j < nodes.size(); ++j)
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            if (k == j) continue;
            out[j] *= (rx - rn[k]) / (rn[j] - rn[k]);
        }
    return out;
}

double basis_value(const std::vector<double>& nodes, std::size_t j, double x) {
    double v = 1.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (k == j) continue;
        v *= (x - nodes[k]) / (nodes[j] - nodes[k]);
    }
    return v;
}

}  // namespace

bool leq(const Tile& P1, const Tile& P2) {
    if (P1.d() != P2.d()) throw std::invalid_argument("leq: mismatched degrees");
    if (!P1.time.contained_in(P2.time)) return false;
    const int d = P1.d();
    auto b1 = tile_box(P1);
    auto b2 = tile_box(P2);
    // Necessary prefilter: at each node of I1 the image of P2's box must
    // meet alpha_1.
    for (int i = 0; i < d; ++i) {
        double x = b1.nodes[static_cast<std::size_t>(i)];
        double c = 0.0, r = 0.0;
        for (int j = 0; j < d; ++j) {
            double l = basis_value(b2.nodes, static_cast<std::size_t>(j), x);
            c += l * b2.centers[static_cast<std::size_t>(j)];
            r += std::abs(l) * b2.half_widths[static_cast<std::size_t>(j)];
        }
        const auto& a1 = P1.alphas[static_cast<std::size_t>(i)];
        double tol = 1e-12 * (r + a1.length());
        if (c - r >= a1.hi + tol || c + r <= a1.lo - tol) return false;
    }
    // Cheap sufficient witness.
    if (contains_poly(P1, central_poly(P2))) return true;
    // Exact feasibility: unknowns v_j = q(x_{I2}^j); constraints v in box_2
    // and the Lagrange image of v at each node of I1 in box_1.
    auto nd = static_cast<std::size_t>(d);
    std::vector<FmRow> rows;
    auto push = [&](std::vector<Rational> a, Rational b, bool strict) {
        rows.push_back({std::move(a), std::move(b), strict});
    };
    for (std::size_t j = 0; j < nd; ++j) {
        const auto& a2 = P2.alphas[j];
        std::vector<Rational> up(nd, Rational(0)), lo(nd, Rational(0));
        up[j] = 1;
        lo[j] = -1;
        push(std::move(up), rat_from_double(a2.hi), true);    // v_j <  hi
        push(std::move(lo), -rat_from_double(a2.lo), false);  // -v_j <= -lo
    }
    for (std::size_t i = 0; i < nd; ++i) {
        auto lv = basis_values_exact(b2.nodes, b1.nodes[i]);
        const auto& a1 = P1.alphas[i];
        std::vector<Rational> up(lv), lo(nd);
        for (std::size_t j = 0; j < nd; ++j) lo[j] = -lv[j];
        push(std::move(up), rat_from_double(a1.hi), true);
        push(std::move(lo), -rat_from_double(a1.lo), false);
    }
    return fm_feasible(std::move(rows), nd);
}

bool trianglelefteq(const Tile& P1, const Tile& P2) {
    if (P1.d() != P2.d()) throw std::invalid_argument("trianglelefteq: mismatched degrees");
    if (!P1.time.contained_in(P2.time)) return false;
    const int d = P1.d();
    auto b1 = tile_box(P1);
    auto b2 = tile_box(P2);
    for (int i = 0; i < d; ++i) {
        double x = b1.nodes[static_cast<std::size_t>(i)];
        double c = 0.0, r = 0.0;
        for (int j = 0; j < d; ++j) {
            double l = basis_value(b2.nodes, static_cast<std::size_t>(j), x);
            c += l * b2.centers[static_cast<std::size_t>(j)];
            r += std::abs(l) * b2.half_widths[static_cast<std::size_t>(j)];
        }
        const auto& a1 = P1.alphas[static_cast<std::size_t>(i)];
        double tol = 1e-12 * (r + a1.length());
        if (c - r < a1.lo - tol || c + r > a1.hi + tol) return false;
    }
    return true;
}

namespace {

struct InnerGap {
    Poly L;
    std::vector<std::vector<double>> bases_nodes;  // node lists per box
    std::vector<std::vector<double>> widths;       // half-widths per box

    double operator()(double y) const {
        double r = 0.0;
        for (std::size_t m = 0; m < bases_nodes.size(); ++m)
            for (std::size_t j = 0; j < bases_nodes[m].size(); ++j)
                r += std::abs(basis_value(bases_nodes[m], j, y)) * widths[m][j];
        double g = std::abs(L.eval(y)) - r;
        return g > 0.0 ? g : 0.0;
    }
};

// Sampled sup with one ternary refinement pass around the best sample.
double sampled_sup(const InnerGap& f, const RealInterval& I, int grid,
                   double* error_bound) {
    double best = 0.0;
    int best_i = 0;
    double h = I.length() / static_cast<double>(grid - 1);
    for (int i = 0; i < grid; ++i) {
        double v = f(I.lo + h * i);
        if (v > best) {
            best = v;
            best_i = i;
        }
    }
    double a = I.lo + h * std::max(0, best_i - 1);
    double b = I.lo + h * std::min(grid - 1, best_i + 1);
    for (int it = 0; it < 60; ++it) {
        double m1 = a + (b - a) / 3.0;
        double m2 = b - (b - a) / 3.0;
        if (f(m1) < f(m2))
            a = m1;
        else
            b = m2;
    }
    best = std::max(best, f(0.5 * (a + b)));
    if (error_bound) {
        // Lipschitz certificate: |d/dy inner| <= |L'| + sum |l_j'| w_j.
        double lip = sup_norm(f.L.derivative(), I);
        for (std::size_t m = 0; m < f.bases_nodes.size(); ++m)
            for (std::size_t j = 0; j < f.bases_nodes[m].size(); ++j)
                lip += sup_norm(lagrange_basis(f.bases_nodes[m], j).derivative(), I) *
                       f.widths[m][j];
        *error_bound = 0.5 * lip * h;
    }
    return best;
}

}  // namespace

PairFactor pair_delta(const Tile& P1_in, const Tile& P2_in, int grid) {
    const Tile* P1 = &P1_in;
    const Tile* P2 = &P2_in;
    if (P1->time.length() < P2->time.length()) std::swap(P1, P2);
    auto b1 = tile_box(*P1);
    auto b2 = tile_box(*P2);
    InnerGap f;
    f.L = central_poly(*P1) - central_poly(*P2);
    f.bases_nodes = {b1.nodes, b2.nodes};
    f.widths = {b1.half_widths, b2.half_widths};
    PairFactor pf;
    pf.resolution = grid;
    RealInterval I2 = P2->time.as_real();
    double err = 0.0;
    double sup = sampled_sup(f, I2, grid, &err);
    pf.delta = sup * I2.length();
    pf.sup_error_bound = err * I2.length();
    pf.ceil_delta = ceil_fn(pf.delta);
    auto s1 = star(P1->time);
    auto s2 = star(P2->time);
    pf.time_disjoint = !(s1.left.intersects(s2.left) || s1.left.intersects(s2.right) ||
                         s1.right.intersects(s2.left) || s1.right.intersects(s2.right));
    return pf;
}

double delta_q_P(const Poly& q, const Tile& P, int grid) {
    if (q.degree() > P.d() - 1)
        throw std::invalid_argument("delta_q_P: degree exceeds d-1");
    auto b = tile_box(P);
    InnerGap f;
    f.L = q - central_poly(P);
    f.bases_nodes = {b.nodes};
    f.widths = {b.half_widths};
    RealInterval I = P.time.as_real();
    return sampled_sup(f, I, grid, nullptr) * I.length();
}

Poly interaction_poly(const Tile& P1, const Tile& P2) {
    if (P1.d() != P2.d()) throw std::invalid_argument("interaction_poly: mismatched degrees");
    return central_poly(P1) - central_poly(P2);
}

DeltaEquivalence delta_equivalence_check(const Tile& P1, const Tile& P2, int grid) {
    DeltaEquivalence r;
    r.lhs = pair_delta(P1, P2, grid).ceil_delta;
    r.rhs = std::max(ceil_fn(delta_q_P(central_poly(P1), P2, grid)),
                     ceil_fn(delta_q_P(central_poly(P2), P1, grid)));
    r.ratio = r.lhs / r.rhs;
    return r;
}

std::string serialize_tile(const Tile& P) {
    if (!P.undilated()) throw std::invalid_argument("serialize_tile: dilated tile");
    std::ostringstream os;
    os << P.d() << ' ' << P.time.scale << ' ' << P.time.index << " |";
    for (const auto& a : P.dyadic_alphas) os << ' ' << a.scale << ' ' << a.index;
    return os.str();
}

Tile parse_tile(const std::string& line) {
    std::istringstream is(line);
    int d;
    DyadicInterval time;
    std::string bar;
    if (!(is >> d >> time.scale >> time.index >> bar) || bar != "|")
        throw std::invalid_argument("parse_tile: malformed line");
    std::vector<DyadicInterval> alphas(static_cast<std::size_t>(d));
    for (auto& a : alphas)
        if (!(is >> a.scale >> a.index))
            throw std::invalid_argument("parse_tile: malformed line");
    return make_tile(time, alphas);
}

void write_tiles(std::ostream& os, const std::vector<Tile>& tiles) {
    for (const auto& t : tiles) os << serialize_tile(t) << '\n';
}

std::vector<Tile> read_tiles(std::istream& is) {
    std::vector<Tile> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        out.push_back(parse_tile(line));
    }
    return out;
}

std::vector<GeometricSample> sample_geometric_tile(const Tile& P, int samples) {
    std::vector<GeometricSample> out;
    Poly qp = central_poly(P);
    double radius = 0.5 / P.time.length() * P.dilation;
    RealInterval I = P.time.as_real();
    for (int i = 0; i < samples; ++i) {
        double x = I.lo + I.length() * (i + 0.5) / samples;
        out.push_back({x, qp.eval(x), radius});
    }
    return out;
}

}  // namespace carleson
