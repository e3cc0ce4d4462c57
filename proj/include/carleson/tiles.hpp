#ifndef CARLESON_TILES_HPP
#define CARLESON_TILES_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "carleson/dyadic.hpp"
#include "carleson/polyalg.hpp"

namespace carleson {

// A tile: d frequency intervals plus one time interval. Undilated tiles keep
// their frequency intervals on the dyadic grid (|alpha^j| = |I|^-1); dilation
// scales each alpha about its center and drops the dyadic provenance.
struct Tile {
    DyadicInterval time;
    std::vector<RealInterval> alphas;
    std::vector<DyadicInterval> dyadic_alphas;  // nonempty iff undilated
    double dilation = 1.0;

    int d() const { return static_cast<int>(alphas.size()); }
    bool undilated() const { return !dyadic_alphas.empty(); }
    NodeSystem nodes() const { return node_points(time, d()); }

    bool operator==(const Tile& o) const;
};

// Undilated tile from dyadic data; checks |alpha^j| = |I|^-1 on scales.
Tile make_tile(const DyadicInterval& time, const std::vector<DyadicInterval>& alphas);

// Same time interval, each alpha scaled by a about its center.
Tile dilate(const Tile& P, double a);

// Node values view: nodes, alpha centers, half-widths.
struct TileBox {
    std::vector<double> nodes;
    std::vector<double> centers;
    std::vector<double> half_widths;
};
TileBox tile_box(const Tile& P);

// ceil(x) = 1/(1+|x|).
double ceil_fn(double x);

// q in P iff q(x_I^j) in alpha^j for all j (half-open).
bool contains_poly(const Tile& P, const Poly& q);

// Lagrange interpolant through (x_I^j, c(alpha^j)).
Poly central_poly(const Tile& P);

// All 3^d same-time tiles with each alpha replaced by itself or a brother.
std::vector<Tile> neighbors(const Tile& P);

// P1 <= P2: I1 in I2 and some q lies in both boxes (exact linear feasibility).
bool leq(const Tile& P1, const Tile& P2);

// P1 <| P2: I1 in I2 and every q in P2 lies in P1 (exact box-image test).
bool trianglelefteq(const Tile& P1, const Tile& P2);

struct PairFactor {
    double delta = 0.0;
    double ceil_delta = 1.0;
    int resolution = 0;
    double sup_error_bound = 0.0;  // Lipschitz certificate for the sampled sup
    bool time_disjoint = false;    // I*_1 and I*_2 do not meet (factor undefined)
};

inline constexpr int kDefaultPairGrid = 257;

// Geometric factor of the pair: Delta(P1,P2) per the closed-form inner
// infimum max(0, |L(y)| - r_1(y) - r_2(y)), sup sampled over the smaller
// time interval with one local refinement pass.
PairFactor pair_delta(const Tile& P1, const Tile& P2, int grid = kDefaultPairGrid);

// Delta_q(P) = inf_{q1 in P} Delta_{q-q1}(I_P), same machinery with one box.
double delta_q_P(const Poly& q, const Tile& P, int grid = kDefaultPairGrid);

Poly interaction_poly(const Tile& P1, const Tile& P2);

struct DeltaEquivalence {
    double lhs = 0.0;  // ceil(Delta_{1,2})
    double rhs = 0.0;  // max of the two one-sided ceil factors
    double ratio = 0.0;
};
DeltaEquivalence delta_equivalence_check(const Tile& P1, const Tile& P2,
                                         int grid = kDefaultPairGrid);

// One tile per line: "d k_I n_I | k_1 n_1 ... k_d n_d".
std::string serialize_tile(const Tile& P);
Tile parse_tile(const std::string& line);
void write_tiles(std::ostream& os, const std::vector<Tile>& tiles);
std::vector<Tile> read_tiles(std::istream& is);

// Rows (x, q_P(x), radius) sampling the geometric tile for plotting.
struct GeometricSample {
    double x;
    double center;
    double radius;
};
std::vector<GeometricSample> sample_geometric_tile(const Tile& P, int samples);

}  // namespace carleson

#endif
