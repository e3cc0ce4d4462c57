#ifndef CARLESON_OPERATORS_HPP
#define CARLESON_OPERATORS_HPP

#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "carleson/polyalg.hpp"
#include "carleson/tiles.hpp"

namespace carleson {

// Telescoping: psi = (chi(y) - chi(2y))/y, support 2 < |y| < 8, and the
// partial sums of psi_k reproduce 1/y on 0 < |y| < 1. Narrow: an odd bump
// supported in 4 < |y| < 5, used for the support geometry of the tile
// operators.
enum class KernelMode { Telescoping, Narrow };

struct Kernel {
    KernelMode mode = KernelMode::Telescoping;

    // Smooth even cutoff: 1 on |y| <= 4, 0 on |y| >= 8.
    static double chi(double y);

    double psi(double y) const;
    double psi_k(int k, double y) const;  // 2^k psi(2^k y)

    double support_lo() const;  // 2 or 4
    double support_hi() const;  // 8 or 5
    double sup_abs() const;     // sup |psi|, cached per mode
};

Kernel make_kernel(KernelMode mode);

// max over samples (each in 0 < |y| < 1) of |sum_{k<=k_max} psi_k(y) - 1/y|.
double psi_identity_check(const Kernel& kernel, int k_max,
                          const std::vector<double>& samples);

// Uniform complex samples at the midpoints of the 2^m cells of [0,1).
// Everything downstream treats the function as constant on each cell and
// zero outside [0,1).
struct GridFunction {
    int m = 0;
    std::vector<std::complex<double>> v;

    static GridFunction zeros(int m);
    static GridFunction from_fn(int m,
                                const std::function<std::complex<double>(double)>& f);

    std::size_t size() const { return v.size(); }
    double h() const;
    double x_at(std::size_t i) const;               // cell midpoint
    std::complex<double> eval(double x) const;      // cell sample, 0 off [0,1)

    double norm_lp(double p) const;  // composite midpoint rule
    double norm_inf() const;

    std::string to_csv() const;  // lines "x,re,im"
    static GridFunction from_csv(const std::string& text);
};

// h * sum f_i conj(g_i): the L^2 pairing under the shared quadrature rule.
std::complex<double> inner(const GridFunction& f, const GridFunction& g);

// Piecewise-constant phase data: on each of the 2^m cells, coefficients
// a_1..a_d of Q_x(y) = sum_j a_j y^j; q_x is its derivative.
struct PhaseAssignment {
    int m = 0;
    int d = 1;
    std::vector<std::vector<double>> a;  // per cell, size d each

    static PhaseAssignment constant(int m, const std::vector<double>& coeffs);

    std::size_t cells() const { return a.size(); }
    std::size_t cell_of(double x) const;
    Poly big_q_at(std::size_t cell) const;  // Q_x, zero constant term
    Poly q_at(std::size_t cell) const;      // derivative of Q_x

    std::string to_csv() const;  // lines "cell_index,a_1,...,a_d"
    static PhaseAssignment from_csv(const std::string& text);
};

// x -> integral e^{i(Q(x) - Q(y))} psi_k(x - y) f(y) dy, evaluated at cell
// midpoints with per-cell Gauss-Legendre panels sized to the phase
// oscillation. Throws when the panel budget is exceeded.
GridFunction evaluate_TQ(const GridFunction& f, const Poly& big_q,
                         const Kernel& kernel, int k);

// Pointwise sup over candidates of |sum_{k<=k_max} evaluate_TQ|. Throws on
// an empty candidate set.
GridFunction evaluate_direct(const GridFunction& f,
                             const std::vector<Poly>& candidates,
                             const Kernel& kernel, int k_max);

struct CellSet {
    std::vector<std::size_t> cells;  // grid-cell indices, increasing
    double a0 = 0.0;                 // |E(P)| / |I|
};

// Cells x of I with q_x inside the tile box. Throws when the grid is
// coarser than the tile.
CellSet compute_EP(const Tile& P, const PhaseAssignment& sigma);

struct TileOperatorResult {
    GridFunction out;
    Tile tile;
    std::vector<std::size_t> ep_cells;
    double a0 = 0.0;
};

// The localized scale-k piece and its exact discrete adjoint. Both are
// built from the same per-cell integrated kernel weights, so
// <apply_TP(f), g> == <f, apply_TP_star(g)> to rounding.
TileOperatorResult apply_TP(const Tile& P, const GridFunction& f,
                            const PhaseAssignment& sigma, const Kernel& kernel);
TileOperatorResult apply_TP_star(const Tile& P, const GridFunction& f,
                                 const PhaseAssignment& sigma,
                                 const Kernel& kernel);

// The integrated kernel weights W_ij for i in E(P): the dense rows applied
// by the localized scale piece and (conjugated) by its adjoint. Useful when
// the same tile operator is applied to many inputs.
struct TileWeights {
    std::vector<std::size_t> rows;  // E(P) cell indices
    std::vector<std::vector<std::complex<double>>> w;  // per row, 2^m entries
    double a0 = 0.0;
};
TileWeights tile_weights(const Tile& P, const PhaseAssignment& sigma,
                         const Kernel& kernel);

// Distinct scale-k tiles with nonempty E(P) under sigma; their cell sets
// partition the grid.
std::vector<Tile> active_tiles(const PhaseAssignment& sigma, int k);

// max over the grid of |sum_{scale<=k_max} sum_P apply_TP(f) - reference|
// where the reference applies the scale-k weights directly with the local
// phase, bypassing the tile partition.
double reconstruct_check(const GridFunction& f, const PhaseAssignment& sigma,
                         const Kernel& kernel, int k_max);

// Smallest integer strictly larger than 2d log2(2d).
int scale_gap(int d);

// Tiles whose time scale is congruent to j mod big_d.
std::vector<Tile> restrict_scales(const std::vector<Tile>& tiles, int j, int big_d);

}  // namespace carleson

#endif
