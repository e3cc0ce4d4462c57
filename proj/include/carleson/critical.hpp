#ifndef CARLESON_CRITICAL_HPP
#define CARLESON_CRITICAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "carleson/dyadic.hpp"
#include "carleson/polyalg.hpp"
#include "carleson/tiles.hpp"

namespace carleson {

// Provenance stages for critical-set pieces.
enum class CriticalStage { S1, S2, S3, C, MergedGap };

struct CriticalPiece {
    RealInterval iv;
    CriticalStage stage;
    double local_min = 0.0;  // the x_j this piece came from (gaps: left neighbor)
    bool capped = false;     // no qualifying dyadic interval inside the domain
};

struct CriticalParams {
    double eta = 0.0;
    double v = 0.0;  // S-type threshold (unused for C-type)
    double w = 0.0;  // C-type radius (unused for S-type)
    double eps0 = 0.0;
    double c_d = 0.0;
};

struct CriticalSetResult {
    std::vector<CriticalPiece> pieces;  // pairwise disjoint, sorted
    CriticalParams params;

    double measure() const;
    bool contains(double x) const;
    std::vector<RealInterval> intervals() const;
    std::string to_json() const;
};

// Local minima of |q| on the closed hull of Jbar with value < eta, sorted.
std::vector<std::pair<double, double>> local_minima(const Poly& q, double eta,
                                                    const RealInterval& jbar);

struct SIntervals {
    DyadicInterval i1, i2, i3;
    bool has_i1 = false, has_i2 = false, has_i3 = false;
    bool capped = false;  // i1 fell back to the whole domain
};

// Smallest dyadic interval containing x_j with Delta_{q - q(x_j)} above
// c_d * v, plus the smallest qualifying dyadic intervals abutting it on
// either side; all within [0, 1].
SIntervals s_intervals(const Poly& q, double x_j, double v, double c_d);

// Union of the A pieces and every interior gap shorter than an adjacent
// piece, merged into maximal intervals. Boundary gaps are kept out.
std::vector<RealInterval> merge_E(const RealInterval& jbar,
                                  const std::vector<RealInterval>& A);

// The S-type construction I_s = E(Jbar, S(eta, v, q, Jbar)). The dyadic walk
// uses the threshold thr_cd * v (thr_cd defaults to c_d when nonpositive).
CriticalSetResult critical_set_s(const Poly& q, const RealInterval& jbar,
                                 double eta, double v, double c_d,
                                 double thr_cd = -1.0);

// The C-type construction I_c = E(Jbar, C(eta, w, q, Jbar)).
CriticalSetResult critical_set_c(const Poly& q, const RealInterval& jbar,
                                 double eta, double w, double c_d);

// Canonical parameters from J = largest dyadic in Jbar:
//   w = c_d |J| ceil(Delta_q(J))^{1/d - eps0},
//   v = c_d ceil(Delta_q(J))^{-2 eps0},  eta = c_d v / w.
struct CanonicalParams {
    double w = 0.0, v = 0.0, eta = 0.0, ceil_delta = 1.0;
};
CanonicalParams canonical_params(const Poly& q, const RealInterval& jbar, int d,
                                 double eps0, double c_d);

// (I_s, I_c) with canonical parameters; both empty when q is constant.
std::pair<CriticalSetResult, CriticalSetResult> critical_sets(
    const Poly& q, const RealInterval& jbar, int d, double eps0, double c_d);

// I_{1,2}: the C-type set for the interaction polynomial on I~_1 n I~_2
// (clamped to [0,1]). Throws when the enlarged intervals are disjoint.
CriticalSetResult pair_critical_set(const Tile& P1, const Tile& P2, double eps0,
                                    double c_d = -1.0);

struct CtbsReport {
    bool pass = true;
    std::size_t checked = 0;
    std::vector<double> counterexamples;  // offending y values
};

// Sampled containment check for the near-collision set of a tile pair.
CtbsReport ctbs_check(const Tile& P1, const Tile& P2, double eps0, int samples,
                      std::uint64_t seed = 1, double c_d = -1.0);

// Separated-tree sets: I_s with v = c_d / delta, then I_c as the
// union of C-type sets over the maximal pieces of I_s.
struct SeparatedPairSets {
    CriticalSetResult i_s;
    CriticalSetResult i_c;
};
SeparatedPairSets separated_pair_sets(const Poly& q12, const RealInterval& jbar,
                                      int d, double eps0, double c_d, double delta);

enum class WhitneyKind { Separation, Boundary, Plain };

struct WhitneyInterval {
    RealInterval iv;
    WhitneyKind kind;
};

struct WhitneyPartition {
    std::vector<WhitneyInterval> intervals;  // exact partition, sorted
    double total_length() const;
};

// Whitney-style partition of Jbar relative to the separation set: geometric
// chains away from each piece, intervals shorter than c_d |I_s^j| next to a
// piece merged into a boundary block.
WhitneyPartition whitney_partition(const RealInterval& jbar,
                                   const std::vector<RealInterval>& i_s, double c_d);

}  // namespace carleson

#endif
