#ifndef CARLESON_FOREST_HPP
#define CARLESON_FOREST_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "carleson/tiles.hpp"

namespace carleson {

// Run constants for the mass / decomposition pipeline.
struct MassParams {
    int N = 12;        // exponent on the pair factor inside the mass sup
    double K = 4.0;    // top-overlap constant
    int M = 3;         // moment constant
    double p = 2.0;    // Lebesgue exponent of the run
    double rho = 1.0;  // 0 < rho <= min{1, |p-1|/(2|2-p|)}

    void validate() const;  // throws on violated constraints
};

// min{1, |p-1| / (2|2-p|)}; p = 2 maps to 1.
double rho_for_p(double p);

// A tile with its density data |E(P)|/|I|.
struct MassTile {
    Tile tile;
    double a0 = 0.0;
};

// sup over universe tiles P' with I <= I' of a0' * ceil(Delta(2P,2P'))^N.
// Tiles with a0' = 0 contribute 0. Throws when no universe tile contains
// the time interval of P.
double mass(const Tile& P, const std::vector<MassTile>& universe, int N = 12);

// Level n holds the tiles with 2^{-n-1} < mass <= 2^{-n}; mass zero goes
// to the sink level -1.
struct MassLevels {
    std::vector<double> masses;  // parallel to the universe
    std::vector<int> levels;     // parallel; -1 for the sink class

    std::vector<std::size_t> level_members(int n) const;
};
MassLevels mass_levels(const std::vector<MassTile>& universe, int N = 12);

// Indices of universe tiles with a0 >= 2^{-n-1} that are maximal for <=
// under the convention: P maximal iff every P' >= P also satisfies P' <= P.
std::vector<std::size_t> select_maximal(const std::vector<MassTile>& universe,
                                        int n);

// Counting function of the top time intervals on a 2^grid_m grid, the
// heavy-overlap set, and the two size estimates for it (dyadic BMO and the
// maximal-function moment bound).
struct CountingReport {
    int grid_m = 0;
    double threshold = 0.0;            // 2^{(1+rho)n} K
    std::vector<int> counts;           // N(x) per grid cell
    std::vector<std::size_t> gn_cells; // cells with N >= threshold
    double gn_measure = 0.0;
    double bmo_norm = 0.0;      // dyadic BMO norm of N
    double cheb_bound = 0.0;    // threshold^-M * integral of N^M
    double vector_bound = 0.0;  // threshold^-M * integral of (sum (h*)^{1+rho/2})^M
};
CountingReport counting_and_gn(const std::vector<MassTile>& tops, int n,
                               const MassParams& params, int grid_m);

// Splits a mass level against the selected maximal tiles: the cluster part
// (4P strictly below some 4-dilated top image), the residue layered into
// antichains by chain depth, and the cluster part with heavy-overlap time
// intervals dropped.
struct TriangleSplit {
    std::vector<std::size_t> p0;                       // clustered tiles
    std::vector<std::vector<std::size_t>> antichains;  // layers of the rest
    std::vector<std::size_t> stranded;  // residue with deep chains (expected empty)
    std::vector<std::size_t> png;       // p0 minus tiles inside the overlap set
};
TriangleSplit triangle_filter(const std::vector<MassTile>& level_tiles,
                              const std::vector<MassTile>& tops, int n,
                              const CountingReport& gn);

struct TreeCertificate {
    bool cond_dilate = false;     // (3/2)P <= 10 P_0 for every member
    bool cond_neighbors = false;  // neighbor closure within the ambient set
    bool cond_convex = false;     // order convexity within the ambient set
    std::string witness;          // first violation, empty when passing
    bool pass() const { return cond_dilate && cond_neighbors && cond_convex; }
};

struct TreeT {
    Tile top;
    std::vector<Tile> members;
    TreeCertificate cert;
};

// Checks the three tree conditions against an ambient tile set.
TreeCertificate certify_tree(const Tile& top, const std::vector<Tile>& members,
                             const std::vector<Tile>& ambient);

// Coordinate-wise hull of the alphas of same-time tiles; throws when the
// time intervals differ.
Tile geometric_union(const std::vector<Tile>& tiles);

// One B-count layer of the forest construction.
struct ForestLayer {
    int j = 0;
    std::vector<Tile> layer_tops;        // maximal 4-dilate candidates
    std::vector<std::size_t> discarded;  // the three-clause discard set
    std::vector<TreeT> trees;            // certified merged clusters
    bool prop_a = false;  // 4P^l <= 4P^k implies equal time intervals
    bool prop_b = false;  // every layer tile sits below some candidate
    bool prop_c = false;  // tiles below two candidates force their mutual order
    std::size_t max_merge = 0;    // largest merged-cluster candidate count
    bool merge_bound_ok = false;  // max_merge <= c_d
};

struct ForestBuild {
    std::vector<ForestLayer> layers;
    std::vector<std::size_t> no_top;  // input tiles below no selected top
    int b_cap = 0;        // ceil(log2(1 + #tops)), the cap actually used
    double b_cap_alt = 0.0;  // 2 n log2(K), the coarse a-priori cap
    std::string to_json() const;
};

// Layers png_tiles by B(P) = #{j : 4P below the 4-dilate image of top j},
// discards the three-clause set, groups the rest around the layer tops,
// merges linked clusters, and certifies every cluster as a tree. n only
// enters the recorded a-priori layer cap.
ForestBuild build_forest(const std::vector<MassTile>& png_tiles,
                         const std::vector<MassTile>& tops,
                         const MassParams& params, int n);

// delta-separation of two trees: vacuous on disjoint top time intervals,
// otherwise every member of one inside the other's top interval must have
// pair factor below delta against the other top.
struct SeparationReport {
    bool pass = true;
    bool vacuous = false;
    Tile witness;          // first violating member when failing
    double witness_value = 0.0;
};
SeparationReport separation_check(const TreeT& t1, const TreeT& t2, double delta);

struct RowsResult {
    std::vector<std::vector<TreeT>> rows;    // trimmed trees, disjoint tops per row
    std::vector<std::vector<Tile>> plus_layers;   // antichain split of the
    std::vector<std::vector<Tile>> minus_layers;  // two chain-pruned sets
    std::vector<Tile> trimmed;               // boundary / non-normal members
    std::vector<RealInterval> f_n;           // boundary collars, merged
    double f_n_measure = 0.0;
    double f_n_bound = 0.0;                  // 200 delta^100 K^-2M sum |I_j|
    double row_bound = 0.0;                  // K delta^{-(1+rho)}
    bool row_bound_ok = false;
    std::string to_json() const;
};

// Chain pruning with L = 100 M log2(K/delta), boundary collars, normality
// trimming, and greedy first-fit packing of the surviving trees into rows
// with pairwise disjoint top time intervals.
RowsResult normalize_and_rows(const std::vector<TreeT>& trees,
                              const MassParams& params, double delta);

// Summary certificate over a finished decomposition: member masses within
// the level bound, trees pairwise separated, top overlap within the
// counting threshold, row count within bound.
struct ForestCertificate {
    bool mass_ok = false;
    bool separation_ok = false;
    bool overlap_ok = false;
    bool rows_ok = false;
    std::size_t row_count = 0;
    std::string first_failure;
    bool pass() const { return mass_ok && separation_ok && overlap_ok && rows_ok; }
    std::string to_json() const;
};
ForestCertificate certify_forest(const std::vector<TreeT>& trees,
                                 const std::vector<MassTile>& universe,
                                 const MassParams& params, int n, double delta,
                                 const RowsResult& rows);

}  // namespace carleson

#endif
