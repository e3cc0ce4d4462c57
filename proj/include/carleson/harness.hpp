#ifndef CARLESON_HARNESS_HPP
#define CARLESON_HARNESS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "carleson/forest.hpp"
#include "carleson/operators.hpp"
#include "carleson/tiles.hpp"

namespace carleson {

// Run configuration shared by all verification suites.
struct RunConfig {
    int d = 2;
    double p = 2.0;
    double r = 1.5;
    int k_max = 4;
    int m = 7;  // grid resolution 2^m
    std::uint64_t seed = 1;
    int trials = 60;
    KernelMode kernel = KernelMode::Telescoping;
    MassParams mass;
    double eps0 = 0.01;
    int phase_grid = 5;  // candidate phases per coefficient direction
    std::string out_dir = ".";

    // Throws on violated constraints; the r < p ordering is only required
    // when the norm experiment runs.
    void validate(bool norm_experiment = false) const;
    static RunConfig from_text(const std::string& text);  // "key = value" lines
    std::string to_json() const;
};

// Hardy-Littlewood maximal function on the grid (sup over cell-aligned
// windows containing the point).
GridFunction maximal_fn(const GridFunction& f);

// A carrier interval with its exceptional cells.
struct DensityPair {
    RealInterval interval;
    std::vector<std::size_t> cells;
};

// Restricted maximal function: on the cells of E_j the sup runs over
// windows containing I_j; zero elsewhere. Throws when E_j leaves I_j or
// the density |E_j|/|I_j| exceeds delta.
GridFunction maximal_delta(const GridFunction& f,
                           const std::vector<DensityPair>& pairs, double delta);

// Measured sup of ||M_delta f||_p / (delta^{1/p} ||f||_p) over random f.
double maximal_delta_constant(double delta, double p, int m, int trials,
                              std::uint64_t seed);

// Per-pair decay data for the two-tile correlation estimates.
struct PairDecayRecord {
    double delta = 0.0;
    double ceil_delta = 1.0;
    double ratio_smooth = 0.0;    // off-critical-set integral over its bound
    double ratio_critical = 0.0;  // critical-set integral over its bound
    double ratio_norm = 0.0;      // squared composition norm over its bound
    int iterations = 0;
    bool converged = false;
};

struct Lemma0Report {
    std::vector<PairDecayRecord> pairs;
    double max_ratio_smooth = 0.0;
    double max_ratio_critical = 0.0;
    double max_ratio_norm = 0.0;
    double slope = 0.0;  // log-log trend of the norm ratio versus delta
    double converged_fraction = 0.0;
    std::string to_json() const;
};

// Deterministic tile-pair corpus with overlapping star intervals.
std::vector<std::pair<Tile, Tile>> generate_pairs(const PhaseAssignment& sigma,
                                                  const RunConfig& config,
                                                  std::size_t count);

// Phase data whose active tiles span several scales and frequencies.
PhaseAssignment generate_sigma(const RunConfig& config);

Lemma0Report verify_lemma0(const std::vector<std::pair<Tile, Tile>>& pairs,
                           const PhaseAssignment& sigma, const RunConfig& config);

struct TreeNormReport {
    double majorant_constant = 0.0;  // sup |T f| over the maximal majorant
    double max_norm_ratio = 0.0;     // sup ||T f||_p / ||f||_p
    std::size_t trials = 0;
    std::string to_json() const;
};
TreeNormReport verify_tree(const std::vector<Tile>& tree,
                           const PhaseAssignment& sigma, const RunConfig& config);

struct SweepPoint {
    double delta = 0.0;
    double value = 0.0;
};
struct SweepReport {
    std::vector<SweepPoint> points;
    double slope = 0.0;   // least-squares slope of log2 value vs log2 delta
    double target = 0.5;  // exponent the slope is compared against
    std::string to_json() const;
};

// Density sweep delta in {2^-2 .. 2^-8}: single-tile trees with |E| =
// delta * |I|, measured p-norm ratios.
SweepReport tree_delta_sweep(const RunConfig& config);

// Same sweep for the restricted adjoint bound ||chi_A T* f||_2.
SweepReport lemma4_delta_sweep(const RunConfig& config);

struct CutNormReport {
    bool masx_ok = false;   // |I* cap A| <= delta |I| for every member
    double max_ratio = 0.0; // ||chi_A T* f||_2 / (delta^{1/2} ||f||_2)
    std::size_t trials = 0;
    std::string to_json() const;
};
CutNormReport verify_lemma4(const std::vector<Tile>& tree,
                            const std::vector<std::size_t>& a_cells, double delta,
                            const PhaseAssignment& sigma, const RunConfig& config);

struct TreePairReport {
    bool refused = false;  // trees failed the separation precondition
    std::string diagnostic;
    double max_ratio = 0.0;  // correlation over its two-term bound
    std::size_t whitney_blocks = 0;
    std::size_t boundary_blocks = 0;
    std::size_t separation_pieces = 0;
    std::string to_json() const;
};
TreePairReport verify_tree_pair(const TreeT& t1, const TreeT& t2,
                                const PhaseAssignment& sigma, double delta,
                                const RunConfig& config);

struct RowOrthReport {
    double max_ratio = 0.0;  // l2 of the sum over the square-sum of rows
    std::size_t rows = 0;
    std::size_t trials = 0;
    std::string to_json() const;
};
RowOrthReport verify_row_orthogonality(const std::vector<std::vector<TreeT>>& rows,
                                       const PhaseAssignment& sigma,
                                       const RunConfig& config);

struct NormExperimentReport {
    double max_ratio = 0.0;
    double last_window_gain = 0.0;  // relative gain over the last 50 trials
    std::size_t trials = 0;
    std::vector<double> running_max;
    std::string to_json() const;
};
NormExperimentReport run_norm_experiment(const RunConfig& config);

struct AppendixReport {
    std::size_t growth_violations = 0;   // envelope comparison across intervals
    std::size_t sublevel_violations = 0; // sublevel measure bound
    double exact_case_error = 0.0;       // monomial sublevel measure identity
    std::size_t central_violations = 0;  // central-distance bound on tiles
    double scale_spread = 0.0;  // relative spread of the measured constant
    bool pass() const;
    std::string to_json() const;
};
AppendixReport verify_appendix(const RunConfig& config, int trials_per_d);

struct KernelReport {
    double identity_error = 0.0;  // max deviation from the 1/y telescoping sum
    bool support_ok = false;
    std::string to_json() const;
};
KernelReport verify_kernel(const RunConfig& config);

// Runs every suite, writes report.json (deterministic) and timings.json
// (wall-clock, exempt from determinism) into config.out_dir. Returns the
// report body.
std::string run_full_report(const RunConfig& config);

// CLI entry: subcommands verify-appendix, verify-kernel, decompose,
// verify-lemma0, verify-trees, forest, norms, report. Exit 0 on pass,
// 1 on check failure, 2 on bad flags.
int cli_main(int argc, char** argv);

}  // namespace carleson

#endif
