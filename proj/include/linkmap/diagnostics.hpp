#pragma once

#include "linkmap/cross.hpp"
#include "linkmap/genetics_math.hpp"

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace linkmap {

// ---- genotype profiles ------------------------------------------------------

struct GenotypeStats {
  std::vector<std::string> genotype;
  std::vector<std::size_t> xo;    // crossovers over all mapped groups
  std::vector<std::size_t> dxo;   // double crossovers
  std::vector<std::size_t> miss;  // missing calls over mapped markers
  std::vector<bool> flagged;      // xo significantly above xo_lambda (empty without it)
  std::optional<double> xo_lambda;
};

/// Crossovers are changes between consecutive non-missing calls along each
/// group; a double crossover is a call that differs from both of its
/// non-missing neighbours. With xo_lambda, genotypes whose Poisson upper tail
/// P(X >= xo) falls below 0.05/n are flagged.
GenotypeStats profile_genotypes(const Cross& cross, std::optional<double> xo_lambda = std::nullopt,
                                std::span<const std::string> groups = {});

// ---- segregation distortion and LOD -----------------------------------------

struct SegregationTest {
  double chi_square = 0.0;
  int df = 1;
  double p_value = 1.0;
  double neg_log10_p = 0.0;
};

/// Chi-square goodness of fit against 1:1 (BC/DH/ARIL) or
/// (1-h)/2 : (1-h)/2 : h (RILn, h = 2^-(r-1)).
SegregationTest seg_distortion_test(std::span<const Allele> column, const PopulationType& pop);

/// Upper tail of chi-square(df) and its -log10, robust to underflow.
double chi_square_upper_tail(double x, int df);
double chi_square_neg_log10_tail(double x, int df);

/// LOD for linkage at p = clamp(d / n_obs, 0, 0.5) against p = 0.5.
double two_point_lod(double d, double n_obs);

// ---- marker / interval profiles ---------------------------------------------

struct MarkerRow {
  std::string marker, group;
  double position = 0.0;
  double neg_log10_p = 0.0;
  double miss = 0.0;
  double prop_aa = 0.0, prop_bb = 0.0, prop_ab = 0.0;  // over observed calls
  std::size_t dxo = 0;
  bool bonferroni = false;
};

struct IntervalRow {
  std::string left, right, group;
  double erf = 0.0;     // two-point estimate mismatches / n_obs
  double lod = 0.0;
  double dist = 0.0;    // position difference, cM
  double mrf = 0.0;     // map_inverse(dist)
  double recomb = 0.0;  // mismatches between the adjacent markers
  double n_obs = 0.0;
  bool weak_linkage = false;
};

struct MarkerStats {
  std::vector<MarkerRow> markers;
  std::vector<IntervalRow> intervals;
  double bonferroni_alpha = 0.0;  // 0.05 / m
};

enum class MarkerStat { SegDist, Miss, Prop, Dxo, Erf, Lod, Dist, Mrf, Recomb };
MarkerStat parse_marker_stat(std::string_view name);
std::string_view marker_stat_name(MarkerStat s) noexcept;

/// Marker and interval statistics for the requested groups (all when empty).
/// Annotation columns are filled when `bonferroni` is set ("bonf").
MarkerStats profile_markers(const Cross& cross, MapFunction f = MapFunction::Kosambi, bool bonferroni = false,
                            std::span<const std::string> groups = {});

// ---- heat map ---------------------------------------------------------------

struct HeatMap {
  std::vector<std::string> markers;
  std::vector<std::string> groups;  // group of each marker
  std::size_t size() const noexcept { return markers.size(); }
  std::vector<double> rf_values;   // unclamped two-point rf, row-major, NaN when undefined
  std::vector<double> lod_values;  // LOD clamped to [0, lmax]
  double at_rf(std::size_t i, std::size_t j) const { return rf_values[i * size() + j]; }
  double at_lod(std::size_t i, std::size_t j) const { return lod_values[i * size() + j]; }
};

HeatMap heatmap_matrices(const Cross& cross, std::span<const std::string> groups = {}, double lmax = 12.0,
                         double rmin = 0.0);

// ---- clones -----------------------------------------------------------------

struct CloneRow {
  std::string g1, g2;
  double coef = 0.0;
  std::size_t match = 0, diff = 0, na_both = 0, na_one = 0;
  std::size_t group = 0;  // 1-based clone group
};

std::vector<CloneRow> gen_clones(const Cross& cross, double tol = 0.9);

/// Collapses each clone group (connectivity over the given rows) into one
/// genotype: consensus calls (agreement or single observation; conflicts go
/// missing) named by joining member ids with '_', or, with consensus off, the
/// member with the fewest missing calls.
Cross fix_clones(const Cross& cross, std::span<const CloneRow> rows, bool consensus = true);

// ---- pull / push ------------------------------------------------------------

struct PushParams {
  std::variant<double, std::string> seg_thresh = 0.05;  // p-value or "bonf"
  std::optional<std::string> seg_ratio;                 // e.g. "70:30"
  double miss_thresh = 0.1;
  double max_rf = 0.25;
  double min_lod = 3.0;
};

/// Parses "0.05", "bonf".
std::variant<double, std::string> parse_seg_thresh(std::string_view text);
/// "70:30" -> 0.7; throws ConfigError on malformed ratios.
double parse_seg_ratio(std::string_view text);

/// True when the marker would be pulled as segregation-distorted among m tested markers.
bool is_distorted(std::span<const Allele> column, const PopulationType& pop, const PushParams& params,
                  std::size_t m);

Cross pull_markers(const Cross& cross, LedgerKind type, const PushParams& params = {},
                   std::span<const std::string> groups = {});

enum class PushType { CoLocated, SegDistortion, Missing, Unlinked };
PushType parse_push_type(std::string_view name);

struct PushReport {
  std::size_t pushed = 0;    // placed into linkage groups
  std::size_t residual = 0;  // left in the residual unlinked group
  std::size_t retained = 0;  // left in the ledger (did not pass the push criterion)
};

/// Co-located markers return next to their anchor. Other markers join the
/// group of their best-linked mapped marker when min rf <= max_rf with
/// LOD >= min_lod, at that marker's position; unassignable markers go to a
/// residual group named "unlinked" (or `unlinked_group` for type Unlinked).
Cross push_markers(const Cross& cross, PushType type, const PushParams& params = {},
                   const std::optional<std::string>& unlinked_group = std::nullopt, PushReport* report = nullptr);

// ---- quick map re-estimation -----------------------------------------------

/// Two-point adjacent distances, per-genotype Viterbi reconstruction of the
/// hidden calls, then positions from reconstructed crossover counts.
Cross quick_est(const Cross& cross, double error_prob = 1e-4, MapFunction f = MapFunction::Kosambi,
                std::span<const std::string> groups = {});

/// Cumulative positions from adjacent two-point estimates only (step 1 of quick_est).
std::vector<double> two_point_positions(const MarkerMatrix& matrix, std::span<const std::size_t> markers,
                                        const PopulationType& pop, MapFunction f);

// ---- emission ---------------------------------------------------------------

void write_genotype_profile_csv(const GenotypeStats& stats, std::ostream& out);
void write_marker_profile_csv(const MarkerStats& stats, std::span<const MarkerStat> selection, std::ostream& out);
void write_interval_profile_csv(const MarkerStats& stats, std::span<const MarkerStat> selection, std::ostream& out);
void write_clone_report_csv(std::span<const CloneRow> rows, std::ostream& out);
std::vector<CloneRow> read_clone_report_csv(std::istream& in);
void write_heatmap_csv(const HeatMap& heat, std::ostream& out);
void write_heatmap_svg(const HeatMap& heat, double lmax, std::ostream& out);
void write_genotype_profile_svg(const GenotypeStats& stats, std::ostream& out);
void write_marker_profile_svg(const MarkerStats& stats, std::span<const MarkerStat> selection, std::ostream& out);

}  // namespace linkmap
