#pragma once

#include "linkmap/cross.hpp"
#include "linkmap/genetics_math.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace linkmap {

/// Dense symmetric matrix with a zero diagonal; used for both pairwise
/// weights and pairwise distances.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {
    for (std::size_t i = 0; i < n; ++i) data_[i * n + i] = 0.0;
  }
  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) noexcept {
    data_[i * n_ + j] = v;
    data_[j * n_ + i] = v;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

using WeightMatrix = SymmetricMatrix;
using DistanceMatrix = SymmetricMatrix;

// ---- binning ---------------------------------------------------------------

/// Bins of mutually compatible markers (zero pairwise distance). The first
/// member of each bin is its representative: fewest missing calls, ties to the
/// lowest index. Bins are ordered by representative index.
struct BinSet {
  std::vector<std::vector<std::size_t>> bins;
  std::vector<std::size_t> representatives() const;
  std::size_t size() const noexcept { return bins.size(); }
};

BinSet bin_markers(const MarkerMatrix& matrix, std::span<const std::size_t> group);

// ---- path search -----------------------------------------------------------

struct MstOrder {
  std::vector<std::size_t> order;      // backbone (longest path of the MST)
  std::vector<std::size_t> leftovers;  // vertices off the backbone
};

/// Prim's MST (ties to the lowest index) followed by the longest path of the
/// tree measured in vertices.
MstOrder mst_order(const WeightMatrix& w);

double path_weight(std::span<const std::size_t> order, const WeightMatrix& w) noexcept;

struct LocalSearchOptions {
  std::size_t window = 6;      // K of the windowed K-opt
  std::size_t max_block = 20;  // block relocation length cap
  int max_passes = 30;
};

/// Inserts leftovers at their cheapest position, then applies node
/// relocation, windowed K-opt and block reversal/relocation until no move
/// improves the path or the pass cap is reached.
std::vector<std::size_t> local_optimize(std::vector<std::size_t> order, const WeightMatrix& w,
                                        std::span<const std::size_t> leftovers,
                                        const LocalSearchOptions& options = {});

// ---- em imputation and error detection -------------------------------------

/// n genotypes x t columns of P(call == AA). Observed AA = 1, BB = 0, AB = 0.5.
class ProbabilityMatrix {
 public:
  ProbabilityMatrix() = default;
  ProbabilityMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), values_(rows * cols, 0.5), observed_(rows * cols, 0) {}

  static ProbabilityMatrix from_calls(const MarkerMatrix& matrix, std::span<const std::size_t> columns);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[j * rows_ + i]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return values_[j * rows_ + i]; }
  bool observed(std::size_t i, std::size_t j) const noexcept { return observed_[j * rows_ + i] != 0; }
  void set_observed(std::size_t i, std::size_t j, double value) noexcept {
    observed_[j * rows_ + i] = 1;
    values_[j * rows_ + i] = value;
  }
  void set_missing(std::size_t i, std::size_t j) noexcept { observed_[j * rows_ + i] = 0; }
  const double* column(std::size_t j) const noexcept { return values_.data() + j * rows_; }
  std::size_t missing_count() const noexcept;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> observed_;
};

/// E-step: each unobserved cell becomes the posterior probability of AA given
/// the nearest observed calls on either side of it in `order`, with adjacent
/// recombination fractions adjacent_d[k] / n (k indexes order[k]..order[k+1]).
/// With both flanks observed as AA this is (1-p1)(1-p2) / ((1-p1)(1-p2) + p1 p2).
ProbabilityMatrix em_e_step(const ProbabilityMatrix& a, std::span<const std::size_t> order,
                            std::span<const double> adjacent_d);

/// M-step: d_jk = sum_i A(i,j)(1-A(i,k)) + A(i,k)(1-A(i,j)).
DistanceMatrix em_m_step(const ProbabilityMatrix& a);

struct EmStepResult {
  ProbabilityMatrix a;
  DistanceMatrix d;
};
EmStepResult em_impute_step(const ProbabilityMatrix& a, std::span<const std::size_t> order,
                            std::span<const double> adjacent_d);

struct FlaggedCell {
  std::size_t genotype = 0;
  std::size_t column = 0;
  friend bool operator==(const FlaggedCell&, const FlaggedCell&) = default;
};

struct DetectOptions {
  std::size_t neighbours_per_side = 3;
  double threshold = 0.75;
  double min_distance = 0.5;  // floor for inverse-square weights (mismatches)
  bool balance_sides = true;  // false: one pooled inverse-square average
};

/// Expected value of an observed cell from inverse-square distance weighted
/// nearby markers; a cell is suspicious when |E - A| exceeds the threshold.
/// Each side of the cell is averaged separately before the two sides are
/// combined, so a genuine crossover next to the cell reads as 0.5.
double expected_allele(const ProbabilityMatrix& a, std::span<const std::size_t> order, std::size_t genotype,
                       std::size_t position, const DistanceMatrix& d, const DetectOptions& options = {});

std::vector<FlaggedCell> detect_bad_data(const ProbabilityMatrix& a, std::span<const std::size_t> order,
                                         const DistanceMatrix& d, const DetectOptions& options = {});

// ---- linkage-group ordering ------------------------------------------------

struct OrderParams {
  Objective objective = Objective::Count;
  MapFunction map_function = MapFunction::Kosambi;
  bool detect_bad_data = false;
  bool anchor = false;
  double no_map_dist = 15.0;
  std::size_t no_map_size = 0;
  int max_em_iterations = 30;
  double em_tolerance = 1e-4;
  LocalSearchOptions search;
  DetectOptions detect;
};

struct FlaggedCall {
  std::size_t genotype = 0;
  std::size_t marker = 0;  // matrix index
};

struct OrderResult {
  std::vector<std::size_t> representatives;  // matrix indices in map order
  std::vector<double> rep_positions;
  std::vector<std::size_t> markers;  // every kept marker, bins expanded, map order
  std::vector<double> positions;
  std::vector<std::size_t> omitted;  // dropped by the noMap rule
  ProbabilityMatrix imputed;         // columns follow `representatives`
  std::vector<FlaggedCall> flagged;
  std::vector<double> adjacent_rf;   // observed-scale fractions between representatives
  int em_iterations = 0;
  std::vector<double> objective_trace;  // adjacent COUNT objective after each M-step
};

/// Bins, orders and positions one linkage group. `group` order is the
/// reference order for the anchor rule. Throws ConfigError when error
/// detection is requested for a finite-generation RIL.
OrderResult order_linkage_group(const MarkerMatrix& matrix, std::span<const std::size_t> group,
                                const PopulationType& pop, const OrderParams& params = {});

/// Largest fraction used when converting adjacent estimates to positions.
inline constexpr double kMaxPositionRf = 0.499;

// ---- whole-map construction ------------------------------------------------

struct ConstructParams {
  double p_value = 1e-6;
  OrderParams order;
  double miss_thresh = 1.0;
  bool mvest_bc = false;
  bool bychr = true;
  std::vector<std::string> chr;  // empty = all groups
  SuffixRule suffix = SuffixRule::Numeric;
  unsigned threads = 0;  // 0 = default_worker_count()
};

struct ConstructResult {
  Cross cross;
  std::vector<std::pair<std::string, OrderResult>> orders;  // per output group
};

/// bychr = false pools the selected groups, clusters and orders every
/// component (named L.1, L.2, ...). bychr = true re-orders each selected
/// group independently, re-splitting it when p_value < 1. Markers whose
/// missing proportion exceeds miss_thresh go to the missing ledger;
/// suspicious calls found by error detection are set to missing.
ConstructResult construct_map_detailed(const Cross& cross, const ConstructParams& params);
Cross construct_map(const Cross& cross, const ConstructParams& params);

/// One E-step along input order that fills missing BC/DH calls whose
/// posterior is decisive (used before clustering when mvest_bc is set).
MarkerMatrix impute_for_clustering(const MarkerMatrix& matrix, std::span<const std::size_t> markers);

}  // namespace linkmap
