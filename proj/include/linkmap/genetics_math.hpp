#pragma once

#include "linkmap/cross.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace linkmap {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Hamming distance between two marker columns, rescaled to the full
/// population: d = mismatches * n / n_obs. A heterozygote against a
/// homozygote counts half a mismatch.
struct PairwiseDistance {
  double d = 0.0;
  std::size_t n_obs = 0;
  bool defined() const noexcept { return n_obs > 0; }
};

PairwiseDistance hamming_distance(std::span<const Allele> a, std::span<const Allele> b);

/// Mismatch weight of a single call pair: 0, 0.5 or 1 (missing -> 0).
double call_mismatch(Allele a, Allele b) noexcept;

struct RecombinationFraction {
  double raw = 0.0;      // d / n, may exceed 0.5
  double clamped = 0.0;  // raw clamped to [0, 0.5]
  bool defined = true;
};

RecombinationFraction rf_estimate(const PairwiseDistance& d, std::size_t n);

enum class Objective { Count, ML };
enum class MapFunction { Kosambi, Haldane };

Objective parse_objective(std::string_view name);
MapFunction parse_map_function(std::string_view name);
std::string_view objective_name(Objective o) noexcept;
std::string_view map_function_name(MapFunction f) noexcept;

/// COUNT: p. ML: binary entropy in nats with 0 ln 0 = 0.
double weight(double p, Objective objective) noexcept;

/// Kosambi 25 ln((1+2p)/(1-2p)); Haldane -50 ln(1-2p). p >= 0.5 -> +inf.
double map_forward(double p, MapFunction f) noexcept;
/// Exact analytic inverse of map_forward.
double map_inverse(double cm, MapFunction f) noexcept;

/// Hamming threshold from P(d < delta) <= exp(-2 (n/2 - delta)^2 / n) = epsilon,
/// floored at 0. epsilon >= 1 returns +inf ("never split").
double hoeffding_delta(std::size_t n, double epsilon);

/// cM implied by the Hoeffding threshold for a two-class population.
double threshold_cm(std::size_t n, double epsilon, MapFunction f);

struct ThresholdRow {
  std::size_t n = 0;
  double cm_target = 0.0;
  double neg_log10_epsilon = 0.0;
};

/// For every (n, cM) pair the epsilon whose Hoeffding threshold sits exactly
/// at that map distance.
std::vector<ThresholdRow> threshold_profile(std::span<const std::size_t> n_values,
                                            std::span<const double> cm_targets, MapFunction f);

/// Observed advanced-RIL fraction to per-meiosis fraction: (p/2)/(1-p).
double ril_transform_aril(double p) noexcept;

/// Expected call-mismatch probability between two loci at per-meiosis
/// recombination fraction `rho` after r-1 generations of selfing from an F1,
/// from the exact two-locus haplotype-pair recursion.
double ril_expected_mismatch(double rho, int r);

/// Two-locus genotype joint distribution after r-1 selfings: joint[g1][g2]
/// with g in {AA, BB, AB} (Allele order).
std::array<std::array<double, 3>, 3> ril_two_locus_genotypes(double rho, int r);

/// Observed recombination fraction to per-meiosis fraction. Identity for
/// BC/DH, closed form for ARIL, bisection on ril_expected_mismatch for RILn.
double ril_invert(double observed, const PopulationType& pop);
double ril_invert(double observed, int r);

/// Per-meiosis fraction to the observed scale (inverse of ril_invert).
double ril_forward(double rho, const PopulationType& pop);

/// Fast ril_invert for bulk weight computation: RILn inverts a tabulated
/// forward curve by linear interpolation (error below 1e-8); other
/// populations use the closed forms.
class RilScale {
 public:
  explicit RilScale(PopulationType pop);
  double to_meiotic(double observed) const;
  double to_observed(double rho) const { return ril_forward(rho, pop_); }
  const PopulationType& pop() const noexcept { return pop_; }

 private:
  PopulationType pop_;
  std::vector<double> table_;  // forward values on an even rho grid over [0, 0.5]
};

}  // namespace linkmap
