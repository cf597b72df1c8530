#include "linkmap/genetics_math.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace linkmap {

double call_mismatch(Allele a, Allele b) noexcept {
  if (a == Allele::Missing || b == Allele::Missing || a == b) return 0.0;
  if (a == Allele::AB || b == Allele::AB) return 0.5;
  return 1.0;
}

PairwiseDistance hamming_distance(std::span<const Allele> a, std::span<const Allele> b) {
  const std::size_t n = std::min(a.size(), b.size());
  double mism = 0.0;
  std::size_t obs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] == Allele::Missing || b[i] == Allele::Missing) continue;
    ++obs;
    mism += call_mismatch(a[i], b[i]);
  }
  if (obs == 0) return {0.0, 0};
  return {mism * static_cast<double>(n) / static_cast<double>(obs), obs};
}

RecombinationFraction rf_estimate(const PairwiseDistance& d, std::size_t n) {
  if (!d.defined() || n == 0) return {0.0, 0.0, false};
  const double raw = d.d / static_cast<double>(n);
  return {raw, std::clamp(raw, 0.0, 0.5), true};
}

Objective parse_objective(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  if (s == "COUNT") return Objective::Count;
  if (s == "ML") return Objective::ML;
  throw ConfigError("unknown objective '" + std::string(name) + "' (COUNT or ML)");
}

MapFunction parse_map_function(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "kosambi") return MapFunction::Kosambi;
  if (s == "haldane") return MapFunction::Haldane;
  throw ConfigError("unknown map function '" + std::string(name) + "' (kosambi or haldane)");
}

std::string_view objective_name(Objective o) noexcept { return o == Objective::Count ? "COUNT" : "ML"; }

std::string_view map_function_name(MapFunction f) noexcept {
  return f == MapFunction::Kosambi ? "kosambi" : "haldane";
}

double weight(double p, Objective objective) noexcept {
  if (objective == Objective::Count) return p;
  double w = 0.0;
  if (p > 0.0) w -= p * std::log(p);
  if (p < 1.0) w -= (1.0 - p) * std::log1p(-p);
  return w;
}

double map_forward(double p, MapFunction f) noexcept {
  if (p <= 0.0) return 0.0;
  if (p >= 0.5) return kInfinity;
  if (f == MapFunction::Kosambi) return 25.0 * (std::log1p(2.0 * p) - std::log1p(-2.0 * p));
  return -50.0 * std::log1p(-2.0 * p);
}

double map_inverse(double cm, MapFunction f) noexcept {
  if (cm <= 0.0) return 0.0;
  if (std::isinf(cm)) return 0.5;
  if (f == MapFunction::Kosambi) return 0.5 * std::tanh(cm / 50.0);
  return -0.5 * std::expm1(-cm / 50.0);
}

double hoeffding_delta(std::size_t n, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("p-value must be positive");
  if (epsilon >= 1.0) return kInfinity;
  const double nn = static_cast<double>(n);
  const double delta = nn / 2.0 - std::sqrt(-nn * std::log(epsilon) / 2.0);
  return std::max(delta, 0.0);
}

double threshold_cm(std::size_t n, double epsilon, MapFunction f) {
  const double delta = hoeffding_delta(n, epsilon);
  if (std::isinf(delta)) return kInfinity;
  return map_forward(delta / static_cast<double>(n), f);
}

std::vector<ThresholdRow> threshold_profile(std::span<const std::size_t> n_values,
                                            std::span<const double> cm_targets, MapFunction f) {
  std::vector<ThresholdRow> rows;
  rows.reserve(n_values.size() * cm_targets.size());
  for (double cm : cm_targets) {
    if (!(cm > 0.0)) throw ConfigError("threshold targets must be positive cM values");
    for (std::size_t n : n_values) {
      const double nn = static_cast<double>(n);
      const double gap = nn / 2.0 - nn * map_inverse(cm, f);
      rows.push_back({n, cm, 2.0 * gap * gap / (nn * std::log(10.0))});
    }
  }
  return rows;
}

double ril_transform_aril(double p) noexcept {
  if (p <= 0.0) return 0.0;
  if (p >= 0.5) return 0.5;
  return (p / 2.0) / (1.0 - p);
}

namespace {

// Haplotypes over two loci: bit 0 = allele at locus 1 (1 = B), bit 1 = locus 2.
// An individual is an ordered haplotype pair, state = 4 * h1 + h2.
using StateVec = std::array<double, 16>;

StateVec selfing_distribution(double rho, int r) {
  StateVec p{};
  p[4 * 0 + 3] = 1.0;  // F1: AA / BB haplotypes
  for (int gen = 1; gen < r; ++gen) {
    StateVec next{};
    for (int s = 0; s < 16; ++s) {
      if (p[s] == 0.0) continue;
      const int h1 = s / 4, h2 = s % 4;
      std::array<double, 4> gam{};
      gam[h1] += 0.5 * (1.0 - rho);
      gam[h2] += 0.5 * (1.0 - rho);
      gam[(h1 & 1) | (h2 & 2)] += 0.5 * rho;
      gam[(h2 & 1) | (h1 & 2)] += 0.5 * rho;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) next[4 * a + b] += p[s] * gam[a] * gam[b];
    }
    p = next;
  }
  return p;
}

int genotype_index(int allele1, int allele2) {
  if (allele1 != allele2) return static_cast<int>(Allele::AB);
  return allele1 == 0 ? static_cast<int>(Allele::AA) : static_cast<int>(Allele::BB);
}

void check_r(int r) {
  if (r < 2) throw ConfigError("RIL selfing generations must be >= 2");
}

}  // namespace

std::array<std::array<double, 3>, 3> ril_two_locus_genotypes(double rho, int r) {
  check_r(r);
  const StateVec p = selfing_distribution(std::clamp(rho, 0.0, 0.5), r);
  std::array<std::array<double, 3>, 3> joint{};
  for (int s = 0; s < 16; ++s) {
    const int h1 = s / 4, h2 = s % 4;
    const int g1 = genotype_index(h1 & 1, h2 & 1);
    const int g2 = genotype_index((h1 >> 1) & 1, (h2 >> 1) & 1);
    joint[g1][g2] += p[s];
  }
  return joint;
}

double ril_expected_mismatch(double rho, int r) {
  const auto joint = ril_two_locus_genotypes(rho, r);
  double m = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) m += joint[a][b] * call_mismatch(static_cast<Allele>(a), static_cast<Allele>(b));
  return m;
}

double ril_invert(double observed, int r) {
  check_r(r);
  if (observed <= 0.0) return 0.0;
  const double top = ril_expected_mismatch(0.5, r);
  if (observed >= top) return 0.5;
  double lo = 0.0, hi = 0.5;
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = ril_expected_mismatch(mid, r);
    if (std::abs(f - observed) <= 1e-13) return mid;
    (f < observed ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double ril_invert(double observed, const PopulationType& pop) {
  switch (pop.kind) {
    case PopKind::BC:
    case PopKind::DH:
      return observed;
    case PopKind::ARIL:
      return ril_transform_aril(observed);
    case PopKind::RILn:
      return ril_invert(observed, pop.selfing_generations);
  }
  return observed;
}

double ril_forward(double rho, const PopulationType& pop) {
  switch (pop.kind) {
    case PopKind::BC:
    case PopKind::DH:
      return rho;
    case PopKind::ARIL: {
      const double r = std::clamp(rho, 0.0, 0.5);
      return 2.0 * r / (1.0 + 2.0 * r);
    }
    case PopKind::RILn:
      return ril_expected_mismatch(rho, pop.selfing_generations);
  }
  return rho;
}

namespace {
constexpr std::size_t kScaleSteps = 16384;
}

RilScale::RilScale(PopulationType pop) : pop_(pop) {
  if (pop_.kind != PopKind::RILn) return;
  table_.resize(kScaleSteps + 1);
  for (std::size_t k = 0; k <= kScaleSteps; ++k)
    table_[k] = ril_expected_mismatch(0.5 * static_cast<double>(k) / kScaleSteps, pop_.selfing_generations);
}

double RilScale::to_meiotic(double observed) const {
  if (pop_.kind != PopKind::RILn) return ril_invert(observed, pop_);
  if (observed <= 0.0) return 0.0;
  if (observed >= table_.back()) return 0.5;
  const auto it = std::upper_bound(table_.begin(), table_.end(), observed);
  const auto hi = static_cast<std::size_t>(it - table_.begin());
  const std::size_t lo = hi - 1;
  const double frac = (observed - table_[lo]) / (table_[hi] - table_[lo]);
  return 0.5 * (static_cast<double>(lo) + frac) / kScaleSteps;
}

}  // namespace linkmap
