#include "linkmap/diagnostics.hpp"

#include "detail.hpp"
#include "linkmap/packed.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace linkmap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Walks one genotype along a group; calls visit(position, is_double_crossover)
/// for every non-missing call and returns the crossover count.
template <class Visit>
std::size_t walk_genotype(const MarkerMatrix& m, const LinkageGroup& g, std::size_t genotype, Visit&& visit) {
  std::size_t xo = 0;
  std::size_t prev = g.size(), cur = g.size();
  auto call = [&](std::size_t k) { return m.at(g.markers[k], genotype); };
  for (std::size_t k = 0; k <= g.size(); ++k) {
    if (k < g.size() && call(k) == Allele::Missing) continue;
    if (cur < g.size()) {
      const bool has_prev = prev < g.size(), has_next = k < g.size();
      const bool dbl = has_prev && has_next && call(cur) != call(prev) && call(cur) != call(k);
      visit(cur, dbl);
    }
    if (k < g.size() && cur < g.size() && call(k) != call(cur)) ++xo;
    prev = cur;
    cur = k;
  }
  return xo;
}

}  // namespace

GenotypeStats profile_genotypes(const Cross& cross, std::optional<double> xo_lambda,
                                std::span<const std::string> groups) {
  const MarkerMatrix& m = cross.matrix();
  const std::size_t n = m.n_genotypes();
  GenotypeStats s;
  s.genotype = m.genotype_names();
  s.xo.assign(n, 0);
  s.dxo.assign(n, 0);
  s.miss.assign(n, 0);
  s.xo_lambda = xo_lambda;
  for (auto gi : detail::select_groups(cross, groups)) {
    const auto& g = cross.groups()[gi];
    for (std::size_t i = 0; i < n; ++i) {
      s.xo[i] += walk_genotype(m, g, i, [&](std::size_t, bool dbl) { s.dxo[i] += dbl ? 1 : 0; });
      for (auto mk : g.markers) s.miss[i] += m.at(mk, i) == Allele::Missing ? 1 : 0;
    }
  }
  if (xo_lambda) {
    if (!(*xo_lambda > 0.0)) throw ConfigError("xo-lambda must be positive");
    const double alpha = 0.05 / static_cast<double>(std::max<std::size_t>(n, 1));
    s.flagged.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double tail = s.xo[i] == 0 ? 1.0 : boost::math::gamma_p(static_cast<double>(s.xo[i]), *xo_lambda);
      s.flagged[i] = tail < alpha;
    }
  }
  return s;
}

double chi_square_upper_tail(double x, int df) {
  if (!(x > 0.0)) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

double chi_square_neg_log10_tail(double x, int df) {
  if (!(x > 0.0)) return 0.0;
  const double p = chi_square_upper_tail(x, df);
  if (p > 1e-300) return -std::log10(p);
  // Asymptotic upper incomplete gamma: Q(a, y) ~ y^(a-1) e^-y / Gamma(a) * (1 + (a-1)/y + (a-1)(a-2)/y^2).
  const double a = 0.5 * df, y = 0.5 * x;
  const double log_q = (a - 1.0) * std::log(y) - y - std::lgamma(a) +
                       std::log1p((a - 1.0) / y + (a - 1.0) * (a - 2.0) / (y * y));
  return -log_q / std::log(10.0);
}

SegregationTest seg_distortion_test(std::span<const Allele> column, const PopulationType& pop) {
  double c[3] = {0, 0, 0};
  for (auto a : column)
    if (a != Allele::Missing) c[static_cast<int>(a)] += 1.0;
  SegregationTest t;
  if (pop.is_finite_ril()) {
    const double total = c[0] + c[1] + c[2];
    if (total == 0.0) return t;
    const double h = pop.expected_het_proportion();
    const double e[3] = {total * (1 - h) / 2, total * (1 - h) / 2, total * h};
    for (int k = 0; k < 3; ++k) t.chi_square += (c[k] - e[k]) * (c[k] - e[k]) / e[k];
    t.df = 2;
  } else {
    const double total = c[0] + c[1];
    if (total == 0.0) return t;
    t.chi_square = (c[0] - c[1]) * (c[0] - c[1]) / total;
    t.df = 1;
  }
  t.p_value = chi_square_upper_tail(t.chi_square, t.df);
  t.neg_log10_p = chi_square_neg_log10_tail(t.chi_square, t.df);
  return t;
}

double two_point_lod(double d, double n_obs) {
  if (!(n_obs > 0.0)) return 0.0;
  const double p = std::clamp(d / n_obs, 0.0, 0.5);
  double lod = (n_obs - d) * std::log10(2.0 * (1.0 - p));
  if (d > 0.0) lod += d * std::log10(2.0 * p);
  return std::max(lod, 0.0);
}

MarkerStat parse_marker_stat(std::string_view name) {
  static constexpr MarkerStat all[] = {MarkerStat::SegDist, MarkerStat::Miss, MarkerStat::Prop,
                                       MarkerStat::Dxo,     MarkerStat::Erf,  MarkerStat::Lod,
                                       MarkerStat::Dist,    MarkerStat::Mrf,  MarkerStat::Recomb};
  for (auto s : all)
    if (marker_stat_name(s) == name) return s;
  throw ConfigError("unknown statistic '" + std::string(name) + "'");
}

std::string_view marker_stat_name(MarkerStat s) noexcept {
  switch (s) {
    case MarkerStat::SegDist: return "seg.dist";
    case MarkerStat::Miss: return "miss";
    case MarkerStat::Prop: return "prop";
    case MarkerStat::Dxo: return "dxo";
    case MarkerStat::Erf: return "erf";
    case MarkerStat::Lod: return "lod";
    case MarkerStat::Dist: return "dist";
    case MarkerStat::Mrf: return "mrf";
    case MarkerStat::Recomb: return "recomb";
  }
  return "?";
}

MarkerStats profile_markers(const Cross& cross, MapFunction f, bool bonferroni, std::span<const std::string> groups) {
  const MarkerMatrix& m = cross.matrix();
  const std::size_t n = m.n_genotypes();
  MarkerStats out;
  const auto chosen = detail::select_groups(cross, groups);

  std::size_t total_markers = 0, total_intervals = 0;
  for (auto gi : chosen) {
    total_markers += cross.groups()[gi].size();
    total_intervals += cross.groups()[gi].size() > 0 ? cross.groups()[gi].size() - 1 : 0;
  }
  out.bonferroni_alpha = total_markers > 0 ? 0.05 / static_cast<double>(total_markers) : 0.05;
  const double interval_alpha = total_intervals > 0 ? 0.05 / static_cast<double>(total_intervals) : 0.05;

  for (auto gi : chosen) {
    const auto& g = cross.groups()[gi];
    std::vector<std::size_t> dxo(g.size(), 0);
    for (std::size_t i = 0; i < n; ++i)
      walk_genotype(m, g, i, [&](std::size_t k, bool dbl) { dxo[k] += dbl ? 1 : 0; });
    for (std::size_t k = 0; k < g.size(); ++k) {
      const auto col = m.column(g.markers[k]);
      MarkerRow row;
      row.marker = m.marker_name(g.markers[k]);
      row.group = g.name;
      row.position = g.positions[k];
      const SegregationTest seg = seg_distortion_test(col, cross.pop());
      row.neg_log10_p = seg.neg_log10_p;
      double c[4] = {0, 0, 0, 0};
      for (auto a : col) c[static_cast<int>(a)] += 1.0;
      const double obs = c[0] + c[1] + c[2];
      row.miss = n > 0 ? c[3] / static_cast<double>(n) : 0.0;
      if (obs > 0) {
        row.prop_aa = c[0] / obs;
        row.prop_bb = c[1] / obs;
        row.prop_ab = c[2] / obs;
      }
      row.dxo = dxo[k];
      row.bonferroni = bonferroni && seg.p_value < out.bonferroni_alpha;
      out.markers.push_back(std::move(row));
    }
    if (g.size() < 2) continue;
    const PackedCalls packed(m, g.markers);
    for (std::size_t k = 1; k < g.size(); ++k) {
      const auto c = packed.counts(k - 1, k);
      IntervalRow iv;
      iv.left = m.marker_name(g.markers[k - 1]);
      iv.right = m.marker_name(g.markers[k]);
      iv.group = g.name;
      iv.recomb = c.mismatches();
      iv.n_obs = c.n_obs;
      iv.erf = c.n_obs > 0 ? iv.recomb / iv.n_obs : kNaN;
      iv.lod = two_point_lod(iv.recomb, iv.n_obs);
      iv.dist = g.positions[k] - g.positions[k - 1];
      iv.mrf = map_inverse(iv.dist, f);
      if (bonferroni) {
        const double p = chi_square_upper_tail(2.0 * std::log(10.0) * iv.lod, 1);
        iv.weak_linkage = p >= interval_alpha;
      }
      out.intervals.push_back(std::move(iv));
    }
  }
  return out;
}

HeatMap heatmap_matrices(const Cross& cross, std::span<const std::string> groups, double lmax, double rmin) {
  const MarkerMatrix& m = cross.matrix();
  HeatMap h;
  std::vector<std::size_t> markers;
  for (auto gi : detail::select_groups(cross, groups)) {
    const auto& g = cross.groups()[gi];
    for (auto mk : g.markers) {
      markers.push_back(mk);
      h.markers.push_back(m.marker_name(mk));
      h.groups.push_back(g.name);
    }
  }
  const std::size_t t = markers.size();
  h.rf_values.assign(t * t, 0.0);
  h.lod_values.assign(t * t, lmax);
  const PackedCalls packed(m, markers);
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = i + 1; j < t; ++j) {
      const auto c = packed.counts(i, j);
      double rf = c.n_obs > 0 ? c.mismatches() / c.n_obs : kNaN;
      if (!std::isnan(rf)) rf = std::max(rf, rmin);
      const double lod = std::clamp(two_point_lod(c.mismatches(), c.n_obs), 0.0, lmax);
      h.rf_values[i * t + j] = h.rf_values[j * t + i] = rf;
      h.lod_values[i * t + j] = h.lod_values[j * t + i] = lod;
    }
  return h;
}

}  // namespace linkmap
