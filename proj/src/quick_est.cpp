#include "linkmap/diagnostics.hpp"

#include "detail.hpp"
#include "linkmap/ordering.hpp"
#include "linkmap/packed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace linkmap {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

std::vector<double> adjacent_fractions(const MarkerMatrix& matrix, std::span<const std::size_t> markers) {
  const PackedCalls packed(matrix, markers);
  std::vector<double> rf;
  for (std::size_t k = 1; k < markers.size(); ++k) {
    const auto c = packed.counts(k - 1, k);
    rf.push_back(c.n_obs > 0 ? std::clamp(c.mismatches() / c.n_obs, 0.0, 0.5) : 0.5);
  }
  return rf;
}

std::vector<double> positions_from(std::span<const double> observed_rf, const PopulationType& pop, MapFunction f) {
  const RilScale scale(pop);
  std::vector<double> pos(observed_rf.size() + 1, 0.0);
  for (std::size_t k = 0; k < observed_rf.size(); ++k)
    pos[k + 1] = pos[k] + map_forward(std::min(scale.to_meiotic(observed_rf[k]), kMaxPositionRf), f);
  return pos;
}

}  // namespace

std::vector<double> two_point_positions(const MarkerMatrix& matrix, std::span<const std::size_t> markers,
                                        const PopulationType& pop, MapFunction f) {
  if (markers.empty()) return {};
  return positions_from(adjacent_fractions(matrix, markers), pop, f);
}

Cross quick_est(const Cross& cross, double error_prob, MapFunction f, std::span<const std::string> groups) {
  if (!(error_prob > 0.0 && error_prob < 0.5)) throw ConfigError("error probability must lie in (0, 0.5)");
  const MarkerMatrix& m = cross.matrix();
  const PopulationType& pop = cross.pop();
  const std::size_t n = m.n_genotypes();
  const int states = pop.is_finite_ril() ? 3 : 2;
  std::vector<LinkageGroup> out = cross.groups();

  double prior[3] = {0.5, 0.5, 0.0};
  if (states == 3) {
    const double h = pop.expected_het_proportion();
    prior[0] = prior[1] = (1.0 - h) / 2.0;
    prior[2] = h;
  }
  const double log_match = std::log1p(-error_prob), log_mismatch = std::log(error_prob);

  for (auto gi : detail::select_groups(cross, groups)) {
    LinkageGroup& g = out[gi];
    const std::size_t t = g.size();
    if (t < 2) continue;
    const std::vector<double> provisional = two_point_positions(m, g.markers, pop, f);

    // Log transition matrices per interval.
    std::vector<std::array<std::array<double, 3>, 3>> trans(t - 1);
    for (std::size_t k = 0; k + 1 < t; ++k) {
      const double rho = map_inverse(provisional[k + 1] - provisional[k], f);
      auto& tr = trans[k];
      if (states == 2) {
        const double p = ril_forward(rho, pop);
        tr[0][0] = tr[1][1] = safe_log(1.0 - p);
        tr[0][1] = tr[1][0] = safe_log(p);
      } else {
        const auto joint = ril_two_locus_genotypes(rho, pop.selfing_generations);
        for (int a = 0; a < 3; ++a) {
          const double row = joint[a][0] + joint[a][1] + joint[a][2];
          for (int b = 0; b < 3; ++b) tr[a][b] = safe_log(row > 0 ? joint[a][b] / row : 0.0);
        }
      }
    }

    std::vector<double> crossovers(t - 1, 0.0);
    std::vector<std::array<double, 3>> score(t);
    std::vector<std::array<int, 3>> back(t);
    std::vector<int> path(t);
    for (std::size_t i = 0; i < n; ++i) {
      auto emit = [&](std::size_t k, int s) {
        const Allele a = m.at(g.markers[k], i);
        if (a == Allele::Missing) return 0.0;
        return static_cast<int>(a) == s ? log_match : log_mismatch;
      };
      for (int s = 0; s < states; ++s) score[0][s] = safe_log(prior[s]) + emit(0, s);
      for (std::size_t k = 1; k < t; ++k)
        for (int s = 0; s < states; ++s) {
          double best = kNegInf;
          int arg = 0;
          for (int r = 0; r < states; ++r) {
            const double v = score[k - 1][r] + trans[k - 1][r][s];
            if (v > best) {
              best = v;
              arg = r;
            }
          }
          score[k][s] = best + emit(k, s);
          back[k][s] = arg;
        }
      int s = 0;
      for (int r = 1; r < states; ++r)
        if (score[t - 1][r] > score[t - 1][s]) s = r;
      for (std::size_t k = t; k-- > 0;) {
        path[k] = s;
        if (k > 0) s = back[k][s];
      }
      for (std::size_t k = 1; k < t; ++k)
        crossovers[k - 1] += call_mismatch(static_cast<Allele>(path[k - 1]), static_cast<Allele>(path[k]));
    }
    for (auto& c : crossovers) c = std::clamp(c / static_cast<double>(n), 0.0, 0.5);
    g.positions = positions_from(crossovers, pop, f);
  }
  return Cross(m, pop, std::move(out), cross.ledgers());
}

}  // namespace linkmap
