#include "linkmap/ordering.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace linkmap {

ProbabilityMatrix ProbabilityMatrix::from_calls(const MarkerMatrix& matrix, std::span<const std::size_t> columns) {
  ProbabilityMatrix a(matrix.n_genotypes(), columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    auto col = matrix.column(columns[j]);
    for (std::size_t i = 0; i < col.size(); ++i) {
      switch (col[i]) {
        case Allele::AA: a.set_observed(i, j, 1.0); break;
        case Allele::BB: a.set_observed(i, j, 0.0); break;
        case Allele::AB: a.set_observed(i, j, 0.5); break;
        case Allele::Missing: break;
      }
    }
  }
  return a;
}

std::size_t ProbabilityMatrix::missing_count() const noexcept {
  return static_cast<std::size_t>(std::count(observed_.begin(), observed_.end(), std::uint8_t{0}));
}

ProbabilityMatrix em_e_step(const ProbabilityMatrix& a, std::span<const std::size_t> order,
                            std::span<const double> adjacent_d) {
  ProbabilityMatrix out = a;
  const std::size_t n = a.rows();
  const std::size_t t = order.size();
  if (t == 0 || n == 0) return out;
  // Survival factor 1 - 2p per interval; recombination over a run of
  // intervals is (1 - prod(1 - 2p)) / 2.
  std::vector<double> keep(t > 0 ? t - 1 : 0);
  for (std::size_t k = 0; k + 1 < t; ++k) {
    const double p = std::clamp(adjacent_d[k] / static_cast<double>(n), 0.0, 0.5);
    keep[k] = 1.0 - 2.0 * p;
  }
  std::vector<double> left_val(t), left_keep(t), right_val(t), right_keep(t);
  std::vector<bool> has_left(t), has_right(t);
  for (std::size_t i = 0; i < n; ++i) {
    bool seen = false;
    double val = 0.0, prod = 1.0;
    for (std::size_t k = 0; k < t; ++k) {
      if (k > 0) prod *= keep[k - 1];
      has_left[k] = seen;
      left_val[k] = val;
      left_keep[k] = prod;
      if (a.observed(i, order[k])) {
        seen = true;
        val = a(i, order[k]);
        prod = 1.0;
      }
    }
    seen = false;
    prod = 1.0;
    for (std::size_t k = t; k-- > 0;) {
      if (k + 1 < t) prod *= keep[k];
      has_right[k] = seen;
      right_val[k] = val;
      right_keep[k] = prod;
      if (a.observed(i, order[k])) {
        seen = true;
        val = a(i, order[k]);
        prod = 1.0;
      }
    }
    for (std::size_t k = 0; k < t; ++k) {
      const std::size_t j = order[k];
      if (a.observed(i, j)) continue;
      double pa = 0.5, pb = 0.5;
      if (has_left[k]) {
        const double p = 0.5 * (1.0 - left_keep[k]);
        pa = left_val[k] * (1.0 - p) + (1.0 - left_val[k]) * p;
        pb = 1.0 - pa;
      }
      if (has_right[k]) {
        const double p = 0.5 * (1.0 - right_keep[k]);
        pa *= right_val[k] * (1.0 - p) + (1.0 - right_val[k]) * p;
        pb *= right_val[k] * p + (1.0 - right_val[k]) * (1.0 - p);
      }
      out(i, j) = pa + pb > 0.0 ? pa / (pa + pb) : 0.5;
    }
  }
  return out;
}

DistanceMatrix em_m_step(const ProbabilityMatrix& a) {
  const auto n = static_cast<Eigen::Index>(a.rows());
  const auto t = static_cast<Eigen::Index>(a.cols());
  DistanceMatrix d(a.cols());
  if (t == 0) return d;
  Eigen::Map<const Eigen::MatrixXd> A(a.column(0), n, t);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(t, t);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(A.transpose());
  const Eigen::VectorXd sums = A.colwise().sum().transpose();
  for (Eigen::Index j = 0; j < t; ++j)
    for (Eigen::Index k = j + 1; k < t; ++k) {
      const double v = sums(j) + sums(k) - 2.0 * gram(k, j);
      d.set(static_cast<std::size_t>(j), static_cast<std::size_t>(k), std::max(v, 0.0));
    }
  return d;
}

EmStepResult em_impute_step(const ProbabilityMatrix& a, std::span<const std::size_t> order,
                            std::span<const double> adjacent_d) {
  EmStepResult r{em_e_step(a, order, adjacent_d), {}};
  r.d = em_m_step(r.a);
  return r;
}

double expected_allele(const ProbabilityMatrix& a, std::span<const std::size_t> order, std::size_t genotype,
                       std::size_t position, const DistanceMatrix& d, const DetectOptions& options) {
  const std::size_t j = order[position];
  double side_mean[2] = {0.0, 0.0};
  double side_weight[2] = {0.0, 0.0};
  for (int side = 0; side < 2; ++side) {
    for (std::size_t step = 1; step <= options.neighbours_per_side; ++step) {
      std::size_t q;
      if (side == 0) {
        if (step > position) break;
        q = position - step;
      } else {
        q = position + step;
        if (q >= order.size()) break;
      }
      const std::size_t k = order[q];
      const double dist = std::max(d(j, k), options.min_distance);
      const double wgt = 1.0 / (dist * dist);
      side_mean[side] += wgt * a(genotype, k);
      side_weight[side] += wgt;
    }
  }
  if (!options.balance_sides) {
    const double total = side_weight[0] + side_weight[1];
    return total > 0.0 ? (side_mean[0] + side_mean[1]) / total : a(genotype, j);
  }
  double sum = 0.0;
  int sides = 0;
  for (int s = 0; s < 2; ++s) {
    if (side_weight[s] <= 0.0) continue;
    sum += side_mean[s] / side_weight[s];
    ++sides;
  }
  return sides > 0 ? sum / sides : a(genotype, j);
}

std::vector<FlaggedCell> detect_bad_data(const ProbabilityMatrix& a, std::span<const std::size_t> order,
                                         const DistanceMatrix& d, const DetectOptions& options) {
  std::vector<FlaggedCell> out;
  if (order.size() < 2) return out;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t j = order[pos];
    for (std::size_t i = 0; i < a.rows(); ++i) {
      if (!a.observed(i, j)) continue;
      const double e = expected_allele(a, order, i, pos, d, options);
      if (std::abs(e - a(i, j)) > options.threshold) out.push_back({i, j});
    }
  }
  std::sort(out.begin(), out.end(), [](const FlaggedCell& x, const FlaggedCell& y) {
    return x.column != y.column ? x.column < y.column : x.genotype < y.genotype;
  });
  return out;
}

}  // namespace linkmap
