// Independent oracles shared by the unit and acceptance tests. Nothing here
// calls into the library's math; each helper recomputes its answer directly.
#pragma once

#include "linkmap/cross.hpp"
#include "linkmap/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace oracle {

/// Kendall tau-b between two paired samples.
inline double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  long long concordant = 0, discordant = 0, tie_x = 0, tie_y = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        ++tie_x;
      } else if (dy == 0) {
        ++tie_y;
      } else if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  const double denom = std::sqrt(static_cast<double>(concordant + discordant + tie_x) *
                                 static_cast<double>(concordant + discordant + tie_y));
  return denom > 0 ? static_cast<double>(concordant - discordant) / denom : 0.0;
}

/// Weight of the cheapest Hamiltonian path over every vertex, by enumerating
/// all permutations. Returns the path too.
template <class W>
std::pair<double, std::vector<std::size_t>> brute_force_path(std::size_t t, W&& w) {
  std::vector<std::size_t> perm(t);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> arg = perm;
  do {
    if (t > 1 && perm.front() > perm.back()) continue;  // each path once
    double c = 0;
    for (std::size_t k = 1; k < t; ++k) c += w(perm[k - 1], perm[k]);
    if (c < best) {
      best = c;
      arg = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {best, arg};
}

/// Mismatch between two calls: 1 for opposite homozygotes, 0.5 for a
/// heterozygote against a homozygote, 0 otherwise.
inline double mismatch(linkmap::Allele a, linkmap::Allele b) {
  using linkmap::Allele;
  if (a == Allele::Missing || b == Allele::Missing || a == b) return 0.0;
  if (a == Allele::AB || b == Allele::AB) return 0.5;
  return 1.0;
}

/// Monte-Carlo two-locus RIL: self an F1 r-1 times with recombination rho
/// and average the mismatch between the two loci.
inline double ril_mismatch_monte_carlo(double rho, int r, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5), cross(rho);
  double total = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    // haplotypes as (locus1, locus2) with 0 = A, 1 = B
    int h[2][2] = {{0, 0}, {1, 1}};
    for (int g = 0; g < r - 1; ++g) {
      int next[2][2];
      for (auto& gam : next) {
        const int start = coin(rng) ? 1 : 0;
        const int other = cross(rng) ? 1 - start : start;
        gam[0] = h[start][0];
        gam[1] = h[other][1];
      }
      std::copy(&next[0][0], &next[0][0] + 4, &h[0][0]);
    }
    auto call = [&](int locus) {
      if (h[0][locus] != h[1][locus]) return linkmap::Allele::AB;
      return h[0][locus] ? linkmap::Allele::BB : linkmap::Allele::AA;
    };
    total += mismatch(call(0), call(1));
  }
  return total / static_cast<double>(samples);
}

/// Matrix from one string per marker, one character per genotype (A, B, X, U).
inline linkmap::MarkerMatrix matrix_of(const std::vector<std::string>& markers) {
  const std::size_t n = markers.empty() ? 0 : markers.front().size();
  std::vector<std::string> genos, names;
  for (std::size_t i = 0; i < n; ++i) genos.push_back("g" + std::to_string(i + 1));
  std::vector<linkmap::Allele> calls;
  for (std::size_t k = 0; k < markers.size(); ++k) {
    names.push_back("m" + std::to_string(k + 1));
    for (char c : markers[k]) calls.push_back(linkmap::parse_allele(std::string_view(&c, 1)));
  }
  return linkmap::MarkerMatrix(std::move(genos), std::move(names), std::move(calls));
}

/// Simulated single chromosome in true order, one group.
inline linkmap::Simulation chromosome(std::size_t n, std::size_t markers, double length, std::uint64_t seed,
                                      double missing = 0.0, double error = 0.0,
                                      linkmap::PopulationType pop = linkmap::PopulationType::dh()) {
  linkmap::SimSpec spec;
  spec.pop = pop;
  spec.n = n;
  spec.chromosomes = linkmap::SimSpec::even(1, markers, length);
  spec.missing_rate = missing;
  spec.error_rate = error;
  spec.seed = seed;
  spec.group_by_chromosome = true;
  return linkmap::simulate_population(spec);
}

}  // namespace oracle
