#include "linkmap/clustering.hpp"

#include "linkmap/genetics_math.hpp"
#include "linkmap/packed.hpp"

#include <algorithm>
#include <cmath>
#include <string_view>
#include <unordered_map>

namespace linkmap {

Partition UnionFind::components() {
  const std::size_t n = parent_.size();
  std::vector<std::size_t> slot(n, n);
  Partition out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    if (slot[root] == n) {
      slot[root] = out.size();
      out.emplace_back();
    }
    out[slot[root]].push_back(i);
  }
  return out;
}

namespace {

/// Largest observed-scale mismatch fraction that still links two markers.
double link_fraction(std::size_t n, const PopulationType& pop, double epsilon) {
  const double delta = hoeffding_delta(n, epsilon);
  if (std::isinf(delta)) return kInfinity;
  return ril_forward(delta / static_cast<double>(n), pop);
}

}  // namespace

Partition cluster_markers(const MarkerMatrix& matrix, std::span<const std::size_t> markers, const PopulationType& pop,
                          double epsilon) {
  const std::size_t t = markers.size();
  const std::size_t n = matrix.n_genotypes();
  if (t == 0) return {};
  if (n < 2) throw DataError("clustering needs at least 2 genotypes");
  const double limit = link_fraction(n, pop, epsilon);

  UnionFind uf(t);
  if (std::isinf(limit)) {
    for (std::size_t j = 1; j < t; ++j) uf.unite(0, j);
  } else {
    // Identical columns are at distance zero; cluster one copy of each.
    std::vector<std::size_t> unique;
    std::unordered_map<std::string_view, std::size_t> seen;
    for (std::size_t j = 0; j < t; ++j) {
      auto col = matrix.column(markers[j]);
      if (matrix.missing_count(markers[j]) == n) {
        unique.push_back(j);
        continue;
      }
      std::string_view key(reinterpret_cast<const char*>(col.data()), col.size());
      auto [it, fresh] = seen.emplace(key, j);
      if (fresh)
        unique.push_back(j);
      else
        uf.unite(it->second, j);
    }
    std::vector<std::size_t> unique_markers;
    unique_markers.reserve(unique.size());
    for (auto j : unique) unique_markers.push_back(markers[j]);
    const PackedCalls packed(matrix, unique_markers);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t a = 0; a < unique.size(); ++a) {
      for (std::size_t b = a + 1; b < unique.size(); ++b) {
        if (uf.find(unique[a]) == uf.find(unique[b])) continue;
        const PairwiseDistance d = packed.distance(a, b);
        if (!d.defined()) continue;
        if (d.d * scale <= limit) uf.unite(unique[a], unique[b]);
      }
    }
  }

  Partition local = uf.components();
  Partition out;
  out.reserve(local.size());
  for (auto& set : local) {
    std::vector<std::size_t> ids;
    ids.reserve(set.size());
    for (auto j : set) ids.push_back(markers[j]);
    std::sort(ids.begin(), ids.end());
    out.push_back(std::move(ids));
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return out;
}

Partition cluster_markers(const MarkerMatrix& matrix, const PopulationType& pop, double epsilon) {
  std::vector<std::size_t> all(matrix.n_markers());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return cluster_markers(matrix, all, pop, epsilon);
}

}  // namespace linkmap
