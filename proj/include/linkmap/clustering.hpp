#pragma once

#include "linkmap/cross.hpp"

#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace linkmap {

/// Marker-index sets; each set sorted ascending, sets ordered by smallest member.
using Partition = std::vector<std::vector<std::size_t>>;

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) noexcept {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) noexcept {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }
  /// Components over 0..n-1 in canonical order.
  Partition components();

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned> rank_;
};

/// Connected components of the marker graph after removing every edge whose
/// rescaled Hamming distance exceeds the Hoeffding threshold for `epsilon`.
/// RIL populations compare on the per-meiosis scale. Pairs with no shared
/// observed genotype never link. epsilon >= 1 returns one component.
Partition cluster_markers(const MarkerMatrix& matrix, std::span<const std::size_t> markers,
                          const PopulationType& pop, double epsilon);
Partition cluster_markers(const MarkerMatrix& matrix, const PopulationType& pop, double epsilon);

}  // namespace linkmap
