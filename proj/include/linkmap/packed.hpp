#pragma once

#include "linkmap/cross.hpp"
#include "linkmap/genetics_math.hpp"

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

namespace linkmap {

/// Marker columns packed into AA / BB / AB bit planes, one 64-bit word per
/// 64 genotypes. Pair counts reduce to popcounts.
class PackedCalls {
 public:
  PackedCalls(const MarkerMatrix& matrix, std::span<const std::size_t> markers);
  explicit PackedCalls(const MarkerMatrix& matrix);

  struct PairCounts {
    std::uint32_t mismatch_halves = 0;  // 2 x mismatches (AB vs hom counts 1)
    std::uint32_t n_obs = 0;
    double mismatches() const noexcept { return 0.5 * mismatch_halves; }
  };

  std::size_t size() const noexcept { return n_markers_; }
  std::size_t n_genotypes() const noexcept { return n_genotypes_; }

  PairCounts counts(std::size_t j, std::size_t k) const noexcept {
    const std::uint64_t* aj = plane(0, j);
    const std::uint64_t* bj = plane(1, j);
    const std::uint64_t* hj = plane(2, j);
    const std::uint64_t* ak = plane(0, k);
    const std::uint64_t* bk = plane(1, k);
    const std::uint64_t* hk = plane(2, k);
    std::uint32_t full = 0, half = 0, obs = 0;
    for (std::size_t w = 0; w < words_; ++w) {
      const std::uint64_t oj = aj[w] | bj[w] | hj[w];
      const std::uint64_t ok = ak[w] | bk[w] | hk[w];
      full += static_cast<std::uint32_t>(std::popcount((aj[w] & bk[w]) | (bj[w] & ak[w])));
      half += static_cast<std::uint32_t>(
          std::popcount((hj[w] & (ak[w] | bk[w])) | (hk[w] & (aj[w] | bj[w]))));
      obs += static_cast<std::uint32_t>(std::popcount(oj & ok));
    }
    return {2 * full + half, obs};
  }

  /// Same rescaling as hamming_distance().
  PairwiseDistance distance(std::size_t j, std::size_t k) const noexcept {
    const PairCounts c = counts(j, k);
    if (c.n_obs == 0) return {0.0, 0};
    return {c.mismatches() * static_cast<double>(n_genotypes_) / c.n_obs, c.n_obs};
  }

  /// True when every genotype observed in both columns carries the same call.
  bool compatible(std::size_t j, std::size_t k) const noexcept { return counts(j, k).mismatch_halves == 0; }

  std::size_t observed(std::size_t j) const noexcept;

 private:
  const std::uint64_t* plane(int p, std::size_t m) const noexcept {
    return bits_.data() + (m * 3 + static_cast<std::size_t>(p)) * words_;
  }

  std::size_t n_markers_ = 0;
  std::size_t n_genotypes_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// Genotype rows packed over a set of markers (used for clone detection).
class PackedRows {
 public:
  PackedRows(const MarkerMatrix& matrix, std::span<const std::size_t> markers);

  struct RowCounts {
    std::size_t match = 0, diff = 0, na_both = 0, na_one = 0;
  };
  RowCounts counts(std::size_t g1, std::size_t g2) const noexcept;
  std::size_t n_genotypes() const noexcept { return n_genotypes_; }

 private:
  std::size_t n_genotypes_ = 0;
  std::size_t n_markers_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;  // per genotype: AA, BB, AB planes
};

}  // namespace linkmap
