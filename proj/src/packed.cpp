#include "linkmap/packed.hpp"

#include <numeric>

namespace linkmap {

namespace {

int plane_of(Allele a) noexcept {
  switch (a) {
    case Allele::AA: return 0;
    case Allele::BB: return 1;
    case Allele::AB: return 2;
    case Allele::Missing: break;
  }
  return -1;
}

}  // namespace

PackedCalls::PackedCalls(const MarkerMatrix& matrix, std::span<const std::size_t> markers)
    : n_markers_(markers.size()), n_genotypes_(matrix.n_genotypes()), words_((matrix.n_genotypes() + 63) / 64) {
  bits_.assign(n_markers_ * 3 * words_, 0);
  for (std::size_t j = 0; j < n_markers_; ++j) {
    auto col = matrix.column(markers[j]);
    std::uint64_t* base = bits_.data() + j * 3 * words_;
    for (std::size_t g = 0; g < n_genotypes_; ++g) {
      const int p = plane_of(col[g]);
      if (p >= 0) base[static_cast<std::size_t>(p) * words_ + g / 64] |= std::uint64_t{1} << (g % 64);
    }
  }
}

PackedCalls::PackedCalls(const MarkerMatrix& matrix)
    : PackedCalls(matrix, [&] {
        std::vector<std::size_t> all(matrix.n_markers());
        std::iota(all.begin(), all.end(), std::size_t{0});
        return all;
      }()) {}

std::size_t PackedCalls::observed(std::size_t j) const noexcept {
  std::size_t c = 0;
  for (std::size_t w = 0; w < words_; ++w)
    c += static_cast<std::size_t>(std::popcount(plane(0, j)[w] | plane(1, j)[w] | plane(2, j)[w]));
  return c;
}

PackedRows::PackedRows(const MarkerMatrix& matrix, std::span<const std::size_t> markers)
    : n_genotypes_(matrix.n_genotypes()), n_markers_(markers.size()), words_((markers.size() + 63) / 64) {
  bits_.assign(n_genotypes_ * 3 * words_, 0);
  for (std::size_t k = 0; k < n_markers_; ++k) {
    auto col = matrix.column(markers[k]);
    for (std::size_t g = 0; g < n_genotypes_; ++g) {
      const int p = plane_of(col[g]);
      if (p >= 0) bits_[(g * 3 + static_cast<std::size_t>(p)) * words_ + k / 64] |= std::uint64_t{1} << (k % 64);
    }
  }
}

PackedRows::RowCounts PackedRows::counts(std::size_t g1, std::size_t g2) const noexcept {
  const std::uint64_t* a = bits_.data() + g1 * 3 * words_;
  const std::uint64_t* b = bits_.data() + g2 * 3 * words_;
  std::size_t match = 0, both = 0, either = 0;
  for (std::size_t w = 0; w < words_; ++w) {
    const std::uint64_t oa = a[w] | a[words_ + w] | a[2 * words_ + w];
    const std::uint64_t ob = b[w] | b[words_ + w] | b[2 * words_ + w];
    match += static_cast<std::size_t>(
        std::popcount((a[w] & b[w]) | (a[words_ + w] & b[words_ + w]) | (a[2 * words_ + w] & b[2 * words_ + w])));
    both += static_cast<std::size_t>(std::popcount(oa & ob));
    either += static_cast<std::size_t>(std::popcount(oa | ob));
  }
  RowCounts r;
  r.match = match;
  r.diff = both - match;
  r.na_one = either - both;
  r.na_both = n_markers_ - either;
  return r;
}

}  // namespace linkmap
