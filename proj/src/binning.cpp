#include "linkmap/ordering.hpp"

#include <algorithm>
#include <numeric>
#include <string_view>
#include <unordered_map>

namespace linkmap {

std::vector<std::size_t> BinSet::representatives() const {
  std::vector<std::size_t> reps;
  reps.reserve(bins.size());
  for (const auto& b : bins) reps.push_back(b.front());
  return reps;
}

namespace {

// Consensus of a bin as AA / BB / AB bit planes over genotypes.
struct Pattern {
  std::vector<std::uint64_t> planes;  // 3 * words

  Pattern(std::span<const Allele> col, std::size_t words) : planes(3 * words, 0) {
    for (std::size_t g = 0; g < col.size(); ++g) {
      if (col[g] == Allele::Missing) continue;
      planes[static_cast<std::size_t>(col[g]) * words + g / 64] |= std::uint64_t{1} << (g % 64);
    }
  }

  bool compatible(const Pattern& o, std::size_t words) const noexcept {
    for (std::size_t w = 0; w < words; ++w) {
      const std::uint64_t a = planes[w], b = planes[words + w], h = planes[2 * words + w];
      const std::uint64_t oa = o.planes[w], ob = o.planes[words + w], oh = o.planes[2 * words + w];
      if ((a & (ob | oh)) | (b & (oa | oh)) | (h & (oa | ob))) return false;
    }
    return true;
  }

  void absorb(const Pattern& o) noexcept {
    for (std::size_t i = 0; i < planes.size(); ++i) planes[i] |= o.planes[i];
  }
};

}  // namespace

BinSet bin_markers(const MarkerMatrix& matrix, std::span<const std::size_t> group) {
  const std::size_t n = matrix.n_genotypes();
  const std::size_t words = (n + 63) / 64;

  std::vector<std::size_t> missing(group.size());
  for (std::size_t j = 0; j < group.size(); ++j) missing[j] = matrix.missing_count(group[j]);
  std::vector<std::size_t> sequence(group.size());
  std::iota(sequence.begin(), sequence.end(), std::size_t{0});
  std::stable_sort(sequence.begin(), sequence.end(), [&](std::size_t x, std::size_t y) {
    return missing[x] != missing[y] ? missing[x] < missing[y] : group[x] < group[y];
  });

  std::vector<std::vector<std::size_t>> members;
  std::vector<Pattern> consensus;
  std::unordered_map<std::string_view, std::size_t> complete;

  for (std::size_t j : sequence) {
    const std::size_t m = group[j];
    auto col = matrix.column(m);
    if (missing[j] == 0) {
      std::string_view key(reinterpret_cast<const char*>(col.data()), col.size());
      auto it = complete.find(key);
      if (it != complete.end()) {
        members[it->second].push_back(m);
        continue;
      }
      complete.emplace(key, members.size());
      members.push_back({m});
      consensus.emplace_back(col, words);
      continue;
    }
    Pattern p(col, words);
    std::size_t home = members.size();
    if (missing[j] < n) {
      for (std::size_t b = 0; b < consensus.size(); ++b) {
        if (consensus[b].compatible(p, words)) {
          home = b;
          break;
        }
      }
    }
    if (home == members.size()) {
      members.push_back({m});
      consensus.push_back(std::move(p));
    } else {
      members[home].push_back(m);
      consensus[home].absorb(p);
    }
  }

  for (auto& b : members) std::sort(b.begin() + 1, b.end());
  std::sort(members.begin(), members.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return BinSet{std::move(members)};
}

}  // namespace linkmap
