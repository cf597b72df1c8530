#include "linkmap/clustering.hpp"
#include "linkmap/diagnostics.hpp"
#include "linkmap/packed.hpp"

#include <algorithm>
#include <unordered_map>

namespace linkmap {

std::vector<CloneRow> gen_clones(const Cross& cross, double tol) {
  const MarkerMatrix& m = cross.matrix();
  const std::size_t n = m.n_genotypes();
  if (n < 2) throw DataError("clone detection needs at least 2 genotypes");
  std::vector<std::size_t> markers;
  for (const auto& g : cross.groups()) markers.insert(markers.end(), g.markers.begin(), g.markers.end());
  const PackedRows rows(m, markers);

  struct Hit {
    std::size_t later, earlier;
    PackedRows::RowCounts c;
    double coef;
  };
  std::vector<Hit> hits;
  UnionFind uf(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const auto c = rows.counts(a, b);
      if (c.match + c.diff == 0) continue;
      const double coef = static_cast<double>(c.match) / static_cast<double>(c.match + c.diff);
      if (coef < tol) continue;
      hits.push_back({b, a, c, coef});
      uf.unite(a, b);
    }

  std::vector<std::size_t> group_of(n, 0);
  std::size_t next_id = 0;
  std::unordered_map<std::size_t, std::size_t> id_of_root;
  std::vector<bool> involved(n, false);
  for (const auto& h : hits) involved[h.later] = involved[h.earlier] = true;
  for (std::size_t g = 0; g < n; ++g) {
    if (!involved[g]) continue;
    auto [it, fresh] = id_of_root.emplace(uf.find(g), next_id + 1);
    if (fresh) ++next_id;
    group_of[g] = it->second;
  }

  std::vector<CloneRow> out;
  out.reserve(hits.size());
  for (const auto& h : hits) {
    CloneRow r;
    r.g1 = m.genotype_name(h.later);
    r.g2 = m.genotype_name(h.earlier);
    r.coef = h.coef;
    r.match = h.c.match;
    r.diff = h.c.diff;
    r.na_both = h.c.na_both;
    r.na_one = h.c.na_one;
    r.group = group_of[h.earlier];
    out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(), [](const CloneRow& x, const CloneRow& y) { return x.group < y.group; });
  return out;
}

Cross fix_clones(const Cross& cross, std::span<const CloneRow> rows, bool consensus) {
  const MarkerMatrix& m = cross.matrix();
  const std::size_t n = m.n_genotypes();
  UnionFind uf(n);
  for (const auto& r : rows) {
    auto a = m.find_genotype(r.g1), b = m.find_genotype(r.g2);
    if (!a) throw DataError("clone report names unknown genotype '" + r.g1 + "'");
    if (!b) throw DataError("clone report names unknown genotype '" + r.g2 + "'");
    uf.unite(*a, *b);
  }
  const Partition parts = uf.components();

  // Output genotypes keep the slot of each group's first member.
  std::vector<std::string> names;
  std::vector<std::vector<std::size_t>> members;
  for (const auto& p : parts) {
    if (p.size() == 1) {
      names.push_back(m.genotype_name(p[0]));
      members.push_back(p);
      continue;
    }
    if (consensus) {
      std::string id;
      for (auto g : p) id += (id.empty() ? "" : "_") + m.genotype_name(g);
      names.push_back(std::move(id));
      members.push_back(p);
    } else {
      std::size_t best = p[0], best_miss = n + 1;
      for (auto g : p) {
        std::size_t miss = 0;
        for (std::size_t mk = 0; mk < m.n_markers(); ++mk) miss += m.at(mk, g) == Allele::Missing ? 1 : 0;
        if (miss < best_miss) {
          best = g;
          best_miss = miss;
        }
      }
      names.push_back(m.genotype_name(best));
      members.push_back({best});
    }
  }

  std::vector<Allele> calls;
  calls.reserve(names.size() * m.n_markers());
  for (std::size_t mk = 0; mk < m.n_markers(); ++mk) {
    for (const auto& group : members) {
      Allele v = Allele::Missing;
      bool conflict = false;
      for (auto g : group) {
        const Allele a = m.at(mk, g);
        if (a == Allele::Missing) continue;
        if (v == Allele::Missing)
          v = a;
        else if (v != a)
          conflict = true;
      }
      calls.push_back(conflict ? Allele::Missing : v);
    }
  }
  MarkerMatrix out(std::move(names), m.marker_names(), std::move(calls));
  auto ledgers = cross.ledgers();
  for (auto& [kind, ledger] : ledgers)
    for (auto& e : ledger.entries) e.stat = ledger_statistic(out, e.marker, kind, cross.pop());
  return Cross(std::move(out), cross.pop(), cross.groups(), std::move(ledgers));
}

}  // namespace linkmap
