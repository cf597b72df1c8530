#include "linkmap/cross.hpp"

#include "linkmap/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_set>

namespace linkmap {

char allele_symbol(Allele a) noexcept {
  switch (a) {
    case Allele::AA: return 'A';
    case Allele::BB: return 'B';
    case Allele::AB: return 'X';
    case Allele::Missing: break;
  }
  return 'U';
}

Allele parse_allele(std::string_view symbol) {
  if (symbol.size() == 1) {
    switch (symbol[0]) {
      case 'A': return Allele::AA;
      case 'B': return Allele::BB;
      case 'X': return Allele::AB;
      case 'U':
      case '-': return Allele::Missing;
      default: break;
    }
  }
  throw ParseError("illegal allele symbol '" + std::string(symbol) + "'");
}

PopulationType PopulationType::riln(int r) {
  if (r < 2) throw ConfigError("RILn needs at least 2 selfing generations, got " + std::to_string(r));
  return {PopKind::RILn, r};
}

PopulationType PopulationType::parse(std::string_view name) {
  if (name == "BC") return bc();
  if (name == "DH") return dh();
  if (name == "ARIL") return aril();
  if (name.starts_with("RIL") && name.size() > 3) {
    int r = 0;
    for (char c : name.substr(3)) {
      if (c < '0' || c > '9') throw ConfigError("unknown population type '" + std::string(name) + "'");
      r = r * 10 + (c - '0');
      if (r > 1000) throw ConfigError("selfing generations out of range in '" + std::string(name) + "'");
    }
    return riln(r);
  }
  throw ConfigError("unknown population type '" + std::string(name) + "'");
}

std::string PopulationType::name() const {
  switch (kind) {
    case PopKind::BC: return "BC";
    case PopKind::DH: return "DH";
    case PopKind::ARIL: return "ARIL";
    case PopKind::RILn: return "RIL" + std::to_string(selfing_generations);
  }
  return "?";
}

double PopulationType::expected_het_proportion() const noexcept {
  if (kind != PopKind::RILn) return 0.0;
  return std::ldexp(1.0, -(selfing_generations - 1));
}

// ---- MarkerMatrix -------------------------------------------------------------

MarkerMatrix::MarkerMatrix(std::vector<std::string> genotype_names, std::vector<std::string> marker_names,
                           std::vector<Allele> calls)
    : genotype_names_(std::move(genotype_names)),
      marker_names_(std::move(marker_names)),
      calls_(std::move(calls)) {
  if (calls_.size() != genotype_names_.size() * marker_names_.size())
    throw DataError("call grid is " + std::to_string(calls_.size()) + " cells, expected " +
                    std::to_string(genotype_names_.size()) + " x " + std::to_string(marker_names_.size()));
  marker_index_.reserve(marker_names_.size());
  for (std::size_t m = 0; m < marker_names_.size(); ++m)
    if (!marker_index_.emplace(marker_names_[m], m).second)
      throw DataError("duplicate marker name '" + marker_names_[m] + "'");
  genotype_index_.reserve(genotype_names_.size());
  for (std::size_t g = 0; g < genotype_names_.size(); ++g)
    if (!genotype_index_.emplace(genotype_names_[g], g).second)
      throw DataError("duplicate genotype name '" + genotype_names_[g] + "'");
}

std::optional<std::size_t> MarkerMatrix::find_marker(std::string_view name) const {
  auto it = marker_index_.find(std::string(name));
  if (it == marker_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> MarkerMatrix::find_genotype(std::string_view name) const {
  auto it = genotype_index_.find(std::string(name));
  if (it == genotype_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t MarkerMatrix::missing_count(std::size_t marker) const noexcept {
  auto col = column(marker);
  return static_cast<std::size_t>(std::count(col.begin(), col.end(), Allele::Missing));
}

MarkerMatrix MarkerMatrix::select_genotypes(std::span<const std::size_t> rows) const {
  std::vector<std::string> names;
  names.reserve(rows.size());
  for (auto g : rows) names.push_back(genotype_names_.at(g));
  std::vector<Allele> calls;
  calls.reserve(rows.size() * n_markers());
  for (std::size_t m = 0; m < n_markers(); ++m)
    for (auto g : rows) calls.push_back(at(m, g));
  return MarkerMatrix(std::move(names), marker_names_, std::move(calls));
}

// ---- ledgers ----------------------------------------------------------------

std::string_view ledger_key(LedgerKind kind) noexcept {
  switch (kind) {
    case LedgerKind::CoLocated: return "co.located";
    case LedgerKind::SegDistortion: return "seg.distortion";
    case LedgerKind::Missing: return "missing";
    case LedgerKind::Omitted: return "omitted";
  }
  return "?";
}

LedgerKind parse_ledger_key(std::string_view key) {
  for (auto kind : kAllLedgers)
    if (ledger_key(kind) == key) return kind;
  throw ConfigError("unknown marker type '" + std::string(key) + "'");
}

double ledger_statistic(const MarkerMatrix& matrix, std::size_t marker, LedgerKind kind,
                        const PopulationType& pop) {
  switch (kind) {
    case LedgerKind::Missing:
      return matrix.n_genotypes() == 0
                 ? 0.0
                 : static_cast<double>(matrix.missing_count(marker)) / static_cast<double>(matrix.n_genotypes());
    case LedgerKind::SegDistortion:
      return seg_distortion_test(matrix.column(marker), pop).neg_log10_p;
    case LedgerKind::CoLocated:
    case LedgerKind::Omitted:
      break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// ---- Cross ------------------------------------------------------------------

void check_partition(const Cross& cross) {
  const std::size_t t = cross.matrix().n_markers();
  std::vector<std::uint8_t> seen(t, 0);
  auto visit = [&](std::size_t m, std::string_view where) {
    if (m >= t) throw DataError("marker index out of range in " + std::string(where));
    if (seen[m]++) throw DataError("marker '" + cross.matrix().marker_name(m) + "' placed twice");
  };
  for (const auto& g : cross.groups())
    for (auto m : g.markers) visit(m, g.name);
  for (const auto& [kind, ledger] : cross.ledgers())
    for (const auto& e : ledger.entries) visit(e.marker, ledger_key(kind));
  for (std::size_t m = 0; m < t; ++m)
    if (!seen[m]) throw DataError("marker '" + cross.matrix().marker_name(m) + "' is in no group or ledger");
}

Cross::Cross(MarkerMatrix matrix, PopulationType pop, std::vector<LinkageGroup> groups,
             std::map<LedgerKind, MarkerLedger> ledgers)
    : matrix_(std::move(matrix)), pop_(pop), groups_(std::move(groups)), ledgers_(std::move(ledgers)) {
  std::erase_if(ledgers_, [](const auto& kv) { return kv.second.empty(); });
  check_partition(*this);
  std::unordered_set<std::string> names;
  for (const auto& g : groups_) {
    if (g.name.empty()) throw DataError("linkage group with empty name");
    if (!names.insert(g.name).second) throw DataError("duplicate linkage group name '" + g.name + "'");
    if (g.positions.size() != g.markers.size())
      throw DataError("group '" + g.name + "' has " + std::to_string(g.markers.size()) + " markers but " +
                      std::to_string(g.positions.size()) + " positions");
    for (std::size_t i = 1; i < g.positions.size(); ++i)
      if (g.positions[i] < g.positions[i - 1] - 1e-9)
        throw DataError("positions decrease in group '" + g.name + "' at marker '" +
                        matrix_.marker_name(g.markers[i]) + "'");
  }
  if (!pop_.allows_heterozygotes()) {
    for (std::size_t m = 0; m < matrix_.n_markers(); ++m)
      for (auto a : matrix_.column(m))
        if (a == Allele::AB)
          throw DataError("heterozygote not allowed for population " + pop_.name() + " (marker '" +
                          matrix_.marker_name(m) + "')");
  }
}

Cross Cross::unconstructed(MarkerMatrix matrix, PopulationType pop, std::string group_name) {
  LinkageGroup g;
  g.name = std::move(group_name);
  g.markers.resize(matrix.n_markers());
  std::iota(g.markers.begin(), g.markers.end(), std::size_t{0});
  g.positions.assign(matrix.n_markers(), 0.0);
  std::vector<LinkageGroup> groups;
  if (!g.markers.empty()) groups.push_back(std::move(g));
  return Cross(std::move(matrix), pop, std::move(groups));
}

const MarkerLedger* Cross::ledger(LedgerKind kind) const {
  auto it = ledgers_.find(kind);
  return it == ledgers_.end() ? nullptr : &it->second;
}

std::size_t Cross::n_mapped_markers() const noexcept {
  std::size_t n = 0;
  for (const auto& g : groups_) n += g.size();
  return n;
}

const LinkageGroup* Cross::find_group(std::string_view name) const {
  for (const auto& g : groups_)
    if (g.name == name) return &g;
  return nullptr;
}

std::vector<double> Cross::group_lengths() const {
  std::vector<double> out;
  for (const auto& g : groups_) out.push_back(g.length());
  return out;
}

bool equivalent(const Cross& a, const Cross& b, double tol) {
  const auto& ma = a.matrix();
  const auto& mb = b.matrix();
  if (!(a.pop() == b.pop())) return false;
  if (ma.genotype_names() != mb.genotype_names()) return false;
  if (ma.n_markers() != mb.n_markers()) return false;
  if (a.groups().size() != b.groups().size()) return false;
  auto same_column = [&](std::size_t ia, std::size_t ib) {
    auto ca = ma.column(ia);
    auto cb = mb.column(ib);
    return std::equal(ca.begin(), ca.end(), cb.begin(), cb.end());
  };
  for (std::size_t gi = 0; gi < a.groups().size(); ++gi) {
    const auto& ga = a.groups()[gi];
    const auto& gb = b.groups()[gi];
    if (ga.name != gb.name || ga.size() != gb.size()) return false;
    for (std::size_t k = 0; k < ga.size(); ++k) {
      if (ma.marker_name(ga.markers[k]) != mb.marker_name(gb.markers[k])) return false;
      if (std::abs(ga.positions[k] - gb.positions[k]) > tol) return false;
      if (!same_column(ga.markers[k], gb.markers[k])) return false;
    }
  }
  if (a.ledgers().size() != b.ledgers().size()) return false;
  for (const auto& [kind, la] : a.ledgers()) {
    const MarkerLedger* lb = b.ledger(kind);
    if (!lb || lb->size() != la.size()) return false;
    for (std::size_t k = 0; k < la.size(); ++k) {
      const auto& ea = la.entries[k];
      const auto& eb = lb->entries[k];
      if (ma.marker_name(ea.marker) != mb.marker_name(eb.marker)) return false;
      if (!same_column(ea.marker, eb.marker)) return false;
      if (ea.anchor.has_value() != eb.anchor.has_value()) return false;
      if (ea.anchor && ma.marker_name(*ea.anchor) != mb.marker_name(*eb.anchor)) return false;
      const bool na = std::isnan(ea.stat), nb = std::isnan(eb.stat);
      if (na != nb || (!na && std::abs(ea.stat - eb.stat) > tol)) return false;
    }
  }
  return true;
}

// ---- structural operations ----------------------------------------------------

namespace {

Cross with_genotypes(const Cross& cross, std::span<const std::size_t> rows) {
  if (rows.size() < 2) throw DataError("subset must keep at least 2 genotypes, got " + std::to_string(rows.size()));
  MarkerMatrix matrix = cross.matrix().select_genotypes(rows);
  std::map<LedgerKind, MarkerLedger> ledgers = cross.ledgers();
  for (auto& [kind, ledger] : ledgers)
    for (auto& e : ledger.entries) e.stat = ledger_statistic(matrix, e.marker, kind, cross.pop());
  return Cross(std::move(matrix), cross.pop(), cross.groups(), std::move(ledgers));
}

}  // namespace

Cross subset_cross(const Cross& cross, std::span<const std::string> keep_genotypes) {
  std::vector<std::uint8_t> keep(cross.n_genotypes(), 0);
  for (const auto& id : keep_genotypes) {
    auto g = cross.matrix().find_genotype(id);
    if (!g) throw DataError("unknown genotype '" + id + "'");
    keep[*g] = 1;
  }
  return subset_cross(cross, [&](std::size_t g) { return keep[g] != 0; });
}

Cross subset_cross(const Cross& cross, const std::function<bool(std::size_t)>& keep) {
  std::vector<std::size_t> rows;
  for (std::size_t g = 0; g < cross.n_genotypes(); ++g)
    if (keep(g)) rows.push_back(g);
  return with_genotypes(cross, rows);
}

namespace {

/// Rebuilds a cross keeping only `markers` (in the given order), remapping
/// group and ledger indices. Markers not listed must not be referenced.
Cross compact(const Cross& cross, std::vector<LinkageGroup> groups, std::map<LedgerKind, MarkerLedger> ledgers) {
  const auto& m = cross.matrix();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> remap(m.n_markers(), kNone);
  std::vector<std::size_t> kept;
  auto take = [&](std::size_t idx) {
    if (remap[idx] == kNone) {
      remap[idx] = kept.size();
      kept.push_back(idx);
    }
  };
  for (const auto& g : groups)
    for (auto idx : g.markers) take(idx);
  for (const auto& [kind, ledger] : ledgers)
    for (const auto& e : ledger.entries) take(e.marker);
  std::vector<std::string> names;
  std::vector<Allele> calls;
  calls.reserve(kept.size() * m.n_genotypes());
  for (auto idx : kept) {
    names.push_back(m.marker_name(idx));
    auto col = m.column(idx);
    calls.insert(calls.end(), col.begin(), col.end());
  }
  for (auto& g : groups)
    for (auto& idx : g.markers) idx = remap[idx];
  for (auto& [kind, ledger] : ledgers)
    for (auto& e : ledger.entries) {
      e.marker = remap[e.marker];
      if (e.anchor) {
        if (remap[*e.anchor] == kNone)
          e.anchor.reset();
        else
          e.anchor = remap[*e.anchor];
      }
    }
  return Cross(MarkerMatrix(m.genotype_names(), std::move(names), std::move(calls)), cross.pop(),
               std::move(groups), std::move(ledgers));
}

}  // namespace

Cross subset_groups(const Cross& cross, std::span<const std::string> keep_groups) {
  std::vector<LinkageGroup> groups;
  for (const auto& name : keep_groups) {
    const auto* g = cross.find_group(name);
    if (!g) throw DataError("unknown linkage group '" + name + "'");
    groups.push_back(*g);
  }
  return compact(cross, std::move(groups), cross.ledgers());
}

std::string group_suffix(std::size_t index, SuffixRule rule) {
  if (rule == SuffixRule::Numeric) return std::to_string(index + 1);
  std::string s;
  std::size_t k = index + 1;
  while (k > 0) {
    --k;
    s.insert(s.begin(), static_cast<char>('A' + k % 26));
    k /= 26;
  }
  return s;
}

Cross break_groups(const Cross& cross, const std::vector<std::pair<std::string, std::vector<std::string>>>& split,
                   SuffixRule suffix, std::string_view sep) {
  const auto& m = cross.matrix();
  std::map<std::string, std::vector<std::string>> by_group;
  for (const auto& [group, markers] : split) {
    if (!cross.find_group(group)) throw DataError("unknown linkage group '" + group + "'");
    auto& v = by_group[group];
    v.insert(v.end(), markers.begin(), markers.end());
  }
  std::vector<LinkageGroup> out;
  for (const auto& g : cross.groups()) {
    auto it = by_group.find(g.name);
    if (it == by_group.end()) {
      out.push_back(g);
      continue;
    }
    std::set<std::size_t> cut_after;
    for (const auto& name : it->second) {
      auto idx = m.find_marker(name);
      auto pos = idx ? std::find(g.markers.begin(), g.markers.end(), *idx) : g.markers.end();
      if (pos == g.markers.end()) throw DataError("marker '" + name + "' is not in linkage group '" + g.name + "'");
      cut_after.insert(static_cast<std::size_t>(pos - g.markers.begin()));
    }
    std::size_t start = 0, piece = 0;
    auto emit = [&](std::size_t end) {
      if (end <= start) return;
      LinkageGroup frag;
      frag.name = g.name + std::string(sep) + group_suffix(piece++, suffix);
      const double base = g.positions[start];
      for (std::size_t k = start; k < end; ++k) {
        frag.markers.push_back(g.markers[k]);
        frag.positions.push_back(g.positions[k] - base);
      }
      out.push_back(std::move(frag));
      start = end;
    };
    for (auto k : cut_after) emit(k + 1);
    emit(g.size());
  }
  return Cross(m, cross.pop(), std::move(out), cross.ledgers());
}

Cross merge_groups(const Cross& cross, const std::vector<std::pair<std::string, std::vector<std::string>>>& merge,
                   double gap) {
  std::map<std::string, std::size_t> merged_into;  // source group -> merge entry
  for (std::size_t e = 0; e < merge.size(); ++e) {
    if (merge[e].second.empty()) throw DataError("merge entry '" + merge[e].first + "' lists no groups");
    for (const auto& name : merge[e].second) {
      if (!cross.find_group(name)) throw DataError("unknown linkage group '" + name + "'");
      if (!merged_into.emplace(name, e).second) throw DataError("linkage group '" + name + "' merged twice");
    }
  }
  for (const auto& [new_name, sources] : merge) {
    if (cross.find_group(new_name) && !merged_into.count(new_name))
      throw DataError("merged name '" + new_name + "' collides with a surviving group");
  }
  std::vector<LinkageGroup> out;
  for (const auto& g : cross.groups()) {
    auto it = merged_into.find(g.name);
    if (it == merged_into.end()) {
      out.push_back(g);
      continue;
    }
    const auto& [new_name, sources] = merge[it->second];
    if (sources.front() != g.name) continue;  // emitted at the slot of the first listed group
    LinkageGroup merged;
    merged.name = new_name;
    double offset = 0.0;
    bool first = true;
    for (const auto& src_name : sources) {
      const auto* src = cross.find_group(src_name);
      if (src->markers.empty()) continue;
      if (!first) offset = merged.positions.back() + gap;
      const double base = src->positions.front();
      for (std::size_t k = 0; k < src->size(); ++k) {
        merged.markers.push_back(src->markers[k]);
        merged.positions.push_back(offset + src->positions[k] - base);
      }
      first = false;
    }
    out.push_back(std::move(merged));
  }
  return Cross(cross.matrix(), cross.pop(), std::move(out), cross.ledgers());
}

Cross rename_groups(const Cross& cross, std::span<const std::string> names) {
  if (names.size() != cross.groups().size())
    throw DataError("expected " + std::to_string(cross.groups().size()) + " group names, got " +
                    std::to_string(names.size()));
  auto groups = cross.groups();
  for (std::size_t i = 0; i < groups.size(); ++i) groups[i].name = names[i];
  return Cross(cross.matrix(), cross.pop(), std::move(groups), cross.ledgers());
}

Cross combine_maps(std::span<const Cross> maps, bool keep_all) {
  if (maps.empty()) throw DataError("combine_maps needs at least one map");
  const PopulationType pop = maps.front().pop();
  for (const auto& c : maps)
    if (!(c.pop() == pop))
      throw DataError("incompatible population types " + pop.name() + " and " + c.pop().name());

  // Genotype axis.
  std::vector<std::string> genotypes;
  std::unordered_map<std::string, std::size_t> g_index;
  if (keep_all) {
    for (const auto& c : maps)
      for (const auto& id : c.matrix().genotype_names())
        if (g_index.emplace(id, genotypes.size()).second) genotypes.push_back(id);
  } else {
    for (const auto& id : maps.front().matrix().genotype_names()) {
      bool everywhere = std::all_of(maps.begin(), maps.end(),
                                    [&](const Cross& c) { return c.matrix().find_genotype(id).has_value(); });
      if (everywhere) {
        g_index.emplace(id, genotypes.size());
        genotypes.push_back(id);
      }
    }
  }
  const std::size_t n = genotypes.size();

  // Marker axis: first appearance wins the placement, later copies must agree.
  std::vector<std::string> marker_names;
  std::unordered_map<std::string, std::size_t> m_index;
  std::vector<Allele> calls;
  std::vector<LinkageGroup> groups;
  std::map<std::string, std::size_t> group_slot;
  std::map<LedgerKind, MarkerLedger> ledgers;

  auto absorb = [&](const Cross& c, std::size_t src) -> std::pair<std::size_t, bool> {
    const auto& mat = c.matrix();
    const std::string& name = mat.marker_name(src);
    auto [it, fresh] = m_index.emplace(name, marker_names.size());
    if (fresh) {
      marker_names.push_back(name);
      calls.resize(calls.size() + n, Allele::Missing);
    }
    Allele* dst = calls.data() + it->second * n;
    for (std::size_t g = 0; g < mat.n_genotypes(); ++g) {
      auto gi = g_index.find(mat.genotype_name(g));
      if (gi == g_index.end()) continue;
      const Allele a = mat.at(src, g);
      if (a == Allele::Missing) continue;
      Allele& slot = dst[gi->second];
      if (slot == Allele::Missing)
        slot = a;
      else if (slot != a)
        throw DataError("conflicting calls for marker '" + name + "' genotype '" + mat.genotype_name(g) + "'");
    }
    return {it->second, fresh};
  };

  for (const auto& c : maps) {
    for (const auto& g : c.groups()) {
      auto [slot_it, fresh_group] = group_slot.emplace(g.name, groups.size());
      if (fresh_group) groups.push_back(LinkageGroup{g.name, {}, {}});
      LinkageGroup& dst = groups[slot_it->second];
      const double offset = dst.positions.empty() ? 0.0 : dst.positions.back();
      const double base = g.positions.empty() ? 0.0 : g.positions.front();
      for (std::size_t k = 0; k < g.size(); ++k) {
        auto [idx, fresh] = absorb(c, g.markers[k]);
        if (!fresh) continue;
        dst.markers.push_back(idx);
        dst.positions.push_back(offset + g.positions[k] - base);
      }
    }
  }
  // Ledger entries only for markers not already placed in a group.
  for (const auto& c : maps) {
    for (const auto& [kind, ledger] : c.ledgers()) {
      for (const auto& e : ledger.entries) {
        auto [idx, fresh] = absorb(c, e.marker);
        if (!fresh) continue;
        LedgerEntry entry{idx, e.stat, std::nullopt};
        if (e.anchor) {
          auto a = m_index.find(c.matrix().marker_name(*e.anchor));
          if (a != m_index.end()) entry.anchor = a->second;
        }
        ledgers[kind].entries.push_back(entry);
      }
    }
  }
  std::erase_if(groups, [](const LinkageGroup& g) { return g.markers.empty(); });
  MarkerMatrix matrix(std::move(genotypes), std::move(marker_names), std::move(calls));
  for (auto& [kind, ledger] : ledgers)
    for (auto& e : ledger.entries)
      if (kind == LedgerKind::Missing || kind == LedgerKind::SegDistortion)
        e.stat = ledger_statistic(matrix, e.marker, kind, pop);
  return Cross(std::move(matrix), pop, std::move(groups), std::move(ledgers));
}

}  // namespace linkmap
