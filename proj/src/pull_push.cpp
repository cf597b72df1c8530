#include "linkmap/diagnostics.hpp"

#include "detail.hpp"
#include "linkmap/ordering.hpp"
#include "linkmap/packed.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>

namespace linkmap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parse_double(std::string_view text, std::string_view what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError("bad " + std::string(what) + " '" + std::string(text) + "'");
  return v;
}

double miss_fraction(std::span<const Allele> col) {
  if (col.empty()) return 0.0;
  return static_cast<double>(std::count(col.begin(), col.end(), Allele::Missing)) / static_cast<double>(col.size());
}

/// Homozygote-class chi-square against 1:1.
double homozygote_chi_square(std::span<const Allele> col) {
  double a = 0, b = 0;
  for (auto x : col) {
    if (x == Allele::AA) a += 1;
    if (x == Allele::BB) b += 1;
  }
  return a + b > 0 ? (a - b) * (a - b) / (a + b) : 0.0;
}

Cross drop_empty_groups(const Cross& base, std::vector<LinkageGroup> groups, std::map<LedgerKind, MarkerLedger> ledgers) {
  std::erase_if(groups, [](const LinkageGroup& g) { return g.markers.empty(); });
  return Cross(base.matrix(), base.pop(), std::move(groups), std::move(ledgers));
}

}  // namespace

std::variant<double, std::string> parse_seg_thresh(std::string_view text) {
  if (text == "bonf") return std::string("bonf");
  const double v = parse_double(text, "seg threshold");
  if (!(v > 0.0 && v <= 1.0)) throw ConfigError("seg threshold must lie in (0, 1]");
  return v;
}

double parse_seg_ratio(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ConfigError("seg ratio must look like 70:30");
  const double a = parse_double(text.substr(0, colon), "seg ratio");
  const double b = parse_double(text.substr(colon + 1), "seg ratio");
  if (!(a > 0.0 && b > 0.0)) throw ConfigError("seg ratio parts must be positive");
  return std::max(a, b) / (a + b);
}

bool is_distorted(std::span<const Allele> column, const PopulationType& pop, const PushParams& params,
                  std::size_t m) {
  if (params.seg_ratio) {
    const double ratio = parse_seg_ratio(*params.seg_ratio);
    double hom = 0;
    for (auto x : column) hom += (x == Allele::AA || x == Allele::BB) ? 1 : 0;
    const double boundary = hom * (2.0 * ratio - 1.0) * (2.0 * ratio - 1.0);
    return homozygote_chi_square(column) > boundary + 1e-9;
  }
  double alpha = 0.05;
  if (std::holds_alternative<std::string>(params.seg_thresh))
    alpha = 0.05 / static_cast<double>(std::max<std::size_t>(m, 1));
  else
    alpha = std::get<double>(params.seg_thresh);
  return seg_distortion_test(column, pop).p_value < alpha;
}

Cross pull_markers(const Cross& cross, LedgerKind type, const PushParams& params, std::span<const std::string> groups) {
  const MarkerMatrix& m = cross.matrix();
  const auto chosen = detail::select_groups(cross, groups);
  std::vector<LinkageGroup> out_groups = cross.groups();
  auto ledgers = cross.ledgers();
  MarkerLedger& ledger = ledgers[type];

  std::size_t considered = 0;
  for (auto gi : chosen) considered += cross.groups()[gi].size();

  for (auto gi : chosen) {
    LinkageGroup& g = out_groups[gi];
    std::vector<bool> pull(g.size(), false);
    switch (type) {
      case LedgerKind::CoLocated: {
        const BinSet bins = bin_markers(m, g.markers);
        std::map<std::size_t, std::size_t> slot;
        for (std::size_t k = 0; k < g.size(); ++k) slot[g.markers[k]] = k;
        for (const auto& bin : bins.bins)
          for (std::size_t q = 1; q < bin.size(); ++q) {
            pull[slot[bin[q]]] = true;
            ledger.entries.push_back({bin[q], kNaN, bin.front()});
          }
        break;
      }
      case LedgerKind::SegDistortion:
        for (std::size_t k = 0; k < g.size(); ++k) {
          const auto col = m.column(g.markers[k]);
          if (!is_distorted(col, cross.pop(), params, considered)) continue;
          pull[k] = true;
          ledger.entries.push_back({g.markers[k], seg_distortion_test(col, cross.pop()).neg_log10_p, std::nullopt});
        }
        break;
      case LedgerKind::Missing:
        for (std::size_t k = 0; k < g.size(); ++k) {
          const double f = miss_fraction(m.column(g.markers[k]));
          if (f <= params.miss_thresh) continue;
          pull[k] = true;
          ledger.entries.push_back({g.markers[k], f, std::nullopt});
        }
        break;
      case LedgerKind::Omitted:
        throw ConfigError("markers cannot be pulled into the omitted ledger");
    }
    LinkageGroup kept{g.name, {}, {}};
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (pull[k]) continue;
      kept.markers.push_back(g.markers[k]);
      kept.positions.push_back(g.positions[k]);
    }
    g = std::move(kept);
  }
  return drop_empty_groups(cross, std::move(out_groups), std::move(ledgers));
}

PushType parse_push_type(std::string_view name) {
  if (name == "co.located") return PushType::CoLocated;
  if (name == "seg.distortion") return PushType::SegDistortion;
  if (name == "missing") return PushType::Missing;
  if (name == "unlinked") return PushType::Unlinked;
  throw ConfigError("unknown push type '" + std::string(name) + "'");
}

Cross push_markers(const Cross& cross, PushType type, const PushParams& params,
                   const std::optional<std::string>& unlinked_group, PushReport* report) {
  const MarkerMatrix& m = cross.matrix();
  PushReport rep;
  std::vector<LinkageGroup> groups = cross.groups();
  auto ledgers = cross.ledgers();

  // Markers placed after a given (group, slot); slot indexes the original group.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> after;
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> home;
  for (std::size_t gi = 0; gi < groups.size(); ++gi)
    for (std::size_t k = 0; k < groups[gi].size(); ++k) home[groups[gi].markers[k]] = {gi, k};

  auto rebuild = [&]() {
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      LinkageGroup& g = groups[gi];
      LinkageGroup next{g.name, {}, {}};
      for (std::size_t k = 0; k < g.size(); ++k) {
        next.markers.push_back(g.markers[k]);
        next.positions.push_back(g.positions[k]);
        auto it = after.find({gi, k});
        if (it == after.end()) continue;
        for (auto x : it->second) {
          next.markers.push_back(x);
          next.positions.push_back(g.positions[k]);
        }
      }
      g = std::move(next);
    }
  };

  if (type == PushType::CoLocated) {
    auto it = ledgers.find(LedgerKind::CoLocated);
    if (it != ledgers.end()) {
      MarkerLedger left;
      for (const auto& e : it->second.entries) {
        auto h = e.anchor ? home.find(*e.anchor) : home.end();
        if (h == home.end()) {
          left.entries.push_back(e);
          ++rep.retained;
          continue;
        }
        after[h->second].push_back(e.marker);
        ++rep.pushed;
      }
      it->second = std::move(left);
    }
    rebuild();
    if (report) *report = rep;
    return drop_empty_groups(cross, std::move(groups), std::move(ledgers));
  }

  std::vector<std::size_t> candidates;
  std::optional<std::size_t> source_group;
  if (type == PushType::Unlinked) {
    if (!unlinked_group) throw ConfigError("push type 'unlinked' needs the name of the unlinked group");
    for (std::size_t gi = 0; gi < groups.size(); ++gi)
      if (groups[gi].name == *unlinked_group) source_group = gi;
    if (!source_group) throw DataError("unknown linkage group '" + *unlinked_group + "'");
    candidates = groups[*source_group].markers;
  } else {
    const LedgerKind kind = type == PushType::SegDistortion ? LedgerKind::SegDistortion : LedgerKind::Missing;
    auto it = ledgers.find(kind);
    if (it != ledgers.end()) {
      MarkerLedger left;
      const std::size_t m_tested = it->second.size();
      for (const auto& e : it->second.entries) {
        const auto col = m.column(e.marker);
        const bool pass = kind == LedgerKind::SegDistortion ? !is_distorted(col, cross.pop(), params, m_tested)
                                                            : miss_fraction(col) <= params.miss_thresh;
        if (pass) {
          candidates.push_back(e.marker);
        } else {
          left.entries.push_back(e);
          ++rep.retained;
        }
      }
      it->second = std::move(left);
    }
  }

  // Best-linked mapped marker for each candidate.
  std::vector<std::size_t> mapped;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    if (source_group && gi == *source_group) continue;
    mapped.insert(mapped.end(), groups[gi].markers.begin(), groups[gi].markers.end());
  }
  std::vector<std::size_t> all = mapped;
  all.insert(all.end(), candidates.begin(), candidates.end());
  const PackedCalls packed(m, all);
  std::vector<std::size_t> residual;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const std::size_t cj = mapped.size() + c;
    double best_rf = std::numeric_limits<double>::infinity(), best_lod = 0.0;
    std::size_t best = mapped.size();
    for (std::size_t j = 0; j < mapped.size(); ++j) {
      const auto cnt = packed.counts(cj, j);
      if (cnt.n_obs == 0) continue;
      const double rf = cnt.mismatches() / cnt.n_obs;
      if (rf < best_rf) {
        best_rf = rf;
        best = j;
        best_lod = two_point_lod(cnt.mismatches(), cnt.n_obs);
      }
    }
    if (best < mapped.size() && best_rf <= params.max_rf && best_lod >= params.min_lod) {
      after[home[mapped[best]]].push_back(candidates[c]);
      ++rep.pushed;
    } else {
      residual.push_back(candidates[c]);
    }
  }
  rep.residual = residual.size();

  if (source_group) {
    std::sort(residual.begin(), residual.end());
    LinkageGroup& src = groups[*source_group];
    LinkageGroup left{src.name, {}, {}};
    for (std::size_t k = 0; k < src.size(); ++k)
      if (std::binary_search(residual.begin(), residual.end(), src.markers[k])) {
        left.markers.push_back(src.markers[k]);
        left.positions.push_back(src.positions[k]);
      }
    src = std::move(left);
    rebuild();
  } else {
    rebuild();
    if (!residual.empty()) {
      const std::string name = "unlinked";
      auto it = std::find_if(groups.begin(), groups.end(), [&](const LinkageGroup& g) { return g.name == name; });
      if (it == groups.end()) {
        groups.push_back({name, {}, {}});
        it = groups.end() - 1;
      }
      for (auto x : residual) {
        it->markers.push_back(x);
        it->positions.push_back(it->positions.empty() ? 0.0 : it->positions.back());
      }
    }
  }
  if (report) *report = rep;
  return drop_empty_groups(cross, std::move(groups), std::move(ledgers));
}

}  // namespace linkmap
