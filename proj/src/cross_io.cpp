#include "linkmap/cross.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <limits>
#include <map>

namespace linkmap {

namespace {

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return out;
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

double parse_number(const std::string& text, std::size_t line_no, std::string_view what) {
  if (text == "NA") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ParseError("line " + std::to_string(line_no) + ": bad " + std::string(what) + " '" + text + "'");
  return v;
}

std::string format_fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string format_stat(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

enum class Layout { Unconstructed, Grouped, Constructed };

struct ParsedTable {
  std::vector<std::string> genotypes;
  std::vector<std::string> markers;
  std::vector<std::string> groups;
  std::vector<double> positions;
  std::vector<Allele> calls;
};

ParsedTable parse_table(std::istream& in, std::size_t lead_columns, std::size_t& line_no,
                        const std::vector<std::string>& header, const std::string& source) {
  ParsedTable t;
  t.genotypes.assign(header.begin() + static_cast<std::ptrdiff_t>(lead_columns), header.end());
  std::string line;
  while (read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split_tabs(line);
    if (cells.size() != header.size())
      throw ParseError(source + " line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " columns, found " + std::to_string(cells.size()));
    t.markers.push_back(cells[0]);
    for (std::size_t c = 1; c < lead_columns; ++c) {
      if (c == 1) t.groups.push_back(cells[1]);
      if (c == 2) t.positions.push_back(parse_number(cells[2], line_no, "position"));
    }
    for (std::size_t c = lead_columns; c < cells.size(); ++c) {
      try {
        t.calls.push_back(parse_allele(cells[c]));
      } catch (const ParseError& e) {
        throw ParseError(source + " line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  return t;
}

struct SidecarRows {
  std::vector<std::string> markers;
  std::vector<std::string> anchors;
  std::vector<double> stats;
  std::vector<Allele> calls;
};

SidecarRows read_sidecar(const std::filesystem::path& path, const std::vector<std::string>& genotypes) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 1;
  if (!read_line(in, line)) throw ParseError(path.string() + ": empty ledger file");
  auto header = split_tabs(line);
  if (header.size() < 3 || header[0] != "marker" || header[1] != "anchor" || header[2] != "stat")
    throw ParseError(path.string() + ": ledger header must start with marker, anchor, stat");
  if (!std::equal(header.begin() + 3, header.end(), genotypes.begin(), genotypes.end()))
    throw ParseError(path.string() + ": ledger genotypes differ from the map");
  SidecarRows rows;
  while (read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split_tabs(line);
    if (cells.size() != header.size())
      throw ParseError(path.string() + " line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " columns, found " + std::to_string(cells.size()));
    rows.markers.push_back(cells[0]);
    rows.anchors.push_back(cells[1]);
    rows.stats.push_back(parse_number(cells[2], line_no, "statistic"));
    for (std::size_t c = 3; c < cells.size(); ++c) {
      try {
        rows.calls.push_back(parse_allele(cells[c]));
      } catch (const ParseError& e) {
        throw ParseError(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  return rows;
}

Cross read_cross_impl(std::istream& in, const PopulationType& pop, const LoadOptions& options,
                      const std::filesystem::path* source_path) {
  const std::string source = source_path ? source_path->string() : std::string("input");
  std::string line;
  std::size_t line_no = 1;
  if (!read_line(in, line) || line.empty()) throw ParseError(source + ": empty file, expected a header line");
  auto header = split_tabs(line);
  if (header[0] != "marker") throw ParseError(source + ": first header column must be 'marker'");
  Layout layout = Layout::Unconstructed;
  std::size_t lead = 1;
  if (header.size() >= 3 && header[1] == "group" && header[2] == "position_cM") {
    layout = Layout::Constructed;
    lead = 3;
  } else if (header.size() >= 2 && header[1] == "group") {
    layout = Layout::Grouped;
    lead = 2;
  }
  ParsedTable t = parse_table(in, lead, line_no, header, source);

  std::vector<std::string> names = t.markers;
  std::vector<Allele> calls = std::move(t.calls);
  std::vector<LinkageGroup> groups;
  std::map<std::string, std::size_t> slot;
  for (std::size_t m = 0; m < t.markers.size(); ++m) {
    const std::string& gname = layout == Layout::Unconstructed ? options.default_group : t.groups[m];
    auto [it, fresh] = slot.emplace(gname, groups.size());
    if (fresh) groups.push_back(LinkageGroup{gname, {}, {}});
    groups[it->second].markers.push_back(m);
    groups[it->second].positions.push_back(layout == Layout::Constructed ? t.positions[m] : 0.0);
  }

  std::map<LedgerKind, MarkerLedger> ledgers;
  if (source_path && options.read_ledgers) {
    std::vector<std::pair<LedgerKind, SidecarRows>> sidecars;
    for (auto kind : kAllLedgers) {
      auto p = ledger_sidecar_path(*source_path, kind);
      if (std::filesystem::exists(p)) sidecars.emplace_back(kind, read_sidecar(p, t.genotypes));
    }
    for (auto& [kind, rows] : sidecars) {
      for (std::size_t r = 0; r < rows.markers.size(); ++r) {
        ledgers[kind].entries.push_back(LedgerEntry{names.size(), rows.stats[r], std::nullopt});
        names.push_back(rows.markers[r]);
      }
      calls.insert(calls.end(), rows.calls.begin(), rows.calls.end());
    }
  }
  MarkerMatrix matrix(t.genotypes, std::move(names), std::move(calls));
  if (source_path && options.read_ledgers) {
    for (auto kind : kAllLedgers) {
      auto it = ledgers.find(kind);
      if (it == ledgers.end()) continue;
      SidecarRows rows = read_sidecar(ledger_sidecar_path(*source_path, kind), t.genotypes);
      for (std::size_t r = 0; r < rows.anchors.size(); ++r) {
        if (rows.anchors[r] == "NA") continue;
        auto a = matrix.find_marker(rows.anchors[r]);
        if (!a) throw ParseError("ledger anchor '" + rows.anchors[r] + "' is not a known marker");
        it->second.entries[r].anchor = *a;
      }
    }
  }
  return Cross(std::move(matrix), pop, std::move(groups), std::move(ledgers));
}

}  // namespace

std::filesystem::path ledger_sidecar_path(const std::filesystem::path& map_path, LedgerKind kind) {
  std::filesystem::path p = map_path;
  p += ".";
  p += std::string(ledger_key(kind));
  p += ".tsv";
  return p;
}

Cross read_cross(std::istream& in, const PopulationType& pop, const LoadOptions& options) {
  return read_cross_impl(in, pop, options, nullptr);
}

Cross load_cross(const std::filesystem::path& path, const PopulationType& pop, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_cross_impl(in, pop, options, &path);
}

void write_map(const Cross& cross, std::ostream& out) {
  const auto& m = cross.matrix();
  out << "marker\tgroup\tposition_cM";
  for (const auto& g : m.genotype_names()) out << '\t' << g;
  out << '\n';
  std::string row;
  for (const auto& g : cross.groups()) {
    for (std::size_t k = 0; k < g.size(); ++k) {
      row.clear();
      row += m.marker_name(g.markers[k]);
      row += '\t';
      row += g.name;
      row += '\t';
      row += format_fixed3(g.positions[k]);
      for (auto a : m.column(g.markers[k])) {
        row += '\t';
        row += allele_symbol(a);
      }
      row += '\n';
      out << row;
    }
  }
}

void write_cross(const Cross& cross, const std::filesystem::path& path) {
  {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    write_map(cross, out);
    if (!out) throw Error("write failed for " + path.string());
  }
  const auto& m = cross.matrix();
  for (auto kind : kAllLedgers) {
    const auto sidecar = ledger_sidecar_path(path, kind);
    const MarkerLedger* ledger = cross.ledger(kind);
    if (!ledger || ledger->empty()) {
      std::error_code ec;
      std::filesystem::remove(sidecar, ec);
      continue;
    }
    std::ofstream out(sidecar);
    if (!out) throw Error("cannot write " + sidecar.string());
    out << "marker\tanchor\tstat";
    for (const auto& g : m.genotype_names()) out << '\t' << g;
    out << '\n';
    for (const auto& e : ledger->entries) {
      out << m.marker_name(e.marker) << '\t' << (e.anchor ? m.marker_name(*e.anchor) : std::string("NA")) << '\t'
          << format_stat(e.stat);
      for (auto a : m.column(e.marker)) out << '\t' << allele_symbol(a);
      out << '\n';
    }
    if (!out) throw Error("write failed for " + sidecar.string());
  }
}

}  // namespace linkmap
