#include "linkmap/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>

namespace linkmap {

namespace {

std::string num(double v, int digits = 6) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

const char* flag(bool b) { return b ? "TRUE" : "FALSE"; }

bool wants(std::span<const MarkerStat> sel, MarkerStat s) {
  return std::find(sel.begin(), sel.end(), s) != sel.end();
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void svg_open(std::ostream& out, double w, double h) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 "
      << w << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"10\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

/// Simple index plot: one point per value with an optional horizontal line.
void index_plot(std::ostream& out, const std::vector<double>& values, const std::string& title,
                std::optional<double> line, const std::vector<bool>& highlight) {
  const double w = 720, h = 260, left = 50, right = 10, top = 24, bottom = 30;
  svg_open(out, w, h);
  out << "<text x=\"" << left << "\" y=\"14\">" << xml_escape(title) << "</text>\n";
  double vmax = 1e-9;
  for (double v : values)
    if (std::isfinite(v)) vmax = std::max(vmax, v);
  if (line) vmax = std::max(vmax, *line);
  const double pw = w - left - right, ph = h - top - bottom;
  out << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + ph << "\" stroke=\"black\"/>\n";
  out << "<text x=\"4\" y=\"" << top + 8 << "\">" << num(vmax, 4) << "</text>\n";
  const double step = values.size() > 1 ? pw / static_cast<double>(values.size() - 1) : 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) continue;
    const double x = left + step * static_cast<double>(i);
    const double y = top + ph - ph * values[i] / vmax;
    const bool hot = i < highlight.size() && highlight[i];
    out << "<circle cx=\"" << fixed(x, 2) << "\" cy=\"" << fixed(y, 2) << "\" r=\"2\" fill=\""
        << (hot ? "red" : "steelblue") << "\"/>\n";
  }
  if (line) {
    const double y = top + ph - ph * *line / vmax;
    out << "<line x1=\"" << left << "\" y1=\"" << fixed(y, 2) << "\" x2=\"" << left + pw << "\" y2=\"" << fixed(y, 2)
        << "\" stroke=\"red\" stroke-dasharray=\"4 3\"/>\n";
  }
  out << "</svg>\n";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

void write_genotype_profile_csv(const GenotypeStats& s, std::ostream& out) {
  out << "genotype,xo,dxo,miss,flagged\n";
  for (std::size_t i = 0; i < s.genotype.size(); ++i)
    out << s.genotype[i] << ',' << s.xo[i] << ',' << s.dxo[i] << ',' << s.miss[i] << ','
        << (s.flagged.empty() ? "NA" : flag(s.flagged[i])) << '\n';
}

void write_marker_profile_csv(const MarkerStats& s, std::span<const MarkerStat> sel, std::ostream& out) {
  out << "marker,group,pos";
  if (wants(sel, MarkerStat::SegDist)) out << ",neglog10P";
  if (wants(sel, MarkerStat::Miss)) out << ",miss";
  if (wants(sel, MarkerStat::Prop)) out << ",AA,BB,AB";
  if (wants(sel, MarkerStat::Dxo)) out << ",dxo";
  out << ",bonferroni\n";
  for (const auto& r : s.markers) {
    out << r.marker << ',' << r.group << ',' << fixed(r.position, 3);
    if (wants(sel, MarkerStat::SegDist)) out << ',' << num(r.neg_log10_p);
    if (wants(sel, MarkerStat::Miss)) out << ',' << num(r.miss);
    if (wants(sel, MarkerStat::Prop)) out << ',' << num(r.prop_aa) << ',' << num(r.prop_bb) << ',' << num(r.prop_ab);
    if (wants(sel, MarkerStat::Dxo)) out << ',' << r.dxo;
    out << ',' << flag(r.bonferroni) << '\n';
  }
}

void write_interval_profile_csv(const MarkerStats& s, std::span<const MarkerStat> sel, std::ostream& out) {
  out << "left,right,group";
  if (wants(sel, MarkerStat::Erf)) out << ",erf";
  if (wants(sel, MarkerStat::Lod)) out << ",lod";
  if (wants(sel, MarkerStat::Dist)) out << ",dist";
  if (wants(sel, MarkerStat::Mrf)) out << ",mrf";
  if (wants(sel, MarkerStat::Recomb)) out << ",recomb";
  out << ",n_obs,weak_linkage\n";
  for (const auto& r : s.intervals) {
    out << r.left << ',' << r.right << ',' << r.group;
    if (wants(sel, MarkerStat::Erf)) out << ',' << num(r.erf);
    if (wants(sel, MarkerStat::Lod)) out << ',' << num(r.lod);
    if (wants(sel, MarkerStat::Dist)) out << ',' << num(r.dist);
    if (wants(sel, MarkerStat::Mrf)) out << ',' << num(r.mrf);
    if (wants(sel, MarkerStat::Recomb)) out << ',' << num(r.recomb);
    out << ',' << num(r.n_obs) << ',' << flag(r.weak_linkage) << '\n';
  }
}

void write_clone_report_csv(std::span<const CloneRow> rows, std::ostream& out) {
  out << "G1,G2,coef,match,diff,na.both,na.one,group\n";
  for (const auto& r : rows)
    out << r.g1 << ',' << r.g2 << ',' << fixed(r.coef, 4) << ',' << r.match << ',' << r.diff << ',' << r.na_both
        << ',' << r.na_one << ',' << r.group << '\n';
}

std::vector<CloneRow> read_clone_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("clone report is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  if (header.size() != 8 || header[0] != "G1" || header[1] != "G2")
    throw ParseError("clone report header must be G1,G2,coef,match,diff,na.both,na.one,group");
  std::vector<CloneRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != 8) throw ParseError("clone report line " + std::to_string(line_no) + ": expected 8 columns");
    try {
      CloneRow r;
      r.g1 = c[0];
      r.g2 = c[1];
      r.coef = std::stod(c[2]);
      r.match = std::stoul(c[3]);
      r.diff = std::stoul(c[4]);
      r.na_both = std::stoul(c[5]);
      r.na_one = std::stoul(c[6]);
      r.group = std::stoul(c[7]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ParseError("clone report line " + std::to_string(line_no) + ": bad number");
    }
  }
  return rows;
}

void write_heatmap_csv(const HeatMap& heat, std::ostream& out) {
  // Upper triangle: recombination fraction. Lower triangle: LOD.
  out << "marker";
  for (const auto& mk : heat.markers) out << ',' << mk;
  out << '\n';
  const std::size_t t = heat.size();
  for (std::size_t i = 0; i < t; ++i) {
    out << heat.markers[i];
    for (std::size_t j = 0; j < t; ++j) {
      out << ',';
      if (i < j)
        out << num(heat.at_rf(i, j));
      else if (i > j)
        out << num(heat.at_lod(i, j));
      else
        out << "NA";
    }
    out << '\n';
  }
}

void write_heatmap_svg(const HeatMap& heat, double lmax, std::ostream& out) {
  const std::size_t t = heat.size();
  const double cell = t > 0 ? std::max(1.0, std::min(8.0, 800.0 / static_cast<double>(t))) : 8.0;
  const double side = cell * static_cast<double>(t);
  svg_open(out, side + 20, side + 20);
  // Both triangles share one scale: strong linkage red, none blue.
  auto colour = [](double strength) {
    strength = std::clamp(strength, 0.0, 1.0);
    const int r = static_cast<int>(255 * strength), b = static_cast<int>(255 * (1.0 - strength));
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x30%02x", r, b);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = 0; j < t; ++j) {
      double s = 1.0;
      if (i < j) {
        const double rf = heat.at_rf(i, j);
        s = std::isnan(rf) ? 0.0 : 1.0 - std::min(rf, 0.5) / 0.5;
      } else if (i > j) {
        s = lmax > 0 ? heat.at_lod(i, j) / lmax : 0.0;
      }
      out << "<rect x=\"" << fixed(10 + cell * static_cast<double>(j), 2) << "\" y=\""
          << fixed(10 + cell * static_cast<double>(i), 2) << "\" width=\"" << fixed(cell, 2) << "\" height=\""
          << fixed(cell, 2) << "\" fill=\"" << colour(s) << "\"/>\n";
    }
  // Group boundaries.
  for (std::size_t i = 1; i < t; ++i) {
    if (heat.groups[i] == heat.groups[i - 1]) continue;
    const double p = 10 + cell * static_cast<double>(i);
    out << "<line x1=\"" << fixed(p, 2) << "\" y1=\"10\" x2=\"" << fixed(p, 2) << "\" y2=\"" << fixed(10 + side, 2)
        << "\" stroke=\"black\"/>\n<line x1=\"10\" y1=\"" << fixed(p, 2) << "\" x2=\"" << fixed(10 + side, 2)
        << "\" y2=\"" << fixed(p, 2) << "\" stroke=\"black\"/>\n";
  }
  out << "</svg>\n";
}

void write_genotype_profile_svg(const GenotypeStats& s, std::ostream& out) {
  std::vector<double> xo(s.xo.begin(), s.xo.end());
  index_plot(out, xo, "crossovers per genotype", s.xo_lambda, s.flagged);
}

void write_marker_profile_svg(const MarkerStats& s, std::span<const MarkerStat> sel, std::ostream& out) {
  std::vector<double> v;
  std::vector<bool> hot;
  std::string title = "-log10 p (segregation)";
  std::optional<double> line;
  if (wants(sel, MarkerStat::Miss) && !wants(sel, MarkerStat::SegDist)) {
    title = "missing proportion";
    for (const auto& r : s.markers) v.push_back(r.miss);
  } else {
    for (const auto& r : s.markers) {
      v.push_back(r.neg_log10_p);
      hot.push_back(r.bonferroni);
    }
    if (s.bonferroni_alpha > 0) line = -std::log10(s.bonferroni_alpha);
  }
  index_plot(out, v, title, line, hot);
}

}  // namespace linkmap
