// linkmap command-line tool.
#include "linkmap/clustering.hpp"
#include "linkmap/cross.hpp"
#include "linkmap/diagnostics.hpp"
#include "linkmap/genetics_math.hpp"
#include "linkmap/ordering.hpp"
#include "linkmap/parallel.hpp"
#include "linkmap/simulate.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace linkmap;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto p = text.find(sep, start);
    if (p == std::string_view::npos) p = text.size();
    if (p > start) out.emplace_back(text.substr(start, p - start));
    start = p + 1;
  }
  return out;
}

std::vector<std::string> flatten(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& it : items)
    for (auto& s : split(it, ',')) out.push_back(std::move(s));
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  return out;
}

template <class Fn>
void emit_to(const std::string& path, Fn&& fn) {
  if (path.empty()) return;
  if (path == "-") {
    fn(std::cout);
    return;
  }
  auto out = open_out(path);
  fn(out);
}

/// "50:400" or "50:400:10" or "100,200,300".
std::vector<std::size_t> parse_counts(const std::string& text) {
  std::vector<std::size_t> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() < 2 || parts.size() > 3) throw ConfigError("range must be lo:hi or lo:hi:step");
    const std::size_t lo = std::stoul(parts[0]), hi = std::stoul(parts[1]);
    const std::size_t step = parts.size() == 3 ? std::stoul(parts[2]) : 1;
    if (step == 0 || lo > hi) throw ConfigError("bad range '" + text + "'");
    for (std::size_t v = lo; v <= hi; v += step) out.push_back(v);
    return out;
  }
  for (const auto& s : split(text, ',')) out.push_back(std::stoul(s));
  return out;
}

struct Common {
  std::string pop = "DH";
  PopulationType population() const { return PopulationType::parse(pop); }
};

void add_pop(CLI::App* app, Common& c) {
  app->add_option("--pop", c.pop, "Population type: BC, DH, ARIL or RIL<r> (e.g. RIL2 for an F2)")
      ->capture_default_str();
}

void print_summary(const Cross& cross, std::ostream& out) {
  out << cross.groups().size() << " groups, " << cross.n_mapped_markers() << " mapped markers, "
      << cross.n_genotypes() << " genotypes";
  for (const auto& [kind, ledger] : cross.ledgers()) out << ", " << ledger.size() << ' ' << ledger_key(kind);
  out << '\n';
  for (const auto& g : cross.groups()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", g.length());
    out << "  " << g.name << '\t' << g.size() << " markers\t" << buf << " cM\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Genetic linkage map construction for biparental populations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "linkmap 0.3.0");
  std::function<void()> action;
  Common common;
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress summaries on stderr");

  // construct
  std::string in_path, out_path;
  ConstructParams cp;
  std::string objective = "COUNT", dist_fun = "kosambi", suffix = "numeric";
  std::string imputed_path, flagged_path;
  std::vector<std::string> chr;
  unsigned threads = 0;
  {
    auto* c = app.add_subcommand("construct", "Cluster and order markers into a linkage map");
    add_pop(c, common);
    c->add_option("-i,--input", in_path, "Marker TSV (unconstructed, grouped or constructed)")->required();
    c->add_option("-o,--output", out_path, "Output map TSV")->required();
    c->add_option("--p-value", cp.p_value, "Clustering p-value; >= 1 disables splitting")->capture_default_str();
    c->add_option("--objective-fun", objective, "COUNT or ML")->capture_default_str();
    c->add_option("--dist-fun", dist_fun, "kosambi or haldane")->capture_default_str();
    c->add_option("--miss-thresh", cp.miss_thresh, "Markers with a larger missing proportion are set aside")
        ->capture_default_str();
    c->add_flag("--detect-bad-data", cp.order.detect_bad_data, "Flag and remove suspicious calls");
    c->add_flag("--mvest-bc", cp.mvest_bc, "Impute missing calls before clustering (BC/DH)");
    c->add_option("--no-map-dist", cp.order.no_map_dist, "Terminal segment gap, cM")->capture_default_str();
    c->add_option("--no-map-size", cp.order.no_map_size, "Largest terminal segment dropped")->capture_default_str();
    c->add_flag("--anchor", cp.order.anchor, "Keep each group's orientation from the input order");
    c->add_flag("--bychr,!--no-bychr", cp.bychr, "Reconstruct within existing groups")->capture_default_str();
    c->add_option("--chr", chr, "Groups to (re)construct, comma separated");
    c->add_option("--suffix", suffix, "Group name suffixes: numeric or alpha")->capture_default_str();
    c->add_option("--return-imputed", imputed_path, "Write posterior AA probabilities of representatives (CSV)");
    c->add_option("--flagged", flagged_path, "Write calls removed by error detection (TSV)");
    c->add_option("--threads", threads, "Worker threads (default LINKMAP_THREADS or all cores)");
    c->callback([&] {
      action = [&] {
        const PopulationType pop = common.population();
        cp.order.objective = parse_objective(objective);
        cp.order.map_function = parse_map_function(dist_fun);
        cp.suffix = suffix == "alpha" ? SuffixRule::Alpha : SuffixRule::Numeric;
        if (suffix != "alpha" && suffix != "numeric") throw ConfigError("suffix must be numeric or alpha");
        if (cp.order.detect_bad_data && pop.is_finite_ril())
          throw ConfigError("--detect-bad-data is not available for " + pop.name());
        cp.chr = flatten(chr);
        cp.threads = threads;
        const Cross cross = load_cross(in_path, pop);
        const ConstructResult r = construct_map_detailed(cross, cp);
        write_cross(r.cross, out_path);
        emit_to(imputed_path, [&](std::ostream& out) {
          const auto& m = r.cross.matrix();
          out << "genotype";
          for (const auto& [name, o] : r.orders)
            for (auto rep : o.representatives) out << ',' << m.marker_name(rep);
          out << '\n';
          char buf[32];
          for (std::size_t i = 0; i < m.n_genotypes(); ++i) {
            out << m.genotype_name(i);
            for (const auto& [name, o] : r.orders)
              for (std::size_t j = 0; j < o.representatives.size(); ++j) {
                std::snprintf(buf, sizeof buf, ",%.4f", o.imputed(i, j));
                out << buf;
              }
            out << '\n';
          }
        });
        emit_to(flagged_path, [&](std::ostream& out) {
          const auto& m = r.cross.matrix();
          out << "marker\tgenotype\n";
          for (const auto& [name, o] : r.orders)
            for (const auto& f : o.flagged) out << m.marker_name(f.marker) << '\t' << m.genotype_name(f.genotype) << '\n';
        });
        if (!quiet) print_summary(r.cross, std::cerr);
      };
    });
  }

  // diagnose
  std::string geno_csv, marker_csv, interval_csv, heat_csv, heat_svg, geno_svg, marker_svg;
  std::optional<double> xo_lambda;
  std::vector<std::string> stats{"seg.dist", "miss", "prop", "dxo", "erf", "lod", "dist", "mrf", "recomb"};
  std::string crit;
  double lmax = 12.0, rmin = 0.0;
  {
    auto* c = app.add_subcommand("diagnose", "Genotype, marker and interval statistics and heat maps");
    add_pop(c, common);
    c->add_option("-i,--input", in_path, "Map TSV")->required();
    c->add_option("--genotype-csv", geno_csv, "genotype,xo,dxo,miss,flagged");
    c->add_option("--marker-csv", marker_csv, "Marker statistics");
    c->add_option("--interval-csv", interval_csv, "Interval statistics");
    c->add_option("--heatmap-csv", heat_csv, "RF (upper) / LOD (lower) matrix");
    c->add_option("--heatmap-svg", heat_svg, "Heat map rendering");
    c->add_option("--genotype-svg", geno_svg, "Crossover profile rendering");
    c->add_option("--marker-svg", marker_svg, "Marker profile rendering");
    c->add_option("--xo-lambda", xo_lambda, "Expected crossovers per genotype; flags significant excess");
    c->add_option("--stat-type", stats, "Statistics to emit")->delimiter(',')->capture_default_str();
    c->add_option("--crit-val", crit, "'bonf' adds Bonferroni and weak-linkage annotations");
    c->add_option("--chr", chr, "Groups to profile, comma separated");
    c->add_option("--dist-fun", dist_fun, "kosambi or haldane")->capture_default_str();
    c->add_option("--lmax", lmax, "LOD cap for the heat map")->capture_default_str();
    c->add_option("--rmin", rmin, "RF floor for the heat map")->capture_default_str();
    c->callback([&] {
      action = [&] {
        const PopulationType pop = common.population();
        if (!crit.empty() && crit != "bonf") throw ConfigError("--crit-val accepts only 'bonf'");
        std::vector<MarkerStat> sel;
        for (const auto& s : stats) sel.push_back(parse_marker_stat(s));
        const MapFunction f = parse_map_function(dist_fun);
        const auto groups = flatten(chr);
        const Cross cross = load_cross(in_path, pop);
        if (!geno_csv.empty() || !geno_svg.empty()) {
          const GenotypeStats g = profile_genotypes(cross, xo_lambda, groups);
          emit_to(geno_csv, [&](std::ostream& o) { write_genotype_profile_csv(g, o); });
          emit_to(geno_svg, [&](std::ostream& o) { write_genotype_profile_svg(g, o); });
        }
        if (!marker_csv.empty() || !interval_csv.empty() || !marker_svg.empty()) {
          const MarkerStats ms = profile_markers(cross, f, crit == "bonf", groups);
          emit_to(marker_csv, [&](std::ostream& o) { write_marker_profile_csv(ms, sel, o); });
          emit_to(interval_csv, [&](std::ostream& o) { write_interval_profile_csv(ms, sel, o); });
          emit_to(marker_svg, [&](std::ostream& o) { write_marker_profile_svg(ms, sel, o); });
        }
        if (!heat_csv.empty() || !heat_svg.empty()) {
          const HeatMap h = heatmap_matrices(cross, groups, lmax, rmin);
          emit_to(heat_csv, [&](std::ostream& o) { write_heatmap_csv(h, o); });
          emit_to(heat_svg, [&](std::ostream& o) { write_heatmap_svg(h, lmax, o); });
        }
      };
    });
  }

  // clones
  double tol = 0.9;
  std::string report_path, rows_path;
  bool fix = false, consensus = true;
  {
    auto* c = app.add_subcommand("clones", "Detect (and optionally merge) near-identical genotypes");
    add_pop(c, common);
    c->add_option("-i,--input", in_path, "Map TSV")->required();
    c->add_option("--tol", tol, "Minimum allele-sharing proportion")->capture_default_str();
    c->add_option("--report", report_path, "Clone report CSV ('-' for stdout)");
    c->add_flag("--fix", fix, "Collapse clone groups and write the result to --output");
    c->add_option("--rows", rows_path, "Use an edited clone report instead of the detected rows");
    c->add_flag("--consensus,!--no-consensus", consensus, "Consensus genotype or least-missing member")
        ->capture_default_str();
    c->add_option("-o,--output", out_path, "Output map TSV (with --fix)");
    c->callback([&] {
      action = [&] {
        const PopulationType pop = common.population();
        if (fix && out_path.empty()) throw ConfigError("--fix needs --output");
        const Cross cross = load_cross(in_path, pop);
        std::vector<CloneRow> rows = gen_clones(cross, tol);
        emit_to(report_path, [&](std::ostream& o) { write_clone_report_csv(rows, o); });
        if (!rows_path.empty()) {
          std::ifstream in(rows_path);
          if (!in) throw ParseError("cannot open " + rows_path);
          rows = read_clone_report_csv(in);
        }
        if (fix) {
          const Cross fixed = fix_clones(cross, rows, consensus);
          write_cross(fixed, out_path);
          if (!quiet) std::cerr << cross.n_genotypes() << " -> " << fixed.n_genotypes() << " genotypes\n";
        } else if (!quiet) {
          std::cerr << rows.size() << " clone pairs\n";
        }
      };
    });
  }

  // pull / push
  std::string type;
  PushParams pp;
  std::string seg_thresh = "0.05", seg_ratio, unlinked_group;
  bool seg_thresh_set = false;
  auto add_push_params = [&](CLI::App* c) {
    c->add_option("--seg-thresh", seg_thresh, "p-value threshold or 'bonf'")
        ->capture_default_str()
        ->each([&](const std::string&) { seg_thresh_set = true; });
    c->add_option("--seg-ratio", seg_ratio, "Distortion ratio such as 70:30 (overrides --seg-thresh)");
    c->add_option("--miss-thresh", pp.miss_thresh, "Missing proportion threshold")->capture_default_str();
  };
  auto finish_push_params = [&] {
    pp.seg_thresh = parse_seg_thresh(seg_thresh);
    if (!seg_ratio.empty()) {
      parse_seg_ratio(seg_ratio);
      pp.seg_ratio = seg_ratio;
    }
  };
  {
    auto* c = app.add_subcommand("pull", "Move markers into a ledger");
    add_pop(c, common);
    c->add_option("-i,--input", in_path, "Map TSV")->required();
    c->add_option("-o,--output", out_path, "Output map TSV")->required();
    c->add_option("--type", type, "co.located, seg.distortion or missing")->required();
    add_push_params(c);
    c->add_option("--chr", chr, "Groups to scan, comma separated");
    c->callback([&] {
      action = [&] {
        const PopulationType pop = common.population();
        finish_push_params();
        const LedgerKind kind = parse_ledger_key(type);
        const Cross cross = load_cross(in_path, pop);
        const Cross pulled = pull_markers(cross, kind, pp, flatten(chr));
        write_cross(pulled, out_path);
        if (!quiet)
          std::cerr << cross.n_mapped_markers() - pulled.n_mapped_markers() << " markers pulled as " << type << '\n';
      };
    });
  }
  {
    auto* c = app.add_subcommand("push", "Return ledger or unlinked markers to linkage groups");
    add_pop(c, common);
    c->add_option("-i,--input", in_path, "Map TSV")->required();
    c->add_option("-o,--output", out_path, "Output map TSV")->required();
    c->add_option("--type", type, "co.located, seg.distortion, missing or unlinked")->required();
    add_push_params(c);
    c->add_option("--max-rf", pp.max_rf, "Largest recombination fraction to a mapped marker")->capture_default_str();
    c->add_option("--min-lod", pp.min_lod, "Smallest LOD to a mapped marker")->capture_default_str();
    c->add_option("--unlinked-group", unlinked_group, "Group holding unlinked markers (type unlinked)");
    c->callback([&] {
      action = [&] {
        const PopulationType pop = common.population();
        finish_push_params();
        const PushType t = parse_push_type(type);
        std::optional<std::string> ug;
        if (!unlinked_group.empty()) ug = unlinked_group;
        if (t == PushType::Unlinked && !ug) throw ConfigError("--type unlinked needs --unlinked-group");
        const Cross cross = load_cross(in_path, pop);
        PushReport rep;
        const Cross pushed = push_markers(cross, t, pp, ug, &rep);
        write_cross(pushed, out_path);
        if (!quiet)
          std::cerr << rep.pushed << " pushed, " << rep.residual << " unassigned, " << rep.retained
                    << " kept in ledger\n";
      };
    });
  }

  // break / merge / combine / subset
  std::vector<std::string> specs;
  std::string sep = ".";
  double gap = 5.0;
  {
    auto* c = app.add_subcommand("break", "Split groups after given markers");
    add_pop(c, common);
    c->add_option("-i,--input", in_path, "Map TSV")->required();
    c->add_option("-o,--output", out_path, "Output map TSV")->required();
    c->add_option("--split", specs, "GROUP:marker[,marker...] (repeatable)")->required();
    c->add_option("--suffix", suffix, "numeric or alpha")->capture_default_str();
    c->add_option("--sep", sep, "Separator between group name and suffix")->capture_default_str();
    c->callback([&] {
      action = [&] {
        const PopulationType pop = common.population();
        std::vector<std::pair<std::string, std::vector<std::string>>> split_spec;
        for (const auto& s : specs) {
          const auto colon = s.rfind(':');
          if (colon == std::string::npos) throw ConfigError("--split expects GROUP:marker[,marker...]");
          split_spec.emplace_back(s.substr(0, colon), split(s.substr(colon + 1), ','));
        }
        const Cross cross = load_cross(in_path, pop);
        const Cross out = break_groups(cross, split_spec, suffix == "alpha" ? SuffixRule::Alpha : SuffixRule::Numeric, sep);
        write_cross(out, out_path);
        if (!quiet) print_summary(out, std::cerr);
      };
    });
  }
  {
    auto* c = app.add_subcommand("merge", "Concatenate groups");
    add_pop(c, common);
    c->add_option("-i,--input", in_path, "Map TSV")->required();
    c->add_option("-o,--output", out_path, "Output map TSV")->required();
    c->add_option("--merge", specs, "NEW=GROUP,GROUP[,...] (repeatable)")->required();
    c->add_option("--gap", gap, "cM placed between merged groups")->capture_default_str();
    c->callback([&] {
      action = [&] {
        const PopulationType pop = common.population();
        std::vector<std::pair<std::string, std::vector<std::string>>> merge_spec;
        for (const auto& s : specs) {
          const auto eq = s.find('=');
          if (eq == std::string::npos) throw ConfigError("--merge expects NEW=GROUP,GROUP");
          merge_spec.emplace_back(s.substr(0, eq), split(s.substr(eq + 1), ','));
        }
        const Cross cross = load_cross(in_path, pop);
        const Cross out = merge_groups(cross, merge_spec, gap);
        write_cross(out, out_path);
        if (!quiet) print_summary(out, std::cerr);
      };
    });
  }
  std::vector<std::string> inputs;
  bool keep_all = true;
  {
    auto* c = app.add_subcommand("combine", "Combine maps over the union or intersection of genotypes");
    add_pop(c, common);
    c->add_option("-i,--input", inputs, "Map TSVs (repeatable)")->required();
    c->add_option("-o,--output", out_path, "Output map TSV")->required();
    c->add_flag("--keep-all,!--intersect", keep_all, "Union of genotypes (default) or intersection")
        ->capture_default_str();
    c->callback([&] {
      action = [&] {
        const PopulationType pop = common.population();
        std::vector<Cross> maps;
        for (const auto& p : inputs) maps.push_back(load_cross(p, pop));
        const Cross out = combine_maps(maps, keep_all);
        write_cross(out, out_path);
        if (!quiet) print_summary(out, std::cerr);
      };
    });
  }
  std::vector<std::string> keep_ids, drop_ids, keep_groups;
  std::string ids_file;
  {
    auto* c = app.add_subcommand("subset", "Restrict genotypes and/or groups");
    add_pop(c, common);
    c->add_option("-i,--input", in_path, "Map TSV")->required();
    c->add_option("-o,--output", out_path, "Output map TSV")->required();
    c->add_option("--keep", keep_ids, "Genotypes to keep, comma separated");
    c->add_option("--drop", drop_ids, "Genotypes to drop, comma separated");
    c->add_option("--drop-file", ids_file, "File of genotypes to drop, one per line");
    c->add_option("--groups", keep_groups, "Groups to keep, comma separated");
    c->callback([&] {
      action = [&] {
        const PopulationType pop = common.population();
        Cross cross = load_cross(in_path, pop);
        auto keep = flatten(keep_ids);
        auto drop = flatten(drop_ids);
        if (!ids_file.empty()) {
          std::ifstream in(ids_file);
          if (!in) throw ParseError("cannot open " + ids_file);
          std::string line;
          while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) drop.push_back(line);
          }
        }
        if (!keep.empty() && !drop.empty()) throw ConfigError("use either --keep or --drop, not both");
        if (!drop.empty()) {
          for (const auto& d : drop)
            if (!cross.matrix().find_genotype(d)) throw DataError("unknown genotype '" + d + "'");
          for (const auto& g : cross.matrix().genotype_names())
            if (std::find(drop.begin(), drop.end(), g) == drop.end()) keep.push_back(g);
        }
        if (!keep.empty()) cross = subset_cross(cross, keep);
        const auto groups = flatten(keep_groups);
        if (!groups.empty()) cross = subset_groups(cross, groups);
        write_cross(cross, out_path);
        if (!quiet) print_summary(cross, std::cerr);
      };
    });
  }

  // quickest
  double error_prob = 1e-4;
  {
    auto* c = app.add_subcommand("quickest", "Re-estimate distances with fixed marker order");
    add_pop(c, common);
    c->add_option("-i,--input", in_path, "Map TSV")->required();
    c->add_option("-o,--output", out_path, "Output map TSV")->required();
    c->add_option("--error-prob", error_prob, "Genotyping error probability")->capture_default_str();
    c->add_option("--dist-fun", dist_fun, "kosambi or haldane")->capture_default_str();
    c->add_option("--chr", chr, "Groups to re-estimate, comma separated");
    c->callback([&] {
      action = [&] {
        const PopulationType pop = common.population();
        const MapFunction f = parse_map_function(dist_fun);
        const Cross cross = load_cross(in_path, pop);
        const Cross out = quick_est(cross, error_prob, f, flatten(chr));
        write_cross(out, out_path);
        if (!quiet) print_summary(out, std::cerr);
      };
    });
  }

  // threshold
  std::vector<double> cms{25, 30, 35, 40};
  std::string n_range = "50:400";
  {
    auto* c = app.add_subcommand("threshold", "Tabulate -log10 p-value against population size per cM target");
    c->add_option("--cm", cms, "Target distances")->delimiter(',')->capture_default_str();
    c->add_option("--n", n_range, "lo:hi[:step] or comma list")->capture_default_str();
    c->add_option("--dist-fun", dist_fun, "kosambi or haldane")->capture_default_str();
    c->add_option("-o,--output", out_path, "Output CSV (default stdout)");
    c->callback([&] {
      action = [&] {
        const MapFunction f = parse_map_function(dist_fun);
        const auto ns = parse_counts(n_range);
        const auto rows = threshold_profile(ns, cms, f);
        emit_to(out_path.empty() ? "-" : out_path, [&](std::ostream& o) {
          o << "n,cm_target,neg_log10_epsilon\n";
          char buf[96];
          for (const auto& r : rows) {
            std::snprintf(buf, sizeof buf, "%zu,%g,%.6f\n", r.n, r.cm_target, r.neg_log10_epsilon);
            o << buf;
          }
        });
      };
    });
  }

  // simulate
  SimSpec sim;
  std::size_t sim_chromosomes = 5, sim_markers = 200;
  double sim_length = 150.0;
  std::string spacing = "haldane", truth_path, mask_path;
  {
    auto* c = app.add_subcommand("simulate", "Simulate a population with known map");
    add_pop(c, common);
    c->add_option("-n,--genotypes", sim.n, "Population size")->capture_default_str();
    c->add_option("--chromosomes", sim_chromosomes, "Chromosome count")->capture_default_str();
    c->add_option("--markers", sim_markers, "Markers per chromosome")->capture_default_str();
    c->add_option("--length", sim_length, "Chromosome length, cM")->capture_default_str();
    c->add_option("--spacing", spacing, "Map function converting spacing to rf")->capture_default_str();
    c->add_option("--missing", sim.missing_rate, "Missing-call rate")->capture_default_str();
    c->add_option("--error", sim.error_rate, "Genotyping error rate")->capture_default_str();
    c->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
    c->add_flag("--grouped", sim.group_by_chromosome, "Write one group per chromosome");
    c->add_flag("--shuffle", sim.shuffle, "Shuffle marker rows");
    c->add_option("-o,--output", out_path, "Marker TSV")->required();
    c->add_option("--truth", truth_path, "Truth TSV: marker, chromosome, position");
    c->add_option("--masks", mask_path, "Injected errors and missing cells TSV");
    c->callback([&] {
      action = [&] {
        sim.pop = common.population();
        sim.spacing = parse_map_function(spacing);
        sim.chromosomes = SimSpec::even(sim_chromosomes, sim_markers, sim_length);
        const Simulation s = simulate_population(sim);
        auto out = open_out(out_path);
        if (sim.group_by_chromosome) {
          write_map(s.cross, out);
        } else {
          const auto& m = s.cross.matrix();
          out << "marker";
          for (const auto& g : m.genotype_names()) out << '\t' << g;
          out << '\n';
          for (std::size_t k = 0; k < m.n_markers(); ++k) {
            out << m.marker_name(k);
            for (auto a : m.column(k)) out << '\t' << allele_symbol(a);
            out << '\n';
          }
        }
        emit_to(truth_path, [&](std::ostream& o) { write_truth_tsv(s, o); });
        emit_to(mask_path, [&](std::ostream& o) { write_mask_tsv(s, o); });
      };
    });
  }

  // benchmark
  BenchmarkSpec bs;
  std::string bench_n = "100,200,300", bench_markers = "1000,2000,5000";
  std::vector<std::string> modes{"full", "order_only"};
  {
    auto* c = app.add_subcommand("benchmark", "Time full construction against ordering only");
    add_pop(c, common);
    c->add_option("--n", bench_n, "Population sizes")->capture_default_str();
    c->add_option("--markers", bench_markers, "Total marker counts")->capture_default_str();
    c->add_option("--chromosomes", bs.chromosomes, "Chromosomes")->capture_default_str();
    c->add_option("--length", bs.chromosome_cm, "Chromosome length, cM")->capture_default_str();
    c->add_option("--error", bs.error_rate, "Genotyping error rate")->capture_default_str();
    c->add_option("--p-value", bs.p_value, "Clustering p-value")->capture_default_str();
    c->add_option("--seed", bs.seed, "Random seed")->capture_default_str();
    c->add_option("--threads", bs.threads, "Worker threads")->capture_default_str();
    c->add_option("--repeats", bs.repeats, "Runs per timing; the fastest is reported")->capture_default_str();
    c->add_option("--mode", modes, "full, order_only")->delimiter(',')->capture_default_str();
    c->add_option("-o,--output", out_path, "Output CSV (default stdout)");
    c->callback([&] {
      action = [&] {
        bs.pop = common.population();
        bs.n_values = parse_counts(bench_n);
        bs.marker_totals = parse_counts(bench_markers);
        bs.modes.clear();
        for (const auto& m : modes) {
          if (m == "full")
            bs.modes.push_back(BenchmarkMode::Full);
          else if (m == "order_only")
            bs.modes.push_back(BenchmarkMode::OrderOnly);
          else
            throw ConfigError("unknown benchmark mode '" + m + "'");
        }
        const auto cells = benchmark(bs);
        emit_to(out_path.empty() ? "-" : out_path, [&](std::ostream& o) { write_benchmark_csv(cells, o); });
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  try {
    if (action) action();
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "linkmap: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "linkmap: parse error: " << e.what() << '\n';
    return kData;
  } catch (const DataError& e) {
    std::cerr << "linkmap: data error: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "linkmap: bad number: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "linkmap: internal error: " << e.what() << '\n';
    return kInternal;
  }
}
