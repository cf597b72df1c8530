#include "support.hpp"

#include "linkmap/diagnostics.hpp"
#include "linkmap/ordering.hpp"

#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

using namespace linkmap;
using doctest::Approx;

namespace {

Cross one_group(const std::vector<std::string>& markers) {
  const MarkerMatrix m = oracle::matrix_of(markers);
  LinkageGroup g{"L1", {}, {}};
  for (std::size_t k = 0; k < m.n_markers(); ++k) {
    g.markers.push_back(k);
    g.positions.push_back(static_cast<double>(k));
  }
  return Cross(m, PopulationType::dh(), {g});
}

/// Marker column with `a` AA calls followed by `b` BB calls.
std::vector<Allele> split(std::size_t a, std::size_t b) {
  std::vector<Allele> col(a, Allele::AA);
  col.insert(col.end(), b, Allele::BB);
  return col;
}

Cross grouped(std::size_t n, std::size_t groups, std::size_t markers, double length, std::uint64_t seed,
              double missing = 0.0, double error = 0.0) {
  SimSpec spec;
  spec.n = n;
  spec.chromosomes = SimSpec::even(groups, markers, length);
  spec.seed = seed;
  spec.missing_rate = missing;
  spec.error_rate = error;
  spec.group_by_chromosome = true;
  return simulate_population(spec).cross;
}

}  // namespace

TEST_CASE("crossover and double crossover counts") {
  // genotype columns of the matrix are the rows of the marker strings
  const Cross c = one_group({"AA", "AB", "BA", "BU", "BB"});
  const GenotypeStats s = profile_genotypes(c);
  CHECK(s.xo[0] == 1);
  CHECK(s.dxo[0] == 0);
  CHECK(s.xo[1] == 3);  // A B A (U) B skipping the missing call
  CHECK(s.dxo[1] == 2);
  CHECK(s.miss[1] == 1);
  const Cross aba = one_group({"A", "B", "A"});
  CHECK(profile_genotypes(aba).xo[0] == 2);
  CHECK(profile_genotypes(aba).dxo[0] == 1);
}

TEST_CASE("crossover counts match simulated truth on clean ordered data") {
  SimSpec spec;
  spec.n = 300;
  spec.chromosomes = SimSpec::even(7, 300, 150.0);
  spec.seed = 31;
  spec.group_by_chromosome = true;
  const Simulation s = simulate_population(spec);
  const GenotypeStats g = profile_genotypes(s.cross);
  CHECK(g.xo == s.truth.crossovers);
  double mean = 0;
  for (auto x : g.xo) mean += static_cast<double>(x);
  mean /= 300.0;
  CHECK(mean == Approx(10.5).epsilon(0.05));
}

TEST_CASE("high crossover genotypes are flagged") {
  Cross c = grouped(100, 2, 60, 100.0, 32);
  std::vector<Allele> calls = c.matrix().calls();
  // genotype 0 alternates along every group
  for (std::size_t k = 0; k < c.matrix().n_markers(); ++k)
    calls[k * 100] = (k % 2) ? Allele::AA : Allele::BB;
  const Cross noisy(MarkerMatrix(c.matrix().genotype_names(), c.matrix().marker_names(), calls), c.pop(), c.groups());
  const GenotypeStats s = profile_genotypes(noisy, 2.0);
  REQUIRE(s.flagged.size() == 100);
  CHECK(s.flagged[0]);
  CHECK(std::count(s.flagged.begin(), s.flagged.end(), true) <= 3);
  CHECK(profile_genotypes(noisy).flagged.empty());
}

TEST_CASE("segregation distortion") {
  CHECK(seg_distortion_test(split(50, 50), PopulationType::dh()).neg_log10_p == Approx(0.0));
  const SegregationTest t = seg_distortion_test(split(70, 30), PopulationType::dh());
  CHECK(t.chi_square == Approx(16.0));
  CHECK(t.p_value == Approx(6.334e-5).epsilon(1e-3));
  CHECK(t.neg_log10_p == Approx(4.198).epsilon(1e-3));
  CHECK(t.df == 1);
  // RIL2 three classes 1:1:2
  std::vector<Allele> f2(25, Allele::AA);
  f2.insert(f2.end(), 25, Allele::BB);
  f2.insert(f2.end(), 50, Allele::AB);
  const SegregationTest r = seg_distortion_test(f2, PopulationType::riln(2));
  CHECK(r.df == 2);
  CHECK(r.chi_square == Approx(0.0));
  // tail is usable far past double underflow
  CHECK(chi_square_neg_log10_tail(2000.0, 1) == Approx(436.0).epsilon(0.01));
  CHECK(chi_square_upper_tail(3.841459, 1) == Approx(0.05).epsilon(1e-5));
}

TEST_CASE("two point LOD") {
  CHECK(two_point_lod(50, 100) == Approx(0.0));
  CHECK(two_point_lod(20, 100) == Approx(20 * std::log10(0.4) + 80 * std::log10(1.6)));
  CHECK(two_point_lod(20, 100) == Approx(8.37).epsilon(1e-3));
  CHECK(two_point_lod(0, 100) == Approx(30.10).epsilon(1e-3));
  CHECK(two_point_lod(70, 100) == Approx(0.0));
  for (int d = 0; d <= 100; ++d) {
    CHECK(two_point_lod(d, 100) >= 0.0);
    if (d < 50) CHECK(two_point_lod(d, 100) > 0.0);
  }
}

TEST_CASE("heat map") {
  const Cross single = one_group({"AABB"});
  const HeatMap h1 = heatmap_matrices(single);
  CHECK(h1.size() == 1);
  CHECK(h1.rf_values.size() == 1);

  // marker 3 is out of phase with its neighbours
  std::vector<std::string> cols = {"AABBAABBAB", "AABBAABBAA", "BBAABBAABB", "AABBAABBBB"};
  const HeatMap h = heatmap_matrices(one_group(cols));
  CHECK(h.at_rf(2, 1) > 0.5);
  CHECK(h.at_rf(2, 3) > 0.5);
  CHECK(h.at_rf(0, 1) < 0.5);
  CHECK(h.at_lod(2, 1) >= 0.0);
  CHECK(h.at_lod(0, 1) <= 12.0);
  CHECK_THROWS(heatmap_matrices(one_group(cols), std::vector<std::string>{"nope"}));

  // adjacent within-group rf is below the median between groups
  const Cross c = grouped(150, 3, 20, 100.0, 33);
  const HeatMap big = heatmap_matrices(c);
  std::vector<double> between;
  double worst_adjacent = 0.0;
  for (std::size_t i = 0; i < big.size(); ++i)
    for (std::size_t j = i + 1; j < big.size(); ++j) {
      if (big.groups[i] != big.groups[j]) between.push_back(big.at_rf(i, j));
      else if (j == i + 1) worst_adjacent = std::max(worst_adjacent, big.at_rf(i, j));
    }
  std::nth_element(between.begin(), between.begin() + static_cast<std::ptrdiff_t>(between.size() / 2), between.end());
  CHECK(worst_adjacent <= between[between.size() / 2]);
  std::ostringstream csv, svg;
  write_heatmap_csv(big, csv);
  write_heatmap_svg(big, 12.0, svg);
  CHECK(svg.str().find("<svg") != std::string::npos);
}

TEST_CASE("clone coefficients") {
  // build two genotypes with match = 1466, diff = 12, and an identical pair
  const std::size_t m = 1466 + 12 + 40;
  std::vector<std::string> cols(m, "AAAA");
  for (std::size_t k = 1466; k < 1466 + 12; ++k) cols[k][1] = 'B';
  for (std::size_t k = 1466 + 12; k < m; ++k) cols[k][0] = 'U';
  for (std::size_t k = 0; k < m; k += 2) cols[k][2] = cols[k][3] = 'B';
  for (std::size_t k = 1; k < m; k += 2) cols[k][3] = 'B';
  const Cross c = one_group(cols);
  const auto rows = gen_clones(c, 0.9);
  const auto find = [&](const std::string& a, const std::string& b) -> const CloneRow* {
    for (const auto& r : rows)
      if ((r.g1 == a && r.g2 == b) || (r.g1 == b && r.g2 == a)) return &r;
    return nullptr;
  };
  const CloneRow* r12 = find("g1", "g2");
  REQUIRE(r12 != nullptr);
  CHECK(r12->match == 1466);
  CHECK(r12->diff == 12);
  CHECK(r12->na_one == 40);
  CHECK(r12->coef == Approx(0.9919).epsilon(1e-4));
  CHECK(find("g3", "g4") == nullptr);

  // no differing calls gives coef 1 however many cells are missing
  std::vector<std::string> same(2423 + 98 + 502, "AA");
  for (std::size_t k = 2423; k < 2423 + 98; ++k) same[k] = "UU";
  for (std::size_t k = 2423 + 98; k < same.size(); ++k) same[k] = "AU";
  const auto exact = gen_clones(one_group(same), 0.9);
  REQUIRE(exact.size() == 1);
  CHECK(exact[0].coef == 1.0);
  CHECK(exact[0].match == 2423);
  CHECK(exact[0].na_both == 98);
  CHECK(exact[0].na_one == 502);

  // symmetry and equivalence closure
  const Cross d = one_group({"AAAB", "AAAB", "AABB", "BBBA", "ABBB"});
  for (const auto& r : gen_clones(d, 0.5)) {
    CHECK(r.coef >= 0.5);
    CHECK(r.group >= 1);
  }
  std::ostringstream out;
  write_clone_report_csv(rows, out);
  std::istringstream in(out.str());
  const auto back = read_clone_report_csv(in);
  REQUIRE(back.size() == rows.size());
  CHECK(back[0].match == rows[0].match);
  CHECK(back[0].g1 == rows[0].g1);
}

TEST_CASE("fixing clones") {
  const Cross c = one_group({"AUAB", "ABAA", "BBBA", "UBUB"});
  const std::vector<CloneRow> rows = {CloneRow{"g1", "g3", 1.0, 3, 0, 0, 1, 1}};
  const Cross fixed = fix_clones(c, rows);
  CHECK(fixed.n_genotypes() == 3);
  const auto g = fixed.matrix().find_genotype("g1_g3");
  REQUIRE(g.has_value());
  CHECK(fixed.matrix().at(0, *g) == Allele::AA);       // A and A
  CHECK(fixed.matrix().at(1, *g) == Allele::AA);       // A and A
  CHECK(fixed.matrix().at(2, *g) == Allele::BB);       // B and B
  CHECK(fixed.matrix().at(3, *g) == Allele::Missing);  // U and U
  const Cross conflict = fix_clones(one_group({"AB", "AU"}), std::vector<CloneRow>{{"g1", "g2", 1.0, 0, 0, 0, 0, 1}});
  CHECK(conflict.matrix().at(0, 0) == Allele::Missing);
  CHECK(conflict.matrix().at(1, 0) == Allele::AA);

  const Cross keep = fix_clones(c, rows, false);
  CHECK(keep.n_genotypes() == 3);
  CHECK(keep.matrix().find_genotype("g1").has_value());  // tie on missing calls, first member kept
  CHECK_FALSE(keep.matrix().find_genotype("g3").has_value());

  // a 3-member group drops two genotypes
  const std::vector<CloneRow> chain = {CloneRow{"g1", "g2", 1, 0, 0, 0, 0, 1}, CloneRow{"g2", "g4", 1, 0, 0, 0, 0, 1}};
  CHECK(fix_clones(c, chain).n_genotypes() == 2);
}

TEST_CASE("pull and push") {
  const Cross c = grouped(100, 3, 30, 90.0, 34, 0.05);
  SUBCASE("nothing to pull is identity") {
    PushParams p;
    p.miss_thresh = 1.0;
    CHECK(equivalent(pull_markers(c, LedgerKind::Missing, p), c));
    CHECK(equivalent(push_markers(c, PushType::Missing), c));
  }
  SUBCASE("missing and distortion ledgers are disjoint") {
    PushParams p;
    p.miss_thresh = 0.08;
    p.seg_thresh = std::string("bonf");
    const Cross miss = pull_markers(c, LedgerKind::Missing, p);
    const Cross both = pull_markers(miss, LedgerKind::SegDistortion, p);
    std::set<std::size_t> a, b;
    if (const auto* l = both.ledger(LedgerKind::Missing))
      for (const auto& e : l->entries) a.insert(e.marker);
    if (const auto* l = both.ledger(LedgerKind::SegDistortion))
      for (const auto& e : l->entries) b.insert(e.marker);
    std::size_t expected = 0;
    for (std::size_t k = 0; k < c.matrix().n_markers(); ++k) {
      std::size_t missing = 0;
      for (auto x : c.matrix().column(k)) missing += x == Allele::Missing;
      expected += static_cast<double>(missing) / 100.0 > 0.08;
    }
    CHECK(a.size() == expected);
    for (auto k : b) CHECK(a.count(k) == 0);
  }
  SUBCASE("push restores the census") {
    for (auto [kind, type] : {std::pair{LedgerKind::CoLocated, PushType::CoLocated},
                              std::pair{LedgerKind::Missing, PushType::Missing}}) {
      PushParams p;
      p.miss_thresh = 0.07;
      const Cross pulled = pull_markers(c, kind, p);
      PushReport report;
      const Cross pushed = push_markers(pulled, type, p, std::nullopt, &report);
      std::size_t mapped = 0;
      for (const auto& g : pushed.groups()) mapped += g.size();
      CHECK(mapped + (pushed.ledger(kind) ? pushed.ledger(kind)->size() : 0) == c.matrix().n_markers());
      CHECK_NOTHROW(check_partition(pushed));
    }
  }
  SUBCASE("unknown names") {
    CHECK_THROWS_AS(parse_push_type("sideways"), ConfigError);
    CHECK_THROWS_AS(push_markers(c, PushType::Unlinked), ConfigError);
  }
}

TEST_CASE("segregation ratio threshold") {
  PushParams p;
  p.seg_ratio = "70:30";
  CHECK_FALSE(is_distorted(split(69, 31), PopulationType::dh(), p, 1));
  CHECK_FALSE(is_distorted(split(70, 30), PopulationType::dh(), p, 1));
  CHECK(is_distorted(split(75, 25), PopulationType::dh(), p, 1));
  CHECK(is_distorted(split(25, 75), PopulationType::dh(), p, 1));
  CHECK(parse_seg_ratio("70:30") == Approx(0.7));
  CHECK_THROWS_AS(parse_seg_ratio("70-30"), ConfigError);
  CHECK(std::get<std::string>(parse_seg_thresh("bonf")) == "bonf");
  CHECK(std::get<double>(parse_seg_thresh("0.01")) == 0.01);
}

TEST_CASE("held-out markers are pushed to their true group") {
  SimSpec spec;
  spec.n = 300;
  spec.chromosomes = SimSpec::even(7, 120, 150.0);
  spec.seed = 35;
  spec.group_by_chromosome = true;
  const Simulation s = simulate_population(spec);
  // hold out 319 markers spread over the genome as one unlinked group
  std::vector<LinkageGroup> groups = s.cross.groups();
  LinkageGroup extra{"extra", {}, {}};
  std::mt19937_64 rng(3);
  std::vector<std::size_t> all(s.cross.matrix().n_markers());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::shuffle(all.begin(), all.end(), rng);
  std::set<std::size_t> held(all.begin(), all.begin() + 319);
  for (auto& g : groups) {
    LinkageGroup kept{g.name, {}, {}};
    for (std::size_t k = 0; k < g.size(); ++k)
      if (!held.count(g.markers[k])) {
        kept.markers.push_back(g.markers[k]);
        kept.positions.push_back(g.positions[k]);
      }
    g = kept;
  }
  for (auto k : held) {
    extra.markers.push_back(k);
    extra.positions.push_back(0.0);
  }
  groups.push_back(extra);
  const Cross c(s.cross.matrix(), s.cross.pop(), groups);
  PushReport report;
  const Cross pushed = push_markers(c, PushType::Unlinked, {}, std::string("extra"), &report);
  std::size_t right = 0;
  for (const auto& g : pushed.groups()) {
    if (g.name == "extra" || g.name == "unlinked") continue;
    const std::size_t chrom = static_cast<std::size_t>(std::stoul(g.name.substr(1))) - 1;
    for (auto k : g.markers)
      if (held.count(k) && s.truth.chromosome[k] == chrom) ++right;
  }
  CHECK(static_cast<double>(right) / 319.0 >= 0.99);
  CHECK(report.pushed + report.residual + report.retained == 319);
}

TEST_CASE("quick re-estimation") {
  SUBCASE("complete clean data keeps two-point positions") {
    const Simulation s = oracle::chromosome(200, 60, 100.0, 36);
    const Cross q = quick_est(s.cross, 1e-4, MapFunction::Kosambi);
    const auto& g = s.cross.groups()[0];
    const auto two = two_point_positions(s.cross.matrix(), g.markers, s.cross.pop(), MapFunction::Kosambi);
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(q.groups()[0].positions[k] == Approx(two[k]).epsilon(1e-9));
  }
  SUBCASE("missing data") {
    for (std::uint64_t seed : {37, 38, 39}) {
      const Simulation s = oracle::chromosome(300, 150, 150.0, seed, 0.05);
      const Cross q = quick_est(s.cross, 1e-4, MapFunction::Haldane);
      CHECK(std::abs(q.groups()[0].length() / 150.0 - 1.0) <= 0.10);
    }
  }
  SUBCASE("isolated errors") {
    for (std::uint64_t seed : {40, 41}) {
      const Simulation s = oracle::chromosome(300, 150, 150.0, seed, 0.0, 0.0042);
      const auto& g = s.cross.groups()[0];
      const auto two = two_point_positions(s.cross.matrix(), g.markers, s.cross.pop(), MapFunction::Haldane);
      const Cross q = quick_est(s.cross, 0.01, MapFunction::Haldane);
      CHECK(two.back() > 150.0 * 1.15);
      CHECK(std::abs(q.groups()[0].length() / 150.0 - 1.0) <= 0.15);
    }
  }
  SUBCASE("single marker group is unchanged") {
    const Cross one = one_group({"AABB"});
    CHECK(equivalent(quick_est(one), one));
  }
}

TEST_CASE("marker and interval profiles") {
  SUBCASE("balanced data has no distortion") {
    const MarkerStats s = profile_markers(one_group({"AABB", "ABAB", "BBAA"}));
    for (const auto& r : s.markers) CHECK(r.neg_log10_p == Approx(0.0));
  }
  SUBCASE("interval identities") {
    const Simulation sim = oracle::chromosome(100, 40, 80.0, 42, 0.05);
    const auto& g = sim.cross.groups()[0];
    const auto pos = two_point_positions(sim.cross.matrix(), g.markers, sim.cross.pop(), MapFunction::Kosambi);
    const Cross c(sim.cross.matrix(), sim.cross.pop(), {LinkageGroup{g.name, g.markers, pos}});
    const MarkerStats s = profile_markers(c, MapFunction::Kosambi);
    REQUIRE(s.intervals.size() == 39);
    for (const auto& r : s.intervals) {
      CHECK(r.recomb / r.n_obs == Approx(r.erf));
      if (r.erf < 0.49) CHECK(r.dist == Approx(map_forward(r.erf, MapFunction::Kosambi)).epsilon(1e-6));
      CHECK(map_forward(r.mrf, MapFunction::Kosambi) == Approx(r.dist).epsilon(1e-6));
    }
  }
  SUBCASE("bonferroni flags shrink as more markers are tested") {
    std::vector<std::string> cols;
    for (std::size_t k = 0; k < 40; ++k) {
      const std::size_t a = 50 + (k % 20);
      cols.push_back(std::string(a, 'A') + std::string(100 - a, 'B'));
    }
    const MarkerMatrix m = oracle::matrix_of(cols);
    std::vector<LinkageGroup> gs(2);
    for (std::size_t k = 0; k < 40; ++k) {
      auto& g = gs[k < 20 ? 0 : 1];
      g.markers.push_back(k);
      g.positions.push_back(0.0);
    }
    gs[0].name = "L1";
    gs[1].name = "L2";
    const Cross c(m, PopulationType::dh(), gs);
    const std::string only[] = {"L1"};
    const MarkerStats small = profile_markers(c, MapFunction::Kosambi, true, only);
    const MarkerStats all = profile_markers(c, MapFunction::Kosambi, true);
    const auto count = [](const MarkerStats& s) {
      return std::count_if(s.markers.begin(), s.markers.end(), [](const MarkerRow& r) { return r.bonferroni; });
    };
    CHECK(small.bonferroni_alpha == Approx(0.05 / 20));
    CHECK(all.bonferroni_alpha == Approx(0.05 / 40));
    CHECK(count(all) <= 2 * count(small));
    std::size_t flagged_small_in_all = 0;
    for (const auto& r : all.markers)
      if (r.group == "L1" && r.bonferroni) ++flagged_small_in_all;
    CHECK(flagged_small_in_all <= static_cast<std::size_t>(count(small)));
  }
  SUBCASE("stat names") {
    CHECK(parse_marker_stat("seg.dist") == MarkerStat::SegDist);
    CHECK_THROWS_AS(parse_marker_stat("nonsense"), ConfigError);
  }
  SUBCASE("csv emission") {
    const Cross c = one_group({"AABB", "ABAB", "BBAA"});
    const MarkerStats s = profile_markers(c);
    const MarkerStat sel[] = {MarkerStat::SegDist, MarkerStat::Miss};
    std::ostringstream out;
    write_marker_profile_csv(s, sel, out);
    CHECK(out.str().rfind("marker,group,pos", 0) == 0);
    std::ostringstream g;
    write_genotype_profile_csv(profile_genotypes(c), g);
    CHECK(g.str().rfind("genotype,xo,dxo,miss", 0) == 0);
  }
}

TEST_CASE("clone coefficient is symmetric") {
  const Cross c = grouped(40, 2, 50, 100.0, 43, 0.1);
  // copy genotype 0 into genotype 1 with a few changes so they form a clone pair
  std::vector<Allele> calls = c.matrix().calls();
  for (std::size_t k = 0; k < c.matrix().n_markers(); ++k) calls[k * 40 + 1] = calls[k * 40];
  calls[40 + 1] = calls[40] == Allele::AA ? Allele::BB : Allele::AA;
  const MarkerMatrix m(c.matrix().genotype_names(), c.matrix().marker_names(), calls);
  std::vector<std::size_t> rows(40);
  std::iota(rows.rbegin(), rows.rend(), std::size_t{0});
  const Cross forward(m, c.pop(), c.groups());
  const Cross backward(m.select_genotypes(rows), c.pop(), c.groups());
  const auto a = gen_clones(forward, 0.9), b = gen_clones(backward, 0.9);
  REQUIRE(a.size() == b.size());
  REQUIRE_FALSE(a.empty());
  for (const auto& r : a) {
    const auto it = std::find_if(b.begin(), b.end(), [&](const CloneRow& s) {
      return (s.g1 == r.g1 && s.g2 == r.g2) || (s.g1 == r.g2 && s.g2 == r.g1);
    });
    REQUIRE(it != b.end());
    CHECK(it->coef == r.coef);
    CHECK(it->match == r.match);
  }
}
