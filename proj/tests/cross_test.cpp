#include "support.hpp"

#include "linkmap/diagnostics.hpp"
#include "linkmap/ordering.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace linkmap;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "linkmap_cross_test";
  fs::create_directories(dir);
  return dir / name;
}

Cross parse(const std::string& text, PopulationType pop = PopulationType::dh()) {
  std::istringstream in(text);
  return read_cross(in, pop);
}

std::size_t census(const Cross& c) {
  std::size_t n = c.n_mapped_markers();
  for (const auto& [kind, ledger] : c.ledgers()) n += ledger.size();
  return n;
}

/// Grouped simulated map: `groups` chromosomes, positions from the truth.
Cross simulated_map(std::size_t n, std::size_t groups, std::size_t markers, std::uint64_t seed) {
  SimSpec spec;
  spec.n = n;
  spec.chromosomes = SimSpec::even(groups, markers, 100.0);
  spec.seed = seed;
  spec.group_by_chromosome = true;
  spec.missing_rate = 0.05;
  const Simulation s = simulate_population(spec);
  std::vector<LinkageGroup> gs = s.cross.groups();
  for (auto& g : gs)
    for (std::size_t k = 0; k < g.size(); ++k) g.positions[k] = s.truth.position[g.markers[k]];
  return Cross(s.cross.matrix(), s.cross.pop(), gs);
}

}  // namespace

TEST_CASE("minimal unconstructed parse") {
  const Cross c = parse("marker\tg1\tg2\nm1\tA\tB\nm2\tB\tB\nm3\tU\tA\n");
  CHECK(c.n_genotypes() == 2);
  CHECK(c.matrix().n_markers() == 3);
  REQUIRE(c.groups().size() == 1);
  CHECK(c.groups()[0].name == "ALL");
  CHECK(c.matrix().at(2, 0) == Allele::Missing);
}

TEST_CASE("load errors") {
  CHECK_THROWS_AS(parse("marker\tg1\tg2\nm1\tA\tX\n"), DataError);
  CHECK_THROWS_WITH_AS(parse("marker\tg1\tg2\nm1\tA\tX\n"), doctest::Contains("heterozygote not allowed"), DataError);
  CHECK_NOTHROW(parse("marker\tg1\tg2\nm1\tA\tX\n", PopulationType::riln(2)));
  CHECK_THROWS_AS(parse("marker\tg1\tg2\nm1\tA\tZ\n"), ParseError);
  CHECK_THROWS_AS(parse("marker\tg1\tg2\nm1\tA\n"), ParseError);
  CHECK_THROWS_AS(parse("marker\tg1\tg2\nm1\tA\tB\nm1\tB\tB\n"), DataError);
  CHECK_THROWS_AS(parse("marker\tg1\tg1\nm1\tA\tB\n"), DataError);
  CHECK_THROWS_AS(parse(""), ParseError);
}

TEST_CASE("empty group map is header only") {
  const Cross c(MarkerMatrix({"g1", "g2"}, {}, {}), PopulationType::dh(), {});
  std::ostringstream out;
  write_map(c, out);
  CHECK(out.str() == "marker\tgroup\tposition_cM\tg1\tg2\n");
}

TEST_CASE("write then load round trips with ledgers") {
  for (std::uint64_t seed : {1, 2, 3}) {
    Cross c = simulated_map(40, 3, 30, seed);
    PushParams pp;
    pp.miss_thresh = 0.08;
    c = pull_markers(c, LedgerKind::Missing, pp);
    c = pull_markers(c, LedgerKind::CoLocated);
    const fs::path path = scratch("round" + std::to_string(seed) + ".tsv");
    write_cross(c, path);
    const Cross back = load_cross(path, c.pop());
    CHECK(equivalent(c, back));
    CHECK(census(back) == c.matrix().n_markers());
    const Cross again = load_cross(path, c.pop());
    write_cross(again, path);
    CHECK(equivalent(load_cross(path, c.pop()), back));
  }
}

TEST_CASE("positions are written with three decimals") {
  Cross c = parse("marker\tgroup\tposition_cM\tg1\tg2\nm1\tL1\t0\tA\tB\nm2\tL1\t1.23456\tA\tA\n");
  std::ostringstream out;
  write_map(c, out);
  CHECK(out.str().find("1.235") != std::string::npos);
  const Cross back = parse(out.str());
  CHECK(back.groups()[0].positions[1] == Approx(1.23456).epsilon(1e-3));
}

TEST_CASE("large constructed map round trips") {
  SimSpec spec;
  spec.n = 50;
  spec.chromosomes = {{681, 225.9, {}}, {593, 224.4, {}}, {335, 157.6, {}}, {679, 205.5, {}},
                      {233, 195.1, {}}, {279, 145.5, {}}, {219, 142.9, {}}};
  spec.seed = 9;
  spec.group_by_chromosome = true;
  const Simulation s = simulate_population(spec);
  CHECK(s.cross.matrix().n_markers() == 3019);
  const fs::path path = scratch("big.tsv");
  write_cross(s.cross, path);
  CHECK(equivalent(load_cross(path, s.cross.pop()), s.cross));
}

TEST_CASE("subset genotypes") {
  const Cross c = simulated_map(30, 2, 20, 4);
  std::vector<std::string> all = c.matrix().genotype_names();
  CHECK(equivalent(subset_cross(c, all), c));
  CHECK_THROWS_AS(subset_cross(c, std::vector<std::string>{"nobody", "G01"}), DataError);
  CHECK_THROWS_AS(subset_cross(c, std::vector<std::string>{"G01"}), DataError);

  // subset twice equals subset on the intersection
  auto even = [](std::size_t i) { return i % 2 == 0; };
  const Cross once = subset_cross(c, [&](std::size_t i) { return even(i) && i % 3 != 0; });
  const Cross twice = subset_cross(subset_cross(c, even), [&](std::size_t i) {
    return (2 * i) % 3 != 0;  // row i of the even subset was row 2i
  });
  CHECK(equivalent(once, twice));
}

TEST_CASE("subset recomputes ledger statistics") {
  // marker m2 is missing for the last 10 of 30 genotypes
  std::string m1(30, 'A'), m2(20, 'B');
  m2 += std::string(10, 'U');
  for (std::size_t i = 0; i < 30; i += 2) m1[i] = 'B';
  const MarkerMatrix m = oracle::matrix_of({m1, m2});
  const Cross c = Cross::unconstructed(m, PopulationType::dh());
  PushParams pp;
  pp.miss_thresh = 0.1;
  const Cross pulled = pull_markers(c, LedgerKind::Missing, pp);
  REQUIRE(pulled.ledger(LedgerKind::Missing) != nullptr);
  CHECK(pulled.ledger(LedgerKind::Missing)->entries[0].stat == Approx(10.0 / 30.0));
  const Cross sub = subset_cross(pulled, [](std::size_t i) { return i < 20; });
  REQUIRE(sub.ledger(LedgerKind::Missing)->size() == 1);
  CHECK(sub.ledger(LedgerKind::Missing)->entries[0].stat == 0.0);
}

TEST_CASE("break groups") {
  const Cross c = simulated_map(20, 1, 10, 5);
  const auto& g = c.groups()[0];
  const std::string name = g.name;
  const Cross split = break_groups(c, {{name, {c.matrix().marker_name(g.markers[4])}}});
  REQUIRE(split.groups().size() == 2);
  CHECK(split.groups()[0].size() == 5);
  CHECK(split.groups()[1].size() == 5);
  CHECK(split.groups()[0].name == name + ".1");
  CHECK(split.groups()[1].positions[0] == 0.0);
  const Cross tail = break_groups(c, {{name, {c.matrix().marker_name(g.markers.back())}}});
  CHECK(tail.groups().size() == 1);
  CHECK(tail.groups()[0].size() == 10);
  CHECK_THROWS_AS(break_groups(c, {{name, {"nope"}}}), DataError);
  CHECK(group_suffix(0, SuffixRule::Alpha) == "A");
  CHECK(group_suffix(26, SuffixRule::Alpha) == "AA");
}

TEST_CASE("merge groups") {
  const Cross c = simulated_map(20, 4, 8, 6);
  const auto names = [&] {
    std::vector<std::string> v;
    for (const auto& g : c.groups()) v.push_back(g.name);
    return v;
  }();
  const Cross merged = merge_groups(c, {{"X", {names[0], names[2]}}}, 5.0);
  CHECK(merged.groups().size() == 3);
  const auto* x = merged.find_group("X");
  REQUIRE(x != nullptr);
  CHECK(x->length() == Approx(c.groups()[0].length() + 5.0 + c.groups()[2].length()));
  CHECK(merged.groups()[0].name == "X");
  CHECK_THROWS_AS(merge_groups(c, {{names[1], {names[0], names[2]}}}), DataError);
  const Cross same = merge_groups(c, {{names[3], {names[3]}}});
  CHECK(equivalent(same, c));

  // merge then break at the junction restores the marker partition
  const std::string junction = c.matrix().marker_name(c.groups()[0].markers.back());
  const Cross back = break_groups(merged, {{"X", {junction}}});
  std::vector<std::vector<std::size_t>> before, after;
  for (const auto& g : c.groups()) before.push_back(g.markers);
  for (const auto& g : back.groups()) after.push_back(g.markers);
  std::sort(before.begin(), before.end());
  std::sort(after.begin(), after.end());
  CHECK(before == after);
}

TEST_CASE("combine maps") {
  const Cross c = simulated_map(30, 2, 10, 7);
  const Cross cs[] = {c, c};
  CHECK(equivalent(combine_maps(cs), c));

  // partial map over genotypes 2..n with renamed markers
  const Cross partial = subset_cross(c, [](std::size_t i) { return i > 0; });
  std::vector<std::string> marker_names;
  std::vector<Allele> calls;
  for (std::size_t k = 0; k < partial.matrix().n_markers(); ++k) {
    marker_names.push_back("extra" + std::to_string(k));
    for (auto a : partial.matrix().column(k)) calls.push_back(a);
  }
  const Cross extra(MarkerMatrix(partial.matrix().genotype_names(), marker_names, calls), partial.pop(),
                    partial.groups());
  const Cross both[] = {c, extra};
  const Cross unioned = combine_maps(both, true);
  CHECK(unioned.n_genotypes() == 30);
  const auto g1 = *unioned.matrix().find_genotype(c.matrix().genotype_name(0));
  CHECK(unioned.matrix().at(*unioned.matrix().find_marker("extra0"), g1) == Allele::Missing);
  const Cross inter = combine_maps(both, false);
  CHECK(inter.n_genotypes() == 29);

  // conflicting calls
  std::vector<Allele> flipped(c.matrix().column(0).begin(), c.matrix().column(0).end());
  for (auto& a : flipped) a = a == Allele::AA ? Allele::BB : (a == Allele::BB ? Allele::AA : a);
  const Cross conflict(MarkerMatrix(c.matrix().genotype_names(), {c.matrix().marker_name(0)}, flipped), c.pop(),
                       {LinkageGroup{"Z", {0}, {0.0}}});
  const Cross bad[] = {c, conflict};
  CHECK_THROWS_AS(combine_maps(bad), DataError);
  const Cross ril(c.matrix(), PopulationType::riln(3), c.groups());
  const Cross mixed[] = {c, ril};
  CHECK_THROWS_AS(combine_maps(mixed), DataError);
}

TEST_CASE("partition invariant holds after structural operations") {
  const Cross c = simulated_map(30, 3, 12, 8);
  CHECK_NOTHROW(check_partition(c));
  std::vector<LinkageGroup> dup = c.groups();
  dup[1].markers.push_back(dup[0].markers[0]);
  dup[1].positions.push_back(dup[1].positions.back());
  CHECK_THROWS_AS(Cross(c.matrix(), c.pop(), dup), DataError);
  const Cross pulled = pull_markers(c, LedgerKind::CoLocated);
  CHECK(census(pulled) == c.matrix().n_markers());
  const Cross pushed = push_markers(pulled, PushType::CoLocated);
  CHECK(pushed.n_mapped_markers() == c.matrix().n_markers());
}
