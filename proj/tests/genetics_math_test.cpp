#include "support.hpp"

#include "linkmap/genetics_math.hpp"

#include <doctest.h>

using namespace linkmap;
using doctest::Approx;

namespace {

std::vector<Allele> col(std::string_view s) {
  std::vector<Allele> out;
  for (char c : s) out.push_back(parse_allele(std::string_view(&c, 1)));
  return out;
}

}  // namespace

TEST_CASE("hamming distance counts and rescales") {
  CHECK(hamming_distance(col("AABB"), col("AABB")).d == 0.0);
  CHECK(hamming_distance(col("AABB"), col("ABBA")).d == 2.0);
  const auto d = hamming_distance(col("AABU"), col("ABBA"));
  CHECK(d.n_obs == 3);
  CHECK(d.d == Approx(4.0 / 3.0));
  CHECK_FALSE(hamming_distance(col("UU"), col("AB")).defined());
  // heterozygote against homozygote is half a mismatch
  CHECK(hamming_distance(col("XXAB"), col("AXBB")).d == Approx(1.5));
}

TEST_CASE("hamming distance is symmetric") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick(0, 3);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<Allele> a(40), b(40);
    for (auto& x : a) x = static_cast<Allele>(pick(rng));
    for (auto& x : b) x = static_cast<Allele>(pick(rng));
    const auto ab = hamming_distance(a, b), ba = hamming_distance(b, a);
    CHECK(ab.d == ba.d);
    CHECK(ab.n_obs == ba.n_obs);
  }
}

TEST_CASE("recombination fraction estimate") {
  CHECK(rf_estimate({0.0, 10}, 10).clamped == 0.0);
  CHECK(rf_estimate({5.0, 10}, 10).clamped == 0.5);
  CHECK(rf_estimate({85.62, 300}, 300).clamped == Approx(0.2854).epsilon(1e-4));
  const auto over = rf_estimate({7.0, 10}, 10);
  CHECK(over.raw == Approx(0.7));
  CHECK(over.clamped == 0.5);
  CHECK_FALSE(rf_estimate({0.0, 0}, 10).defined);
}

TEST_CASE("ordering weights") {
  CHECK(weight(0.0, Objective::ML) == 0.0);
  CHECK(weight(0.5, Objective::ML) == Approx(std::log(2.0)));
  CHECK(weight(0.3, Objective::Count) == 0.3);
  double prev = -1;
  for (int k = 0; k <= 500; ++k) {
    const double w = weight(k * 0.001, Objective::ML);
    CHECK(w > prev);
    prev = w;
  }
  CHECK_THROWS_AS(parse_objective("SUM"), ConfigError);
}

TEST_CASE("map functions") {
  CHECK(map_forward(0.0, MapFunction::Kosambi) == 0.0);
  CHECK(map_forward(0.25, MapFunction::Kosambi) == Approx(25.0 * std::log(3.0)));
  CHECK(map_forward(0.25, MapFunction::Haldane) == Approx(-50.0 * std::log(0.5)));
  CHECK(map_inverse(27.465307, MapFunction::Kosambi) == Approx(0.25).epsilon(1e-7));
  CHECK(map_inverse(34.657359, MapFunction::Haldane) == Approx(0.25).epsilon(1e-7));
  CHECK(std::isinf(map_forward(0.5, MapFunction::Haldane)));
  for (int k = 0; k <= 499; ++k) {
    const double p = k * 0.001;
    for (auto f : {MapFunction::Kosambi, MapFunction::Haldane})
      CHECK(map_inverse(map_forward(p, f), f) == Approx(p).epsilon(1e-9));
    if (p > 0) CHECK(map_forward(p, MapFunction::Kosambi) <= map_forward(p, MapFunction::Haldane));
  }
}

TEST_CASE("hoeffding threshold") {
  CHECK(hoeffding_delta(300, 1e-12) == Approx(85.62).epsilon(1e-4));
  CHECK(threshold_cm(300, 1e-12, MapFunction::Kosambi) == Approx(32.4).epsilon(0.003));
  CHECK(threshold_cm(150, 1e-5, MapFunction::Kosambi) == Approx(35.3).epsilon(0.003));
  CHECK(std::isinf(hoeffding_delta(300, 2.0)));
  CHECK_THROWS_AS(hoeffding_delta(300, 0.0), ConfigError);
  CHECK(hoeffding_delta(10, 1e-30) == 0.0);
  // more stringent epsilon gives a smaller threshold; for fixed epsilon the cM threshold grows with n
  CHECK(hoeffding_delta(300, 1e-15) < hoeffding_delta(300, 1e-12));
  CHECK(hoeffding_delta(400, 1e-12) > hoeffding_delta(300, 1e-12));
  double prev = 0.0;
  for (std::size_t n = 100; n <= 400; n += 10) {
    const double cm = threshold_cm(n, 1e-8, MapFunction::Kosambi);
    CHECK(cm > prev);
    prev = cm;
  }
}

TEST_CASE("threshold profile inverts the threshold") {
  const std::size_t ns[] = {300};
  const double cms[] = {32.436};
  const auto rows = threshold_profile(ns, cms, MapFunction::Kosambi);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].neg_log10_epsilon == Approx(12.0).epsilon(1e-3));
  const double zero[] = {0.0};
  CHECK_THROWS_AS(threshold_profile(ns, zero, MapFunction::Kosambi), ConfigError);
  // each target profile increases with n
  std::vector<std::size_t> grid;
  for (std::size_t n = 50; n <= 400; n += 25) grid.push_back(n);
  const double targets[] = {25, 30, 35, 40};
  const auto all = threshold_profile(grid, targets, MapFunction::Kosambi);
  for (double t : targets) {
    double prev = -1;
    for (const auto& r : all)
      if (r.cm_target == t) {
        CHECK(r.neg_log10_epsilon > prev);
        prev = r.neg_log10_epsilon;
      }
  }
}

TEST_CASE("advanced RIL transform") {
  CHECK(ril_transform_aril(0.0) == 0.0);
  CHECK(ril_transform_aril(0.5) == 0.5);
  CHECK(ril_transform_aril(0.25) == Approx(1.0 / 6.0));
  CHECK(ril_transform_aril(0.3) == Approx(0.15 / 0.7));
  CHECK(ril_forward(1.0 / 6.0, PopulationType::aril()) == Approx(0.25));
  CHECK(ril_invert(0.0, PopulationType::aril()) == 0.0);
}

TEST_CASE("finite RIL forward model") {
  for (int r : {2, 3, 5, 8, 20}) {
    CHECK(ril_expected_mismatch(0.0, r) == Approx(0.0));
    const double h = std::pow(2.0, -(r - 1));
    CHECK(ril_expected_mismatch(0.5, r) == Approx((1.0 - h * h) / 2.0));
    double prev = -1;
    for (int k = 0; k <= 50; ++k) {
      const double f = ril_expected_mismatch(k * 0.01, r);
      CHECK(f > prev);
      prev = f;
    }
  }
  // many generations approach the advanced-RIL curve
  const double f20 = ril_expected_mismatch(0.25, 20);
  CHECK(ril_transform_aril(f20) == Approx(0.25).epsilon(1e-3));
  // genotype frequencies are a distribution with the heterozygote mass 2^-(r-1)
  for (int r : {2, 4}) {
    const auto joint = ril_two_locus_genotypes(0.2, r);
    double total = 0, het = 0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        total += joint[a][b];
        if (a == 2) het += joint[a][b];
      }
    CHECK(total == Approx(1.0));
    CHECK(het == Approx(std::pow(2.0, -(r - 1))));
  }
}

TEST_CASE("finite RIL forward model agrees with Monte-Carlo meiosis") {
  for (auto [rho, r] : {std::pair{0.1, 2}, std::pair{0.3, 4}}) {
    const double mc = oracle::ril_mismatch_monte_carlo(rho, r, 200'000, 11);
    CHECK(std::abs(mc - ril_expected_mismatch(rho, r)) < 0.004);
  }
}

TEST_CASE("RIL inversion round trip") {
  for (int r : {2, 3, 5, 8})
    for (int step = 0; step <= 11; ++step) {
      const double rho = 0.01 + 0.04 * step;
      CHECK(ril_invert(ril_expected_mismatch(rho, r), r) == Approx(rho).epsilon(1e-8));
    }
  CHECK(ril_invert(0.0, 3) == 0.0);
  CHECK(ril_invert(0.49999, 2) == 0.5);
}

TEST_CASE("tabulated RIL scale matches bisection") {
  const RilScale scale(PopulationType::riln(3));
  for (int k = 0; k <= 200; ++k) {
    const double obs = ril_expected_mismatch(0.5, 3) * k / 200.0;
    CHECK(scale.to_meiotic(obs) == Approx(ril_invert(obs, 3)).epsilon(1e-8));
  }
  const RilScale dh(PopulationType::dh());
  CHECK(dh.to_meiotic(0.3) == 0.3);
}

TEST_CASE("population parsing") {
  CHECK(PopulationType::parse("RIL2").selfing_generations == 2);
  CHECK(PopulationType::parse("DH").kind == PopKind::DH);
  CHECK(PopulationType::parse("ARIL").expected_het_proportion() == 0.0);
  CHECK(PopulationType::riln(3).expected_het_proportion() == Approx(0.25));
  CHECK_THROWS_AS(PopulationType::parse("RIL1"), ConfigError);
  CHECK_THROWS_AS(PopulationType::parse("F9"), ConfigError);
}

TEST_CASE("triangle bound on complete data") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> pick(0, 2);
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<Allele> a(30), b(30), c(30);
    for (auto* v : {&a, &b, &c})
      for (auto& x : *v) x = static_cast<Allele>(pick(rng));
    CHECK(hamming_distance(a, c).d <= hamming_distance(a, b).d + hamming_distance(b, c).d + 1e-12);
  }
}

TEST_CASE("squaring epsilon offsets the advanced RIL shrinkage") {
  for (std::size_t n = 150; n <= 350; n += 50)
    for (double eps : {1e-4, 1e-6, 1e-8}) {
      const double dh = threshold_cm(n, eps, MapFunction::Kosambi);
      const double squared = threshold_cm(n, eps * eps, MapFunction::Kosambi);
      const double aril =
          map_forward(ril_invert(hoeffding_delta(n, eps) / static_cast<double>(n), PopulationType::aril()),
                      MapFunction::Kosambi);
      CHECK(dh - aril >= 10.0);
      CHECK(dh - squared >= 10.0);
      CHECK(std::abs(squared - aril) <= 5.0);
    }
}
