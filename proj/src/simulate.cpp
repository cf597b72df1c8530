#include "linkmap/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace linkmap {

std::vector<ChromosomeSpec> SimSpec::even(std::size_t count, std::size_t markers, double length_cm) {
  return std::vector<ChromosomeSpec>(count, ChromosomeSpec{markers, length_cm, {}});
}

namespace {

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

std::vector<double> chromosome_positions(const ChromosomeSpec& c) {
  if (!c.positions.empty()) {
    if (c.positions.size() != c.markers && c.markers != 0)
      throw ConfigError("chromosome positions do not match its marker count");
    if (!std::is_sorted(c.positions.begin(), c.positions.end()))
      throw ConfigError("chromosome positions must be non-decreasing");
    return c.positions;
  }
  std::vector<double> pos(c.markers, 0.0);
  for (std::size_t k = 1; k < c.markers; ++k)
    pos[k] = c.length_cm * static_cast<double>(k) / static_cast<double>(c.markers - 1);
  return pos;
}

/// One recombinant gamete from haplotypes a and b (0 = A, 1 = B allele).
void gamete(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b, std::span<const double> rf,
            std::span<const std::size_t> starts, std::mt19937_64& rng, std::vector<std::uint8_t>& out) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  out.resize(a.size());
  for (std::size_t c = 0; c + 1 < starts.size(); ++c) {
    bool from_b = u(rng) < 0.5;
    for (std::size_t k = starts[c]; k < starts[c + 1]; ++k) {
      if (k > starts[c] && u(rng) < rf[k]) from_b = !from_b;
      out[k] = from_b ? b[k] : a[k];
    }
  }
}

}  // namespace

Simulation simulate_population(const SimSpec& spec) {
  if (spec.n == 0) throw ConfigError("simulation needs at least one genotype");
  if (spec.chromosomes.empty()) throw ConfigError("simulation needs at least one chromosome");
  if (!(spec.missing_rate >= 0.0 && spec.missing_rate <= 1.0) || !(spec.error_rate >= 0.0 && spec.error_rate <= 1.0))
    throw ConfigError("missing and error rates must lie in [0, 1]");

  // Marker layout in true order.
  std::vector<std::size_t> chrom;
  std::vector<double> position;
  std::vector<std::size_t> starts{0};
  for (std::size_t c = 0; c < spec.chromosomes.size(); ++c) {
    const auto pos = chromosome_positions(spec.chromosomes[c]);
    if (pos.empty()) throw ConfigError("chromosome " + std::to_string(c + 1) + " has no markers");
    for (double p : pos) {
      chrom.push_back(c);
      position.push_back(p);
    }
    starts.push_back(position.size());
  }
  const std::size_t t = position.size();
  const std::size_t n = spec.n;
  std::vector<double> rf(t, 0.5);
  for (std::size_t k = 1; k < t; ++k)
    if (chrom[k] == chrom[k - 1]) rf[k] = map_inverse(position[k] - position[k - 1], spec.spacing);

  int generations = 0;
  if (spec.pop.kind == PopKind::RILn) generations = spec.pop.selfing_generations - 1;
  if (spec.pop.kind == PopKind::ARIL) generations = spec.aril_generations - 1;

  // True calls, genotype-major while generating.
  std::vector<Allele> truth_g(n * t);
  const std::vector<std::uint8_t> all_a(t, 0), all_b(t, 1);
  std::vector<std::uint8_t> h1, h2, n1, n2;
  std::vector<std::mt19937_64> streams;
  streams.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    streams.push_back(substream(spec.seed, i + 1));
    auto& rng = streams.back();
    Allele* row = truth_g.data() + i * t;
    if (spec.pop.kind == PopKind::DH || spec.pop.kind == PopKind::BC) {
      gamete(all_a, all_b, rf, starts, rng, h1);
      for (std::size_t k = 0; k < t; ++k) row[k] = h1[k] ? Allele::BB : Allele::AA;
      continue;
    }
    h1 = all_a;
    h2 = all_b;
    for (int gen = 0; gen < generations; ++gen) {
      gamete(h1, h2, rf, starts, rng, n1);
      gamete(h1, h2, rf, starts, rng, n2);
      std::swap(h1, n1);
      std::swap(h2, n2);
    }
    for (std::size_t k = 0; k < t; ++k) {
      if (h1[k] == h2[k])
        row[k] = h1[k] ? Allele::BB : Allele::AA;
      else
        row[k] = spec.pop.allows_heterozygotes() ? Allele::AB : (h1[k] ? Allele::BB : Allele::AA);
    }
  }

  // Marker permutation: slot s of the output holds true marker perm[s].
  std::vector<std::size_t> perm(t);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  if (spec.shuffle) {
    auto rng = substream(spec.seed, 0x5348554646ULL);
    std::shuffle(perm.begin(), perm.end(), rng);
  }

  SimTruth truth;
  truth.n_genotypes = n;
  truth.chromosome.resize(t);
  truth.position.resize(t);
  truth.true_calls.resize(n * t);
  truth.error_mask.assign(n * t, 0);
  truth.missing_mask.assign(n * t, 0);
  for (std::size_t s = 0; s < t; ++s) {
    truth.chromosome[s] = chrom[perm[s]];
    truth.position[s] = position[perm[s]];
    for (std::size_t i = 0; i < n; ++i) truth.true_calls[s * n + i] = truth_g[i * t + perm[s]];
  }
  truth.crossovers.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 1; k < t; ++k)
      if (chrom[k] == chrom[k - 1] && truth_g[i * t + k] != truth_g[i * t + k - 1]) ++truth.crossovers[i];

  std::vector<Allele> calls = truth.true_calls;
  if (spec.missing_rate > 0.0) {
    std::bernoulli_distribution miss(spec.missing_rate);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t s = 0; s < t; ++s)
        if (miss(streams[i])) {
          calls[s * n + i] = Allele::Missing;
          truth.missing_mask[s * n + i] = 1;
        }
  }
  if (spec.error_rate > 0.0) {
    std::vector<std::size_t> observed;
    for (std::size_t c = 0; c < calls.size(); ++c)
      if (calls[c] != Allele::Missing) observed.push_back(c);
    const auto flips = static_cast<std::size_t>(std::llround(spec.error_rate * static_cast<double>(observed.size())));
    auto rng = substream(spec.seed, 0x4552524f52ULL);
    for (std::size_t f = 0; f < flips; ++f) {
      std::uniform_int_distribution<std::size_t> pick(f, observed.size() - 1);
      std::swap(observed[f], observed[pick(rng)]);
      const std::size_t c = observed[f];
      const Allele a = calls[c];
      if (spec.pop.allows_heterozygotes()) {
        const Allele others[3][2] = {{Allele::BB, Allele::AB}, {Allele::AA, Allele::AB}, {Allele::AA, Allele::BB}};
        calls[c] = others[static_cast<int>(a)][std::uniform_int_distribution<int>(0, 1)(rng)];
      } else {
        calls[c] = a == Allele::AA ? Allele::BB : Allele::AA;
      }
      truth.error_mask[c] = 1;
    }
  }

  std::vector<std::string> genos(n), markers(t);
  const int gw = static_cast<int>(std::to_string(n).size());
  for (std::size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "G%0*zu", gw, i + 1);
    genos[i] = buf;
  }
  std::vector<std::size_t> within(t);
  for (std::size_t k = 0; k < t; ++k) within[k] = k - starts[chrom[k]];
  for (std::size_t s = 0; s < t; ++s) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "c%zu_m%05zu", chrom[perm[s]] + 1, within[perm[s]] + 1);
    markers[s] = buf;
  }
  MarkerMatrix matrix(std::move(genos), std::move(markers), std::move(calls));

  if (!spec.group_by_chromosome) return {Cross::unconstructed(std::move(matrix), spec.pop), std::move(truth)};
  std::vector<LinkageGroup> groups(spec.chromosomes.size());
  for (std::size_t c = 0; c < groups.size(); ++c) groups[c].name = "C" + std::to_string(c + 1);
  for (std::size_t s = 0; s < t; ++s) {
    auto& g = groups[truth.chromosome[s]];
    g.markers.push_back(s);
    g.positions.push_back(0.0);
  }
  return {Cross(std::move(matrix), spec.pop, std::move(groups)), std::move(truth)};
}

void write_truth_tsv(const Simulation& sim, std::ostream& out) {
  const auto& m = sim.cross.matrix();
  out << "marker\tchromosome\tposition_cM\n";
  char buf[32];
  for (std::size_t s = 0; s < m.n_markers(); ++s) {
    std::snprintf(buf, sizeof buf, "%.6f", sim.truth.position[s]);
    out << m.marker_name(s) << "\tC" << sim.truth.chromosome[s] + 1 << '\t' << buf << '\n';
  }
}

void write_mask_tsv(const Simulation& sim, std::ostream& out) {
  const auto& m = sim.cross.matrix();
  const std::size_t n = m.n_genotypes();
  out << "marker\tgenotype\tkind\n";
  for (std::size_t s = 0; s < m.n_markers(); ++s)
    for (std::size_t i = 0; i < n; ++i) {
      if (sim.truth.error_mask[s * n + i]) out << m.marker_name(s) << '\t' << m.genotype_name(i) << "\tE\n";
      if (sim.truth.missing_mask[s * n + i]) out << m.marker_name(s) << '\t' << m.genotype_name(i) << "\tM\n";
    }
}

}  // namespace linkmap
