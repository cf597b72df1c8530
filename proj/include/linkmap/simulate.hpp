#pragma once

#include "linkmap/cross.hpp"
#include "linkmap/genetics_math.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace linkmap {

struct ChromosomeSpec {
  std::size_t markers = 0;
  double length_cm = 0.0;
  std::vector<double> positions;  // explicit cM positions; overrides even spacing when set
};

struct SimSpec {
  PopulationType pop = PopulationType::dh();
  std::size_t n = 100;
  std::vector<ChromosomeSpec> chromosomes;
  MapFunction spacing = MapFunction::Haldane;  // converts cM spacing to per-interval rf
  double missing_rate = 0.0;
  double error_rate = 0.0;
  std::uint64_t seed = 1;
  bool group_by_chromosome = false;  // false: one unconstructed "ALL" group
  int aril_generations = 50;
  bool shuffle = false;  // permute marker rows so input order carries no map information

  /// `count` chromosomes of `markers` markers evenly spread over `length_cm`.
  static std::vector<ChromosomeSpec> even(std::size_t count, std::size_t markers, double length_cm);
};

struct SimTruth {
  std::vector<std::size_t> chromosome;  // per marker (matrix index), 0-based
  std::vector<double> position;         // per marker, cM
  std::vector<std::size_t> crossovers;  // per genotype: call changes along the true genotypes
  std::vector<Allele> true_calls;       // marker-major, before errors and missingness
  std::vector<std::uint8_t> error_mask;    // marker-major
  std::vector<std::uint8_t> missing_mask;  // marker-major
  std::size_t n_genotypes = 0;

  Allele true_call(std::size_t marker, std::size_t genotype) const {
    return true_calls[marker * n_genotypes + genotype];
  }
  bool is_error(std::size_t marker, std::size_t genotype) const {
    return error_mask[marker * n_genotypes + genotype] != 0;
  }
  bool is_missing(std::size_t marker, std::size_t genotype) const {
    return missing_mask[marker * n_genotypes + genotype] != 0;
  }
};

struct Simulation {
  Cross cross;
  SimTruth truth;
};

/// Gametes follow a two-state Markov chain along each chromosome with
/// per-interval recombination map_inverse(spacing). DH doubles one gamete;
/// BC pairs it with an A gamete; RILn selfs an F1 r-1 times; ARIL uses
/// `aril_generations`. Missing cells are drawn per cell, then exactly
/// round(error_rate x observed cells) observed calls are flipped.
Simulation simulate_population(const SimSpec& spec);

/// marker, chromosome, position_cM
void write_truth_tsv(const Simulation& sim, std::ostream& out);
/// marker, genotype, kind (E = injected error, M = masked missing)
void write_mask_tsv(const Simulation& sim, std::ostream& out);

// ---- benchmark --------------------------------------------------------------

enum class BenchmarkMode { Full, OrderOnly };

struct BenchmarkCell {
  std::string pop;
  std::size_t n = 0;
  std::size_t markers = 0;
  double error_rate = 0.0;
  double full_seconds = 0.0;        // clustering + ordering, averaged per chromosome
  double order_only_seconds = 0.0;  // ordering within true groups, averaged per chromosome
  std::size_t groups_found = 0;
};

struct BenchmarkSpec {
  std::vector<std::size_t> n_values{100, 200, 300};
  std::vector<std::size_t> marker_totals{1000, 2000, 5000};
  std::size_t chromosomes = 5;
  double chromosome_cm = 150.0;
  PopulationType pop = PopulationType::dh();
  double error_rate = 0.0;
  double p_value = 1e-12;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  int repeats = 3;  // each timing is the fastest of this many runs
  std::vector<BenchmarkMode> modes{BenchmarkMode::Full, BenchmarkMode::OrderOnly};
};

std::vector<BenchmarkCell> benchmark(const BenchmarkSpec& spec);
void write_benchmark_csv(std::span<const BenchmarkCell> cells, std::ostream& out);

}  // namespace linkmap
