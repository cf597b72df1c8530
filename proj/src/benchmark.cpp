#include "linkmap/ordering.hpp"
#include "linkmap/simulate.hpp"

#include <chrono>
#include <algorithm>
#include <cstdio>
#include <limits>

namespace linkmap {

std::vector<BenchmarkCell> benchmark(const BenchmarkSpec& spec) {
  if (spec.chromosomes == 0) throw ConfigError("benchmark needs at least one chromosome");
  std::vector<BenchmarkCell> cells;
  const bool full = std::find(spec.modes.begin(), spec.modes.end(), BenchmarkMode::Full) != spec.modes.end();
  const bool order_only =
      std::find(spec.modes.begin(), spec.modes.end(), BenchmarkMode::OrderOnly) != spec.modes.end();
  using clock = std::chrono::steady_clock;
  const double per_chrom = 1.0 / static_cast<double>(spec.chromosomes);
  auto fastest = [&](auto&& run) {
    double best = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < std::max(spec.repeats, 1); ++rep) {
      const auto t0 = clock::now();
      run();
      best = std::min(best, std::chrono::duration<double>(clock::now() - t0).count());
    }
    return best * per_chrom;
  };

  for (std::size_t markers : spec.marker_totals) {
    for (std::size_t n : spec.n_values) {
      SimSpec sim;
      sim.pop = spec.pop;
      sim.n = n;
      sim.chromosomes = SimSpec::even(spec.chromosomes, markers / spec.chromosomes, spec.chromosome_cm);
      sim.error_rate = spec.error_rate;
      sim.seed = spec.seed;
      sim.shuffle = true;
      sim.group_by_chromosome = true;
      const Simulation s = simulate_population(sim);

      BenchmarkCell cell;
      cell.pop = spec.pop.name();
      cell.n = n;
      cell.markers = markers;
      cell.error_rate = spec.error_rate;

      ConstructParams params;
      params.p_value = spec.p_value;
      params.threads = spec.threads;
      params.order.detect_bad_data = spec.error_rate > 0.0 && !spec.pop.is_finite_ril();
      if (full) {
        const Cross pooled = Cross::unconstructed(s.cross.matrix(), s.cross.pop());
        params.bychr = false;
        cell.full_seconds = fastest([&] { cell.groups_found = construct_map(pooled, params).groups().size(); });
      }
      if (order_only) {
        params.bychr = true;
        params.p_value = 2.0;
        std::size_t groups = 0;
        cell.order_only_seconds = fastest([&] { groups = construct_map(s.cross, params).groups().size(); });
        if (!full) cell.groups_found = groups;
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

void write_benchmark_csv(std::span<const BenchmarkCell> cells, std::ostream& out) {
  out << "pop,n,markers,error_rate,full_seconds,order_only_seconds,groups_found\n";
  char buf[160];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.4g,%.4f,%.4f,%zu\n", c.pop.c_str(), c.n, c.markers, c.error_rate,
                  c.full_seconds, c.order_only_seconds, c.groups_found);
    out << buf;
  }
}

}  // namespace linkmap
