#include "linkmap/ordering.hpp"

#include "linkmap/clustering.hpp"
#include "linkmap/packed.hpp"
#include "linkmap/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <unordered_set>

namespace linkmap {

namespace {

DistanceMatrix pairwise_distances(const MarkerMatrix& matrix, std::span<const std::size_t> columns) {
  const PackedCalls packed(matrix, columns);
  const double unlinked = 0.5 * static_cast<double>(matrix.n_genotypes());
  DistanceMatrix d(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j)
    for (std::size_t k = j + 1; k < columns.size(); ++k) {
      const PairwiseDistance pd = packed.distance(j, k);
      d.set(j, k, pd.defined() ? pd.d : unlinked);
    }
  return d;
}

WeightMatrix weights_from(const DistanceMatrix& d, std::size_t n, const RilScale& scale, Objective objective) {
  WeightMatrix w(d.size());
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < d.size(); ++j)
    for (std::size_t k = j + 1; k < d.size(); ++k) {
      const double p = scale.to_meiotic(std::clamp(d(j, k) * inv_n, 0.0, 0.5));
      w.set(j, k, weight(p, objective));
    }
  return w;
}

std::vector<double> adjacent_values(const DistanceMatrix& d, std::span<const std::size_t> order) {
  std::vector<double> out;
  for (std::size_t k = 1; k < order.size(); ++k) out.push_back(d(order[k - 1], order[k]));
  return out;
}

bool same_path(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end()) || std::equal(a.begin(), a.end(), b.rbegin(), b.rend());
}

double rank_correlation(std::span<const std::size_t> order, std::span<const std::size_t> reference_rank) {
  const double t = static_cast<double>(order.size());
  const double mean = (t - 1.0) / 2.0;
  double s = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k)
    s += (static_cast<double>(k) - mean) * (static_cast<double>(reference_rank[order[k]]) - mean);
  return s;
}

std::vector<double> cumulative_positions(std::span<const double> adjacent_rf, const RilScale& scale, MapFunction f) {
  std::vector<double> pos(adjacent_rf.size() + 1, 0.0);
  for (std::size_t k = 0; k < adjacent_rf.size(); ++k) {
    const double rho = std::min(scale.to_meiotic(std::clamp(adjacent_rf[k], 0.0, 0.5)), kMaxPositionRf);
    pos[k + 1] = pos[k] + map_forward(rho, f);
  }
  return pos;
}

}  // namespace

OrderResult order_linkage_group(const MarkerMatrix& matrix, std::span<const std::size_t> group,
                                const PopulationType& pop, const OrderParams& params) {
  if (params.detect_bad_data && pop.is_finite_ril())
    throw ConfigError("error detection is not available for finite-generation RIL populations (" + pop.name() + ")");
  OrderResult result;
  if (group.empty()) return result;

  const BinSet bins = bin_markers(matrix, group);
  const std::vector<std::size_t> reps = bins.representatives();
  const std::size_t t = reps.size();
  const std::size_t n = matrix.n_genotypes();
  const RilScale scale(pop);

  ProbabilityMatrix a = ProbabilityMatrix::from_calls(matrix, reps);
  DistanceMatrix d = pairwise_distances(matrix, reps);
  std::vector<std::size_t> order;
  std::vector<bool> flagged_cell;

  if (t == 1) {
    order = {0};
  } else {
    WeightMatrix w = weights_from(d, n, scale, params.objective);
    const MstOrder mst = mst_order(w);
    order = local_optimize(mst.order, w, mst.leftovers, params.search);

    const bool run_em = !pop.is_finite_ril() && (a.missing_count() > 0 || params.detect_bad_data);
    if (run_em) {
      flagged_cell.assign(n * t, false);
      for (int iter = 0; iter < params.max_em_iterations; ++iter) {
        const std::vector<double> adj = adjacent_values(d, order);
        ProbabilityMatrix next = em_e_step(a, order, adj);
        bool new_flags = false;
        if (params.detect_bad_data) {
          for (const auto& cell : detect_bad_data(next, order, d, params.detect)) {
            next.set_missing(cell.genotype, cell.column);
            flagged_cell[cell.column * n + cell.genotype] = true;
            new_flags = true;
          }
          if (new_flags) next = em_e_step(next, order, adj);
        }
        DistanceMatrix d_next = em_m_step(next);
        w = weights_from(d_next, n, scale, params.objective);

        std::vector<std::size_t> kept = local_optimize(order, w, {}, params.search);
        const MstOrder m = mst_order(w);
        std::vector<std::size_t> fresh = local_optimize(m.order, w, m.leftovers, params.search);
        std::vector<std::size_t> chosen =
            path_weight(fresh, w) < path_weight(kept, w) - 1e-12 ? std::move(fresh) : std::move(kept);

        double delta = 0.0;
        for (std::size_t k = 1; k < chosen.size(); ++k)
          delta = std::max(delta, std::abs(d_next(chosen[k - 1], chosen[k]) - d(chosen[k - 1], chosen[k])));
        double objective = 0.0;
        for (double v : adjacent_values(d_next, chosen)) objective += v / static_cast<double>(n);
        // a step that raises the objective without new flags is discarded
        if (!new_flags && !result.objective_trace.empty() && objective > result.objective_trace.back()) break;
        const bool unchanged = same_path(chosen, order);
        a = std::move(next);
        order = std::move(chosen);
        d = std::move(d_next);
        result.em_iterations = iter + 1;
        result.objective_trace.push_back(objective);
        if (unchanged && delta < params.em_tolerance && !new_flags) break;
      }
    }
  }

  // Orientation.
  {
    bool flip = false;
    if (params.anchor) {
      std::vector<std::size_t> rank(t);
      for (std::size_t j = 0; j < t; ++j)
        rank[j] = static_cast<std::size_t>(std::find(group.begin(), group.end(), reps[j]) - group.begin());
      std::vector<std::size_t> dense(t);
      std::vector<std::size_t> by_rank(t);
      std::iota(by_rank.begin(), by_rank.end(), std::size_t{0});
      std::sort(by_rank.begin(), by_rank.end(), [&](std::size_t x, std::size_t y) { return rank[x] < rank[y]; });
      for (std::size_t r = 0; r < t; ++r) dense[by_rank[r]] = r;
      flip = rank_correlation(order, dense) < 0.0;
    } else {
      flip = reps[order.back()] < reps[order.front()];
    }
    if (flip) std::reverse(order.begin(), order.end());
  }

  std::vector<double> adj_rf;
  for (double v : adjacent_values(d, order)) adj_rf.push_back(v / static_cast<double>(n));
  std::vector<double> pos = cumulative_positions(adj_rf, scale, params.map_function);

  // Terminal segments of at most no_map_size markers separated by more than
  // no_map_dist cM are dropped.
  std::size_t begin = 0, end = order.size();
  if (params.no_map_size > 0 && order.size() > 1) {
    for (std::size_t s = 1; s <= params.no_map_size && s < order.size(); ++s)
      if (pos[s] - pos[s - 1] > params.no_map_dist) {
        begin = s;
        break;
      }
    for (std::size_t s = 1; s <= params.no_map_size && begin + s < end; ++s)
      if (pos[end - s] - pos[end - s - 1] > params.no_map_dist) {
        end = end - s;
        break;
      }
  }

  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& bin = bins.bins[order[k]];
    if (k < begin || k >= end) {
      result.omitted.insert(result.omitted.end(), bin.begin(), bin.end());
      continue;
    }
    result.representatives.push_back(reps[order[k]]);
    result.rep_positions.push_back(pos[k] - pos[begin]);
    for (auto m : bin) {
      result.markers.push_back(m);
      result.positions.push_back(pos[k] - pos[begin]);
    }
  }
  for (std::size_t k = begin + 1; k < end; ++k) result.adjacent_rf.push_back(adj_rf[k - 1]);

  ProbabilityMatrix imputed(n, end - begin);
  for (std::size_t k = begin; k < end; ++k) {
    const std::size_t j = order[k];
    for (std::size_t i = 0; i < n; ++i) {
      if (a.observed(i, j))
        imputed.set_observed(i, k - begin, a(i, j));
      else
        imputed(i, k - begin) = a(i, j);
    }
  }
  result.imputed = std::move(imputed);

  if (!flagged_cell.empty()) {
    for (std::size_t k = begin; k < end; ++k)
      for (std::size_t i = 0; i < n; ++i)
        if (flagged_cell[order[k] * n + i]) result.flagged.push_back({i, reps[order[k]]});
  }
  return result;
}

MarkerMatrix impute_for_clustering(const MarkerMatrix& matrix, std::span<const std::size_t> markers) {
  const std::size_t n = matrix.n_genotypes();
  std::vector<std::size_t> order(markers.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const PackedCalls packed(matrix, markers);
  std::vector<double> adj;
  for (std::size_t k = 1; k < markers.size(); ++k) {
    const PairwiseDistance pd = packed.distance(k - 1, k);
    adj.push_back(pd.defined() ? pd.d : 0.5 * static_cast<double>(n));
  }
  const ProbabilityMatrix a = em_e_step(ProbabilityMatrix::from_calls(matrix, markers), order, adj);
  std::vector<Allele> calls = matrix.calls();
  for (std::size_t k = 0; k < markers.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) {
      Allele& cell = calls[markers[k] * n + i];
      if (cell != Allele::Missing) continue;
      if (a(i, k) >= 0.99) cell = Allele::AA;
      if (a(i, k) <= 0.01) cell = Allele::BB;
    }
  return MarkerMatrix(matrix.genotype_names(), matrix.marker_names(), std::move(calls));
}

ConstructResult construct_map_detailed(const Cross& cross, const ConstructParams& params) {
  const MarkerMatrix& matrix = cross.matrix();
  const std::size_t n = matrix.n_genotypes();
  if (n < 2) throw DataError("map construction needs at least 2 genotypes");
  if (params.order.detect_bad_data && cross.pop().is_finite_ril())
    throw ConfigError("error detection is not available for finite-generation RIL populations (" +
                      cross.pop().name() + ")");
  if (!(params.p_value > 0.0)) throw ConfigError("p-value must be positive");

  std::vector<bool> selected(cross.groups().size(), params.chr.empty());
  for (const auto& name : params.chr) {
    bool found = false;
    for (std::size_t g = 0; g < cross.groups().size(); ++g)
      if (cross.groups()[g].name == name) selected[g] = found = true;
    if (!found) throw DataError("unknown linkage group '" + name + "'");
  }

  std::map<LedgerKind, MarkerLedger> ledgers = cross.ledgers();
  auto too_missing = [&](std::size_t m) {
    return static_cast<double>(matrix.missing_count(m)) / static_cast<double>(n) > params.miss_thresh;
  };

  // Jobs: (name, markers in reference order, slot in the output).
  struct Job {
    std::string name;
    std::vector<std::size_t> markers;
  };
  std::vector<Job> jobs;
  std::vector<LinkageGroup> kept_groups;  // unselected groups pass through
  std::vector<std::pair<bool, std::size_t>> layout;  // (is_job, index)

  std::unique_ptr<MarkerMatrix> imputed;
  auto cluster_view = [&](std::span<const std::size_t> markers) -> const MarkerMatrix& {
    if (!params.mvest_bc || cross.pop().allows_heterozygotes()) return matrix;
    imputed = std::make_unique<MarkerMatrix>(impute_for_clustering(matrix, markers));
    return *imputed;
  };

  auto route = [&](const std::vector<std::size_t>& markers) {
    std::vector<std::size_t> keep;
    for (auto m : markers) {
      if (too_missing(m))
        ledgers[LedgerKind::Missing].entries.push_back(
            {m, static_cast<double>(matrix.missing_count(m)) / static_cast<double>(n), std::nullopt});
      else
        keep.push_back(m);
    }
    return keep;
  };

  if (!params.bychr) {
    std::vector<std::size_t> pooled;
    bool placed = false;
    for (std::size_t g = 0; g < cross.groups().size(); ++g) {
      const auto& grp = cross.groups()[g];
      if (!selected[g]) {
        layout.push_back({false, kept_groups.size()});
        kept_groups.push_back(grp);
        continue;
      }
      pooled.insert(pooled.end(), grp.markers.begin(), grp.markers.end());
      if (!placed) {
        layout.push_back({true, 0});
        placed = true;
      }
    }
    std::sort(pooled.begin(), pooled.end());
    pooled = route(pooled);
    if (placed) {
      const Partition parts = cluster_markers(cluster_view(pooled), pooled, cross.pop(), params.p_value);
      auto pos = std::find(layout.begin(), layout.end(), std::pair<bool, std::size_t>{true, 0});
      const auto at = pos - layout.begin();
      layout.erase(pos);
      for (std::size_t c = 0; c < parts.size(); ++c) {
        layout.insert(layout.begin() + at + static_cast<std::ptrdiff_t>(c), {true, jobs.size()});
        jobs.push_back({"L." + group_suffix(c, params.suffix), parts[c]});
      }
    }
  } else {
    for (std::size_t g = 0; g < cross.groups().size(); ++g) {
      const auto& grp = cross.groups()[g];
      if (!selected[g]) {
        layout.push_back({false, kept_groups.size()});
        kept_groups.push_back(grp);
        continue;
      }
      std::vector<std::size_t> markers = route(grp.markers);
      if (markers.empty()) continue;
      if (params.p_value < 1.0) {
        const Partition parts = cluster_markers(cluster_view(markers), markers, cross.pop(), params.p_value);
        if (parts.size() > 1) {
          for (std::size_t c = 0; c < parts.size(); ++c) {
            // Keep the group's reference order inside each fragment.
            std::vector<std::size_t> frag;
            for (auto m : markers)
              if (std::binary_search(parts[c].begin(), parts[c].end(), m)) frag.push_back(m);
            layout.push_back({true, jobs.size()});
            jobs.push_back({grp.name + "." + group_suffix(c, params.suffix), std::move(frag)});
          }
          continue;
        }
      }
      layout.push_back({true, jobs.size()});
      jobs.push_back({grp.name, std::move(markers)});
    }
  }

  std::vector<OrderResult> orders(jobs.size());
  const unsigned workers = params.threads == 0 ? default_worker_count() : params.threads;
  parallel_for(jobs.size(), workers, [&](std::size_t j) {
    orders[j] = order_linkage_group(matrix, jobs[j].markers, cross.pop(), params.order);
  });

  std::vector<Allele> calls = matrix.calls();
  for (const auto& o : orders)
    for (const auto& f : o.flagged) calls[f.marker * n + f.genotype] = Allele::Missing;
  for (const auto& o : orders)
    for (auto m : o.omitted)
      ledgers[LedgerKind::Omitted].entries.push_back({m, std::numeric_limits<double>::quiet_NaN(), std::nullopt});

  std::vector<LinkageGroup> groups;
  ConstructResult result;
  for (auto [is_job, idx] : layout) {
    if (!is_job) {
      groups.push_back(kept_groups[idx]);
      continue;
    }
    if (orders[idx].markers.empty()) continue;
    groups.push_back({jobs[idx].name, orders[idx].markers, orders[idx].positions});
    result.orders.emplace_back(jobs[idx].name, std::move(orders[idx]));
  }
  std::unordered_set<std::string> names;
  for (const auto& g : groups)
    if (!names.insert(g.name).second)
      throw DataError("constructed group name '" + g.name + "' collides with an existing group");
  MarkerMatrix out(matrix.genotype_names(), matrix.marker_names(), std::move(calls));
  result.cross = Cross(std::move(out), cross.pop(), std::move(groups), std::move(ledgers));
  return result;
}

Cross construct_map(const Cross& cross, const ConstructParams& params) {
  return construct_map_detailed(cross, params).cross;
}

}  // namespace linkmap
