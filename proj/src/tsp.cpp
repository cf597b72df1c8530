#include "linkmap/ordering.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>
#include <queue>

namespace linkmap {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
constexpr double kGain = 1e-12;
constexpr std::size_t kNear = 12;  // candidate neighbours per node for block relocation

std::vector<std::size_t> bfs_parents(const std::vector<std::vector<std::size_t>>& adj, std::size_t root,
                                     std::vector<std::size_t>& depth) {
  const std::size_t t = adj.size();
  std::vector<std::size_t> parent(t, kNone);
  depth.assign(t, kNone);
  std::queue<std::size_t> q;
  depth[root] = 0;
  q.push(root);
  while (!q.empty()) {
    const std::size_t u = q.front();
    q.pop();
    for (std::size_t v : adj[u]) {
      if (depth[v] != kNone) continue;
      depth[v] = depth[u] + 1;
      parent[v] = u;
      q.push(v);
    }
  }
  return parent;
}

std::size_t farthest(const std::vector<std::size_t>& depth) {
  std::size_t best = 0;
  for (std::size_t v = 1; v < depth.size(); ++v)
    if (depth[v] != kNone && depth[v] > depth[best]) best = v;
  return best;
}

/// Exact minimum-weight Hamiltonian path by Held-Karp dynamic programming.
std::vector<std::size_t> exact_path(std::span<const std::size_t> nodes, const WeightMatrix& w) {
  const std::size_t t = nodes.size();
  const std::size_t full = (std::size_t{1} << t) - 1;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cost((full + 1) * t, inf);
  std::vector<std::uint8_t> prev((full + 1) * t, 0xff);
  for (std::size_t v = 0; v < t; ++v) cost[(std::size_t{1} << v) * t + v] = 0.0;
  for (std::size_t mask = 1; mask <= full; ++mask) {
    for (std::size_t v = 0; v < t; ++v) {
      const double c = cost[mask * t + v];
      if (!(mask >> v & 1) || c == inf) continue;
      for (std::size_t u = 0; u < t; ++u) {
        if (mask >> u & 1) continue;
        const std::size_t next = mask | (std::size_t{1} << u);
        const double nc = c + w(nodes[v], nodes[u]);
        if (nc < cost[next * t + u] - kGain) {
          cost[next * t + u] = nc;
          prev[next * t + u] = static_cast<std::uint8_t>(v);
        }
      }
    }
  }
  std::size_t end = 0;
  for (std::size_t v = 1; v < t; ++v)
    if (cost[full * t + v] < cost[full * t + end] - kGain) end = v;
  std::vector<std::size_t> out;
  std::size_t mask = full, v = end;
  while (true) {
    out.push_back(nodes[v]);
    const std::uint8_t p = prev[mask * t + v];
    mask &= ~(std::size_t{1} << v);
    if (p == 0xff) break;
    v = p;
  }
  return out;
}

class PathSearch {
 public:
  PathSearch(std::vector<std::size_t> order, const WeightMatrix& w, const LocalSearchOptions& opt)
      : o_(std::move(order)), w_(w), opt_(opt) {}

  std::vector<std::size_t> take() { return std::move(o_); }

  void insert(std::size_t x) {
    if (o_.empty()) {
      o_.push_back(x);
      return;
    }
    double best = w_(x, o_.front());
    std::size_t at = 0;
    for (std::size_t i = 1; i < o_.size(); ++i) {
      const double c = w_(o_[i - 1], x) + w_(x, o_[i]) - w_(o_[i - 1], o_[i]);
      if (c < best - kGain) {
        best = c;
        at = i;
      }
    }
    if (w_(o_.back(), x) < best - kGain) at = o_.size();
    o_.insert(o_.begin() + static_cast<std::ptrdiff_t>(at), x);
  }

  void run() {
    if (o_.size() < 2) return;
    pos_.assign(w_.size(), kNone);
    reindex();
    build_near();
    for (int pass = 0; pass < opt_.max_passes; ++pass) {
      bool moved = false;
      moved |= relocate_blocks(1);
      moved |= windowed_kopt();
      moved |= reverse_blocks();
      for (std::size_t len = 2; len <= opt_.max_block; ++len) moved |= relocate_blocks(len);
      if (!moved) break;
    }
  }

 private:
  double link(std::size_t a, std::size_t b) const noexcept {
    return a == kNone || b == kNone ? 0.0 : w_(a, b);
  }
  std::size_t at(std::ptrdiff_t i) const noexcept {
    return i < 0 || i >= static_cast<std::ptrdiff_t>(o_.size()) ? kNone : o_[static_cast<std::size_t>(i)];
  }

  bool reverse_blocks() {
    bool any = false;
    const auto t = static_cast<std::ptrdiff_t>(o_.size());
    for (std::ptrdiff_t i = 0; i < t; ++i) {
      for (std::ptrdiff_t j = i + 1; j < t; ++j) {
        if (i == 0 && j == t - 1) continue;
        const std::size_t a = at(i - 1), b = at(j + 1);
        const double gain = link(a, o_[i]) + link(o_[j], b) - link(a, o_[j]) - link(o_[i], b);
        if (gain > kGain) {
          std::reverse(o_.begin() + i, o_.begin() + j + 1);
          reindex();
          any = true;
        }
      }
    }
    return any;
  }

  bool relocate_blocks(std::size_t len) {
    bool any = false;
    const std::size_t t = o_.size();
    if (len >= t) return false;
    for (std::size_t i = 0; i + len <= o_.size(); ++i) {
      const auto ii = static_cast<std::ptrdiff_t>(i);
      const auto ll = static_cast<std::ptrdiff_t>(len);
      const std::size_t a = at(ii - 1), b = at(ii + ll), first = o_[i], last = o_[i + len - 1];
      const double removal = link(a, first) + link(last, b) - link(a, b);
      // Gaps of the path without the block: gap k sits between rest[k-1] and
      // rest[k], k in [0, t - len]. Only gaps touching a near neighbour of
      // either block end are tried.
      const std::size_t rest = t - len;
      double best = kGain;
      std::ptrdiff_t best_k = -1;
      bool best_flip = false;
      auto try_gap = [&](std::size_t k) {
        if (k == i) return;
        const std::size_t c = k == 0 ? kNone : o_[k - 1 < i ? k - 1 : k - 1 + len];
        const std::size_t d = k == rest ? kNone : o_[k < i ? k : k + len];
        const double base = link(c, d);
        const double fwd = removal - (link(c, first) + link(last, d) - base);
        const double rev = removal - (link(c, last) + link(first, d) - base);
        if (fwd > best) {
          best = fwd;
          best_k = static_cast<std::ptrdiff_t>(k);
          best_flip = false;
        }
        if (len > 1 && rev > best) {
          best = rev;
          best_k = static_cast<std::ptrdiff_t>(k);
          best_flip = true;
        }
      };
      for (std::size_t end : {first, last})
        for (std::size_t c : near_[end]) {
          const std::size_t p = pos_[c];
          if (p >= i && p < i + len) continue;
          const std::size_t r = p < i ? p : p - len;
          try_gap(r);
          try_gap(r + 1);
        }
      try_gap(0);
      try_gap(rest);
      if (best_k < 0) continue;
      std::vector<std::size_t> block(o_.begin() + ii, o_.begin() + ii + ll);
      if (best_flip) std::reverse(block.begin(), block.end());
      o_.erase(o_.begin() + ii, o_.begin() + ii + ll);
      o_.insert(o_.begin() + best_k, block.begin(), block.end());
      reindex();
      any = true;
    }
    return any;
  }

  void reindex() {
    for (std::size_t q = 0; q < o_.size(); ++q) pos_[o_[q]] = q;
  }

  void build_near() {
    near_.assign(w_.size(), {});
    const std::size_t k = std::min(kNear, o_.size() - 1);
    std::vector<std::size_t> others;
    for (std::size_t u : o_) {
      others.clear();
      for (std::size_t v : o_)
        if (v != u) others.push_back(v);
      std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k), others.end(),
                        [&](std::size_t x, std::size_t y) { return w_(u, x) < w_(u, y) || (w_(u, x) == w_(u, y) && x < y); });
      near_[u].assign(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k));
    }
  }

  bool windowed_kopt() {
    const std::size_t k = std::min(opt_.window, o_.size());
    if (k < 3) return false;
    bool any = false;
    std::vector<std::size_t> perm(k), best_perm(k), cur(k);
    for (std::size_t s = 0; s + k <= o_.size(); ++s) {
      const std::size_t a = at(static_cast<std::ptrdiff_t>(s) - 1);
      const std::size_t b = at(static_cast<std::ptrdiff_t>(s + k));
      for (std::size_t q = 0; q < k; ++q) cur[q] = o_[s + q];
      auto cost = [&](const std::vector<std::size_t>& p) {
        double c = link(a, cur[p[0]]) + link(cur[p[k - 1]], b);
        for (std::size_t q = 1; q < k; ++q) c += w_(cur[p[q - 1]], cur[p[q]]);
        return c;
      };
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      const double base = cost(perm);
      double best = base;
      best_perm = perm;
      while (std::next_permutation(perm.begin(), perm.end())) {
        const double c = cost(perm);
        if (c < best - kGain) {
          best = c;
          best_perm = perm;
        }
      }
      if (best < base - kGain) {
        for (std::size_t q = 0; q < k; ++q) o_[s + q] = cur[best_perm[q]];
        reindex();
        any = true;
      }
    }
    return any;
  }

  std::vector<std::size_t> o_;
  std::vector<std::size_t> pos_;
  std::vector<std::vector<std::size_t>> near_;
  const WeightMatrix& w_;
  LocalSearchOptions opt_;
};

constexpr std::size_t kExactLimit = 10;

}  // namespace

MstOrder mst_order(const WeightMatrix& w) {
  const std::size_t t = w.size();
  if (t == 0) return {};
  if (t == 1) return {{0}, {}};
  std::vector<double> key(t, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(t, kNone);
  std::vector<bool> in(t, false);
  std::vector<std::vector<std::size_t>> adj(t);
  key[0] = 0.0;
  for (std::size_t step = 0; step < t; ++step) {
    std::size_t u = kNone;
    for (std::size_t v = 0; v < t; ++v)
      if (!in[v] && (u == kNone || key[v] < key[u])) u = v;
    in[u] = true;
    if (parent[u] != kNone) {
      adj[u].push_back(parent[u]);
      adj[parent[u]].push_back(u);
    }
    for (std::size_t v = 0; v < t; ++v) {
      if (in[v]) continue;
      const double c = w(u, v);
      if (c < key[v] || (c == key[v] && u < parent[v])) {
        key[v] = c;
        parent[v] = u;
      }
    }
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());

  std::vector<std::size_t> depth;
  bfs_parents(adj, 0, depth);
  const std::size_t end1 = farthest(depth);
  const auto par = bfs_parents(adj, end1, depth);
  const std::size_t end2 = farthest(depth);

  MstOrder out;
  for (std::size_t v = end2; v != kNone; v = par[v]) out.order.push_back(v);
  std::vector<bool> on_path(t, false);
  for (auto v : out.order) on_path[v] = true;
  for (std::size_t v = 0; v < t; ++v)
    if (!on_path[v]) out.leftovers.push_back(v);
  return out;
}

double path_weight(std::span<const std::size_t> order, const WeightMatrix& w) noexcept {
  double s = 0.0;
  for (std::size_t i = 1; i < order.size(); ++i) s += w(order[i - 1], order[i]);
  return s;
}

std::vector<std::size_t> local_optimize(std::vector<std::size_t> order, const WeightMatrix& w,
                                        std::span<const std::size_t> leftovers, const LocalSearchOptions& options) {
  const std::size_t total = order.size() + leftovers.size();
  if (total <= kExactLimit && total >= 3) {
    std::vector<std::size_t> nodes(order);
    nodes.insert(nodes.end(), leftovers.begin(), leftovers.end());
    auto exact = exact_path(nodes, w);
    // Keep the incoming path when it is already optimal.
    std::vector<std::size_t> mine(order);
    if (leftovers.empty() && path_weight(mine, w) <= path_weight(exact, w) + kGain) return mine;
    return exact;
  }
  PathSearch search(std::move(order), w, options);
  for (auto x : leftovers) search.insert(x);
  search.run();
  return search.take();
}

}  // namespace linkmap
