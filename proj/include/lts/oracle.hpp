#pragma once

// Slow, independent reference implementations for testing. Nothing here is
// shared with the propagation engine: sorting, union-find, queues and the
// per-hill simplification are all written again from scratch.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <vector>

#include "lts/common.hpp"
#include "lts/order_field.hpp"
#include "lts/persistence.hpp"
#include "lts/triangulation.hpp"

namespace lts::oracle {

namespace detail {

struct SimpleUnionFind {
  std::vector<std::int64_t> up;
  explicit SimpleUnionFind(std::int64_t n) : up(static_cast<std::size_t>(n)) { std::iota(up.begin(), up.end(), 0); }
  std::int64_t root(std::int64_t x) {
    while (up[x] != x) x = up[x];
    return x;
  }
};

// Vertices by (value, id), ascending.
inline std::vector<VertexId> sweep_order(const std::vector<double>& f) {
  std::vector<VertexId> idx(f.size());
  std::iota(idx.begin(), idx.end(), VertexId{0});
  std::stable_sort(idx.begin(), idx.end(), [&](VertexId a, VertexId b) { return f[a] < f[b]; });
  return idx;
}

}  // namespace detail

/// Elder-rule sweep with a union-find over vertices; global pair included.
inline std::vector<PersistencePair> oracle_pairs_sweep(const Triangulation& mesh, const ScalarField& f, Polarity polarity) {
  const auto n = mesh.vertex_count();
  auto order = detail::sweep_order(f.values);
  if (polarity == Polarity::MaxSaddle) std::reverse(order.begin(), order.end());
  std::vector<std::int64_t> pos(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<std::int64_t>(i);

  detail::SimpleUnionFind uf(n);
  std::vector<VertexId> birthOf(static_cast<std::size_t>(n), kNoVertex);  // per root: its extremum
  std::vector<char> done(static_cast<std::size_t>(n), 0);
  std::vector<PersistencePair> pairs;
  for (auto v : order) {
    std::vector<std::int64_t> roots;
    for (auto u : mesh.neighbors(v))
      if (done[u]) roots.push_back(uf.root(u));
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    done[v] = 1;
    if (roots.empty()) {
      birthOf[v] = v;
      continue;
    }
    // Eldest = extremum reached first by the sweep.
    auto eldest = *std::min_element(roots.begin(), roots.end(),
                                    [&](std::int64_t a, std::int64_t b) { return pos[birthOf[a]] < pos[birthOf[b]]; });
    for (auto r : roots) {
      if (r == eldest) continue;
      PersistencePair p;
      p.extremum = birthOf[r];
      p.saddle = v;
      p.birth = f.values[p.extremum];
      p.death = f.values[v];
      p.persistence = std::abs(p.birth - p.death);
      p.polarity = polarity;
      pairs.push_back(p);
      uf.up[r] = eldest;
    }
    uf.up[v] = eldest;
  }
  PersistencePair g;
  g.extremum = order.front();
  g.birth = f.values[order.front()];
  g.death = f.values[order.back()];
  g.persistence = std::abs(g.birth - g.death);
  g.polarity = polarity;
  pairs.push_back(g);
  sort_pairs(pairs);
  return pairs;
}

/// Components of the subgraph induced by vertices with value > w.
inline std::int64_t count_superlevel_components(const Triangulation& mesh, const ScalarField& f, double w) {
  const auto n = mesh.vertex_count();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::int64_t count = 0;
  for (VertexId s = 0; s < n; ++s) {
    if (seen[s] || !(f.values[s] > w)) continue;
    ++count;
    std::vector<VertexId> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      for (auto u : mesh.neighbors(v))
        if (!seen[u] && f.values[u] > w) {
          seen[u] = 1;
          stack.push_back(u);
        }
    }
  }
  return count;
}

/// Removes one maximum m from F: grow its hill until a vertex with an
/// unvisited higher neighbor, reorder the hill by alternating passes until s
/// is its only maximum and every minimum touches the outside, then splice the
/// hill right below s.
inline OrderField reference_remove_single_maximum(const Triangulation& mesh, const OrderField& F, VertexId m,
                                                  int maxIterations = 100) {
  mesh.check_vertex(m);
  const auto& r = F.rank;
  for (auto u : mesh.neighbors(m))
    if (r[u] > r[m]) throw Error(ErrorCode::NotAnExtremum, "vertex " + std::to_string(m) + " is not a maximum");

  // Step 1: superlevel component.
  std::set<VertexId> hill;
  std::priority_queue<std::pair<Rank, VertexId>> queue;
  std::set<VertexId> queued{m};
  queue.push({r[m], m});
  VertexId s = kNoVertex;
  while (!queue.empty()) {
    const auto v = queue.top().second;
    queue.pop();
    bool blocked = false;
    for (auto u : mesh.neighbors(v))
      if (r[u] > r[v] && !hill.count(u)) blocked = true;
    if (blocked) {
      s = v;
      break;
    }
    hill.insert(v);
    for (auto u : mesh.neighbors(v))
      if (r[u] < r[v] && !queued.count(u)) {
        queued.insert(u);
        queue.push({r[u], u});
      }
  }
  if (s == kNoVertex) throw Error(ErrorCode::ReachedGlobalExtremum, "hill of " + std::to_string(m) + " covers the domain");

  // Step 2: local order, kept as a map vertex -> local value.
  auto inHill = [&](VertexId u) { return hill.count(u) > 0; };
  auto outside = [&](VertexId v) {
    for (auto u : mesh.neighbors(v))
      if (!inHill(u) && u != s) return true;
    return false;
  };
  std::vector<VertexId> byF(hill.begin(), hill.end());
  std::sort(byF.begin(), byF.end(), [&](VertexId a, VertexId b) { return r[a] < r[b]; });
  VertexId first = kNoVertex;
  for (auto v : byF)
    if (outside(v)) {
      first = v;
      break;
    }
  std::map<VertexId, double> local;
  for (std::size_t i = 0; i < byF.size(); ++i) local[byF[i]] = static_cast<double>(i);
  local[first] = -std::numeric_limits<double>::infinity();
  const double top = std::numeric_limits<double>::infinity();
  auto value = [&](VertexId v) { return v == s ? top : local.at(v); };

  auto sweep = [&](bool descending, std::vector<VertexId> seeds) {
    using Item = std::pair<double, VertexId>;
    std::vector<VertexId> visitOrder;
    std::set<VertexId> seen(seeds.begin(), seeds.end());
    if (descending) {
      std::priority_queue<Item> q;
      for (auto v : seeds) q.push({value(v), v});
      while (!q.empty()) {
        auto v = q.top().second;
        q.pop();
        visitOrder.push_back(v);
        for (auto u : mesh.neighbors(v))
          if (inHill(u) && !seen.count(u)) {
            seen.insert(u);
            q.push({value(u), u});
          }
      }
    } else {
      std::priority_queue<Item, std::vector<Item>, std::greater<Item>> q;
      for (auto v : seeds) q.push({value(v), v});
      while (!q.empty()) {
        auto v = q.top().second;
        q.pop();
        visitOrder.push_back(v);
        for (auto u : mesh.neighbors(v))
          if (inHill(u) && !seen.count(u)) {
            seen.insert(u);
            q.push({value(u), u});
          }
      }
    }
    const double k = static_cast<double>(visitOrder.size());
    for (std::size_t i = 0; i < visitOrder.size(); ++i)
      if (visitOrder[i] != s) local[visitOrder[i]] = descending ? k - 1 - static_cast<double>(i) : static_cast<double>(i);
  };
  auto localMinima = [&] {
    std::vector<VertexId> out;
    for (auto v : hill) {
      bool low = true;
      for (auto u : mesh.neighbors(v))
        if ((inHill(u) || u == s) && value(u) < value(v)) low = false;
      if (low) out.push_back(v);
    }
    return out;
  };
  auto localMaxima = [&] {
    std::vector<VertexId> out;
    for (auto v : hill) {
      bool high = true;
      for (auto u : mesh.neighbors(v))
        if ((inHill(u) || u == s) && value(u) > value(v)) high = false;
      if (high) out.push_back(v);
    }
    return out;
  };

  int passes = 0;
  std::set<std::map<VertexId, double>> visited;
  for (;;) {
    sweep(true, {s});
    ++passes;
    if (!visited.insert(local).second)
      throw Error(ErrorCode::IterationCapExceeded, "reference hill simplification cycles");
    std::vector<VertexId> authorized;
    bool unauthorized = false;
    for (auto v : localMinima()) {
      if (outside(v)) authorized.push_back(v);
      else unauthorized = true;
    }
    if (!unauthorized) break;
    if (passes >= maxIterations) throw Error(ErrorCode::IterationCapExceeded, "reference hill simplification");
    if (authorized.empty())
      for (auto v : hill)
        if (outside(v)) authorized.push_back(v);
    sweep(false, authorized);
    ++passes;
    if (localMaxima().empty()) break;
    if (passes >= maxIterations) throw Error(ErrorCode::IterationCapExceeded, "reference hill simplification");
  }

  // Step 3: splice the hill, in local order, immediately below s.
  std::vector<VertexId> hillSorted(hill.begin(), hill.end());
  std::sort(hillSorted.begin(), hillSorted.end(), [&](VertexId a, VertexId b) { return local.at(a) < local.at(b); });
  std::vector<VertexId> list;
  for (auto v : F.inverse) {
    if (inHill(v)) continue;
    if (v == s) list.insert(list.end(), hillSorted.begin(), hillSorted.end());
    list.push_back(v);
  }
  return OrderField::from_sorted(std::move(list));
}

/// Extrema of an order found by brute force over the neighbor lists.
inline std::pair<std::vector<VertexId>, std::vector<VertexId>> brute_force_extrema(const Triangulation& mesh,
                                                                                    const std::vector<Rank>& rank) {
  std::pair<std::vector<VertexId>, std::vector<VertexId>> out;
  for (VertexId v = 0; v < mesh.vertex_count(); ++v) {
    auto nb = mesh.neighbors(v);
    const bool low = std::all_of(nb.begin(), nb.end(), [&](VertexId u) { return rank[u] > rank[v]; });
    const bool high = std::all_of(nb.begin(), nb.end(), [&](VertexId u) { return rank[u] < rank[v]; });
    if (low) out.first.push_back(v);
    if (high) out.second.push_back(v);
  }
  return out;
}

/// Lower/upper link component counts by explicit BFS over link edges.
inline std::pair<int, int> brute_force_link_components(const Triangulation& mesh, const std::vector<Rank>& rank,
                                                       VertexId v) {
  auto nb = mesh.neighbors(v);
  auto edges = mesh.link_adjacency(v);
  auto count = [&](bool lower) {
    std::set<VertexId> pending;
    for (auto u : nb)
      if ((rank[u] < rank[v]) == lower) pending.insert(u);
    int comps = 0;
    while (!pending.empty()) {
      ++comps;
      std::vector<VertexId> stack{*pending.begin()};
      pending.erase(pending.begin());
      while (!stack.empty()) {
        auto x = stack.back();
        stack.pop_back();
        for (const auto& [a, b] : edges) {
          VertexId y = a == x ? b : (b == x ? a : kNoVertex);
          if (y != kNoVertex && pending.count(y)) {
            pending.erase(y);
            stack.push_back(y);
          }
        }
      }
    }
    return comps;
  };
  return {count(true), count(false)};
}

}  // namespace lts::oracle
