#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <list>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <parallel/algorithm>
#endif

#include "lts/common.hpp"
#include "lts/criticality.hpp"
#include "lts/disjoint_set.hpp"
#include "lts/mergeable_heap.hpp"
#include "lts/order_field.hpp"
#include "lts/propagation.hpp"
#include "lts/triangulation.hpp"

namespace lts {

/// One hill chain: the superlevel component above `saddle` that holds the
/// discarded maxima in `seedMaxima`. `vertices` is sorted and contains the saddle.
struct Region {
  VertexId saddle = kNoVertex;
  std::vector<VertexId> vertices;
  std::vector<VertexId> seedMaxima;
  Rank regionId = 0;  // rank of the highest seed
};

/// Local ranks for one region, aligned with Region::vertices.
struct LocalOrder {
  std::vector<VertexId> vertices;
  std::vector<Rank> rank;
  int iterations = 0;
};

struct ConstraintSet {
  std::vector<VertexId> preserveMinima;
  std::vector<VertexId> preserveMaxima;
};

struct SimplifyOptions {
  ZetaPolicy zeta;
  bool restoreInteriorExtrema = true;
  int maxIterations = 100;
  int threadCount = 0;  // 0: all available
};

struct RegionSummary {
  VertexId saddle = kNoVertex;
  Rank regionId = 0;
  bool sublevel = false;  // flattened a basin rather than a hill
  int round = 0;
  int iterations = 0;
  std::int64_t size = 0;
  double height = 0.0;  // |value(extremum) - value(saddle)| when the region was flattened
  std::vector<VertexId> vertices;
  std::vector<VertexId> seeds;
};

struct PhaseTimings {
  double discover = 0, localize = 0, integrate = 0, restore = 0, verify = 0, realize = 0;
  double total() const { return discover + localize + integrate + restore + verify + realize; }
};

struct SimplifyReport {
  std::int64_t regionCount = 0;
  std::int64_t largestRegion = 0;
  std::vector<int> iterations;  // per region
  int maxIterationCount = 0;
  double meanIterationCount = 0.0;
  int rounds = 0;
  std::int64_t restoredMinima = 0;
  std::int64_t restoredMaxima = 0;
  double maxInfinityDeviation = 0.0;
  double maxRegionHeight = 0.0;
  double zetaSlack = 0.0;  // largest drop accumulated along a run of perturbed vertices
  PhaseTimings timings;
  std::vector<RegionSummary> regions;
};

/// One order produced during removal, realized with a lowering sweep or, for
/// removed minima and restored maxima, with a raising sweep.
struct OrderStage {
  OrderField order;
  bool raise = false;
  std::size_t regionsBegin = 0, regionsEnd = 0;
};

struct RemovalResult {
  OrderField order;
  SimplifyReport report;
  std::vector<OrderStage> stages;
};

struct SimplifyResult {
  ScalarField field;
  OrderField order;
  SimplifyReport report;
};

struct ConstraintReport {
  bool ok = true;
  std::vector<VertexId> extraMinima, extraMaxima;      // extrema of G not asked for
  std::vector<VertexId> missingMinima, missingMaxima;  // requested but absent
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline std::vector<VertexId> sorted_unique(std::vector<VertexId> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline std::vector<VertexId> set_minus(const std::vector<VertexId>& a, const std::vector<VertexId>& b) {
  std::vector<VertexId> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

/// Groups propagation objects into regions. An absorbed object joins its
/// absorber unless the absorber survives (persistent or exhausted), in which
/// case it heads its own region ending at the absorption saddle.
inline std::vector<Region> group_regions(const PropagationOutcome& out, const std::vector<Rank>& rank) {
  const auto k = static_cast<std::int64_t>(out.seed.size());
  auto survivor = [&](std::int32_t i) {
    return out.status[i] == PropStatus::Persistent || out.status[i] == PropStatus::Exhausted;
  };
  DisjointSet groups(k);
  std::vector<char> head(static_cast<std::size_t>(k), 0);
  for (std::int32_t i = 0; i < k; ++i) {
    if (out.status[i] == PropStatus::Halted) head[i] = 1;
    else if (out.status[i] == PropStatus::Absorbed) {
      const auto a = out.absorbedBy[i];
      if (survivor(a)) head[i] = 1;
      else groups.unite(i, a);
    }
  }
  std::vector<std::int64_t> slot(static_cast<std::size_t>(k), -1);
  std::vector<Region> regions;
  for (std::int32_t i = 0; i < k; ++i) {
    if (!head[i]) continue;
    slot[groups.find(i)] = static_cast<std::int64_t>(regions.size());
    Region r;
    r.saddle = out.stop[i];
    regions.push_back(std::move(r));
  }
  for (std::int32_t i = 0; i < k; ++i) {
    if (survivor(i)) continue;
    const auto s = slot[groups.find(i)];
    if (s < 0) continue;
    auto& r = regions[s];
    r.vertices.insert(r.vertices.end(), out.owned[i].begin(), out.owned[i].end());
    r.seedMaxima.push_back(out.seed[i]);
    r.regionId = std::max(r.regionId, rank[out.seed[i]]);
  }
  for (auto& r : regions) {
    r.vertices.push_back(r.saddle);
    std::sort(r.vertices.begin(), r.vertices.end());
    std::sort(r.seedMaxima.begin(), r.seedMaxima.end());
  }
  std::sort(regions.begin(), regions.end(), [](const Region& a, const Region& b) { return a.regionId < b.regionId; });
  return regions;
}

/// Alternating max/min passes over one region. `regionOf` and `localIndex`
/// must be filled for every non-saddle vertex of the region.
inline LocalOrder simplify_region(const Triangulation& mesh, const std::vector<Rank>& rankF, const Region& region,
                                  std::int32_t regionIdx, const std::vector<std::int32_t>& regionOf,
                                  const std::vector<std::int32_t>& localIndex, int maxIterations) {
  const VertexId s = region.saddle;
  std::vector<VertexId> interior;
  interior.reserve(region.vertices.size());
  for (auto v : region.vertices)
    if (v != s) interior.push_back(v);
  const auto m = static_cast<std::int32_t>(interior.size());

  // Local adjacency, saddle contact and outside contact.
  std::vector<std::int32_t> adjStart(static_cast<std::size_t>(m) + 1, 0), adj;
  std::vector<char> touchesSaddle(static_cast<std::size_t>(m), 0), touchesOutside(static_cast<std::size_t>(m), 0);
  for (std::int32_t i = 0; i < m; ++i) {
    mesh.for_each_neighbor(interior[i], [&](VertexId u) {
      if (u == s) touchesSaddle[i] = 1;
      else if (regionOf[u] == regionIdx) adj.push_back(localIndex[u]);
      else touchesOutside[i] = 1;
    });
    adjStart[i + 1] = static_cast<std::int32_t>(adj.size());
  }

  // l0: F order, with the lowest outside-touching vertex pinned to the bottom.
  std::vector<std::int32_t> byF(static_cast<std::size_t>(m));
  for (std::int32_t i = 0; i < m; ++i) byF[i] = i;
  std::sort(byF.begin(), byF.end(), [&](std::int32_t a, std::int32_t b) { return rankF[interior[a]] < rankF[interior[b]]; });
  std::int32_t v0 = -1;
  for (auto i : byF)
    if (touchesOutside[i]) {
      v0 = i;
      break;
    }
  if (v0 < 0)
    throw Error(ErrorCode::InvalidArgument, "region at saddle " + std::to_string(s) + " has no vertex with an outside neighbor");
  std::vector<Rank> cur(static_cast<std::size_t>(m));
  cur[v0] = 0;
  Rank next = 1;
  for (auto i : byF)
    if (i != v0) cur[i] = next++;

  std::vector<char> seen(static_cast<std::size_t>(m));

  auto max_pass = [&] {
    std::fill(seen.begin(), seen.end(), 0);
    MaxRankHeap heap;
    for (std::int32_t i = 0; i < m; ++i)
      if (touchesSaddle[i]) {
        heap.push(cur[i], i);
        seen[i] = 1;
      }
    Rank out = m - 1;
    while (!heap.empty()) {
      const auto i = static_cast<std::int32_t>(heap.pop().second);
      cur[i] = out--;
      for (auto e = adjStart[i]; e < adjStart[i + 1]; ++e) {
        const auto j = adj[e];
        if (!seen[j]) {
          seen[j] = 1;
          heap.push(cur[j], j);
        }
      }
    }
  };

  auto is_local_min = [&](std::int32_t i) {
    for (auto e = adjStart[i]; e < adjStart[i + 1]; ++e)
      if (cur[adj[e]] < cur[i]) return false;
    return true;
  };
  auto is_local_max = [&](std::int32_t i) {
    if (touchesSaddle[i]) return false;
    for (auto e = adjStart[i]; e < adjStart[i + 1]; ++e)
      if (cur[adj[e]] > cur[i]) return false;
    return true;
  };

  auto min_pass = [&] {
    std::fill(seen.begin(), seen.end(), 0);
    MinRankHeap heap;
    for (std::int32_t i = 0; i < m; ++i)
      if (touchesOutside[i] && is_local_min(i)) {
        heap.push(cur[i], i);
        seen[i] = 1;
      }
    // No authorized minimum left: treat the whole outside as one virtual
    // minimum and grow from every vertex that touches it.
    if (heap.empty())
      for (std::int32_t i = 0; i < m; ++i)
        if (touchesOutside[i]) {
          heap.push(cur[i], i);
          seen[i] = 1;
        }
    Rank out = 0;
    while (!heap.empty()) {
      const auto i = static_cast<std::int32_t>(heap.pop().second);
      cur[i] = out++;
      for (auto e = adjStart[i]; e < adjStart[i + 1]; ++e) {
        const auto j = adj[e];
        if (!seen[j]) {
          seen[j] = 1;
          heap.push(cur[j], j);
        }
      }
    }
  };

  auto unauthorized_min = [&] {
    for (std::int32_t i = 0; i < m; ++i)
      if (!touchesOutside[i] && is_local_min(i)) return true;
    return false;
  };
  auto extra_max = [&] {
    for (std::int32_t i = 0; i < m; ++i)
      if (is_local_max(i)) return true;
    return false;
  };

  // Alternating passes can fall into a cycle. When a max pass repeats an
  // earlier one, switch to a bipolar (st) ordering of the hill graph between
  // a virtual outside minimum and s, which has no spurious extrema whenever
  // the graph plus the edge (outside, s) is biconnected.
  auto bipolar = [&] {
    const std::int32_t S = m, V = m + 1, n = m + 2;
    std::vector<std::vector<std::int32_t>> g(static_cast<std::size_t>(n));
    g[V].push_back(S);
    g[S].push_back(V);
    for (std::int32_t i = 0; i < m; ++i) {
      for (auto e = adjStart[i]; e < adjStart[i + 1]; ++e) g[i].push_back(adj[e]);
      if (touchesSaddle[i]) {
        g[i].push_back(S);
        g[S].push_back(i);
      }
      if (touchesOutside[i]) {
        g[i].push_back(V);
        g[V].push_back(i);
      }
    }
    std::vector<std::int32_t> pre(n, -1), parent(n, -1), low(n), preorder, stack{V};
    std::vector<std::size_t> it(n, 0);
    pre[V] = 0;
    low[V] = V;
    preorder.push_back(V);
    std::int32_t count = 1;
    while (!stack.empty()) {
      const auto v = stack.back();
      if (it[v] < g[v].size()) {
        const auto u = g[v][it[v]++];
        if (pre[u] < 0) {
          pre[u] = count++;
          parent[u] = v;
          low[u] = u;
          preorder.push_back(u);
          stack.push_back(u);
        } else if (u != parent[v] && pre[u] < pre[low[v]]) {
          low[v] = u;
        }
      } else {
        stack.pop_back();
        if (parent[v] >= 0 && pre[low[v]] < pre[low[parent[v]]]) low[parent[v]] = low[v];
      }
    }
    std::list<std::int32_t> order{V, S};
    std::vector<std::list<std::int32_t>::iterator> where(n);
    where[V] = order.begin();
    where[S] = std::next(order.begin());
    std::vector<signed char> sign(n, 0);
    sign[V] = -1;
    for (auto v : preorder) {
      if (v == V || v == S) continue;
      const auto p = parent[v];
      if (sign[low[v]] == -1) {
        where[v] = order.insert(where[p], v);
        sign[p] = 1;
      } else {
        where[v] = order.insert(std::next(where[p]), v);
        sign[p] = -1;
      }
    }
    Rank r = 0;
    for (auto v : order)
      if (v != V && v != S) cur[v] = r++;
  };

  std::vector<std::vector<Rank>> history;
  int iterations = 0;
  for (;;) {
    max_pass();
    ++iterations;
    if (!unauthorized_min()) break;
    if (std::find(history.begin(), history.end(), cur) != history.end()) {
      bipolar();
      ++iterations;
      if (unauthorized_min() || extra_max())
        throw Error(ErrorCode::IterationCapExceeded,
                    "region at saddle " + std::to_string(s) + " admits no order with s as its only maximum");
      break;
    }
    history.push_back(cur);
    if (iterations >= maxIterations) throw Error(ErrorCode::IterationCapExceeded, "region at saddle " + std::to_string(s));
    min_pass();
    ++iterations;
    if (!extra_max()) break;
    if (iterations >= maxIterations) throw Error(ErrorCode::IterationCapExceeded, "region at saddle " + std::to_string(s));
  }

  LocalOrder lo;
  lo.vertices = region.vertices;
  lo.rank.resize(region.vertices.size());
  lo.iterations = iterations;
  for (std::size_t p = 0; p < region.vertices.size(); ++p) {
    const auto v = region.vertices[p];
    lo.rank[p] = v == s ? static_cast<Rank>(m) : cur[localIndex[v]];
  }
  return lo;
}

struct IntegrationKey {
  Rank primary, secondary, tertiary;
  auto operator<=>(const IntegrationKey&) const = default;
};

}  // namespace detail

/// Propagates from every discarded maximum and returns the hill chains.
inline std::vector<Region> discover_regions(const Triangulation& mesh, const OrderField& F,
                                            const std::vector<VertexId>& discardMaxima, int threads = 1) {
  if (F.size() != mesh.vertex_count()) throw Error(ErrorCode::SizeMismatch, "order and mesh sizes differ");
  auto seeds = detail::sorted_unique(discardMaxima);
  for (auto v : seeds) {
    mesh.check_vertex(v);
    if (!is_maximum(mesh, F.rank, v)) throw Error(ErrorCode::NotAnExtremum, "vertex " + std::to_string(v) + " is not a maximum");
  }
  if (seeds.empty()) return {};
  detail::PropagationEngine engine(mesh, F.rank);
  auto out = engine.run(seeds, resolve_threads(threads));
  for (std::size_t i = 0; i < seeds.size(); ++i)
    if (out.status[i] == detail::PropStatus::Exhausted)
      throw Error(ErrorCode::ReachedGlobalExtremum, "propagation from " + std::to_string(seeds[i]) + " covered the whole domain");
  return detail::group_regions(out, F.rank);
}

/// Local order for a single region; its vertices must not belong to any other region.
inline LocalOrder localize_simplify_region(const Triangulation& mesh, const OrderField& F, const Region& region,
                                           int maxIterations = 100) {
  std::vector<std::int32_t> regionOf(static_cast<std::size_t>(mesh.vertex_count()), -1);
  std::vector<std::int32_t> localIndex(static_cast<std::size_t>(mesh.vertex_count()), -1);
  std::int32_t next = 0;
  for (auto v : region.vertices)
    if (v != region.saddle) {
      regionOf[v] = 0;
      localIndex[v] = next++;
    }
  return detail::simplify_region(mesh, F.rank, region, 0, regionOf, localIndex, maxIterations);
}

/// Sorts every vertex by its integration key and returns the resulting order.
inline OrderField integrate_local_orders(const OrderField& F, const std::vector<Region>& regions,
                                         const std::vector<LocalOrder>& locals, int threads = 1) {
  using detail::IntegrationKey;
  if (regions.size() != locals.size()) throw Error(ErrorCode::SizeMismatch, "one local order per region expected");
  const auto n = F.size();
  std::vector<IntegrationKey> key(static_cast<std::size_t>(n));
  for (VertexId v = 0; v < n; ++v) key[v] = {F.rank[v], 0, 0};
  std::vector<char> claimed(static_cast<std::size_t>(n), 0);  // 1 interior, 2 saddle
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto& reg = regions[r];
    const auto& lo = locals[r];
    const Rank top = F.rank[reg.saddle];
    for (std::size_t p = 0; p < lo.vertices.size(); ++p) {
      const auto v = lo.vertices[p];
      if (v == reg.saddle) {
        if (claimed[v] == 1) throw Error(ErrorCode::KeyCollision, "saddle " + std::to_string(v) + " lies inside another region");
        claimed[v] = 2;
        key[v] = {top, kRankMax, kRankMax};
      } else {
        if (claimed[v] != 0) throw Error(ErrorCode::KeyCollision, "vertex " + std::to_string(v) + " belongs to two regions");
        claimed[v] = 1;
        key[v] = {top, lo.rank[p], reg.regionId};
      }
    }
  }
  std::vector<VertexId> sorted(static_cast<std::size_t>(n));
  for (VertexId v = 0; v < n; ++v) sorted[v] = v;
  auto less = [&key](VertexId a, VertexId b) { return key[a] < key[b]; };
#ifdef _OPENMP
  if (threads > 1)
    __gnu_parallel::sort(sorted.begin(), sorted.end(), less);
  else
    std::sort(sorted.begin(), sorted.end(), less);
#else
  (void)threads;
  std::sort(sorted.begin(), sorted.end(), less);
#endif
  for (VertexId i = 1; i < n; ++i)
    if (key[sorted[i - 1]] == key[sorted[i]])
      throw Error(ErrorCode::KeyCollision, "vertices " + std::to_string(sorted[i - 1]) + " and " + std::to_string(sorted[i]));
  return OrderField::from_sorted(std::move(sorted));
}

/// Moves each vertex of `toRestore` just below its lowest neighbor (minima) or
/// just above its highest neighbor (maxima). Vertices that already are extrema
/// of the requested kind are left alone.
inline OrderField restore_interior_extrema(const Triangulation& mesh, const OrderField& G,
                                           const std::vector<VertexId>& toRestore, bool maxima = false) {
  OrderField out = G;
  for (auto v : detail::sorted_unique(toRestore)) {
    mesh.check_vertex(v);
    if (maxima ? is_maximum(mesh, out.rank, v) : is_minimum(mesh, out.rank, v)) continue;
    VertexId anchor = kNoVertex;
    mesh.for_each_neighbor(v, [&](VertexId u) {
      if (anchor == kNoVertex || (maxima ? out.rank[u] > out.rank[anchor] : out.rank[u] < out.rank[anchor])) anchor = u;
    });
    auto& list = out.inverse;
    const Rank from = out.rank[v];
    list.erase(list.begin() + from);
    const Rank at = out.rank[anchor] - (out.rank[anchor] > from ? 1 : 0);
    list.insert(list.begin() + (maxima ? at + 1 : at), v);
    const Rank lo = std::min<Rank>(from, maxima ? at + 1 : at);
    const Rank hi = std::max<Rank>(from, maxima ? at + 1 : at);
    for (Rank r = lo; r <= hi; ++r) out.rank[list[r]] = r;
  }
  return out;
}

/// Recomputes the extrema of G and compares them with the constraints. The
/// global minimum and maximum of G always count as requested.
inline ConstraintReport verify_constraints(const Triangulation& mesh, const OrderField& G, const ConstraintSet& c,
                                           int threads = 1) {
  auto [mins, maxs] = extract_extrema(mesh, G.rank, threads);
  auto wantMin = c.preserveMinima, wantMax = c.preserveMaxima;
  if (G.size() > 0) {
    wantMin.push_back(G.inverse.front());
    wantMax.push_back(G.inverse.back());
  }
  wantMin = detail::sorted_unique(std::move(wantMin));
  wantMax = detail::sorted_unique(std::move(wantMax));
  ConstraintReport r;
  r.extraMinima = detail::set_minus(mins, wantMin);
  r.extraMaxima = detail::set_minus(maxs, wantMax);
  r.missingMinima = detail::set_minus(wantMin, mins);
  r.missingMaxima = detail::set_minus(wantMax, maxs);
  r.ok = r.extraMinima.empty() && r.extraMaxima.empty() && r.missingMinima.empty() && r.missingMaxima.empty();
  return r;
}

namespace detail {

// discover -> localize -> integrate on one polarity; appends region summaries.
inline OrderField removal_pass(const Triangulation& mesh, const OrderField& F, const std::vector<VertexId>& discard,
                               const SimplifyOptions& opt, bool sublevel, int round, SimplifyReport& report) {
  const int threads = resolve_threads(opt.threadCount);
  auto t0 = Clock::now();
  auto regions = discover_regions(mesh, F, discard, threads);
  report.timings.discover += seconds_since(t0);
  if (regions.empty()) return F;

  t0 = Clock::now();
  const auto n = mesh.vertex_count();
  std::vector<std::int32_t> regionOf(static_cast<std::size_t>(n), -1), localIndex(static_cast<std::size_t>(n), -1);
  for (std::size_t r = 0; r < regions.size(); ++r) {
    std::int32_t next = 0;
    for (auto v : regions[r].vertices)
      if (v != regions[r].saddle) {
        regionOf[v] = static_cast<std::int32_t>(r);
        localIndex[v] = next++;
      }
  }
  const auto count = static_cast<std::int64_t>(regions.size());
  std::vector<LocalOrder> locals(regions.size());
  bool failed = false;
  std::string failure;
  ErrorCode failureCode = ErrorCode::InvalidArgument;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (threads > 1 && count > 1)
  for (std::int64_t r = 0; r < count; ++r) {
    try {
      locals[r] = simplify_region(mesh, F.rank, regions[r], static_cast<std::int32_t>(r), regionOf, localIndex,
                                  opt.maxIterations);
    } catch (const Error& e) {
#pragma omp critical(lts_region_failure)
      {
        failed = true;
        failure = e.what();
        failureCode = e.code();
      }
    }
  }
  if (failed) throw Error(failureCode, failure);
  report.timings.localize += seconds_since(t0);

  t0 = Clock::now();
  auto G = integrate_local_orders(F, regions, locals, threads);
  report.timings.integrate += seconds_since(t0);

  for (std::size_t r = 0; r < regions.size(); ++r) {
    RegionSummary s;
    s.saddle = regions[r].saddle;
    s.regionId = regions[r].regionId;
    s.sublevel = sublevel;
    s.round = round;
    s.iterations = locals[r].iterations;
    s.size = static_cast<std::int64_t>(regions[r].vertices.size());
    s.vertices = std::move(regions[r].vertices);
    s.seeds = std::move(regions[r].seedMaxima);
    report.regions.push_back(std::move(s));
  }
  return G;
}

inline void finalize_report(SimplifyReport& report) {
  report.regionCount = static_cast<std::int64_t>(report.regions.size());
  report.iterations.clear();
  report.largestRegion = 0;
  report.maxIterationCount = 0;
  double sum = 0;
  for (const auto& r : report.regions) {
    report.iterations.push_back(r.iterations);
    report.largestRegion = std::max(report.largestRegion, r.size);
    report.maxIterationCount = std::max(report.maxIterationCount, r.iterations);
    sum += r.iterations;
  }
  report.meanIterationCount = report.regions.empty() ? 0.0 : sum / static_cast<double>(report.regions.size());
}

}  // namespace detail

/// Removes the given maxima, then the given minima, of F. Restoration and
/// verification follow; all steps repeat until the extrema match (bounded by
/// options.maxIterations rounds).
inline RemovalResult remove_extrema(const Triangulation& mesh, const OrderField& F,
                                    const std::vector<VertexId>& discardMaxima,
                                    const std::vector<VertexId>& discardMinima, const SimplifyOptions& options = {}) {
  using namespace detail;
  if (options.maxIterations < 1) throw Error(ErrorCode::InvalidArgument, "maxIterations must be at least 1");
  if (F.size() != mesh.vertex_count()) throw Error(ErrorCode::SizeMismatch, "order and mesh sizes differ");
  const int threads = resolve_threads(options.threadCount);
  auto [minsF, maxsF] = extract_extrema(mesh, F.rank, threads);
  const auto dMax = sorted_unique(discardMaxima), dMin = sorted_unique(discardMinima);
  for (auto v : dMax)
    if (!std::binary_search(maxsF.begin(), maxsF.end(), v))
      throw Error(ErrorCode::NotAnExtremum, "vertex " + std::to_string(v) + " is not a maximum");
  for (auto v : dMin)
    if (!std::binary_search(minsF.begin(), minsF.end(), v))
      throw Error(ErrorCode::NotAnExtremum, "vertex " + std::to_string(v) + " is not a minimum");
  const ConstraintSet keep{set_minus(minsF, dMin), set_minus(maxsF, dMax)};

  RemovalResult res;
  auto& report = res.report;
  OrderField G = F;
  bool ok = dMax.empty() && dMin.empty();
  int round = 0;
  while (!ok) {
    if (round >= options.maxIterations)
      throw Error(ErrorCode::RestorationConflict, "extrema still differ from the request after " + std::to_string(round) + " rounds");
    ++round;
    auto [mins, maxs] = extract_extrema(mesh, G.rank, threads);
    auto killMax = set_minus(maxs, keep.preserveMaxima);
    if (!killMax.empty()) {
      const auto before = report.regions.size();
      G = removal_pass(mesh, G, killMax, options, false, round, report);
      res.stages.push_back({G, false, before, report.regions.size()});
      mins = extract_extrema(mesh, G.rank, threads).first;
    }
    auto killMin = set_minus(mins, keep.preserveMinima);
    if (!killMin.empty()) {
      const auto before = report.regions.size();
      G = reversed(removal_pass(mesh, reversed(G), killMin, options, true, round, report));
      res.stages.push_back({G, true, before, report.regions.size()});
    }
    if (options.restoreInteriorExtrema) {
      auto t0 = Clock::now();
      auto [m2, M2] = extract_extrema(mesh, G.rank, threads);
      auto lostMin = set_minus(keep.preserveMinima, m2);
      if (!lostMin.empty()) {
        G = restore_interior_extrema(mesh, G, lostMin, false);
        report.restoredMinima += static_cast<std::int64_t>(lostMin.size());
        res.stages.push_back({G, false, report.regions.size(), report.regions.size()});
        M2 = extract_extrema(mesh, G.rank, threads).second;
      }
      auto lostMax = set_minus(keep.preserveMaxima, M2);
      if (!lostMax.empty()) {
        G = restore_interior_extrema(mesh, G, lostMax, true);
        report.restoredMaxima += static_cast<std::int64_t>(lostMax.size());
        res.stages.push_back({G, true, report.regions.size(), report.regions.size()});
      }
      report.timings.restore += seconds_since(t0);
    }
    auto t0 = Clock::now();
    auto [m3, M3] = extract_extrema(mesh, G.rank, threads);
    if (options.restoreInteriorExtrema)
      ok = m3 == keep.preserveMinima && M3 == keep.preserveMaxima;
    else
      ok = set_minus(m3, keep.preserveMinima).empty() && set_minus(M3, keep.preserveMaxima).empty();
    report.timings.verify += seconds_since(t0);
  }
  report.rounds = round;
  finalize_report(report);
  res.order = std::move(G);
  return res;
}

namespace detail {

// Realizes the stages one after another and fills the numeric report fields.
inline ScalarField realize_stages(const ScalarField& f, RemovalResult& removal, const ZetaPolicy& zeta) {
  auto& report = removal.report;
  const auto t0 = Clock::now();
  ScalarField g = f;
  for (const auto& stage : removal.stages) {
    for (auto r = stage.regionsBegin; r < stage.regionsEnd; ++r) {
      auto& reg = report.regions[r];
      double h = 0;
      for (auto v : reg.vertices) h = std::max(h, std::abs(g.values[v] - g.values[reg.saddle]));
      reg.height = h;
      report.maxRegionHeight = std::max(report.maxRegionHeight, h);
    }
    ScalarField next = stage.raise ? realize_numeric_upward(g, stage.order, zeta) : realize_numeric(g, stage.order, zeta);
    // Runs of perturbed vertices hang off one untouched anchor; track the largest drift from it.
    const auto& inv = stage.order.inverse;
    const auto n = static_cast<Rank>(inv.size());
    double anchor = 0;
    bool inRun = false;
    for (Rank i = 0; i < n; ++i) {
      const Rank r = stage.raise ? i : n - 1 - i;
      const auto v = inv[r];
      if (next.values[v] != g.values[v]) {
        if (!inRun && i > 0) anchor = next.values[inv[stage.raise ? r - 1 : r + 1]];
        inRun = true;
        report.zetaSlack = std::max(report.zetaSlack, std::abs(next.values[v] - anchor));
      } else {
        inRun = false;
      }
    }
    g = std::move(next);
  }
  report.timings.realize += seconds_since(t0);
  report.maxInfinityDeviation = max_abs_difference(f, g);
  return g;
}

}  // namespace detail

/// Simplifies f so that its extrema are exactly the preserved ones (plus the
/// global minimum and maximum, which are always kept).
inline SimplifyResult simplify_field(const Triangulation& mesh, const ScalarField& f, const ConstraintSet& constraints,
                                     const SimplifyOptions& options = {}) {
  if (f.size() != mesh.vertex_count()) throw Error(ErrorCode::SizeMismatch, "field and mesh sizes differ");
  const int threads = resolve_threads(options.threadCount);
  const OrderField F = compute_order_field(f, threads);
  auto [mins, maxs] = extract_extrema(mesh, F.rank, threads);
  auto keepMin = detail::sorted_unique(constraints.preserveMinima);
  auto keepMax = detail::sorted_unique(constraints.preserveMaxima);
  for (auto v : keepMin) {
    mesh.check_vertex(v);
    if (!std::binary_search(mins.begin(), mins.end(), v))
      throw Error(ErrorCode::ConstraintNotExtremum, "vertex " + std::to_string(v) + " is not a minimum");
  }
  for (auto v : keepMax) {
    mesh.check_vertex(v);
    if (!std::binary_search(maxs.begin(), maxs.end(), v))
      throw Error(ErrorCode::ConstraintNotExtremum, "vertex " + std::to_string(v) + " is not a maximum");
  }
  keepMin.push_back(F.inverse.front());
  keepMax.push_back(F.inverse.back());
  keepMin = detail::sorted_unique(std::move(keepMin));
  keepMax = detail::sorted_unique(std::move(keepMax));

  auto removal = remove_extrema(mesh, F, detail::set_minus(maxs, keepMax), detail::set_minus(mins, keepMin), options);
  SimplifyResult out;
  out.field = detail::realize_stages(f, removal, options.zeta);
  out.order = std::move(removal.order);
  out.report = std::move(removal.report);
  return out;
}

}  // namespace lts
