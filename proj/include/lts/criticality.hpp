#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "lts/common.hpp"
#include "lts/order_field.hpp"
#include "lts/triangulation.hpp"

namespace lts {

enum class CriticalKind { Regular, Minimum, Maximum, Saddle };

inline const char* to_string(CriticalKind k) {
  switch (k) {
    case CriticalKind::Regular: return "regular";
    case CriticalKind::Minimum: return "minimum";
    case CriticalKind::Maximum: return "maximum";
    case CriticalKind::Saddle: return "saddle";
  }
  return "unknown";
}

struct Criticality {
  CriticalKind kind = CriticalKind::Regular;
  int lowerComponents = 0;
  int upperComponents = 0;
  bool degenerate = false;
};

struct SaddleRecord {
  VertexId vertex;
  int lowerComponents;
  int upperComponents;
  bool operator==(const SaddleRecord&) const = default;
};

struct CriticalSet {
  std::vector<VertexId> minima;
  std::vector<VertexId> maxima;
  std::vector<SaddleRecord> saddles;
};

/// True iff every neighbor ranks lower.
inline bool is_maximum(const Triangulation& mesh, const std::vector<Rank>& rank, VertexId v) {
  bool any = false, ok = true;
  mesh.for_each_neighbor(v, [&](VertexId u) {
    any = true;
    if (rank[u] > rank[v]) ok = false;
  });
  return any && ok;
}

inline bool is_minimum(const Triangulation& mesh, const std::vector<Rank>& rank, VertexId v) {
  bool any = false, ok = true;
  mesh.for_each_neighbor(v, [&](VertexId u) {
    any = true;
    if (rank[u] < rank[v]) ok = false;
  });
  return any && ok;
}

namespace detail {

// Components of the lower and upper link, via a tiny union-find over the
// neighbor slots of v.
inline Criticality classify_impl(const Triangulation& mesh, const std::vector<Rank>& rank, VertexId v) {
  constexpr int kInline = 32;
  VertexId inline_ids[kInline];
  int inline_parent[kInline];
  std::vector<VertexId> heap_ids;
  std::vector<int> heap_parent;
  VertexId* ids = inline_ids;
  int* parent = inline_parent;
  int deg = 0;
  if (mesh.max_degree() > kInline) {
    heap_ids.resize(mesh.max_degree());
    heap_parent.resize(mesh.max_degree());
    ids = heap_ids.data();
    parent = heap_parent.data();
  }
  mesh.for_each_neighbor(v, [&](VertexId u) {
    ids[deg] = u;
    parent[deg] = deg;
    ++deg;
  });
  const Rank rv = rank[v];
  int lower = 0, upper = 0;
  for (int i = 0; i < deg; ++i) (rank[ids[i]] < rv ? lower : upper)++;

  auto slot = [&](VertexId u) {
    for (int i = 0; i < deg; ++i)
      if (ids[i] == u) return i;
    return -1;
  };
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  mesh.for_each_link_edge(v, [&](VertexId a, VertexId b) {
    const bool la = rank[a] < rv, lb = rank[b] < rv;
    if (la != lb) return;
    const int ia = find(slot(a)), ib = find(slot(b));
    if (ia == ib) return;
    parent[ia] = ib;
    (la ? lower : upper)--;
  });

  Criticality c;
  c.lowerComponents = lower;
  c.upperComponents = upper;
  c.degenerate = lower > 2 || upper > 2;
  if (lower == 0 && upper > 0) c.kind = CriticalKind::Minimum;
  else if (upper == 0 && lower > 0) c.kind = CriticalKind::Maximum;
  else if (lower == 1 && upper == 1) c.kind = CriticalKind::Regular;
  else c.kind = CriticalKind::Saddle;
  return c;
}

}  // namespace detail

inline Criticality classify_vertex(const Triangulation& mesh, const OrderField& order, VertexId v) {
  mesh.check_vertex(v);
  if (order.size() != mesh.vertex_count()) throw Error(ErrorCode::SizeMismatch, "order and mesh sizes differ");
  return detail::classify_impl(mesh, order.rank, v);
}

/// Classifies every vertex; lists come out sorted by vertex id.
inline CriticalSet extract_critical_points(const Triangulation& mesh, const OrderField& order, int threads = 1) {
  if (order.size() != mesh.vertex_count()) throw Error(ErrorCode::SizeMismatch, "order and mesh sizes differ");
  const auto n = mesh.vertex_count();
  std::vector<Criticality> cls(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
  for (VertexId v = 0; v < n; ++v) cls[v] = detail::classify_impl(mesh, order.rank, v);
  CriticalSet out;
  for (VertexId v = 0; v < n; ++v) {
    switch (cls[v].kind) {
      case CriticalKind::Minimum: out.minima.push_back(v); break;
      case CriticalKind::Maximum: out.maxima.push_back(v); break;
      case CriticalKind::Saddle: out.saddles.push_back({v, cls[v].lowerComponents, cls[v].upperComponents}); break;
      case CriticalKind::Regular: break;
    }
  }
  return out;
}

/// Minima and maxima only, sorted by vertex id.
inline std::pair<std::vector<VertexId>, std::vector<VertexId>> extract_extrema(const Triangulation& mesh,
                                                                               const std::vector<Rank>& rank,
                                                                               int threads = 1) {
  const auto n = mesh.vertex_count();
  std::vector<std::int8_t> kind(static_cast<std::size_t>(n), 0);
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
  for (VertexId v = 0; v < n; ++v) {
    bool lo = true, hi = true;
    mesh.for_each_neighbor(v, [&](VertexId u) {
      if (rank[u] < rank[v]) lo = false;
      else hi = false;
    });
    kind[v] = lo ? -1 : (hi ? 1 : 0);
  }
  std::pair<std::vector<VertexId>, std::vector<VertexId>> out;
  for (VertexId v = 0; v < n; ++v) {
    if (kind[v] < 0) out.first.push_back(v);
    else if (kind[v] > 0) out.second.push_back(v);
  }
  return out;
}

/// Alternating Morse count #min - sum(lower-1 over saddles) + #max; equals the
/// Euler characteristic on a closed surface.
inline std::int64_t morse_count_check(const Triangulation& mesh, const OrderField& order) {
  if (mesh.is_grid() || mesh.has_boundary())
    throw Error(ErrorCode::MeshHasBoundary, "Morse count needs a closed surface");
  const auto cs = extract_critical_points(mesh, order);
  std::int64_t count = static_cast<std::int64_t>(cs.minima.size() + cs.maxima.size());
  for (const auto& s : cs.saddles) count -= s.lowerComponents - 1;
  return count;
}

}  // namespace lts
