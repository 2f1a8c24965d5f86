#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <parallel/algorithm>
#endif

#include "lts/common.hpp"

namespace lts {

/// Real values, one per vertex.
struct ScalarField {
  std::vector<double> values;

  VertexId size() const noexcept { return static_cast<VertexId>(values.size()); }
  double operator[](VertexId v) const { return values[static_cast<std::size_t>(v)]; }
  bool operator==(const ScalarField&) const = default;
};

/// A bijection vertex -> {0..n-1} together with its inverse (the sorted vertex list).
struct OrderField {
  std::vector<Rank> rank;
  std::vector<VertexId> inverse;

  VertexId size() const noexcept { return static_cast<VertexId>(rank.size()); }
  bool operator==(const OrderField&) const = default;

  /// Builds an order field from a rank array, checking it is a permutation.
  static OrderField from_ranks(std::vector<Rank> ranks) {
    OrderField o;
    o.inverse.assign(ranks.size(), kNoVertex);
    const auto n = static_cast<Rank>(ranks.size());
    for (std::size_t v = 0; v < ranks.size(); ++v) {
      const Rank r = ranks[v];
      if (r < 0 || r >= n || o.inverse[r] != kNoVertex)
        throw Error(ErrorCode::InvalidArgument, "rank array is not a permutation");
      o.inverse[r] = static_cast<VertexId>(v);
    }
    o.rank = std::move(ranks);
    return o;
  }

  static OrderField from_sorted(std::vector<VertexId> sorted) {
    OrderField o;
    o.rank.assign(sorted.size(), -1);
    for (std::size_t r = 0; r < sorted.size(); ++r) {
      const auto v = sorted[r];
      if (v < 0 || v >= static_cast<VertexId>(sorted.size()) || o.rank[v] != -1)
        throw Error(ErrorCode::InvalidArgument, "vertex list is not a permutation");
      o.rank[v] = static_cast<Rank>(r);
    }
    o.inverse = std::move(sorted);
    return o;
  }
};

/// How small a decrement the numeric realization uses.
struct ZetaPolicy {
  enum class Mode { RelativeEpsilon, UlpDecrement };
  Mode mode = Mode::RelativeEpsilon;
  double factor = 1e-12;
};

inline void check_finite(const ScalarField& f) {
  for (std::size_t v = 0; v < f.values.size(); ++v)
    if (!std::isfinite(f.values[v]))
      throw Error(ErrorCode::NonFiniteValue, "vertex " + std::to_string(v) + " has a non-finite value");
}

inline double value_range(const ScalarField& f) {
  if (f.values.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
  return *hi - *lo;
}

/// Sorts vertices by (value, id).
inline OrderField compute_order_field(const ScalarField& f, int threads = 1) {
  check_finite(f);
  std::vector<VertexId> sorted(f.values.size());
  std::iota(sorted.begin(), sorted.end(), VertexId{0});
  const auto& vals = f.values;
  auto less = [&vals](VertexId a, VertexId b) { return vals[a] < vals[b] || (vals[a] == vals[b] && a < b); };
#ifdef _OPENMP
  if (threads > 1)
    __gnu_parallel::sort(sorted.begin(), sorted.end(), less);
  else
    std::sort(sorted.begin(), sorted.end(), less);
#else
  (void)threads;
  std::sort(sorted.begin(), sorted.end(), less);
#endif
  return OrderField::from_sorted(std::move(sorted));
}

/// Rank n-1-r for every vertex: sublevel work runs on this as superlevel work.
inline OrderField reversed(const OrderField& o) {
  const auto n = o.size();
  OrderField r;
  r.rank.resize(o.rank.size());
  r.inverse.resize(o.inverse.size());
  for (VertexId v = 0; v < n; ++v) r.rank[v] = n - 1 - o.rank[v];
  for (Rank k = 0; k < n; ++k) r.inverse[k] = o.inverse[n - 1 - k];
  return r;
}

inline ScalarField negated(const ScalarField& f) {
  ScalarField g{f.values};
  for (auto& x : g.values) x = -x;
  return g;
}

/// Absolute decrement derived from the policy; 0 means "one ulp".
inline double zeta_step(const ScalarField& f, const ZetaPolicy& policy) {
  if (policy.mode == ZetaPolicy::Mode::UlpDecrement) return 0.0;
  return policy.factor * value_range(f);
}

namespace detail {

inline double step_below(double x, double zeta) {
  const double y = x - zeta;
  return y < x ? y : std::nextafter(x, -std::numeric_limits<double>::infinity());
}

inline double step_above(double x, double zeta) {
  const double y = x + zeta;
  return y > x ? y : std::nextafter(x, std::numeric_limits<double>::infinity());
}

}  // namespace detail

/// Visits vertices in decreasing G and lowers any vertex that is not below its
/// predecessor (ties resolved by id, as in compute_order_field). The result
/// orders exactly like G.
inline ScalarField realize_numeric(const ScalarField& f, const OrderField& G, const ZetaPolicy& zeta = {}) {
  if (f.size() != G.size()) throw Error(ErrorCode::SizeMismatch, "field and order sizes differ");
  check_finite(f);
  const double z = zeta_step(f, zeta);
  ScalarField g{f.values};
  const auto n = G.size();
  for (Rank r = n - 2; r >= 0; --r) {
    const VertexId v = G.inverse[r];
    const VertexId p = G.inverse[r + 1];
    const bool below = g.values[v] < g.values[p] || (g.values[v] == g.values[p] && v < p);
    if (!below) g.values[v] = detail::step_below(g.values[p], z);
  }
  return g;
}

/// Mirror of realize_numeric: visits vertices in increasing G and raises any
/// vertex that is not above its predecessor. Used for removed minima.
inline ScalarField realize_numeric_upward(const ScalarField& f, const OrderField& G, const ZetaPolicy& zeta = {}) {
  if (f.size() != G.size()) throw Error(ErrorCode::SizeMismatch, "field and order sizes differ");
  check_finite(f);
  const double z = zeta_step(f, zeta);
  ScalarField g{f.values};
  const auto n = G.size();
  for (Rank r = 1; r < n; ++r) {
    const VertexId v = G.inverse[r];
    const VertexId p = G.inverse[r - 1];
    const bool above = g.values[v] > g.values[p] || (g.values[v] == g.values[p] && v > p);
    if (!above) g.values[v] = detail::step_above(g.values[p], z);
  }
  return g;
}

inline double max_abs_difference(const ScalarField& a, const ScalarField& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::SizeMismatch, "field sizes differ");
  double d = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
  return d;
}

}  // namespace lts
