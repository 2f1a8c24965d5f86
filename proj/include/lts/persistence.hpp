#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "lts/common.hpp"
#include "lts/criticality.hpp"
#include "lts/lts_engine.hpp"
#include "lts/order_field.hpp"
#include "lts/propagation.hpp"
#include "lts/triangulation.hpp"

namespace lts {

enum class Polarity { MaxSaddle, MinSaddle };

inline const char* to_string(Polarity p) { return p == Polarity::MaxSaddle ? "max-saddle" : "min-saddle"; }

/// An extremum and the saddle where its component dies. The global pair has
/// no saddle and is paired with the opposite global extremum instead.
struct PersistencePair {
  VertexId extremum = kNoVertex;
  VertexId saddle = kNoVertex;
  double birth = 0, death = 0, persistence = 0;
  Polarity polarity = Polarity::MaxSaddle;
  bool operator==(const PersistencePair&) const = default;
};

struct PairingResult {
  std::vector<PersistencePair> pairs;  // persistence < epsilon, sorted by (persistence, extremum)
  std::vector<VertexId> survivors;     // sorted by vertex id
};

struct CurvePoint {
  double threshold = 0;
  std::int64_t count = 0;
  bool operator==(const CurvePoint&) const = default;
};

using PersistenceCurve = std::vector<CurvePoint>;

inline void sort_pairs(std::vector<PersistencePair>& pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const PersistencePair& a, const PersistencePair& b) {
    if (a.persistence != b.persistence) return a.persistence < b.persistence;
    if (a.polarity != b.polarity) return a.polarity < b.polarity;
    return a.extremum < b.extremum;
  });
}

/// Extremum-saddle pairs of one polarity, found by propagating from every
/// extremum. Propagations whose height reaches epsilon stop and survive.
inline PairingResult compute_extremum_saddle_pairs(const Triangulation& mesh, const ScalarField& f, const OrderField& F,
                                                   Polarity polarity,
                                                   double epsilon = std::numeric_limits<double>::infinity(),
                                                   int threads = 1) {
  if (f.size() != mesh.vertex_count() || F.size() != mesh.vertex_count())
    throw Error(ErrorCode::SizeMismatch, "field, order and mesh sizes differ");
  if (!(epsilon >= 0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be non-negative");
  const bool up = polarity == Polarity::MaxSaddle;
  const OrderField R = up ? OrderField{} : reversed(F);
  const auto& rank = up ? F.rank : R.rank;
  const ScalarField vals = up ? ScalarField{} : negated(f);
  const double* v = up ? f.values.data() : vals.values.data();

  auto [mins, maxs] = extract_extrema(mesh, rank, resolve_threads(threads));
  detail::PropagationEngine engine(mesh, rank, v, epsilon);
  auto out = engine.run(maxs, resolve_threads(threads));

  PairingResult res;
  for (std::size_t i = 0; i < maxs.size(); ++i) {
    const auto st = out.status[i];
    if (st == detail::PropStatus::Absorbed || st == detail::PropStatus::Halted) {
      PersistencePair p;
      p.extremum = out.seed[i];
      p.saddle = out.stop[i];
      p.birth = f.values[p.extremum];
      p.death = f.values[p.saddle];
      p.persistence = std::abs(p.birth - p.death);
      p.polarity = polarity;
      res.pairs.push_back(p);
    } else {
      res.survivors.push_back(out.seed[i]);
    }
  }
  sort_pairs(res.pairs);
  std::sort(res.survivors.begin(), res.survivors.end());
  return res;
}

/// The pair made of the global maximum and the global minimum.
inline PersistencePair global_pair(const ScalarField& f, const OrderField& F, Polarity polarity) {
  PersistencePair p;
  const bool up = polarity == Polarity::MaxSaddle;
  p.extremum = up ? F.inverse.back() : F.inverse.front();
  p.birth = f.values[p.extremum];
  p.death = f.values[up ? F.inverse.front() : F.inverse.back()];
  p.persistence = std::abs(p.birth - p.death);
  p.polarity = polarity;
  return p;
}

/// Full half-diagram of one polarity, global pair included.
inline std::vector<PersistencePair> persistence_diagram(const Triangulation& mesh, const ScalarField& f,
                                                        const OrderField& F, Polarity polarity, int threads = 1) {
  auto res = compute_extremum_saddle_pairs(mesh, f, F, polarity, std::numeric_limits<double>::infinity(), threads);
  res.pairs.push_back(global_pair(f, F, polarity));
  sort_pairs(res.pairs);
  return res.pairs;
}

/// Number of pairs with persistence >= threshold, evaluated at every distinct persistence.
inline PersistenceCurve persistence_curve(const std::vector<PersistencePair>& pairs) {
  std::vector<double> p;
  p.reserve(pairs.size());
  for (const auto& q : pairs) p.push_back(q.persistence);
  std::sort(p.begin(), p.end());
  PersistenceCurve curve;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i > 0 && p[i] == p[i - 1]) continue;
    curve.push_back({p[i], static_cast<std::int64_t>(p.size() - i)});
  }
  return curve;
}

/// Step-function value of a curve at an arbitrary threshold.
inline std::int64_t curve_count_at(const PersistenceCurve& curve, double threshold) {
  auto it = std::lower_bound(curve.begin(), curve.end(), threshold,
                             [](const CurvePoint& c, double t) { return c.threshold < t; });
  return it == curve.end() ? 0 : it->count;
}

/// Both polarities merged; the global pair, shared by both, counts once.
inline std::vector<PersistencePair> merged_diagram(const std::vector<PersistencePair>& maxPairs,
                                                   const std::vector<PersistencePair>& minPairs) {
  std::vector<PersistencePair> all;
  for (const auto& p : maxPairs) all.push_back(p);
  for (const auto& p : minPairs)
    if (p.saddle != kNoVertex) all.push_back(p);
  sort_pairs(all);
  return all;
}

struct PersistenceSimplifyResult {
  ScalarField field;
  OrderField order;
  PairingResult maxSide, minSide;
  SimplifyReport report;
};

/// Removes every extremum whose persistence is below epsilon.
inline PersistenceSimplifyResult persistence_simplify(const Triangulation& mesh, const ScalarField& f, double epsilon,
                                                      const SimplifyOptions& options = {}) {
  if (f.size() != mesh.vertex_count()) throw Error(ErrorCode::SizeMismatch, "field and mesh sizes differ");
  if (!(epsilon >= 0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be non-negative");
  const int threads = resolve_threads(options.threadCount);
  PersistenceSimplifyResult res;
  const OrderField F = compute_order_field(f, threads);
  auto t0 = detail::Clock::now();
  res.maxSide = compute_extremum_saddle_pairs(mesh, f, F, Polarity::MaxSaddle, epsilon, threads);
  res.minSide = compute_extremum_saddle_pairs(mesh, f, F, Polarity::MinSaddle, epsilon, threads);
  const double pairing = detail::seconds_since(t0);
  std::vector<VertexId> dMax, dMin;
  for (const auto& p : res.maxSide.pairs) dMax.push_back(p.extremum);
  for (const auto& p : res.minSide.pairs) dMin.push_back(p.extremum);
  auto removal = remove_extrema(mesh, F, dMax, dMin, options);
  res.field = detail::realize_stages(f, removal, options.zeta);
  res.order = std::move(removal.order);
  res.report = std::move(removal.report);
  res.report.timings.discover += pairing;
  return res;
}

}  // namespace lts
