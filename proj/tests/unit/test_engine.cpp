#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "lts/lts.hpp"
#include "lts/oracle.hpp"

using namespace lts;

namespace {

// Direct check of a local order: s is the only maximum and every minimum
// touches a vertex outside the region.
::testing::AssertionResult local_order_ok(const Triangulation& mesh, const Region& reg, const LocalOrder& lo) {
  std::map<VertexId, Rank> local;
  for (std::size_t i = 0; i < lo.vertices.size(); ++i) local[lo.vertices[i]] = lo.rank[i];
  std::set<Rank> ranks;
  for (auto& [v, r] : local) ranks.insert(r);
  if (ranks.size() != local.size() || *ranks.begin() != 0 || *ranks.rbegin() != static_cast<Rank>(local.size()) - 1)
    return ::testing::AssertionFailure() << "not a bijection onto 0..k-1";
  if (local.at(reg.saddle) != static_cast<Rank>(local.size()) - 1)
    return ::testing::AssertionFailure() << "saddle is not on top";
  for (auto& [v, r] : local) {
    if (v == reg.saddle) continue;
    bool hasHigher = false, hasLower = false, outside = false;
    for (auto u : mesh.neighbors(v)) {
      auto it = local.find(u);
      if (it == local.end()) {
        outside = true;
        continue;
      }
      hasHigher = hasHigher || it->second > r;
      hasLower = hasLower || it->second < r;
    }
    if (!hasHigher) return ::testing::AssertionFailure() << "extra maximum at " << v;
    if (!hasLower && !outside) return ::testing::AssertionFailure() << "interior minimum at " << v;
  }
  return ::testing::AssertionSuccess();
}

std::vector<VertexId> non_global_maxima(const Triangulation& mesh, const OrderField& F) {
  auto maxs = extract_extrema(mesh, F.rank).second;
  maxs.erase(std::remove(maxs.begin(), maxs.end(), F.inverse.back()), maxs.end());
  return maxs;
}

}  // namespace

TEST(DiscoverRegions, TwoBumpsSmallPeak) {
  auto mesh = fixtures::two_bumps_mesh();
  auto F = compute_order_field(fixtures::two_bumps_values());
  auto regions = discover_regions(mesh, F, {fixtures::kSmallPeak});
  ASSERT_EQ(regions.size(), 1u);
  EXPECT_EQ(regions[0].saddle, fixtures::kMidSaddle);
  EXPECT_EQ(regions[0].vertices, (std::vector<VertexId>{fixtures::kMidSaddle, fixtures::kSmallPeak}));
  EXPECT_EQ(regions[0].seedMaxima, (std::vector<VertexId>{fixtures::kSmallPeak}));
}

TEST(DiscoverRegions, FigureHill) {
  auto mesh = fixtures::fig_mesh();
  auto F = OrderField::from_ranks(fixtures::fig_order());
  auto regions = discover_regions(mesh, F, {fixtures::kFigT});
  ASSERT_EQ(regions.size(), 1u);
  EXPECT_EQ(regions[0].saddle, fixtures::kFigK);
  EXPECT_EQ(regions[0].vertices, fixtures::fig_region());
}

TEST(DiscoverRegions, EmptyDiscard) {
  auto mesh = fixtures::two_bumps_mesh();
  EXPECT_TRUE(discover_regions(mesh, compute_order_field(fixtures::two_bumps_values()), {}).empty());
}

TEST(DiscoverRegions, RejectsNonMaximum) {
  auto mesh = fixtures::two_bumps_mesh();
  try {
    discover_regions(mesh, compute_order_field(fixtures::two_bumps_values()), {fixtures::kMidSaddle});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotAnExtremum);
  }
}

TEST(DiscoverRegions, RegionsAreSuperlevelComponents) {
  // Each region minus its saddle is the component of {F > F(s)} holding its seeds.
  auto mesh = Triangulation::grid({24, 24});
  for (int trial = 0; trial < 10; ++trial) {
    auto F = compute_order_field(fixtures::uniform_random(mesh.vertex_count(), 40 + trial));
    auto regions = discover_regions(mesh, F, non_global_maxima(mesh, F));
    std::set<VertexId> seen;
    for (const auto& reg : regions) {
      const Rank s = F.rank[reg.saddle];
      std::set<VertexId> comp{reg.seedMaxima.front()};
      std::vector<VertexId> stack{reg.seedMaxima.front()};
      while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        for (auto u : mesh.neighbors(v))
          if (F.rank[u] > s && comp.insert(u).second) stack.push_back(u);
      }
      comp.insert(reg.saddle);
      ASSERT_EQ(std::vector<VertexId>(comp.begin(), comp.end()), reg.vertices) << "trial " << trial;
      for (auto v : reg.vertices)
        if (v != reg.saddle) ASSERT_TRUE(seen.insert(v).second) << "regions overlap at " << v;
    }
  }
}

TEST(LocalSimplify, FigureNeedsThreePasses) {
  auto mesh = fixtures::fig_mesh();
  auto F = OrderField::from_ranks(fixtures::fig_order());
  auto regions = discover_regions(mesh, F, {fixtures::kFigT});
  auto lo = localize_simplify_region(mesh, F, regions[0]);
  EXPECT_EQ(lo.iterations, 3);
  std::map<VertexId, Rank> local;
  for (std::size_t i = 0; i < lo.vertices.size(); ++i) local[lo.vertices[i]] = lo.rank[i];
  EXPECT_EQ(local.at(fixtures::kFigK), 12);
  EXPECT_EQ(local.at(fixtures::kFigQ), 0);
  EXPECT_EQ(local.at(8), 3);  // I
  EXPECT_TRUE(local_order_ok(mesh, regions[0], lo));
}

TEST(LocalSimplify, TwoVertexRegion) {
  auto mesh = fixtures::two_bumps_mesh();
  auto F = compute_order_field(fixtures::two_bumps_values());
  auto regions = discover_regions(mesh, F, {fixtures::kSmallPeak});
  auto lo = localize_simplify_region(mesh, F, regions[0]);
  EXPECT_EQ(lo.iterations, 1);
  EXPECT_EQ(lo.vertices, (std::vector<VertexId>{fixtures::kMidSaddle, fixtures::kSmallPeak}));
  EXPECT_EQ(lo.rank, (std::vector<Rank>{1, 0}));
}

TEST(LocalSimplify, EveryRandomRegionPassesTheChecker) {
  auto mesh = Triangulation::grid({32, 32});
  int regionsChecked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    auto F = compute_order_field(fixtures::uniform_random(mesh.vertex_count(), 300 + trial));
    for (const auto& reg : discover_regions(mesh, F, non_global_maxima(mesh, F))) {
      auto lo = localize_simplify_region(mesh, F, reg);
      ASSERT_TRUE(local_order_ok(mesh, reg, lo)) << "trial " << trial << " saddle " << reg.saddle;
      ++regionsChecked;
    }
  }
  EXPECT_GT(regionsChecked, 1000);
}

TEST(LocalSimplify, CyclingRegionStillConverges) {
  // A region on which plain alternating passes revisit the same order.
  auto mesh = Triangulation::grid({32, 32});
  auto f = fixtures::uniform_random(mesh.vertex_count(), 1033);
  auto c = fixtures::random_constraints(mesh, f, 40);
  auto res = simplify_field(mesh, f, c);
  EXPECT_TRUE(verify_constraints(mesh, res.order, c).ok);
  EXPECT_LE(res.report.maxIterationCount, 8);
}

TEST(Integrate, FigureMatchesSimplifiedOrder) {
  auto mesh = fixtures::fig_mesh();
  auto F = OrderField::from_ranks(fixtures::fig_order());
  auto regions = discover_regions(mesh, F, {fixtures::kFigT});
  std::vector<LocalOrder> locals{localize_simplify_region(mesh, F, regions[0])};
  auto G = integrate_local_orders(F, regions, locals);
  EXPECT_EQ(G.rank, fixtures::fig_simplified_order());
  EXPECT_EQ(G.rank[fixtures::kFigK], 22);
  EXPECT_EQ(G.rank[fixtures::kFigT], 15);
}

TEST(Integrate, NoRegionsIsIdentity) {
  auto F = fixtures::random_order(50, 3);
  EXPECT_EQ(integrate_local_orders(F, {}, {}), F);
}

TEST(Integrate, TwoBumpsPeakDropsBelowSaddle) {
  auto mesh = fixtures::two_bumps_mesh();
  auto F = compute_order_field(fixtures::two_bumps_values());
  auto regions = discover_regions(mesh, F, {fixtures::kSmallPeak});
  std::vector<LocalOrder> locals{localize_simplify_region(mesh, F, regions[0])};
  auto G = integrate_local_orders(F, regions, locals);
  EXPECT_EQ(G.rank[fixtures::kSmallPeak] + 1, G.rank[fixtures::kMidSaddle]);
  // Every other pair keeps its relative order.
  for (VertexId a = 0; a < 25; ++a)
    for (VertexId b = 0; b < 25; ++b)
      if (a != fixtures::kSmallPeak && b != fixtures::kSmallPeak)
        EXPECT_EQ(F.rank[a] < F.rank[b], G.rank[a] < G.rank[b]);
}

TEST(Integrate, OverlappingRegionsCollide) {
  auto mesh = fixtures::two_bumps_mesh();
  auto F = compute_order_field(fixtures::two_bumps_values());
  auto regions = discover_regions(mesh, F, {fixtures::kSmallPeak});
  regions.push_back(regions[0]);
  std::vector<LocalOrder> locals(2, localize_simplify_region(mesh, F, regions[0]));
  try {
    integrate_local_orders(F, regions, locals);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::KeyCollision);
  }
}

TEST(RemoveExtrema, NothingToDo) {
  auto mesh = Triangulation::grid({10, 10});
  auto F = compute_order_field(fixtures::uniform_random(100, 1));
  auto res = remove_extrema(mesh, F, {}, {});
  EXPECT_EQ(res.order, F);
  EXPECT_EQ(res.report.regionCount, 0);
}

TEST(RemoveExtrema, TwoBumpsLeavesOneMaximum) {
  auto mesh = fixtures::two_bumps_mesh();
  auto F = compute_order_field(fixtures::two_bumps_values());
  auto res = remove_extrema(mesh, F, {fixtures::kSmallPeak}, {});
  auto cs = extract_critical_points(mesh, res.order);
  EXPECT_EQ(cs.maxima, (std::vector<VertexId>{fixtures::kBigPeak}));
  EXPECT_EQ(oracle::brute_force_extrema(mesh, res.order.rank).second, cs.maxima);
}

TEST(RemoveExtrema, StressCaseKeepsOnlyGlobalPair) {
  auto mesh = Triangulation::grid({64, 64});
  auto F = compute_order_field(fixtures::uniform_random(mesh.vertex_count(), 64));
  auto [mins, maxs] = extract_extrema(mesh, F.rank);
  std::vector<VertexId> dMin, dMax;
  for (auto v : mins)
    if (v != F.inverse.front()) dMin.push_back(v);
  for (auto v : maxs)
    if (v != F.inverse.back()) dMax.push_back(v);
  auto res = remove_extrema(mesh, F, dMax, dMin);
  auto [m2, M2] = oracle::brute_force_extrema(mesh, res.order.rank);
  EXPECT_EQ(m2, (std::vector<VertexId>{F.inverse.front()}));
  EXPECT_EQ(M2, (std::vector<VertexId>{F.inverse.back()}));
  EXPECT_LE(res.report.maxIterationCount, 8);
}

TEST(RemoveExtrema, RejectsNonExtremum) {
  auto mesh = fixtures::two_bumps_mesh();
  auto F = compute_order_field(fixtures::two_bumps_values());
  EXPECT_THROW(remove_extrema(mesh, F, {fixtures::kMidSaddle}, {}), Error);
  EXPECT_THROW(remove_extrema(mesh, F, {}, {fixtures::kBigPeak}), Error);
  SimplifyOptions bad;
  bad.maxIterations = 0;
  EXPECT_THROW(remove_extrema(mesh, F, {}, {}, bad), Error);
}

TEST(RemoveExtrema, MatchesReferenceOnIsolatedHills) {
  auto mesh = Triangulation::grid({40, 40});
  int compared = 0;
  for (int trial = 0; trial < 30; ++trial) {
    auto f = fixtures::uniform_random(mesh.vertex_count(), 7000 + trial);
    auto F = compute_order_field(f);
    auto mins = extract_extrema(mesh, F.rank).first;
    std::set<VertexId> minSet(mins.begin(), mins.end());
    // Greedily keep up to 10 maxima whose hills are pairwise non-adjacent and hold no minimum.
    std::vector<VertexId> chosen;
    std::set<VertexId> blocked;
    for (auto m : non_global_maxima(mesh, F)) {
      if (chosen.size() == 10) break;
      auto reg = discover_regions(mesh, F, {m});
      if (reg.size() != 1) continue;
      bool ok = true;
      std::set<VertexId> halo;
      for (auto v : reg[0].vertices) {
        if (minSet.count(v) || blocked.count(v)) ok = false;
        halo.insert(v);
        for (auto u : mesh.neighbors(v)) halo.insert(u);
      }
      if (!ok) continue;
      for (auto v : halo)
        if (blocked.count(v)) ok = false;
      if (!ok) continue;
      chosen.push_back(m);
      blocked.insert(halo.begin(), halo.end());
    }
    ASSERT_FALSE(chosen.empty());
    auto res = remove_extrema(mesh, F, chosen, {});
    std::sort(chosen.begin(), chosen.end(), [&](VertexId a, VertexId b) { return F.rank[a] > F.rank[b]; });
    OrderField ref = F;
    for (auto m : chosen) ref = oracle::reference_remove_single_maximum(mesh, ref, m);
    ASSERT_EQ(res.order, ref) << "trial " << trial;
    compared += static_cast<int>(chosen.size());
  }
  EXPECT_GT(compared, 100);
}

TEST(SimplifyField, PreserveEverythingIsIdentity) {
  auto mesh = Triangulation::grid({20, 20});
  auto f = fixtures::uniform_random(400, 9);
  auto F = compute_order_field(f);
  auto [mins, maxs] = extract_extrema(mesh, F.rank);
  auto res = simplify_field(mesh, f, {mins, maxs});
  EXPECT_EQ(res.field, f);
  EXPECT_EQ(res.report.regionCount, 0);
}

TEST(SimplifyField, TwoBumpsKeepBigPeak) {
  auto mesh = fixtures::two_bumps_mesh();
  auto f = fixtures::two_bumps_values();
  auto res = simplify_field(mesh, f, {{}, {fixtures::kBigPeak}});
  const double zeta = 1e-12 * value_range(f);
  EXPECT_DOUBLE_EQ(res.field.values[fixtures::kSmallPeak], 4.0 - zeta);
  for (VertexId v = 0; v < 25; ++v)
    if (v != fixtures::kSmallPeak) EXPECT_EQ(res.field.values[v], f.values[v]);
  EXPECT_NEAR(res.report.maxInfinityDeviation, 2.0, 1e-9);
  EXPECT_DOUBLE_EQ(res.report.maxRegionHeight, 2.0);
}

TEST(SimplifyField, BumpsOnABumpCollapseToOneHill) {
  SynthSpec spec;
  spec.dims = {48, 48};
  spec.kind = SynthSpec::Kind::Bumps;
  spec.bumps.push_back({{24, 24}, 1.0, 20.0});
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) spec.bumps.push_back({{6.0 + 9 * i, 6.0 + 9 * j}, 0.5, 1.5});
  auto ds = synth_field(spec);
  auto F = compute_order_field(ds.field);
  const double mid = 0.5 * (ds.field.values[F.inverse.front()] + ds.field.values[F.inverse.back()]);
  ASSERT_GT(oracle::count_superlevel_components(ds.mesh, ds.field, mid), 1);
  auto res = simplify_field(ds.mesh, ds.field, {{}, {F.inverse.back()}});
  EXPECT_EQ(extract_extrema(ds.mesh, res.order.rank).second, (std::vector<VertexId>{F.inverse.back()}));
  EXPECT_EQ(oracle::count_superlevel_components(ds.mesh, res.field, mid), 1);
}

TEST(SimplifyField, ConstraintMustBeExtremum) {
  auto mesh = fixtures::two_bumps_mesh();
  try {
    simplify_field(mesh, fixtures::two_bumps_values(), {{}, {fixtures::kMidSaddle}});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConstraintNotExtremum);
  }
}

TEST(SimplifyField, RandomPropertiesHold) {
  for (int trial = 0; trial < 30; ++trial) {
    const bool is3 = trial % 3 == 2;
    auto mesh = is3 ? Triangulation::grid({8, 8, 8}) : Triangulation::grid({32, 32});
    auto f = fixtures::uniform_random(mesh.vertex_count(), 1000 + trial);
    auto c = fixtures::random_constraints(mesh, f, 7 + trial);
    auto res = simplify_field(mesh, f, c);
    auto F = compute_order_field(f);
    // Exactness against the brute-force extrema.
    auto [mins, maxs] = oracle::brute_force_extrema(mesh, res.order.rank);
    auto want = [](std::vector<VertexId> v) {
      std::sort(v.begin(), v.end());
      return v;
    };
    ASSERT_EQ(mins, want(c.preserveMinima)) << trial;
    ASSERT_EQ(maxs, want(c.preserveMaxima)) << trial;
    ASSERT_EQ(compute_order_field(res.field), res.order);
    // Locality, numerically and in order.
    std::vector<char> touched(static_cast<std::size_t>(mesh.vertex_count()), 0);
    for (const auto& r : res.report.regions)
      for (auto v : r.vertices) touched[v] = 1;
    std::vector<VertexId> outside;
    for (VertexId v = 0; v < mesh.vertex_count(); ++v)
      if (!touched[v]) {
        ASSERT_EQ(res.field.values[v], f.values[v]);
        outside.push_back(v);
      }
    for (std::size_t i = 1; i < outside.size(); ++i)
      ASSERT_EQ(F.rank[outside[i - 1]] < F.rank[outside[i]], res.order.rank[outside[i - 1]] < res.order.rank[outside[i]]);
    // Idempotence.
    auto again = simplify_field(mesh, res.field, c);
    ASSERT_EQ(again.report.regionCount, 0);
    ASSERT_EQ(again.field, res.field);
    EXPECT_LE(res.report.maxIterationCount, 8);
  }
}

TEST(SimplifyField, ThreadCountDoesNotChangeResult) {
  auto mesh = Triangulation::grid({48, 48});
  for (int seed = 0; seed < 3; ++seed) {
    auto f = fixtures::uniform_random(mesh.vertex_count(), 50 + seed);
    auto c = fixtures::random_constraints(mesh, f, seed, 0.2);
    SimplifyOptions one;
    one.threadCount = 1;
    auto base = simplify_field(mesh, f, c, one);
    for (int t : {2, 4, 8}) {
      SimplifyOptions opt;
      opt.threadCount = t;
      auto res = simplify_field(mesh, f, c, opt);
      ASSERT_EQ(res.order.rank, base.order.rank) << "threads " << t;
      ASSERT_EQ(res.field, base.field);
    }
  }
}

TEST(Restore, CraterMinimumSurvivesFlattening) {
  auto mesh = Triangulation::grid({9, 9});
  auto f = fixtures::crater_values();
  f.values[8] = 10.0;  // global maximum away from the ring
  auto F = compute_order_field(f);
  auto [mins, maxs] = extract_extrema(mesh, F.rank);
  ASSERT_TRUE(std::binary_search(mins.begin(), mins.end(), fixtures::kCrater));
  ASSERT_TRUE(std::binary_search(maxs.begin(), maxs.end(), fixtures::kRingTop));
  ConstraintSet c{mins, {8}};
  auto res = simplify_field(mesh, f, c);
  EXPECT_EQ(classify_vertex(mesh, res.order, fixtures::kCrater).kind, CriticalKind::Minimum);
  EXPECT_EQ(classify_vertex(mesh, res.order, fixtures::kRingTop).kind, CriticalKind::Regular);
  EXPECT_GE(res.report.restoredMinima, 1);
  EXPECT_TRUE(verify_constraints(mesh, res.order, c).ok);

  SimplifyOptions off;
  off.restoreInteriorExtrema = false;
  auto plain = simplify_field(mesh, f, c, off);
  EXPECT_NE(classify_vertex(mesh, plain.order, fixtures::kCrater).kind, CriticalKind::Minimum);
}

TEST(Restore, EmptyAndNoOp) {
  auto mesh = Triangulation::grid({9, 9});
  auto F = compute_order_field(fixtures::crater_values());
  EXPECT_EQ(restore_interior_extrema(mesh, F, {}), F);
  EXPECT_EQ(restore_interior_extrema(mesh, F, {fixtures::kCrater}), F);
  EXPECT_EQ(restore_interior_extrema(mesh, F, {fixtures::kRingTop}, true), F);
}

TEST(Restore, FilledCraterBecomesMinimumAgain) {
  auto mesh = Triangulation::grid({9, 9});
  auto F = compute_order_field(fixtures::crater_values());
  auto filled = remove_extrema(mesh, F, {}, {fixtures::kCrater}).order;
  ASSERT_NE(classify_vertex(mesh, filled, fixtures::kCrater).kind, CriticalKind::Minimum);
  auto G = restore_interior_extrema(mesh, filled, {fixtures::kCrater});
  EXPECT_EQ(classify_vertex(mesh, G, fixtures::kCrater).kind, CriticalKind::Minimum);
  Rank lowest = kRankMax;
  for (auto u : mesh.neighbors(fixtures::kCrater)) lowest = std::min(lowest, G.rank[u]);
  EXPECT_EQ(G.rank[fixtures::kCrater] + 1, lowest);
}

TEST(VerifyConstraints, UntouchedOrderFailsWithDiscardsListed) {
  auto mesh = fixtures::two_bumps_mesh();
  auto F = compute_order_field(fixtures::two_bumps_values());
  auto r = verify_constraints(mesh, F, {{}, {fixtures::kBigPeak}});
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.extraMaxima, (std::vector<VertexId>{fixtures::kSmallPeak}));
}

TEST(RemoveExtrema, FigureWithoutRestoration) {
  auto mesh = fixtures::fig_mesh();
  auto F = OrderField::from_ranks(fixtures::fig_order());
  SimplifyOptions opt;
  opt.restoreInteriorExtrema = false;
  auto res = remove_extrema(mesh, F, {fixtures::kFigT}, {}, opt);
  EXPECT_EQ(res.order.rank, fixtures::fig_simplified_order());
  EXPECT_EQ(res.report.maxIterationCount, 3);
  // Minima 12 and 14 sat inside the hill and are gone.
  EXPECT_EQ(extract_extrema(mesh, res.order.rank).first, (std::vector<VertexId>{3, 23}));
}

TEST(RemoveExtrema, FigureRestoresInteriorMinima) {
  auto mesh = fixtures::fig_mesh();
  auto F = OrderField::from_ranks(fixtures::fig_order());
  auto res = remove_extrema(mesh, F, {fixtures::kFigT}, {});
  EXPECT_EQ(res.report.restoredMinima, 2);
  auto [mins, maxs] = oracle::brute_force_extrema(mesh, res.order.rank);
  EXPECT_EQ(mins, (std::vector<VertexId>{3, 12, 14, 23}));
  EXPECT_EQ(maxs, (std::vector<VertexId>{9}));
}

TEST(VerifyConstraints, TamperedOrderFails) {
  auto mesh = fixtures::fig_mesh();
  auto F = OrderField::from_ranks(fixtures::fig_order());
  auto G = remove_extrema(mesh, F, {fixtures::kFigT}, {}).order;
  auto [mins, maxs] = extract_extrema(mesh, G.rank);
  ConstraintSet c{mins, maxs};
  ASSERT_TRUE(verify_constraints(mesh, G, c).ok);
  // Lift T above every neighbor: a spurious maximum inside the flattened hill.
  auto rank = G.rank;
  VertexId top = fixtures::kFigT;
  for (auto u : mesh.neighbors(fixtures::kFigT))
    if (rank[u] > rank[top]) top = u;
  std::swap(rank[fixtures::kFigT], rank[top]);
  auto tampered = OrderField::from_ranks(rank);
  auto r = verify_constraints(mesh, tampered, c);
  EXPECT_FALSE(r.ok);
}
