#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "lts/lts.hpp"

namespace fixtures {

using lts::Rank;
using lts::ScalarField;
using lts::Triangulation;
using lts::VertexId;

/// 5x5 grid, index x + 5y. A ramp 0.375(x+y) with bumps 9 at (1,1) and 6 at
/// (3,3) meeting at the value-4 saddle (2,2).
inline ScalarField two_bumps_values() {
  ScalarField f;
  f.values.resize(25);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) f.values[x + 5 * y] = 0.375 * (x + y);
  f.values[1 + 5 * 1] = 9;
  f.values[3 + 5 * 3] = 6;
  f.values[2 + 5 * 2] = 4;
  return f;
}

inline Triangulation two_bumps_mesh() { return Triangulation::grid({5, 5}); }

inline constexpr VertexId kBigPeak = 6, kSmallPeak = 18, kMidSaddle = 12;

/// A 24-vertex planar mesh (vertices A..X = 0..23) whose initial order is
/// `fig_order()`; removing its order-22 maximum T exercises three passes.
inline Triangulation fig_mesh() {
  std::vector<std::array<VertexId, 3>> tris = {
      {0, 1, 5},     {0, 4, 5},     {1, 2, 6},     {1, 5, 6},     {2, 3, 7},     {2, 6, 7},     {3, 7, 8},
      {4, 5, 10},    {4, 9, 10},    {5, 6, 11},    {5, 10, 11},   {6, 7, 12},    {6, 11, 12},   {7, 8, 13},
      {7, 12, 13},   {8, 13, 14},   {9, 10, 15},   {10, 11, 16},  {10, 15, 16},  {11, 12, 17},  {11, 16, 17},
      {12, 13, 18},  {12, 17, 18},  {13, 14, 19},  {13, 18, 19},  {15, 16, 20},  {16, 17, 21},  {16, 20, 21},
      {17, 18, 22},  {17, 21, 22},  {18, 19, 23},  {18, 22, 23}};
  std::vector<std::array<double, 3>> xyz(24, {0, 0, 0});
  return Triangulation::surface(std::move(xyz), std::move(tris));
}

inline std::vector<Rank> fig_order() {
  return {3, 2, 1, 0, 4, 17, 16, 15, 14, 23, 10, 18, 12, 19, 13, 9, 11, 20, 21, 22, 8, 7, 6, 5};
}

inline std::vector<Rank> fig_simplified_order() {
  return {3, 2, 1, 0, 4, 20, 19, 18, 13, 23, 22, 21, 12, 17, 14, 9, 10, 11, 16, 15, 8, 7, 6, 5};
}

inline constexpr VertexId kFigT = 19, kFigK = 10, kFigQ = 16;

/// Hill region of the figure mesh and its local orders after each pass, keyed by vertex id.
inline std::vector<VertexId> fig_region() { return {5, 6, 7, 8, 10, 11, 12, 13, 14, 16, 17, 18, 19}; }

inline ScalarField as_field(const std::vector<Rank>& order) {
  ScalarField f;
  for (auto r : order) f.values.push_back(static_cast<double>(r));
  return f;
}

/// 11x2 grid: a five-peak terrain profile extruded in y with a slight tilt.
inline std::vector<double> terrain_profile() { return {0.5, 5, 2, 3, 1, 5, 4, 6, 3, 5, 0}; }

inline ScalarField terrain_values() {
  ScalarField f;
  const auto p = terrain_profile();
  for (int y = 0; y < 2; ++y)
    for (std::size_t x = 0; x < p.size(); ++x) f.values.push_back(p[x] + 0.01 * y);
  return f;
}

inline Triangulation terrain_mesh() { return Triangulation::grid({11, 2}); }

/// 9x9 ramp with a ring-shaped hill around a crater at (3,3).
inline ScalarField crater_values() {
  ScalarField f;
  f.values.resize(81);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x) {
      double v = 0.1 * (x + y);
      const int dx = x - 3, dy = y - 3;
      if (std::abs(dx) <= 1 && std::abs(dy) <= 1) v = (dx == 0 && dy == 0) ? 3.0 : 5.0 + 0.01 * (x + y);
      f.values[x + 9 * y] = v;
    }
  return f;
}

inline constexpr VertexId kCrater = 3 + 9 * 3, kRingTop = 4 + 9 * 4;

inline Triangulation octahedron() {
  std::vector<std::array<double, 3>> xyz = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  std::vector<std::array<VertexId, 3>> tris = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
                                               {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
  return Triangulation::surface(std::move(xyz), std::move(tris));
}

inline std::string octahedron_off() {
  return "OFF\n6 8 12\n1 0 0\n-1 0 0\n0 1 0\n0 -1 0\n0 0 1\n0 0 -1\n"
         "3 0 2 4\n3 2 1 4\n3 1 3 4\n3 3 0 4\n3 2 0 5\n3 1 2 5\n3 3 1 5\n3 0 3 5\n";
}

inline Triangulation icosahedron() {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<std::array<double, 3>> xyz = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                                            {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  std::vector<std::array<VertexId, 3>> tris = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},   {4, 9, 5}, {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  return Triangulation::surface(std::move(xyz), std::move(tris));
}

inline std::string to_off(const Triangulation& m) {
  std::string s = "OFF\n" + std::to_string(m.vertex_count()) + " " + std::to_string(m.triangles().size()) + " 0\n";
  for (const auto& c : m.coordinates())
    s += std::to_string(c[0]) + " " + std::to_string(c[1]) + " " + std::to_string(c[2]) + "\n";
  for (const auto& t : m.triangles())
    s += "3 " + std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
  return s;
}

/// Closed torus from a rows x cols grid with wrap-around, two triangles per cell.
inline Triangulation torus(int rows = 6, int cols = 8) {
  std::vector<std::array<double, 3>> xyz;
  std::vector<std::array<VertexId, 3>> tris;
  const double R = 3, r = 1;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double u = 2 * M_PI * i / rows, v = 2 * M_PI * j / cols;
      xyz.push_back({(R + r * std::cos(u)) * std::cos(v), (R + r * std::cos(u)) * std::sin(v), r * std::sin(u)});
    }
  auto id = [&](int i, int j) { return static_cast<VertexId>(((i + rows) % rows) * cols + (j + cols) % cols); };
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return Triangulation::surface(std::move(xyz), std::move(tris));
}

inline lts::OrderField random_order(VertexId n, std::uint64_t seed) {
  std::vector<VertexId> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), VertexId{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  return lts::OrderField::from_sorted(std::move(perm));
}

inline ScalarField uniform_random(VertexId n, std::uint64_t seed) {
  lts::SplitMix64 rng(seed);
  ScalarField f;
  f.values.resize(static_cast<std::size_t>(n));
  for (auto& v : f.values) v = rng.uniform();
  return f;
}

/// Random subset of extrema, always with the global pair.
inline lts::ConstraintSet random_constraints(const Triangulation& mesh, const ScalarField& f, std::uint64_t seed,
                                             double keep = 0.3) {
  auto F = lts::compute_order_field(f);
  auto [mins, maxs] = lts::extract_extrema(mesh, F.rank);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution pick(keep);
  lts::ConstraintSet c;
  for (auto v : mins)
    if (pick(rng) || v == F.inverse.front()) c.preserveMinima.push_back(v);
  for (auto v : maxs)
    if (pick(rng) || v == F.inverse.back()) c.preserveMaxima.push_back(v);
  return c;
}

}  // namespace fixtures
