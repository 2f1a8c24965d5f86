#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lts/common.hpp"

namespace lts {

/// Connectivity of a PL 2- or 3-manifold: either an implicit Freudenthal
/// triangulation of a regular grid or an explicit triangle surface.
///
/// Grid cells are split along the (+x+y) diagonal in 2D and along the main
/// cube diagonal in 3D (six tetrahedra per cube), which yields 6 and 14
/// neighbors for interior vertices. Immutable once built.
class Triangulation {
 public:
  using Edge = std::pair<VertexId, VertexId>;

  static Triangulation grid(const std::vector<std::int64_t>& dims, double spacing = 1.0) {
    if (dims.size() != 2 && dims.size() != 3)
      throw Error(ErrorCode::InvalidArgument, "grid needs 2 or 3 dimensions");
    for (auto d : dims)
      if (d < 2) throw Error(ErrorCode::InvalidArgument, "every grid axis needs at least 2 samples");
    Triangulation t;
    t.dimension_ = static_cast<int>(dims.size());
    t.grid_ = true;
    t.spacing_ = spacing;
    t.dims_ = {dims[0], dims[1], dims.size() == 3 ? dims[2] : 1};
    t.vertex_count_ = t.dims_[0] * t.dims_[1] * t.dims_[2];
    t.build_offset_tables();
    return t;
  }

  /// Builds an explicit 2-manifold surface (closed or with boundary).
  static Triangulation surface(std::vector<std::array<double, 3>> coords,
                               std::vector<std::array<VertexId, 3>> triangles) {
    Triangulation t;
    t.dimension_ = 2;
    t.grid_ = false;
    t.vertex_count_ = static_cast<VertexId>(coords.size());
    if (t.vertex_count_ < 2) throw Error(ErrorCode::InvalidArgument, "mesh needs at least 2 vertices");
    t.coords_ = std::move(coords);
    t.triangles_ = std::move(triangles);
    t.build_explicit();
    return t;
  }

  int dimension() const noexcept { return dimension_; }
  VertexId vertex_count() const noexcept { return vertex_count_; }
  bool is_grid() const noexcept { return grid_; }
  double spacing() const noexcept { return spacing_; }

  /// Grid extents; empty for explicit meshes.
  std::vector<std::int64_t> dims() const {
    if (!grid_) return {};
    if (dimension_ == 2) return {dims_[0], dims_[1]};
    return {dims_[0], dims_[1], dims_[2]};
  }

  const std::vector<std::array<double, 3>>& coordinates() const noexcept { return coords_; }
  const std::vector<std::array<VertexId, 3>>& triangles() const noexcept { return triangles_; }

  VertexId grid_index(std::int64_t x, std::int64_t y, std::int64_t z = 0) const noexcept {
    return x + dims_[0] * (y + dims_[1] * z);
  }

  std::array<std::int64_t, 3> grid_position(VertexId v) const noexcept {
    return {v % dims_[0], (v / dims_[0]) % dims_[1], v / (dims_[0] * dims_[1])};
  }

  void check_vertex(VertexId v) const {
    if (v < 0 || v >= vertex_count_)
      throw Error(ErrorCode::VertexOutOfRange, "vertex " + std::to_string(v) + " not in [0, " +
                                                   std::to_string(vertex_count_) + ")");
  }

  template <typename Fn>
  void for_each_neighbor(VertexId v, Fn&& fn) const {
    if (grid_) {
      const auto p = grid_position(v);
      for (const auto& o : offsets_) {
        const std::int64_t x = p[0] + o[0], y = p[1] + o[1], z = p[2] + o[2];
        if (x < 0 || y < 0 || z < 0 || x >= dims_[0] || y >= dims_[1] || z >= dims_[2]) continue;
        fn(grid_index(x, y, z));
      }
    } else {
      for (auto i = neighbor_offsets_[v]; i < neighbor_offsets_[v + 1]; ++i) fn(neighbor_list_[i]);
    }
  }

  std::vector<VertexId> neighbors(VertexId v) const {
    check_vertex(v);
    std::vector<VertexId> out;
    for_each_neighbor(v, [&](VertexId u) { out.push_back(u); });
    return out;
  }

  VertexId degree(VertexId v) const {
    VertexId d = 0;
    for_each_neighbor(v, [&](VertexId) { ++d; });
    return d;
  }

  /// Calls fn(u, w) for every edge of the link of v.
  template <typename Fn>
  void for_each_link_edge(VertexId v, Fn&& fn) const {
    if (grid_) {
      const auto p = grid_position(v);
      auto inside = [&](const std::array<int, 3>& o) {
        const std::int64_t x = p[0] + o[0], y = p[1] + o[1], z = p[2] + o[2];
        return x >= 0 && y >= 0 && z >= 0 && x < dims_[0] && y < dims_[1] && z < dims_[2];
      };
      for (const auto& [a, b] : link_pairs_) {
        const auto& oa = offsets_[a];
        const auto& ob = offsets_[b];
        if (!inside(oa) || !inside(ob)) continue;
        fn(grid_index(p[0] + oa[0], p[1] + oa[1], p[2] + oa[2]),
           grid_index(p[0] + ob[0], p[1] + ob[1], p[2] + ob[2]));
      }
    } else {
      for (auto i = link_offsets_[v]; i < link_offsets_[v + 1]; ++i)
        fn(link_list_[i].first, link_list_[i].second);
    }
  }

  std::vector<Edge> link_adjacency(VertexId v) const {
    check_vertex(v);
    std::vector<Edge> out;
    for_each_link_edge(v, [&](VertexId a, VertexId b) { out.emplace_back(a, b); });
    return out;
  }

  /// Upper bound on vertex degree, handy for stack buffers.
  int max_degree() const noexcept { return max_degree_; }

  /// True when some edge bounds a single triangle (explicit) or always for grids.
  bool has_boundary() const noexcept { return grid_ || boundary_; }

 private:
  void build_offset_tables() {
    offsets_.clear();
    link_pairs_.clear();
    if (dimension_ == 2) {
      // Cyclic order around a vertex, so consecutive entries share a triangle.
      offsets_ = {{-1, 0, 0}, {-1, -1, 0}, {0, -1, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    } else {
      for (int dz = 0; dz <= 1; ++dz)
        for (int dy = 0; dy <= 1; ++dy)
          for (int dx = 0; dx <= 1; ++dx) {
            if (dx + dy + dz == 0) continue;
            offsets_.push_back({dx, dy, dz});
            offsets_.push_back({-dx, -dy, -dz});
          }
    }
    // Freudenthal triangulations are flag complexes: two neighbors of v span
    // a link edge exactly when they are adjacent themselves.
    auto adjacent = [&](const std::array<int, 3>& d) {
      return std::find(offsets_.begin(), offsets_.end(), d) != offsets_.end();
    };
    for (std::size_t a = 0; a < offsets_.size(); ++a)
      for (std::size_t b = a + 1; b < offsets_.size(); ++b) {
        const std::array<int, 3> d{offsets_[b][0] - offsets_[a][0], offsets_[b][1] - offsets_[a][1],
                                   offsets_[b][2] - offsets_[a][2]};
        if (adjacent(d)) link_pairs_.emplace_back(static_cast<int>(a), static_cast<int>(b));
      }
    max_degree_ = static_cast<int>(offsets_.size());
  }

  void build_explicit() {
    const auto n = vertex_count_;
    std::map<Edge, int> edge_use;
    std::vector<std::vector<VertexId>> nbr(n);
    std::vector<std::vector<Edge>> link(n);
    for (const auto& tri : triangles_) {
      for (auto v : tri) check_vertex(v);
      if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
        throw Error(ErrorCode::InvalidArgument, "degenerate triangle");
      for (int i = 0; i < 3; ++i) {
        VertexId a = tri[i], b = tri[(i + 1) % 3];
        if (a > b) std::swap(a, b);
        if (++edge_use[{a, b}] > 2)
          throw Error(ErrorCode::NonManifoldEdge,
                      "edge (" + std::to_string(a) + "," + std::to_string(b) + ") has more than 2 triangles");
        nbr[a].push_back(b);
        nbr[b].push_back(a);
        link[tri[(i + 2) % 3]].emplace_back(a, b);
      }
    }
    boundary_ = std::any_of(edge_use.begin(), edge_use.end(), [](const auto& e) { return e.second == 1; });

    neighbor_offsets_.assign(n + 1, 0);
    link_offsets_.assign(n + 1, 0);
    max_degree_ = 0;
    for (VertexId v = 0; v < n; ++v) {
      auto& list = nbr[v];
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
      max_degree_ = std::max<int>(max_degree_, static_cast<int>(list.size()));
      check_link_is_disc(v, list, link[v]);
      neighbor_offsets_[v + 1] = neighbor_offsets_[v] + static_cast<VertexId>(list.size());
      link_offsets_[v + 1] = link_offsets_[v] + static_cast<VertexId>(link[v].size());
      neighbor_list_.insert(neighbor_list_.end(), list.begin(), list.end());
      link_list_.insert(link_list_.end(), link[v].begin(), link[v].end());
    }
  }

  // A manifold vertex has a link that is one cycle (interior) or one path (boundary).
  static void check_link_is_disc(VertexId v, const std::vector<VertexId>& verts, const std::vector<Edge>& edges) {
    if (verts.empty()) return;  // isolated vertex
    std::map<VertexId, int> deg;
    for (const auto& [a, b] : edges) {
      ++deg[a];
      ++deg[b];
    }
    int ends = 0;
    for (auto u : verts) {
      const int d = deg[u];
      if (d == 1) ++ends;
      else if (d != 2) throw Error(ErrorCode::NonManifoldEdge, "link of vertex " + std::to_string(v) + " is not a disc");
    }
    const bool cycle = ends == 0 && edges.size() == verts.size();
    const bool path = ends == 2 && edges.size() + 1 == verts.size();
    if (!cycle && !path) throw Error(ErrorCode::NonManifoldEdge, "link of vertex " + std::to_string(v) + " is not connected");
    // Connectivity of the link.
    std::map<VertexId, VertexId> parent;
    for (auto u : verts) parent[u] = u;
    auto find = [&](VertexId x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& [a, b] : edges) parent[find(a)] = find(b);
    for (auto u : verts)
      if (find(u) != find(verts.front()))
        throw Error(ErrorCode::NonManifoldEdge, "link of vertex " + std::to_string(v) + " is not connected");
  }

  int dimension_ = 2;
  bool grid_ = true;
  bool boundary_ = false;
  double spacing_ = 1.0;
  std::array<std::int64_t, 3> dims_{1, 1, 1};
  VertexId vertex_count_ = 0;
  int max_degree_ = 0;

  std::vector<std::array<int, 3>> offsets_;
  std::vector<std::pair<int, int>> link_pairs_;

  std::vector<std::array<double, 3>> coords_;
  std::vector<std::array<VertexId, 3>> triangles_;
  std::vector<VertexId> neighbor_offsets_, neighbor_list_;
  std::vector<VertexId> link_offsets_;
  std::vector<Edge> link_list_;
};

inline Triangulation build_grid_triangulation(const std::vector<std::int64_t>& dims) {
  return Triangulation::grid(dims);
}

/// Parses an OFF surface made of triangles only.
inline Triangulation load_off(std::istream& in) {
  auto next_line = [&](std::string& line) {
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  std::string line;
  if (!next_line(line)) throw Error(ErrorCode::ParseError, "empty OFF input");
  std::istringstream header(line);
  std::string magic;
  header >> magic;
  if (magic != "OFF") throw Error(ErrorCode::ParseError, "missing OFF header");
  std::int64_t nv = -1, nf = -1, ne = 0;
  if (!(header >> nv)) {
    if (!next_line(line)) throw Error(ErrorCode::ParseError, "missing OFF counts");
    std::istringstream counts(line);
    counts >> nv >> nf >> ne;
  } else {
    header >> nf >> ne;
  }
  if (nv < 0 || nf < 0) throw Error(ErrorCode::ParseError, "bad OFF counts");

  std::vector<std::array<double, 3>> coords(nv);
  for (auto& c : coords) {
    if (!next_line(line)) throw Error(ErrorCode::ParseError, "truncated OFF vertex list");
    std::istringstream row(line);
    if (!(row >> c[0] >> c[1] >> c[2])) throw Error(ErrorCode::ParseError, "bad OFF vertex: " + line);
  }
  std::vector<std::array<VertexId, 3>> tris;
  tris.reserve(nf);
  for (std::int64_t f = 0; f < nf; ++f) {
    if (!next_line(line)) throw Error(ErrorCode::ParseError, "truncated OFF face list");
    std::istringstream row(line);
    int k = 0;
    if (!(row >> k)) throw Error(ErrorCode::ParseError, "bad OFF face: " + line);
    if (k != 3) throw Error(ErrorCode::NonTriangleFace, "face " + std::to_string(f) + " has " + std::to_string(k) + " vertices");
    std::array<VertexId, 3> t{};
    if (!(row >> t[0] >> t[1] >> t[2])) throw Error(ErrorCode::ParseError, "bad OFF face: " + line);
    tris.push_back(t);
  }
  return Triangulation::surface(std::move(coords), std::move(tris));
}

inline Triangulation load_off(const std::string& text) {
  std::istringstream in(text);
  return load_off(in);
}

}  // namespace lts
