#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "lts/common.hpp"

namespace lts {

/// Union-find with union by rank and path compression.
class DisjointSet {
 public:
  explicit DisjointSet(std::int64_t n = 0) { reset(n); }

  void reset(std::int64_t n) {
    parent_.resize(static_cast<std::size_t>(n));
    std::iota(parent_.begin(), parent_.end(), std::int64_t{0});
    rank_.assign(static_cast<std::size_t>(n), 0);
    components_ = n;
  }

  std::int64_t size() const noexcept { return static_cast<std::int64_t>(parent_.size()); }
  std::int64_t components() const noexcept { return components_; }

  std::int64_t find(std::int64_t v) {
    check(v);
    std::int64_t root = v;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[v] != root) v = std::exchange(parent_[v], root);
    return root;
  }

  /// Returns the representative of the merged set.
  std::int64_t unite(std::int64_t a, std::int64_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    --components_;
    return a;
  }

  bool same(std::int64_t a, std::int64_t b) { return find(a) == find(b); }

 private:
  void check(std::int64_t v) const {
    if (v < 0 || v >= size())
      throw Error(ErrorCode::VertexOutOfRange, "id " + std::to_string(v) + " outside disjoint set of size " +
                                                   std::to_string(size()));
  }

  std::vector<std::int64_t> parent_;
  std::vector<std::uint8_t> rank_;
  std::int64_t components_ = 0;
};

}  // namespace lts
