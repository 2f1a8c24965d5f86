#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "lts/common.hpp"
#include "lts/mergeable_heap.hpp"
#include "lts/triangulation.hpp"

namespace lts {

inline int resolve_threads(int requested) {
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

namespace detail {

enum class PropStatus : std::uint8_t { Running, Halted, Absorbed, Persistent, Exhausted };

/// Outcome of a batch of superlevel-set propagations, one per seed.
///
/// `stop[i]` is the halting saddle (Halted), the saddle where the object was
/// absorbed (Absorbed) or the vertex that triggered termination (Persistent).
struct PropagationOutcome {
  std::vector<VertexId> seed;
  std::vector<PropStatus> status;
  std::vector<VertexId> stop;
  std::vector<std::int32_t> absorbedBy;
  std::vector<std::vector<VertexId>> owned;
};

/// Descending propagations from every seed over `rank` (highest rank first).
///
/// A propagation extracting v continues only when every higher neighbor of v
/// already belongs to its lineage. Otherwise it adds its share to a counter on
/// v and waits there; the propagation completing the counter merges all
/// waiting heaps into the one with the highest seed, which continues while the
/// others are recorded as absorbed at v. With `values` set, a propagation
/// stops for good once values[seed] - values[v] >= epsilon.
class PropagationEngine {
  static constexpr std::size_t kStripes = 1024;

  struct SaddleState {
    std::int64_t count = 0;
    std::vector<std::int32_t> waiting;
  };

  struct Stripe {
    std::mutex mutex;
    std::unordered_map<VertexId, SaddleState> saddles;
  };

 public:
  PropagationEngine(const Triangulation& mesh, const std::vector<Rank>& rank, const double* values = nullptr,
                    double epsilon = std::numeric_limits<double>::infinity())
      : mesh_(mesh), rank_(rank), values_(values), epsilon_(epsilon) {}

  PropagationOutcome run(const std::vector<VertexId>& seeds, int threads) {
    const auto n = mesh_.vertex_count();
    const auto k = static_cast<std::int32_t>(seeds.size());
    owner_ = std::make_unique<std::atomic<std::int32_t>[]>(static_cast<std::size_t>(n));
    for (VertexId v = 0; v < n; ++v) owner_[v].store(-1, std::memory_order_relaxed);
    lineage_ = std::make_unique<std::atomic<std::int32_t>[]>(static_cast<std::size_t>(k));
    lineage_size_.assign(static_cast<std::size_t>(k), 1);
    heaps_.clear();
    heaps_.resize(static_cast<std::size_t>(k));
    stripes_ = std::make_unique<Stripe[]>(kStripes);

    PropagationOutcome out;
    out.seed = seeds;
    out.status.assign(static_cast<std::size_t>(k), PropStatus::Running);
    out.stop.assign(static_cast<std::size_t>(k), kNoVertex);
    out.absorbedBy.assign(static_cast<std::size_t>(k), -1);
    out.owned.assign(static_cast<std::size_t>(k), {});
    for (std::int32_t i = 0; i < k; ++i) {
      lineage_[i].store(i, std::memory_order_relaxed);
      heaps_[i].push(rank_[seeds[i]], seeds[i]);
    }
    out_ = &out;

    threads = std::max(1, threads);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (threads > 1 && k > 1)
    for (std::int32_t i = 0; i < k; ++i) propagate(i);

    out_ = nullptr;
    heaps_.clear();
    stripes_.reset();
    return out;
  }

 private:
  std::int32_t find(std::int32_t x) const {
    for (;;) {
      const auto p = lineage_[x].load(std::memory_order_acquire);
      if (p == x) return x;
      x = p;
    }
  }

  // Only called on lineages nobody else is running.
  std::int32_t unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (lineage_size_[a] < lineage_size_[b]) std::swap(a, b);
    lineage_[b].store(a, std::memory_order_release);
    lineage_size_[a] += lineage_size_[b];
    return a;
  }

  bool owned_by(VertexId u, std::int32_t root) const {
    const auto o = owner_[u].load(std::memory_order_acquire);
    return o >= 0 && find(o) == root;
  }

  void propagate(std::int32_t cur) {
    auto& out = *out_;
    std::int32_t root = find(cur);
    for (;;) {
      auto& heap = heaps_[cur];
      if (heap.empty()) {
        out.status[cur] = PropStatus::Exhausted;
        return;
      }
      const VertexId v = heap.pop().second;
      if (owned_by(v, root)) continue;

      if (values_ && values_[out.seed[cur]] - values_[v] >= epsilon_) {
        out.status[cur] = PropStatus::Persistent;
        out.stop[cur] = v;
        return;
      }

      const Rank rv = rank_[v];
      std::int64_t higher = 0, mine = 0;
      mesh_.for_each_neighbor(v, [&](VertexId u) {
        if (rank_[u] > rv) {
          ++higher;
          if (owned_by(u, root)) ++mine;
        }
      });

      if (mine < higher) {
        std::vector<std::int32_t> group;
        {
          auto& stripe = stripes_[static_cast<std::size_t>(v) % kStripes];
          std::lock_guard<std::mutex> lock(stripe.mutex);
          auto& st = stripe.saddles[v];
          st.count += mine;
          if (st.count < higher) {
            st.waiting.push_back(cur);
            out.status[cur] = PropStatus::Halted;
            out.stop[cur] = v;
            return;
          }
          group = std::move(st.waiting);
          stripe.saddles.erase(v);
        }
        group.push_back(cur);
        std::int32_t eldest = group.front();
        for (auto q : group)
          if (rank_[out.seed[q]] > rank_[out.seed[eldest]]) eldest = q;
        for (auto q : group) {
          if (q == eldest) continue;
          heaps_[eldest].merge(heaps_[q]);
          out.absorbedBy[q] = eldest;
          out.status[q] = PropStatus::Absorbed;
          out.stop[q] = v;
          unite(q, eldest);
        }
        cur = eldest;
        root = find(cur);
        out.status[cur] = PropStatus::Running;
        out.stop[cur] = kNoVertex;
      }

      owner_[v].store(cur, std::memory_order_release);
      out.owned[cur].push_back(v);
      auto& h = heaps_[cur];
      mesh_.for_each_neighbor(v, [&](VertexId u) {
        if (rank_[u] < rv && owner_[u].load(std::memory_order_acquire) < 0) h.push(rank_[u], u);
      });
    }
  }

  const Triangulation& mesh_;
  const std::vector<Rank>& rank_;
  const double* values_;
  double epsilon_;

  std::unique_ptr<std::atomic<std::int32_t>[]> owner_;
  std::unique_ptr<std::atomic<std::int32_t>[]> lineage_;
  std::vector<std::int32_t> lineage_size_;
  std::vector<MaxRankHeap> heaps_;
  std::unique_ptr<Stripe[]> stripes_;
  PropagationOutcome* out_ = nullptr;
};

}  // namespace detail
}  // namespace lts
