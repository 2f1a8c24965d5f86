#pragma once

#include <cassert>
#include <cstddef>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "lts/common.hpp"

namespace lts {

/// Pairing heap with O(1) insert and merge, amortized O(log n) pop.
///
/// Nodes live in blocks owned by the heap; merging splices the other heap's
/// blocks into this one so node addresses never move. `Less` orders keys and
/// the top is the greatest element under it. Equal keys are tolerated.
template <typename Key = Rank, typename Payload = VertexId, typename Less = std::less<Key>>
class PairingHeap {
  struct Node {
    Key key;
    Payload payload;
    Node* child;
    Node* sibling;
  };
  static constexpr std::size_t kBlock = 256;

 public:
  PairingHeap() = default;
  PairingHeap(const PairingHeap&) = delete;
  PairingHeap& operator=(const PairingHeap&) = delete;
  PairingHeap(PairingHeap&& o) noexcept { *this = std::move(o); }
  PairingHeap& operator=(PairingHeap&& o) noexcept {
    if (this != &o) {
      root_ = std::exchange(o.root_, nullptr);
      size_ = std::exchange(o.size_, 0);
      free_ = std::exchange(o.free_, nullptr);
      blocks_ = std::move(o.blocks_);
      current_ = std::exchange(o.current_, nullptr);
      used_ = std::exchange(o.used_, kBlock);
      o.blocks_.clear();
    }
    return *this;
  }

  bool empty() const noexcept { return root_ == nullptr; }
  std::size_t size() const noexcept { return size_; }

  void push(const Key& key, const Payload& payload) {
    Node* n = allocate();
    n->key = key;
    n->payload = payload;
    n->child = n->sibling = nullptr;
    root_ = link(root_, n);
    ++size_;
  }

  const Key& top_key() const {
    assert(root_);
    return root_->key;
  }
  const Payload& top_payload() const {
    assert(root_);
    return root_->payload;
  }

  std::pair<Key, Payload> pop() {
    assert(root_);
    Node* old = root_;
    std::pair<Key, Payload> out{old->key, old->payload};
    root_ = combine(old->child);
    old->sibling = free_;
    free_ = old;
    --size_;
    return out;
  }

  /// Moves every entry of `other` into this heap; `other` becomes empty.
  void merge(PairingHeap& other) {
    if (&other == this) return;
    root_ = link(root_, other.root_);
    size_ += other.size_;
    // Keep other's storage alive here: its nodes are now part of our tree.
    for (auto& b : other.blocks_) blocks_.push_back(std::move(b));
    Node* f = other.free_;
    while (f) {
      Node* next = f->sibling;
      f->sibling = free_;
      free_ = f;
      f = next;
    }
    other.blocks_.clear();
    other.root_ = nullptr;
    other.free_ = nullptr;
    other.size_ = 0;
    other.current_ = nullptr;
    other.used_ = kBlock;
  }

  void clear() {
    root_ = nullptr;
    free_ = nullptr;
    size_ = 0;
    blocks_.clear();
    current_ = nullptr;
    used_ = kBlock;
  }

 private:
  Node* allocate() {
    if (free_) {
      Node* n = free_;
      free_ = n->sibling;
      return n;
    }
    if (used_ == kBlock) {
      blocks_.push_back(std::make_unique<Node[]>(kBlock));
      current_ = blocks_.back().get();
      used_ = 0;
    }
    return &current_[used_++];
  }

  static Node* link(Node* a, Node* b) {
    if (!a) return b;
    if (!b) return a;
    if (Less{}(a->key, b->key)) std::swap(a, b);
    b->sibling = a->child;
    a->child = b;
    return a;
  }

  // Standard two-pass pairing, done iteratively.
  static Node* combine(Node* first) {
    if (!first) return nullptr;
    Node* pairs = nullptr;  // reversed list of paired subtrees
    while (first) {
      Node* a = first;
      Node* b = a->sibling;
      if (!b) {
        a->sibling = pairs;
        pairs = a;
        break;
      }
      first = b->sibling;
      a->sibling = b->sibling = nullptr;
      Node* m = link(a, b);
      m->sibling = pairs;
      pairs = m;
    }
    Node* result = nullptr;
    while (pairs) {
      Node* next = pairs->sibling;
      pairs->sibling = nullptr;
      result = link(result, pairs);
      pairs = next;
    }
    return result;
  }

  Node* root_ = nullptr;
  std::size_t size_ = 0;
  Node* free_ = nullptr;
  std::vector<std::unique_ptr<Node[]>> blocks_;
  Node* current_ = nullptr;
  std::size_t used_ = kBlock;
};

/// Max-heap over order ranks carrying vertex ids.
using MaxRankHeap = PairingHeap<Rank, VertexId>;
/// Min-heap over order ranks carrying vertex ids.
using MinRankHeap = PairingHeap<Rank, VertexId, std::greater<Rank>>;

}  // namespace lts
