#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "casim/smr.hpp"

namespace casim {

using i64 = std::int64_t;

constexpr i64 kKeyMin = INT64_MIN;  // left sentinel / never a client key
constexpr i64 kKeyMax = INT64_MAX;  // right sentinel / tree dummy key

// Node field offsets. Every node occupies one cacheline.
namespace node {
constexpr u64 kKey = 0, kLock = 8, kMark = 16, kNext = 24;  // list & stack: 4 words
constexpr u64 kLeft = 24, kRight = 32, kLeaf = 40;          // external tree: 6 words
constexpr u64 kListWords = 4, kTreeWords = 6;
}  // namespace node

// Allocates and initializes a node outside the simulation (setup only).
u64 make_node_raw(World& w, i64 key, u64 next);

struct SetDs {
  virtual ~SetDs() = default;
  virtual Task<bool> contains(SimContext& ctx, i64 key) = 0;
  virtual Task<bool> insert(SimContext& ctx, i64 key) = 0;
  virtual Task<bool> erase(SimContext& ctx, i64 key) = 0;
  virtual u64 reachable_count() const = 0;  // oracle-side structural walk
  virtual u64 restart_count() const = 0;
};

struct StackDs {
  virtual ~StackDs() = default;
  virtual Task<void> push(SimContext& ctx, i64 key) = 0;
  virtual Task<std::pair<bool, i64>> pop(SimContext& ctx) = 0;
  virtual Task<std::pair<bool, i64>> peek(SimContext& ctx) = 0;
  virtual u64 reachable_count() const = 0;
  virtual u64 restart_count() const = 0;
};

// ---------------------------------------------------------------------------
// Sorted linked list with sentinels, conditional-access variant. Traversal
// holds a two-line tag window (pred, curr); any conflicting remote write
// fails the next conditional access and restarts from the head.
// ---------------------------------------------------------------------------
class CaSetList : public SetDs {
 public:
  CaSetList(World& w, Smr& smr);

  Task<bool> contains(SimContext& ctx, i64 key) override;
  Task<bool> insert(SimContext& ctx, i64 key) override;
  Task<bool> erase(SimContext& ctx, i64 key) override;
  u64 reachable_count() const override;
  u64 restart_count() const override { return restarts; }

  u64 head() const { return head_; }
  u64 restarts = 0;

  struct Loc {
    u64 pred = 0, curr = 0;
    i64 ckey = 0;
  };
  // Restarts internally on conditional-access failure. Postcondition: pred and
  // curr tagged, pred.key < key <= ckey (= curr.key).
  Task<Loc> locate(SimContext& ctx, i64 key);
  Task<bool> try_lock(SimContext& ctx, u64 node_addr);

 private:
  World& w_;
  Smr& smr_;
  u64 head_, tail_;
};

// Baseline: same layout, plain accesses, lock-then-validate, retirement
// through the configured scheme (hazard slots rotate during traversal).
class BaseSetList : public SetDs {
 public:
  BaseSetList(World& w, Smr& smr);

  Task<bool> contains(SimContext& ctx, i64 key) override;
  Task<bool> insert(SimContext& ctx, i64 key) override;
  Task<bool> erase(SimContext& ctx, i64 key) override;
  u64 reachable_count() const override;
  u64 restart_count() const override { return restarts; }

  u64 head() const { return head_; }
  u64 restarts = 0;

 private:
  struct Loc {
    u64 pred = 0, curr = 0;
    i64 ckey = 0;
  };
  Task<Loc> locate(SimContext& ctx, i64 key);  // hazard-protected when the scheme needs it
  Task<void> lock(SimContext& ctx, u64 node_addr);

  World& w_;
  Smr& smr_;
  u64 head_, tail_;
};

// ---------------------------------------------------------------------------
// Chaining hash table: fixed bucket array, one sentinel-delimited list per
// bucket. bucket = key mod bucket_count.
// ---------------------------------------------------------------------------
template <class ListT>
class HashSet : public SetDs {
 public:
  HashSet(World& w, Smr& smr, u32 buckets) {
    for (u32 b = 0; b < buckets; ++b) buckets_.push_back(std::make_unique<ListT>(w, smr));
  }
  Task<bool> contains(SimContext& ctx, i64 key) override { return at(key).contains(ctx, key); }
  Task<bool> insert(SimContext& ctx, i64 key) override { return at(key).insert(ctx, key); }
  Task<bool> erase(SimContext& ctx, i64 key) override { return at(key).erase(ctx, key); }
  u64 reachable_count() const override {
    u64 n = 0;
    for (const auto& b : buckets_) n += b->reachable_count();
    return n;
  }
  u64 restart_count() const override {
    u64 n = 0;
    for (const auto& b : buckets_) n += b->restart_count();
    return n;
  }
  ListT& at(i64 key) { return *buckets_[static_cast<u64>(key) % buckets_.size()]; }

 private:
  std::vector<std::unique_ptr<ListT>> buckets_;
};

using CaHashSet = HashSet<CaSetList>;
using BaseHashSet = HashSet<BaseSetList>;

// ---------------------------------------------------------------------------
// Stacks. top lives in its own static line.
// ---------------------------------------------------------------------------
class CaStack : public StackDs {
 public:
  CaStack(World& w, Smr& smr);
  Task<void> push(SimContext& ctx, i64 key) override;
  Task<std::pair<bool, i64>> pop(SimContext& ctx) override;
  Task<std::pair<bool, i64>> peek(SimContext& ctx) override;
  u64 reachable_count() const override;
  u64 restart_count() const override { return restarts; }

  u64 top_addr() const { return top_; }
  u64 restarts = 0;

 private:
  World& w_;
  Smr& smr_;
  u64 top_;
};

class TreiberStack : public StackDs {
 public:
  TreiberStack(World& w, Smr& smr);
  Task<void> push(SimContext& ctx, i64 key) override;
  Task<std::pair<bool, i64>> pop(SimContext& ctx) override;
  Task<std::pair<bool, i64>> peek(SimContext& ctx) override;
  u64 reachable_count() const override;
  u64 restart_count() const override { return restarts; }

  u64 top_addr() const { return top_; }
  u64 restarts = 0;

 private:
  World& w_;
  Smr& smr_;
  u64 top_;
};

// ---------------------------------------------------------------------------
// External (leaf-oriented) BST. Keys live in leaves; internal nodes route
// with "key < node.key goes left". The sentinel root (dummy key +inf) and its
// two dummy leaves are never removed, so every client leaf has a parent and
// grandparent. Deletion marks the leaf and its parent, swings the
// grandparent's child to the sibling, and frees both removed nodes.
// ---------------------------------------------------------------------------
class CaBst : public SetDs {
 public:
  CaBst(World& w, Smr& smr);
  Task<bool> contains(SimContext& ctx, i64 key) override;
  Task<bool> insert(SimContext& ctx, i64 key) override;
  Task<bool> erase(SimContext& ctx, i64 key) override;
  u64 reachable_count() const override;
  u64 restart_count() const override { return restarts; }

  u64 root() const { return root_; }
  u64 restarts = 0;
  u64 max_tag_window = 0;  // high-water mark of the traversal tag set

 private:
  struct Loc {
    u64 gp = 0, p = 0, leaf = 0;
    u64 gdir = 0, pdir = 0;  // child-field offsets taken at gp and p
    i64 lk = 0;
  };
  Task<Loc> locate(SimContext& ctx, i64 key);
  Task<bool> try_lock(SimContext& ctx, u64 node_addr);

  World& w_;
  Smr& smr_;
  u64 root_;
};

class BaseBst : public SetDs {
 public:
  BaseBst(World& w, Smr& smr);
  Task<bool> contains(SimContext& ctx, i64 key) override;
  Task<bool> insert(SimContext& ctx, i64 key) override;
  Task<bool> erase(SimContext& ctx, i64 key) override;
  u64 reachable_count() const override;
  u64 restart_count() const override { return restarts; }

  u64 root() const { return root_; }
  u64 restarts = 0;

 private:
  struct Loc {
    u64 gp = 0, p = 0, leaf = 0;
    u64 gdir = 0, pdir = 0;
    i64 lk = 0;
  };
  Task<Loc> locate(SimContext& ctx, i64 key);
  Task<void> lock(SimContext& ctx, u64 node_addr);

  World& w_;
  Smr& smr_;
  u64 root_;
};

}  // namespace casim
