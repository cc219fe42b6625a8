#include <stdexcept>
#include <unordered_set>

#include "casim/structures.hpp"

namespace casim {

u64 make_node_raw(World& w, i64 key, u64 next) {
  u64 a = w.heap.alloc(0, node::kListWords, 0);
  w.machine.poke(a + node::kKey, static_cast<u64>(key));
  w.machine.poke(a + node::kNext, next);
  return a;
}

// ---------------------------------------------------------------------------
// conditional-access variant
// ---------------------------------------------------------------------------

CaSetList::CaSetList(World& w, Smr& smr) : w_(w), smr_(smr) {
  tail_ = make_node_raw(w, kKeyMax, 0);
  head_ = make_node_raw(w, kKeyMin, tail_);
}

// Hand-over-hand tag window. Links are only read under a tag on their holder,
// so a successful cwrite on a window line proves nothing in the window moved
// since we read it; no mark checks or re-validation needed.
Task<CaSetList::Loc> CaSetList::locate(SimContext& ctx, i64 key) {
  for (;;) {
    u64 pred = head_;
    auto rn = co_await ctx.cread(pred + node::kNext);
    if (!rn.ok) {
      co_await ctx.untag_all();
      ++restarts;
      continue;
    }
    u64 curr = rn.value;
    bool failed = false;
    for (;;) {
      auto rk = co_await ctx.cread(curr + node::kKey);
      if (!rk.ok) {
        failed = true;
        break;
      }
      i64 ckey = static_cast<i64>(rk.value);
      if (ckey >= key) co_return Loc{pred, curr, ckey};
      co_await ctx.untag_one(pred);
      pred = curr;
      rn = co_await ctx.cread(pred + node::kNext);  // tagged line, plain hit unless revoked
      if (!rn.ok) {
        failed = true;
        break;
      }
      curr = rn.value;
    }
    if (failed) {
      co_await ctx.untag_all();
      ++restarts;
    }
  }
}

// Fails on a revoked bit, a taken lock, or a lost cwrite race; all three send
// the caller back to locate. The lock word shares the node's line, so success
// certifies the whole node untouched since we tagged it.
Task<bool> CaSetList::try_lock(SimContext& ctx, u64 node_addr) {
  auto r = co_await ctx.cread(node_addr + node::kLock);
  if (!r.ok || r.value != 0) co_return false;
  co_return co_await ctx.cwrite(node_addr + node::kLock, 1);
}

Task<bool> CaSetList::contains(SimContext& ctx, i64 key) {
  Loc loc = co_await locate(ctx, key);
  co_await ctx.untag_all();
  co_return loc.ckey == key;
}

Task<bool> CaSetList::insert(SimContext& ctx, i64 key) {
  for (;;) {
    Loc loc = co_await locate(ctx, key);
    if (loc.ckey == key) {
      co_await ctx.untag_all();
      co_return false;
    }
    if (!co_await try_lock(ctx, loc.pred)) {
      co_await ctx.untag_all();
      ++restarts;
      continue;
    }
    if (!co_await try_lock(ctx, loc.curr)) {
      co_await ctx.store(loc.pred + node::kLock, 0);
      co_await ctx.untag_all();
      ++restarts;
      continue;
    }
    u64 n = co_await ctx.alloc(node::kListWords);
    co_await smr_.on_alloc(ctx);
    co_await ctx.store(n + node::kKey, static_cast<u64>(key));
    co_await ctx.store(n + node::kNext, loc.curr);
    co_await ctx.store(loc.pred + node::kNext, n);
    co_await ctx.store(loc.curr + node::kLock, 0);
    co_await ctx.store(loc.pred + node::kLock, 0);
    co_await ctx.untag_all();
    co_return true;
  }
}

Task<bool> CaSetList::erase(SimContext& ctx, i64 key) {
  for (;;) {
    Loc loc = co_await locate(ctx, key);
    if (loc.ckey != key) {
      co_await ctx.untag_all();
      co_return false;
    }
    if (!co_await try_lock(ctx, loc.pred)) {
      co_await ctx.untag_all();
      ++restarts;
      continue;
    }
    if (!co_await try_lock(ctx, loc.curr)) {
      co_await ctx.store(loc.pred + node::kLock, 0);
      co_await ctx.untag_all();
      ++restarts;
      continue;
    }
    co_await ctx.store(loc.curr + node::kMark, 1);
    u64 nxt = co_await ctx.load(loc.curr + node::kNext);  // both locks held
    co_await ctx.store(loc.pred + node::kNext, nxt);
    co_await ctx.store(loc.curr + node::kLock, 0);
    co_await ctx.store(loc.pred + node::kLock, 0);
    co_await ctx.untag_all();
    co_await smr_.retire(ctx, loc.curr);
    co_return true;
  }
}

u64 CaSetList::reachable_count() const {
  // visited guard: an unsafe run can corrupt the chain into a cycle
  std::unordered_set<u64> seen;
  for (u64 a = head_; a != 0 && seen.insert(a).second; a = w_.machine.peek(a + node::kNext)) {}
  return seen.size();
}

// ---------------------------------------------------------------------------
// baseline: lazy list, spin locks + post-lock validation
// ---------------------------------------------------------------------------

BaseSetList::BaseSetList(World& w, Smr& smr) : w_(w), smr_(smr) {
  tail_ = make_node_raw(w, kKeyMax, 0);
  head_ = make_node_raw(w, kKeyMin, tail_);
}

Task<void> BaseSetList::lock(SimContext& ctx, u64 node_addr) {
  while (!co_await ctx.cas(node_addr + node::kLock, 0, 1)) {
  }
}

// With hazard slots, each new node is published then re-validated against its
// still-protected parent: parent unmarked + link unchanged proves the node was
// reachable (hence unfreed) after the publish landed.
Task<BaseSetList::Loc> BaseSetList::locate(SimContext& ctx, i64 key) {
  const bool hz = smr_.cfg.kind == SmrKind::hp;
  for (;;) {
    u64 pred = head_;
    u64 curr = co_await ctx.load(pred + node::kNext);
    u32 ps = 0, cs = 1;
    if (hz) {
      co_await smr_.publish(ctx, cs, curr);
      if (co_await ctx.load(pred + node::kNext) != curr) {  // head is never marked
        ++restarts;
        continue;
      }
    }
    bool failed = false;
    for (;;) {
      i64 ckey = static_cast<i64>(co_await ctx.load(curr + node::kKey));
      if (ckey >= key) co_return Loc{pred, curr, ckey};
      u64 nxt = co_await ctx.load(curr + node::kNext);
      if (hz) {
        co_await smr_.publish(ctx, ps, nxt);  // ps guards pred, which we are about to drop
        u64 mk = co_await ctx.load(curr + node::kMark);
        if (mk != 0 || co_await ctx.load(curr + node::kNext) != nxt) {
          failed = true;
          break;
        }
      }
      pred = curr;
      curr = nxt;
      std::swap(ps, cs);
    }
    if (failed) ++restarts;
  }
}

Task<bool> BaseSetList::contains(SimContext& ctx, i64 key) {
  Loc loc = co_await locate(ctx, key);
  if (loc.ckey != key) co_return false;
  u64 mk = co_await ctx.load(loc.curr + node::kMark);
  co_return mk == 0;
}

Task<bool> BaseSetList::insert(SimContext& ctx, i64 key) {
  for (;;) {
    Loc loc = co_await locate(ctx, key);
    co_await lock(ctx, loc.pred);
    co_await lock(ctx, loc.curr);
    u64 pm = co_await ctx.load(loc.pred + node::kMark);
    u64 cm = co_await ctx.load(loc.curr + node::kMark);
    u64 pn = co_await ctx.load(loc.pred + node::kNext);
    if (pm != 0 || cm != 0 || pn != loc.curr) {
      co_await ctx.store(loc.curr + node::kLock, 0);
      co_await ctx.store(loc.pred + node::kLock, 0);
      ++restarts;
      continue;
    }
    if (loc.ckey == key) {
      co_await ctx.store(loc.curr + node::kLock, 0);
      co_await ctx.store(loc.pred + node::kLock, 0);
      co_return false;
    }
    u64 n = co_await ctx.alloc(node::kListWords);
    co_await smr_.on_alloc(ctx);
    co_await ctx.store(n + node::kKey, static_cast<u64>(key));
    co_await ctx.store(n + node::kNext, loc.curr);
    co_await ctx.store(loc.pred + node::kNext, n);
    co_await ctx.store(loc.curr + node::kLock, 0);
    co_await ctx.store(loc.pred + node::kLock, 0);
    co_return true;
  }
}

Task<bool> BaseSetList::erase(SimContext& ctx, i64 key) {
  for (;;) {
    Loc loc = co_await locate(ctx, key);
    co_await lock(ctx, loc.pred);
    co_await lock(ctx, loc.curr);
    u64 pm = co_await ctx.load(loc.pred + node::kMark);
    u64 cm = co_await ctx.load(loc.curr + node::kMark);
    u64 pn = co_await ctx.load(loc.pred + node::kNext);
    if (pm != 0 || cm != 0 || pn != loc.curr) {
      co_await ctx.store(loc.curr + node::kLock, 0);
      co_await ctx.store(loc.pred + node::kLock, 0);
      ++restarts;
      continue;
    }
    if (loc.ckey != key) {
      co_await ctx.store(loc.curr + node::kLock, 0);
      co_await ctx.store(loc.pred + node::kLock, 0);
      co_return false;
    }
    co_await ctx.store(loc.curr + node::kMark, 1);
    u64 nxt = co_await ctx.load(loc.curr + node::kNext);
    co_await ctx.store(loc.pred + node::kNext, nxt);
    co_await ctx.store(loc.curr + node::kLock, 0);
    co_await ctx.store(loc.pred + node::kLock, 0);
    co_await smr_.retire(ctx, loc.curr);
    co_return true;
  }
}

u64 BaseSetList::reachable_count() const {
  // visited guard: an unsafe run can corrupt the chain into a cycle
  std::unordered_set<u64> seen;
  for (u64 a = head_; a != 0 && seen.insert(a).second; a = w_.machine.peek(a + node::kNext)) {}
  return seen.size();
}

}  // namespace casim
