#include <unordered_set>

#include "casim/structures.hpp"

namespace casim {

// ---------------------------------------------------------------------------
// conditional-access stack. top sits in its own static line and stays tagged
// across an attempt, so a successful cwrite(top) certifies top never moved
// since we read it -- reuse of the popped node in between is impossible.
// ---------------------------------------------------------------------------

CaStack::CaStack(World& w, Smr& smr) : w_(w), smr_(smr) { top_ = w.static_line(); }

Task<void> CaStack::push(SimContext& ctx, i64 key) {
  u64 n = co_await ctx.alloc(node::kListWords);
  co_await smr_.on_alloc(ctx);
  co_await ctx.store(n + node::kKey, static_cast<u64>(key));
  for (;;) {
    auto rt = co_await ctx.cread(top_);
    if (!rt.ok) {
      co_await ctx.untag_all();
      ++restarts;
      continue;
    }
    co_await ctx.store(n + node::kNext, rt.value);  // node still private
    if (co_await ctx.cwrite(top_, n)) break;
    co_await ctx.untag_all();
    ++restarts;
  }
  co_await ctx.untag_all();
}

Task<std::pair<bool, i64>> CaStack::pop(SimContext& ctx) {
  for (;;) {
    auto rt = co_await ctx.cread(top_);
    if (!rt.ok) {
      co_await ctx.untag_all();
      ++restarts;
      continue;
    }
    u64 t = rt.value;
    if (t == 0) {
      co_await ctx.untag_all();
      co_return {false, 0};
    }
    auto rn = co_await ctx.cread(t + node::kNext);
    if (!rn.ok) {
      co_await ctx.untag_all();
      ++restarts;
      continue;
    }
    auto rk = co_await ctx.cread(t + node::kKey);  // same line; fails only if revoked since
    if (!rk.ok) {
      co_await ctx.untag_all();
      ++restarts;
      continue;
    }
    if (!co_await ctx.cwrite(top_, rn.value)) {
      co_await ctx.untag_all();
      ++restarts;
      continue;
    }
    co_await ctx.untag_all();
    co_await smr_.retire(ctx, t);
    co_return {true, static_cast<i64>(rk.value)};
  }
}

Task<std::pair<bool, i64>> CaStack::peek(SimContext& ctx) {
  for (;;) {
    auto rt = co_await ctx.cread(top_);
    if (!rt.ok) {
      co_await ctx.untag_all();
      ++restarts;
      continue;
    }
    if (rt.value == 0) {
      co_await ctx.untag_all();
      co_return {false, 0};
    }
    auto rk = co_await ctx.cread(rt.value + node::kKey);
    if (!rk.ok) {
      co_await ctx.untag_all();
      ++restarts;
      continue;
    }
    co_await ctx.untag_all();
    co_return {true, static_cast<i64>(rk.value)};
  }
}

u64 CaStack::reachable_count() const {
  std::unordered_set<u64> seen;  // unsafe runs can leave a cyclic chain
  for (u64 a = w_.machine.peek(top_); a != 0 && seen.insert(a).second;
       a = w_.machine.peek(a + node::kNext)) {}
  return seen.size();
}

// ---------------------------------------------------------------------------
// baseline: Treiber stack. The pop-side read of t->next is the classic
// use-after-free / ABA window; hazard slots close it, immediate free exposes it.
// ---------------------------------------------------------------------------

TreiberStack::TreiberStack(World& w, Smr& smr) : w_(w), smr_(smr) { top_ = w.static_line(); }

Task<void> TreiberStack::push(SimContext& ctx, i64 key) {
  u64 n = co_await ctx.alloc(node::kListWords);
  co_await smr_.on_alloc(ctx);
  co_await ctx.store(n + node::kKey, static_cast<u64>(key));
  for (;;) {
    u64 t = co_await ctx.load(top_);
    co_await ctx.store(n + node::kNext, t);
    if (co_await ctx.cas(top_, t, n)) co_return;
    ++restarts;
  }
}

Task<std::pair<bool, i64>> TreiberStack::pop(SimContext& ctx) {
  const bool hz = smr_.cfg.kind == SmrKind::hp;
  for (;;) {
    u64 t = co_await ctx.load(top_);
    if (t == 0) co_return {false, 0};
    if (hz) {
      co_await smr_.publish(ctx, 0, t);
      if (co_await ctx.load(top_) != t) {
        ++restarts;
        continue;
      }
    }
    u64 nxt = co_await ctx.load(t + node::kNext);
    if (!co_await ctx.cas(top_, t, nxt)) {
      ++restarts;
      continue;
    }
    i64 k = static_cast<i64>(co_await ctx.load(t + node::kKey));
    co_await smr_.retire(ctx, t);
    co_return {true, k};
  }
}

Task<std::pair<bool, i64>> TreiberStack::peek(SimContext& ctx) {
  const bool hz = smr_.cfg.kind == SmrKind::hp;
  for (;;) {
    u64 t = co_await ctx.load(top_);
    if (t == 0) co_return {false, 0};
    if (hz) {
      co_await smr_.publish(ctx, 0, t);
      if (co_await ctx.load(top_) != t) {
        ++restarts;
        continue;
      }
    }
    i64 k = static_cast<i64>(co_await ctx.load(t + node::kKey));
    co_return {true, k};
  }
}

u64 TreiberStack::reachable_count() const {
  std::unordered_set<u64> seen;  // unsafe runs can leave a cyclic chain
  for (u64 a = w_.machine.peek(top_); a != 0 && seen.insert(a).second;
       a = w_.machine.peek(a + node::kNext)) {}
  return seen.size();
}

}  // namespace casim
