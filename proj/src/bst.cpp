#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include "casim/structures.hpp"

namespace casim {

namespace {

u64 make_tree_node(World& w, i64 key, u64 leaf, u64 left, u64 right) {
  u64 a = w.heap.alloc(0, node::kTreeWords, 0);
  w.machine.poke(a + node::kKey, static_cast<u64>(key));
  w.machine.poke(a + node::kLeaf, leaf);
  w.machine.poke(a + node::kLeft, left);
  w.machine.poke(a + node::kRight, right);
  return a;
}

u64 dir_of(i64 key, i64 nkey) { return key < nkey ? node::kLeft : node::kRight; }
u64 other_dir(u64 d) { return d == node::kLeft ? node::kRight : node::kLeft; }

}  // namespace

// ---------------------------------------------------------------------------
// conditional-access variant.
//
// Leaf-oriented tree: elements sit in leaves, internal nodes route (< goes
// left). The dummy root has key +inf with two +inf dummy leaves, and the
// routing rule keeps every +inf-keyed internal node's right child immutable,
// so a client leaf always has an internal parent and grandparent.
// ---------------------------------------------------------------------------

CaBst::CaBst(World& w, Smr& smr) : w_(w), smr_(smr) {
  u64 l = make_tree_node(w, kKeyMax, 1, 0, 0);
  u64 r = make_tree_node(w, kKeyMax, 1, 0, 0);
  root_ = make_tree_node(w, kKeyMax, 0, l, r);
}

// Three-line window: gp, p, leaf candidate. Same argument as the list: every
// link is read under a tag on its holder, which stays tagged until two levels
// further down, so lock-by-cwrite on p (or gp) certifies the window.
Task<CaBst::Loc> CaBst::locate(SimContext& ctx, i64 key) {
  for (;;) {
    u64 gp = 0, gdir = 0;
    u64 p = root_;
    u64 pdir = node::kLeft;  // root key is +inf; clients always start left
    auto rc = co_await ctx.cread(p + pdir);
    if (!rc.ok) {
      co_await ctx.untag_all();
      ++restarts;
      continue;
    }
    u64 c = rc.value;
    bool failed = false;
    for (;;) {
      auto rk = co_await ctx.cread(c + node::kKey);
      if (!rk.ok) {
        failed = true;
        break;
      }
      auto rl = co_await ctx.cread(c + node::kLeaf);
      if (!rl.ok) {
        failed = true;
        break;
      }
      max_tag_window = std::max<u64>(max_tag_window, w_.ca.state(ctx.tid()).tag_set.size());
      if (rl.value != 0) co_return Loc{gp, p, c, gdir, pdir, static_cast<i64>(rk.value)};
      if (gp != 0) co_await ctx.untag_one(gp);
      gp = p;
      gdir = pdir;
      p = c;
      pdir = dir_of(key, static_cast<i64>(rk.value));
      rc = co_await ctx.cread(p + pdir);
      if (!rc.ok) {
        failed = true;
        break;
      }
      c = rc.value;
    }
    if (failed) {
      co_await ctx.untag_all();
      ++restarts;
    }
  }
}

Task<bool> CaBst::try_lock(SimContext& ctx, u64 node_addr) {
  auto r = co_await ctx.cread(node_addr + node::kLock);
  if (!r.ok || r.value != 0) co_return false;
  co_return co_await ctx.cwrite(node_addr + node::kLock, 1);
}

Task<bool> CaBst::contains(SimContext& ctx, i64 key) {
  Loc loc = co_await locate(ctx, key);
  co_await ctx.untag_all();
  co_return loc.lk == key;
}

Task<bool> CaBst::insert(SimContext& ctx, i64 key) {
  for (;;) {
    Loc loc = co_await locate(ctx, key);
    if (loc.lk == key) {
      co_await ctx.untag_all();
      co_return false;
    }
    if (!co_await try_lock(ctx, loc.p)) {
      co_await ctx.untag_all();
      ++restarts;
      continue;
    }
    u64 nl = co_await ctx.alloc(node::kTreeWords);
    co_await smr_.on_alloc(ctx);
    co_await ctx.store(nl + node::kKey, static_cast<u64>(key));
    co_await ctx.store(nl + node::kLeaf, 1);
    u64 ni = co_await ctx.alloc(node::kTreeWords);
    co_await smr_.on_alloc(ctx);
    co_await ctx.store(ni + node::kKey, static_cast<u64>(std::max(key, loc.lk)));
    u64 left = key < loc.lk ? nl : loc.leaf;
    u64 right = key < loc.lk ? loc.leaf : nl;
    co_await ctx.store(ni + node::kLeft, left);
    co_await ctx.store(ni + node::kRight, right);
    co_await ctx.store(loc.p + loc.pdir, ni);
    co_await ctx.store(loc.p + node::kLock, 0);
    co_await ctx.untag_all();
    co_return true;
  }
}

Task<bool> CaBst::erase(SimContext& ctx, i64 key) {
  for (;;) {
    Loc loc = co_await locate(ctx, key);
    if (loc.lk != key) {
      co_await ctx.untag_all();
      co_return false;
    }
    if (loc.gp == 0) throw std::logic_error("bst: client leaf with no grandparent");
    if (!co_await try_lock(ctx, loc.gp)) {
      co_await ctx.untag_all();
      ++restarts;
      continue;
    }
    if (!co_await try_lock(ctx, loc.p)) {
      co_await ctx.store(loc.gp + node::kLock, 0);
      co_await ctx.untag_all();
      ++restarts;
      continue;
    }
    u64 sib = co_await ctx.load(loc.p + other_dir(loc.pdir));  // p locked, stable
    co_await ctx.store(loc.p + node::kMark, 1);
    co_await ctx.store(loc.leaf + node::kMark, 1);
    co_await ctx.store(loc.gp + loc.gdir, sib);
    co_await ctx.store(loc.p + node::kLock, 0);
    co_await ctx.store(loc.gp + node::kLock, 0);
    co_await ctx.untag_all();
    co_await smr_.retire(ctx, loc.p);
    co_await smr_.retire(ctx, loc.leaf);
    co_return true;
  }
}

u64 CaBst::reachable_count() const {
  u64 n = 0;
  std::unordered_set<u64> seen;  // unsafe runs can corrupt child links into cycles
  std::vector<u64> st{root_};
  while (!st.empty()) {
    u64 a = st.back();
    st.pop_back();
    if (a == 0 || !seen.insert(a).second) continue;
    ++n;
    if (w_.machine.peek(a + node::kLeaf) == 0) {
      st.push_back(w_.machine.peek(a + node::kLeft));
      st.push_back(w_.machine.peek(a + node::kRight));
    }
  }
  return n;
}

// ---------------------------------------------------------------------------
// baseline: same shape, plain accesses, lock + validate, marks checked during
// hazard republication exactly as in the list.
// ---------------------------------------------------------------------------

BaseBst::BaseBst(World& w, Smr& smr) : w_(w), smr_(smr) {
  u64 l = make_tree_node(w, kKeyMax, 1, 0, 0);
  u64 r = make_tree_node(w, kKeyMax, 1, 0, 0);
  root_ = make_tree_node(w, kKeyMax, 0, l, r);
}

Task<void> BaseBst::lock(SimContext& ctx, u64 node_addr) {
  while (!co_await ctx.cas(node_addr + node::kLock, 0, 1)) {
  }
}

Task<BaseBst::Loc> BaseBst::locate(SimContext& ctx, i64 key) {
  const bool hz = smr_.cfg.kind == SmrKind::hp;
  for (;;) {
    u64 gp = 0, gdir = 0;
    u64 p = root_;
    u64 pdir = node::kLeft;
    u64 c = co_await ctx.load(p + pdir);
    u32 slot = 0;  // rotates over the three-node window
    if (hz) {
      co_await smr_.publish(ctx, slot, c);
      slot = (slot + 1) % 3;
      if (co_await ctx.load(p + pdir) != c) {  // root is never marked
        ++restarts;
        continue;
      }
    }
    bool failed = false;
    for (;;) {
      i64 ckey = static_cast<i64>(co_await ctx.load(c + node::kKey));
      u64 lf = co_await ctx.load(c + node::kLeaf);
      if (lf != 0) co_return Loc{gp, p, c, gdir, pdir, ckey};
      gp = p;
      gdir = pdir;
      p = c;
      pdir = dir_of(key, ckey);
      c = co_await ctx.load(p + pdir);
      if (hz) {
        co_await smr_.publish(ctx, slot, c);
        slot = (slot + 1) % 3;
        u64 mk = co_await ctx.load(p + node::kMark);
        if (mk != 0 || co_await ctx.load(p + pdir) != c) {
          failed = true;
          break;
        }
      }
    }
    if (failed) ++restarts;
  }
}

Task<bool> BaseBst::contains(SimContext& ctx, i64 key) {
  Loc loc = co_await locate(ctx, key);
  co_return loc.lk == key;
}

Task<bool> BaseBst::insert(SimContext& ctx, i64 key) {
  for (;;) {
    Loc loc = co_await locate(ctx, key);
    co_await lock(ctx, loc.p);
    u64 pm = co_await ctx.load(loc.p + node::kMark);
    u64 pc = co_await ctx.load(loc.p + loc.pdir);
    if (pm != 0 || pc != loc.leaf) {
      co_await ctx.store(loc.p + node::kLock, 0);
      ++restarts;
      continue;
    }
    if (loc.lk == key) {
      co_await ctx.store(loc.p + node::kLock, 0);
      co_return false;
    }
    u64 nl = co_await ctx.alloc(node::kTreeWords);
    co_await smr_.on_alloc(ctx);
    co_await ctx.store(nl + node::kKey, static_cast<u64>(key));
    co_await ctx.store(nl + node::kLeaf, 1);
    u64 ni = co_await ctx.alloc(node::kTreeWords);
    co_await smr_.on_alloc(ctx);
    co_await ctx.store(ni + node::kKey, static_cast<u64>(std::max(key, loc.lk)));
    u64 left = key < loc.lk ? nl : loc.leaf;
    u64 right = key < loc.lk ? loc.leaf : nl;
    co_await ctx.store(ni + node::kLeft, left);
    co_await ctx.store(ni + node::kRight, right);
    co_await ctx.store(loc.p + loc.pdir, ni);
    co_await ctx.store(loc.p + node::kLock, 0);
    co_return true;
  }
}

Task<bool> BaseBst::erase(SimContext& ctx, i64 key) {
  for (;;) {
    Loc loc = co_await locate(ctx, key);
    if (loc.lk != key) co_return false;
    if (loc.gp == 0) throw std::logic_error("bst: client leaf with no grandparent");
    co_await lock(ctx, loc.gp);
    co_await lock(ctx, loc.p);
    u64 gm = co_await ctx.load(loc.gp + node::kMark);
    u64 pm = co_await ctx.load(loc.p + node::kMark);
    u64 gc = co_await ctx.load(loc.gp + loc.gdir);
    u64 pc = co_await ctx.load(loc.p + loc.pdir);
    if (gm != 0 || pm != 0 || gc != loc.p || pc != loc.leaf) {
      co_await ctx.store(loc.p + node::kLock, 0);
      co_await ctx.store(loc.gp + node::kLock, 0);
      ++restarts;
      continue;
    }
    u64 sib = co_await ctx.load(loc.p + other_dir(loc.pdir));
    co_await ctx.store(loc.p + node::kMark, 1);
    co_await ctx.store(loc.leaf + node::kMark, 1);
    co_await ctx.store(loc.gp + loc.gdir, sib);
    co_await ctx.store(loc.p + node::kLock, 0);
    co_await ctx.store(loc.gp + node::kLock, 0);
    co_await smr_.retire(ctx, loc.p);
    co_await smr_.retire(ctx, loc.leaf);
    co_return true;
  }
}

u64 BaseBst::reachable_count() const {
  u64 n = 0;
  std::unordered_set<u64> seen;  // unsafe runs can corrupt child links into cycles
  std::vector<u64> st{root_};
  while (!st.empty()) {
    u64 a = st.back();
    st.pop_back();
    if (a == 0 || !seen.insert(a).second) continue;
    ++n;
    if (w_.machine.peek(a + node::kLeaf) == 0) {
      st.push_back(w_.machine.peek(a + node::kLeft));
      st.push_back(w_.machine.peek(a + node::kRight));
    }
  }
  return n;
}

}  // namespace casim
