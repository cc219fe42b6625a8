#include "casim/memsys.hpp"

#include <stdexcept>
#include <string>

namespace casim {

Machine::Machine(const MemConfig& c, CaEventSink* sink) : cfg(c), sink_(sink) {
  if (cfg.line_bytes == 0 || (cfg.line_bytes & (cfg.line_bytes - 1)) != 0)
    throw std::invalid_argument("line_bytes must be a power of two");
  if (cfg.l1_sets() == 0) throw std::invalid_argument("l1 smaller than one set");
  if (cfg.core_count == 0 || cfg.core_count > 64)
    throw std::invalid_argument("core_count must be in 1..64");
  l1_.resize(cfg.core_count);
  for (auto& c1 : l1_) c1.resize(cfg.l1_sets());
  l1_clock_.assign(cfg.core_count, 0);
}

Way* Machine::find_way(u32 core, u64 line) {
  Set& s = l1_[core][line % cfg.l1_sets()];
  for (auto& w : s.ways)
    if (w.used && w.line == line) return &w;
  return nullptr;
}

const Way* Machine::find_way(u32 core, u64 line) const {
  return const_cast<Machine*>(this)->find_way(core, line);
}

void Machine::touch(u32 core, Way& w) { w.lru = ++l1_clock_[core]; }

bool Machine::install_viable(u32 core, u64 line) const {
  if (cfg.no_spurious) return true;  // sets may overgrow
  const Set& s = l1_[core][line % cfg.l1_sets()];
  if (s.ways.size() < cfg.l1_assoc) return true;
  if (!cfg.pin_tagged) return true;
  for (const auto& w : s.ways)
    if (!w.tagged) return true;
  return false;
}

void Machine::fill_l2(u64 line) {
  auto it = l2_.find(line);
  if (it != l2_.end()) {
    it->second = ++l2_clock_;
    counters.l2_hits++;
    counters.cycles += cfg.cost.l2_hit;
    msgs_.push_back({MsgKind::fetch_l2, 0, line});
    return;
  }
  counters.l2_misses++;
  counters.cycles += cfg.cost.memory;
  msgs_.push_back({MsgKind::fetch_mem, 0, line});
  if (cfg.l2_evictions && l2_.size() >= cfg.l2_bytes / cfg.line_bytes) {
    // Evict the L2 LRU line and back-invalidate any L1 copies (inclusion).
    u64 victim = 0, best = ~u64{0};
    for (const auto& [ln, stamp] : l2_)
      if (stamp < best || (stamp == best && ln < victim)) best = stamp, victim = ln;
    for (u32 c = 0; c < cfg.core_count; ++c) {
      Set& s = l1_[c][victim % cfg.l1_sets()];
      for (auto& w : s.ways) {
        if (!w.used || w.line != victim) continue;
        if (w.state == Msi::M) {
          counters.writebacks++;
          msgs_.push_back({MsgKind::writeback, static_cast<std::uint8_t>(c), victim});
        }
        msgs_.push_back({MsgKind::back_inval, static_cast<std::uint8_t>(c), victim});
        counters.back_invals++;
        if (w.tagged && sink_) sink_->on_tagged_evicted(c, victim);
        w.used = false;
        w.tagged = false;
        w.state = Msi::I;
      }
    }
    dir_.erase(victim);
    l2_.erase(victim);
  }
  l2_[line] = ++l2_clock_;
}

void Machine::install_l1(u32 core, u64 line, Msi st) {
  Set& s = l1_[core][line % cfg.l1_sets()];
  Way* slot = nullptr;
  for (auto& w : s.ways)
    if (!w.used) { slot = &w; break; }
  if (!slot && s.ways.size() < cfg.l1_assoc) {
    s.ways.emplace_back();
    slot = &s.ways.back();
  }
  if (!slot) {
    // Pick the strict-LRU victim; tagged ways are off limits when pinned.
    bool pinning = cfg.pin_tagged || cfg.no_spurious;
    Way* victim = nullptr;
    for (auto& w : s.ways) {
      if (pinning && w.tagged) continue;
      if (!victim || w.lru < victim->lru) victim = &w;
    }
    if (!victim) {
      // Only reachable in no_spurious mode: let the set overgrow.
      s.ways.emplace_back();
      slot = &s.ways.back();
    } else {
      u64 vline = victim->line;
      if (victim->state == Msi::M) {
        counters.writebacks++;
        msgs_.push_back({MsgKind::writeback, static_cast<std::uint8_t>(core), vline});
      }
      if (victim->state != Msi::I) {
        auto it = dir_.find(vline);
        if (it != dir_.end()) {
          it->second.sharers &= ~(u64{1} << core);
          if (it->second.owner == static_cast<int>(core)) it->second.owner = -1;
          if (it->second.sharers == 0) dir_.erase(it);
        }
      }
      counters.evictions++;
      msgs_.push_back({MsgKind::evict, static_cast<std::uint8_t>(core), vline});
      if (victim->tagged) {
        counters.tag_evictions++;
        msgs_.push_back({MsgKind::tag_evict, static_cast<std::uint8_t>(core), vline});
        if (sink_) sink_->on_tagged_evicted(core, vline);
      }
      victim->tagged = false;
      slot = victim;
    }
  }
  slot->line = line;
  slot->state = st;
  slot->used = true;
  slot->tagged = false;
  touch(core, *slot);
}

void Machine::downgrade_remote_owner(u32 core, u64 line) {
  auto it = dir_.find(line);
  if (it == dir_.end()) return;
  int owner = it->second.owner;
  if (owner < 0 || owner == static_cast<int>(core)) return;
  Way* w = find_way(static_cast<u32>(owner), line);
  if (w && w->state == Msi::M) w->state = Msi::S;
  counters.downgrades++;
  counters.writebacks++;
  msgs_.push_back({MsgKind::downgrade, static_cast<std::uint8_t>(owner), line});
  it->second.owner = -1;
}

void Machine::invalidate_remote_copies(u32 core, u64 line) {
  auto it = dir_.find(line);
  if (it == dir_.end()) return;
  DirectoryEntry& e = it->second;
  for (u32 c = 0; c < cfg.core_count; ++c) {
    if (c == core || !(e.sharers & (u64{1} << c))) continue;
    Way* w = find_way(c, line);
    if (w) {
      if (w->state == Msi::M) {
        counters.writebacks++;
        msgs_.push_back({MsgKind::writeback, static_cast<std::uint8_t>(c), line});
      }
      w->state = Msi::I;
    }
    counters.inval_sent++;
    counters.inval_recv++;
    counters.cycles += cfg.cost.inval_round_trip;
    msgs_.push_back({MsgKind::inval, static_cast<std::uint8_t>(c), line});
    if (sink_) sink_->on_invalidated(c, line);
    e.sharers &= ~(u64{1} << c);
  }
  if (e.owner >= 0 && e.owner != static_cast<int>(core)) e.owner = -1;
  if (e.sharers == 0) dir_.erase(it);
}

Machine::Ensure Machine::ensure_resident(u32 core, u64 line, bool exclusive) {
  Way* w = find_way(core, line);
  if (w && w->state != Msi::I) {
    if (!exclusive || w->state == Msi::M) {
      counters.l1_hits++;
      counters.cycles += cfg.cost.l1_hit;
      touch(core, *w);
      return Ensure::hit;
    }
    // S with write intent: upgrade in place, invalidating other sharers.
    counters.l1_hits++;
    counters.cycles += cfg.cost.l1_hit;
    invalidate_remote_copies(core, line);
    w->state = Msi::M;
    auto& e = dir_[line];
    e.owner = static_cast<int>(core);
    e.sharers = u64{1} << core;
    touch(core, *w);
    return Ensure::hit;
  }
  counters.l1_misses++;
  // A resident-but-invalid slot for this very line is refilled in place, so
  // capacity can only fail when the line has no slot at all.
  if (!w && !install_viable(core, line)) return Ensure::capacity_fail;
  if (exclusive)
    invalidate_remote_copies(core, line);
  else
    downgrade_remote_owner(core, line);
  fill_l2(line);
  if (w) {
    w->state = exclusive ? Msi::M : Msi::S;
    touch(core, *w);
  } else {
    install_l1(core, line, exclusive ? Msi::M : Msi::S);
  }
  auto& e = dir_[line];
  e.sharers |= u64{1} << core;
  if (exclusive) e.owner = static_cast<int>(core);
  return Ensure::filled;
}

u64 Machine::load(u32 core, u64 addr) {
  if (addr & 7) throw std::logic_error("unaligned word access");
  u64 line = cfg.line_of(addr);
  Ensure e = ensure_resident(core, line, false);
  if (e == Ensure::capacity_fail) {
    // All ways tagged+pinned: serve the load uncached.
    counters.uncached++;
    counters.cycles += cfg.cost.memory;
    downgrade_remote_owner(core, line);
  }
  if (cfg.debug_scan) check_invariants();
  auto it = mem_.find(addr);
  return it == mem_.end() ? 0 : it->second;
}

void Machine::store(u32 core, u64 addr, u64 v) {
  if (addr & 7) throw std::logic_error("unaligned word access");
  u64 line = cfg.line_of(addr);
  Ensure e = ensure_resident(core, line, true);
  if (e == Ensure::capacity_fail) {
    counters.uncached++;
    counters.cycles += cfg.cost.memory;
    invalidate_remote_copies(core, line);
  }
  mem_[addr] = v;
  if (cfg.debug_scan) check_invariants();
}

bool Machine::cas(u32 core, u64 addr, u64 expect, u64 desired) {
  auto it = mem_.find(addr);
  u64 cur = it == mem_.end() ? 0 : it->second;
  if (cur == expect) {
    store(core, addr, desired);
    return true;
  }
  (void)load(core, addr);
  return false;
}

bool Machine::fetch_shared(u32 core, u64 addr) {
  u64 line = cfg.line_of(addr);
  bool ok = ensure_resident(core, line, false) != Ensure::capacity_fail;
  if (cfg.debug_scan) check_invariants();
  return ok;
}

bool Machine::is_resident_valid(u32 core, u64 line) const {
  const Way* w = find_way(core, line);
  return w && w->state != Msi::I;
}

void Machine::set_tag(u32 core, u64 line, bool on) {
  Way* w = find_way(core, line);
  if (!w) throw std::logic_error("set_tag on non-resident line");
  w->tagged = on;
}

bool Machine::has_tag(u32 core, u64 line) const {
  const Way* w = find_way(core, line);
  return w && w->tagged;
}

u64 Machine::peek(u64 addr) const {
  auto it = mem_.find(addr);
  return it == mem_.end() ? 0 : it->second;
}

void Machine::poke(u64 addr, u64 v) { mem_[addr] = v; }

Msi Machine::state_of(u32 core, u64 line) const {
  const Way* w = find_way(core, line);
  return w ? w->state : Msi::I;
}

bool Machine::l2_resident(u64 line) const { return l2_.count(line) != 0; }

DirectoryEntry Machine::dir_of(u64 line) const {
  auto it = dir_.find(line);
  return it == dir_.end() ? DirectoryEntry{} : it->second;
}

void Machine::check_invariants() const {
  auto fail = [](const std::string& what) { throw std::logic_error("msi invariant: " + what); };
  // Rebuild per-line occupancy from the caches and compare with the directory.
  struct Occ { u64 mask = 0; int owner = -1; };
  std::unordered_map<u64, Occ> seen;
  for (u32 c = 0; c < cfg.core_count; ++c) {
    for (const auto& s : l1_[c]) {
      for (const auto& w : s.ways) {
        if (!w.used || w.state == Msi::I) continue;
        Occ& o = seen[w.line];
        o.mask |= u64{1} << c;
        if (w.state == Msi::M) {
          if (o.owner >= 0) fail("two Modified copies of line " + std::to_string(w.line));
          o.owner = static_cast<int>(c);
        }
        if (!l2_.count(w.line)) fail("L1 line missing from inclusive L2");
      }
    }
  }
  for (auto& [line, o] : seen) {
    if (o.owner >= 0 && o.mask != (u64{1} << o.owner))
      fail("Modified line " + std::to_string(line) + " has other sharers");
    auto it = dir_.find(line);
    if (it == dir_.end()) fail("directory lost line " + std::to_string(line));
    if (it->second.sharers != o.mask) fail("directory sharers mismatch on line " + std::to_string(line));
    if (it->second.owner != o.owner) fail("directory owner mismatch on line " + std::to_string(line));
  }
  for (const auto& [line, e] : dir_) {
    if (!seen.count(line) && e.sharers != 0)
      fail("directory claims sharers for uncached line " + std::to_string(line));
    if (e.owner >= 0 && e.sharers != (u64{1} << e.owner))
      fail("owner without exclusive sharing on line " + std::to_string(line));
  }
  if (counters.inval_sent != counters.inval_recv) fail("invalidation send/receive imbalance");
}

}  // namespace casim
