#include "casim/heap.hpp"

#include <stdexcept>

namespace casim {

const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::plain_uaf: return "plain_uaf";
    case ViolationKind::fatal_ca_uaf: return "fatal_ca_uaf";
    case ViolationKind::double_free: return "double_free";
    case ViolationKind::bad_free: return "bad_free";
    case ViolationKind::wild_access: return "wild_access";
    case ViolationKind::reclaimer_rule: return "reclaimer_rule";
  }
  return "?";
}

SimHeap::SimHeap(Machine& m, u64 base) : mem_(m), base_(base), next_(base) {
  if (base % m.cfg.line_bytes != 0) throw std::invalid_argument("heap base not line-aligned");
}

u64 SimHeap::alloc(u32 core, u64 words, u64 step) {
  (void)core;
  if (words == 0 || words > mem_.cfg.words_per_line())
    throw std::invalid_argument("alloc: blocks are single-line");
  u64 addr;
  if (!free_list_.empty()) {
    addr = free_list_.back();
    free_list_.pop_back();
  } else {
    addr = next_;
    next_ += mem_.cfg.line_bytes;
  }
  Block& b = blocks_[addr];
  b.st = BlockState::live;
  b.writer_mask = 0;
  b.alloc_step = step;
  for (u32 i = 0; i < mem_.cfg.words_per_line(); ++i) mem_.poke(addr + 8 * i, 0);
  stats.allocated_total++;
  stats.live_now++;
  return addr;
}

void SimHeap::free_block(u32 core, u64 addr, u64 step) {
  auto it = blocks_.find(addr);
  if (it == blocks_.end()) {
    report(ViolationKind::bad_free, step, core, addr);
    return;
  }
  Block& b = it->second;
  if (b.st == BlockState::freed) {
    report(ViolationKind::double_free, step, core, addr);
    return;
  }
  if (strict_reclaimer_check && !(b.writer_mask & (u64{1} << core)))
    report(ViolationKind::reclaimer_rule, step, core, addr);
  b.st = BlockState::freed;
  b.free_step = step;
  stats.freed_total++;
  stats.live_now--;
  free_list_.push_back(addr);
}

BlockState SimHeap::classify(u64 addr) const {
  u64 blk = addr - addr % mem_.cfg.line_bytes;
  auto it = blocks_.find(blk);
  return it == blocks_.end() ? BlockState::never : it->second.st;
}

void SimHeap::note_access(u32 tid, u64 addr, u64 step, bool conditional) {
  switch (classify(addr)) {
    case BlockState::live:
      return;
    case BlockState::freed:
      report(conditional ? ViolationKind::fatal_ca_uaf : ViolationKind::plain_uaf, step, tid, addr);
      return;
    case BlockState::never:
      report(conditional ? ViolationKind::fatal_ca_uaf : ViolationKind::wild_access, step, tid, addr);
      return;
  }
}

void SimHeap::note_write(u32 core, u64 addr) {
  u64 blk = addr - addr % mem_.cfg.line_bytes;
  auto it = blocks_.find(blk);
  if (it != blocks_.end() && it->second.st == BlockState::live)
    it->second.writer_mask |= u64{1} << core;
}

void SimHeap::report(ViolationKind k, u64 step, u32 tid, u64 addr) {
  if (k == ViolationKind::fatal_ca_uaf) has_fatal = true;
  violations.push_back({k, step, tid, addr});
}

}  // namespace casim
