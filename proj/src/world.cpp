#include "casim/world.hpp"

#include <stdexcept>

namespace casim {

World::World(const MemConfig& c)
    : cfg(c), machine(c, &ca), heap(machine, kHeapBase), next_static_(c.line_bytes) {
  ca.attach(&machine, c.core_count);
}

u64 World::static_line() {
  u64 r = next_static_;
  next_static_ += cfg.line_bytes;
  if (next_static_ > kHeapBase) throw std::logic_error("statics overflow into heap");
  return r;
}

ActionResult World::execute(u32 tid, const Action& a, u64 step) {
  machine.clear_msgs();
  auto oracle = [&](u64 addr, bool conditional) {
    if (heap.in_range(addr))
      heap.note_access(tid, addr, step, conditional);
    else if (!in_statics(addr))
      heap.report(conditional ? ViolationKind::fatal_ca_uaf : ViolationKind::wild_access, step, tid, addr);
  };
  switch (a.kind) {
    case ActionKind::load: {
      u64 v = machine.load(tid, a.addr);
      oracle(a.addr, false);
      return {true, v};
    }
    case ActionKind::store: {
      machine.store(tid, a.addr, a.a);
      oracle(a.addr, false);
      heap.note_write(tid, a.addr);
      return {true, a.a};
    }
    case ActionKind::cas: {
      bool ok = machine.cas(tid, a.addr, a.a, a.b);
      oracle(a.addr, false);
      if (ok) heap.note_write(tid, a.addr);
      return {ok, ok ? a.b : machine.peek(a.addr)};
    }
    case ActionKind::cread: {
      CaOutcome out = ca.cread(tid, a.addr);
      if (out.ok) oracle(a.addr, true);
      return {out.ok, out.value};
    }
    case ActionKind::cwrite: {
      CaOutcome out = ca.cwrite(tid, a.addr, a.a);
      if (out.ok) {
        oracle(a.addr, true);
        heap.note_write(tid, a.addr);
      }
      return {out.ok, out.value};
    }
    case ActionKind::untag_one:
      ca.untag_one(tid, a.addr);
      return {true, 0};
    case ActionKind::untag_all:
      ca.untag_all(tid);
      return {true, 0};
    case ActionKind::alloc: {
      u64 addr = heap.alloc(tid, a.a, step);
      alloc_count++;
      return {true, addr};
    }
    case ActionKind::free_:
      heap.free_block(tid, a.addr, step);
      return {true, 0};
    case ActionKind::snapshot:
      return {true, 0};  // the engine records the sample
  }
  throw std::logic_error("unknown action kind");
}

}  // namespace casim
