#pragma once

#include <memory>

#include "casim/action.hpp"
#include "casim/ca.hpp"
#include "casim/heap.hpp"
#include "casim/memsys.hpp"

namespace casim {

// One simulated machine instance: coherent memory + conditional-access layer
// + allocator/oracle, with a statics region for structure anchors and
// reclamation-scheme words. All shared state of a run lives here.
class World {
 public:
  static constexpr u64 kHeapBase = 1u << 20;

  explicit World(const MemConfig& cfg);

  // Executes one Action atomically; coherence messages land in machine.msgs().
  ActionResult execute(u32 tid, const Action& a, u64 step);

  // Statics live below the heap; each allocation gets its own line so anchors
  // never share lines with each other or with nodes.
  u64 static_line();

  bool in_statics(u64 addr) const { return addr >= cfg.line_bytes && addr < next_static_; }

  MemConfig cfg;
  CaLayer ca;
  Machine machine;
  SimHeap heap;
  u64 alloc_count = 0;  // total allocs, drives epoch advance bookkeeping

 private:
  u64 next_static_;
};

}  // namespace casim
