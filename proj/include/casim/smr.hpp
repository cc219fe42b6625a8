#pragma once

#include <vector>

#include "casim/simcore.hpp"

namespace casim {

enum class SmrKind : std::uint8_t {
  none,              // retired nodes leak (upper-bound control)
  ca,                // conditional-access discipline: retire frees immediately
  qsbr,              // quiescent-state epochs, deferred free
  hp,                // hazard pointers, 3 slots per thread
  unsafe_immediate,  // plain structures + immediate free: the negative control
};

struct SmrConfig {
  SmrKind kind = SmrKind::ca;
  u32 reclamation_frequency = 30;  // retires between reclaim passes
  u32 epoch_frequency = 150;       // allocations between epoch advances
  u32 hp_slots = 3;
};

// Reclamation-scheme state. Epoch and hazard words live in simulated shared
// memory and are read/written through engine Actions, so schedule exploration
// covers reclamation races; retired lists are thread-private bookkeeping.
class Smr {
 public:
  Smr(World& w, const SmrConfig& cfg, u32 thread_count);

  Task<void> retire(SimContext& ctx, u64 addr);
  Task<void> on_alloc(SimContext& ctx);    // epoch-advance bookkeeping (qsbr)
  Task<void> quiescent(SimContext& ctx);   // qsbr: announce the current epoch
  Task<void> publish(SimContext& ctx, u32 slot, u64 addr);  // hp
  Task<void> clear_slots(SimContext& ctx);                  // hp, end of op

  u64 epoch_addr() const { return epoch_addr_; }
  u64 announce_addr(u32 tid) const { return announce_addr_[tid]; }
  u64 slot_addr(u32 tid, u32 slot) const { return slot_addr_[tid] + 8 * slot; }

  u64 leaked() const { return leak_list_.size(); }
  u64 retired_backlog() const;

  const SmrConfig cfg;

 private:
  Task<void> qsbr_reclaim(SimContext& ctx);
  Task<void> hp_scan(SimContext& ctx);

  struct Retired {
    u64 addr;
    u64 epoch;  // qsbr: global epoch at retire time
  };
  struct PerThread {
    std::vector<Retired> retired;
    u64 retire_count = 0;
  };

  World& w_;
  std::vector<PerThread> threads_;
  std::vector<u64> leak_list_;
  u64 alloc_count_ = 0;
  u64 epoch_addr_ = 0;
  std::vector<u64> announce_addr_;
  std::vector<u64> slot_addr_;
};

}  // namespace casim
