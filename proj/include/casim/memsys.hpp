#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "casim/action.hpp"

namespace casim {

struct CostModel {
  u32 l1_hit = 1;
  u32 l2_hit = 10;
  u32 memory = 100;
  u32 inval_round_trip = 30;
};

struct MemConfig {
  u32 line_bytes = 64;
  u32 l1_bytes = 32 * 1024;
  u32 l1_assoc = 4;
  u32 l2_bytes = 256 * 1024;
  u32 core_count = 1;
  bool pin_tagged = false;    // tagged lines are not evictable; installs may fail
  bool no_spurious = false;   // tagged lines unevictable and sets may overgrow: failures only from real conflicts
  bool l2_evictions = false;  // default off: L2 grows without back-invalidating
  bool debug_scan = false;    // run check_invariants() after every operation
  CostModel cost{};

  u32 words_per_line() const { return line_bytes / 8; }
  u32 l1_sets() const { return l1_bytes / (line_bytes * l1_assoc); }
  u64 line_of(u64 addr) const { return addr / line_bytes; }
};

enum class Msi : std::uint8_t { I, S, M };

struct Way {
  u64 line = 0;
  Msi state = Msi::I;
  bool used = false;    // slot ever filled
  bool tagged = false;  // physical tag bit of the conditional-access layer
  u64 lru = 0;
};

struct DirectoryEntry {
  int owner = -1;   // core holding M, or -1
  u64 sharers = 0;  // bitmask of cores with a valid copy (owner included)
};

struct MachineCounters {
  u64 l1_hits = 0, l1_misses = 0;
  u64 l2_hits = 0, l2_misses = 0;
  u64 inval_sent = 0, inval_recv = 0;
  u64 downgrades = 0, writebacks = 0;
  u64 evictions = 0, tag_evictions = 0, back_invals = 0;
  u64 uncached = 0;
  u64 cycles = 0;
};

// Notifications the conditional-access layer subscribes to. Invalidations are
// delivered for every remote copy killed by a write; the subscriber decides
// whether the line was in that core's tag set.
struct CaEventSink {
  virtual void on_invalidated(u32 core, u64 line) = 0;
  virtual void on_tagged_evicted(u32 core, u64 line) = 0;
  virtual ~CaEventSink() = default;
};

// Private L1 per core + shared inclusive L2 + directory MSI over a flat
// 64-bit word memory. Word values are globally ordered (one store per engine
// step), so caches track state, tags and LRU, not data.
class Machine {
 public:
  explicit Machine(const MemConfig& cfg, CaEventSink* sink = nullptr);

  u64 load(u32 core, u64 addr);
  void store(u32 core, u64 addr, u64 v);
  bool cas(u32 core, u64 addr, u64 expect, u64 desired);

  // Fetch a line Shared without reading a word (cread's install step).
  // false = pin-mode capacity failure, flagged before any traffic is emitted.
  bool fetch_shared(u32 core, u64 addr);

  bool is_resident_valid(u32 core, u64 line) const;
  void set_tag(u32 core, u64 line, bool on);
  bool has_tag(u32 core, u64 line) const;

  // Uncoherent word access for the allocator and oracle-side walks.
  u64 peek(u64 addr) const;
  void poke(u64 addr, u64 v);

  Msi state_of(u32 core, u64 line) const;
  bool l2_resident(u64 line) const;
  DirectoryEntry dir_of(u64 line) const;

  // MSI safety (single writer), directory/cache agreement incl. inclusion.
  // Throws std::logic_error with a description on violation.
  void check_invariants() const;

  std::vector<CoherenceMsg>& msgs() { return msgs_; }
  void clear_msgs() { msgs_.clear(); }

  MachineCounters counters;
  const MemConfig cfg;

 private:
  enum class Ensure { hit, filled, capacity_fail };

  struct Set {
    std::vector<Way> ways;
  };

  Way* find_way(u32 core, u64 line);
  const Way* find_way(u32 core, u64 line) const;
  bool install_viable(u32 core, u64 line) const;
  Ensure ensure_resident(u32 core, u64 line, bool exclusive);
  void fill_l2(u64 line);
  void install_l1(u32 core, u64 line, Msi st);
  void invalidate_remote_copies(u32 core, u64 line);
  void downgrade_remote_owner(u32 core, u64 line);
  void touch(u32 core, Way& w);

  CaEventSink* sink_;
  std::unordered_map<u64, u64> mem_;  // byte addr (8-aligned) -> word
  std::vector<std::vector<Set>> l1_;  // [core][set]
  std::unordered_map<u64, u64> l2_;   // line -> lru stamp
  std::unordered_map<u64, DirectoryEntry> dir_;
  std::vector<u64> l1_clock_;
  u64 l2_clock_ = 0;
  std::vector<CoherenceMsg> msgs_;
};

}  // namespace casim
