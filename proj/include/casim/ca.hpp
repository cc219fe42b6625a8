#pragma once

#include <vector>

#include "casim/memsys.hpp"

namespace casim {

enum class CaFail : std::uint8_t {
  none,      // success
  conflict,  // revoked bit was set by a remote invalidation of a tagged line
  eviction,  // revoked bit was set by replacement of a tagged line
  capacity,  // pin mode: no way available to install the new line
  untagged,  // cwrite to a line not in the tag set
};

struct CaOutcome {
  bool ok = false;
  u64 value = 0;
  CaFail cause = CaFail::none;
};

struct CaCounters {
  u64 tags = 0, untags = 0;
  u64 cread_ok = 0, cwrite_ok = 0;
  u64 cread_fail_conflict = 0, cread_fail_eviction = 0, cread_fail_capacity = 0;
  u64 cwrite_fail_revoked = 0, cwrite_fail_untagged = 0;

  u64 failed_creads() const { return cread_fail_conflict + cread_fail_eviction + cread_fail_capacity; }
  u64 failed_cwrites() const { return cwrite_fail_revoked + cwrite_fail_untagged; }
};

// Per-core conditional-access state. tag_set mirrors the physical tag bits in
// that core's L1 (kept in lockstep; eviction drops both). The revoked bit is
// set only by invalidation of a tagged line or, outside pin mode, by its
// eviction — and cleared only by untag_all.
struct CoreCaState {
  std::vector<u64> tag_set;  // sorted line ids
  bool access_revoked = false;
  CaFail revoke_cause = CaFail::none;  // first cause that set the bit
  CaOutcome last{};
  CaCounters counters{};

  bool tagged(u64 line) const;
};

class CaLayer : public CaEventSink {
 public:
  void attach(Machine* m, u32 core_count);

  // Fails with no memory access, no traffic and no tag-set change when the
  // revoked bit is set (even if the bit came from an unrelated line). A fresh
  // line is fetched Shared and tagged before the word is read; a pin-mode
  // capacity failure also leaves no trace.
  CaOutcome cread(u32 core, u64 addr);

  // Fails when the revoked bit is set or the line was never tagged by this
  // core (an untagged write could miss an intervening invalidation). Never
  // adds a tag. On success the store runs with normal coherence.
  CaOutcome cwrite(u32 core, u64 addr, u64 v);

  void untag_one(u32 core, u64 addr);  // drops the tag only; the bit survives
  void untag_all(u32 core);            // drops every tag and clears the bit

  void on_invalidated(u32 core, u64 line) override;
  void on_tagged_evicted(u32 core, u64 line) override;

  const CoreCaState& state(u32 core) const { return cores_[core]; }

  void reset_counters() {
    for (auto& c : cores_) c.counters = CaCounters{};
  }

 private:
  Machine* mem_ = nullptr;
  std::vector<CoreCaState> cores_;
};

}  // namespace casim
