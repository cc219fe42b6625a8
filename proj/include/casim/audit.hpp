#pragma once

#include <string>
#include <vector>

#include "casim/memsys.hpp"
#include "casim/simcore.hpp"

namespace casim {

struct AuditReport {
  u64 checked = 0;  // records examined
  u64 violations = 0;
  std::vector<std::string> details;  // first few offenders, for diagnostics
  bool ok() const { return violations == 0; }
};

// Replays each core's tag set and access-revoked bit purely from the event
// log (tags from successful creads and untags, revocations from inval /
// tag-eviction messages) and cross-checks every successful conditional
// access: the replayed bit must be clear, and a cwrite's line must be tagged.
AuditReport audit_no_spurious_success(const EventLog& log, const MemConfig& cfg);

// A conditional access that fails with the bit already set, or a cwrite that
// fails for any reason, must leave zero coherence traffic. A cread that fails
// during install may only carry traffic when its own messages show this
// core's tagged line being evicted (never happens with pinning on).
AuditReport audit_failure_locality(const EventLog& log, const MemConfig& cfg);

// For runs configured so capacity can't evict tagged lines: every failure
// must trace to a bit-setting event caused by a successful remote write
// (store / cas / cwrite) invalidating a line this core had tagged. Orphan
// failures -- no such writer -- are spurious and reported.
AuditReport audit_conflict_witness(const EventLog& log, const MemConfig& cfg);

}  // namespace casim
