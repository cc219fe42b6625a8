#include <set>
#include <sstream>

#include "casim/audit.hpp"

namespace casim {

namespace {

// CA state rebuilt from the log alone, independent of the live CaLayer.
struct ReplayCore {
  std::set<u64> tags;
  bool bit = false;
  u64 setter_record = 0;      // record index where the bit last went true
  bool setter_is_write = false;  // ...and whether that record was a remote write
};

bool fetched(const std::vector<CoherenceMsg>& msgs) {
  for (const auto& m : msgs)
    if (m.kind == MsgKind::fetch_l2 || m.kind == MsgKind::fetch_mem) return true;
  return false;
}

bool is_write_record(const EventRecord& r) {
  switch (r.action.kind) {
    case ActionKind::store: return true;
    case ActionKind::cas:
    case ActionKind::cwrite: return r.result.ok;
    default: return false;
  }
}

// Applies one record's coherence messages to the replayed state; the record
// index is remembered on every false->true bit transition.
void apply_msgs(std::vector<ReplayCore>& cores, const EventRecord& r, size_t idx) {
  bool write = is_write_record(r);
  for (const auto& m : r.msgs) {
    ReplayCore& k = cores[m.core];
    switch (m.kind) {
      case MsgKind::inval:
        if (k.tags.count(m.line) && !k.bit) {
          k.bit = true;
          k.setter_record = idx;
          k.setter_is_write = write && r.tid != m.core;
        }
        break;
      case MsgKind::tag_evict:
        k.tags.erase(m.line);
        if (!k.bit) {
          k.bit = true;
          k.setter_record = idx;
          k.setter_is_write = false;
        }
        break;
      case MsgKind::back_inval:
        if (k.tags.count(m.line)) {
          k.tags.erase(m.line);
          if (!k.bit) {
            k.bit = true;
            k.setter_record = idx;
            k.setter_is_write = false;
          }
        }
        break;
      default: break;  // downgrades, fills, plain evictions: no CA effect
    }
  }
}

// Applies the record's own effect on its core's tag state (after messages).
void apply_own(std::vector<ReplayCore>& cores, const EventRecord& r, const MemConfig& cfg,
               bool pre_bit) {
  ReplayCore& c = cores[r.tid];
  switch (r.action.kind) {
    case ActionKind::cread:
      // A cread that reached the machine installed and tagged the line even
      // when the install itself revoked the access.
      if (r.result.ok || (!pre_bit && fetched(r.msgs))) c.tags.insert(cfg.line_of(r.action.addr));
      break;
    case ActionKind::untag_one: c.tags.erase(cfg.line_of(r.action.addr)); break;
    case ActionKind::untag_all:
      c.tags.clear();
      c.bit = false;
      break;
    default: break;
  }
}

void note(AuditReport& rep, const EventRecord& r, const std::string& why) {
  rep.violations++;
  if (rep.details.size() < 8) {
    std::ostringstream os;
    os << "step " << r.step << " tid " << r.tid << " " << to_string(r.action.kind) << " @" << std::hex
       << r.action.addr << std::dec << ": " << why;
    rep.details.push_back(os.str());
  }
}

template <class Check>
AuditReport replay(const EventLog& log, const MemConfig& cfg, Check check) {
  AuditReport rep;
  size_t n = cfg.core_count;
  for (const EventRecord& r : log.records) {
    n = std::max<size_t>(n, r.tid + 1);
    for (const auto& m : r.msgs) n = std::max<size_t>(n, m.core + 1u);
  }
  std::vector<ReplayCore> cores(n);
  for (size_t i = 0; i < log.records.size(); ++i) {
    const EventRecord& r = log.records[i];
    bool pre_bit = cores[r.tid].bit;
    check(rep, cores, r, pre_bit);
    apply_msgs(cores, r, i);
    apply_own(cores, r, cfg, pre_bit);
    if (r.result.ok && r.action.kind == ActionKind::cread && cores[r.tid].bit)
      note(rep, r, "cread reported success but its own install revoked the access");
  }
  return rep;
}

bool conditional(const EventRecord& r) {
  return r.action.kind == ActionKind::cread || r.action.kind == ActionKind::cwrite;
}

}  // namespace

AuditReport audit_no_spurious_success(const EventLog& log, const MemConfig& cfg) {
  return replay(log, cfg, [&](AuditReport& rep, std::vector<ReplayCore>& cores, const EventRecord& r,
                              bool pre_bit) {
    if (!conditional(r) || !r.result.ok) return;
    rep.checked++;
    if (pre_bit) note(rep, r, "success while the replayed revoked bit was set");
    if (r.action.kind == ActionKind::cwrite && !cores[r.tid].tags.count(cfg.line_of(r.action.addr)))
      note(rep, r, "cwrite success on a line the replay says was untagged");
  });
}

AuditReport audit_failure_locality(const EventLog& log, const MemConfig& cfg) {
  return replay(log, cfg, [&](AuditReport& rep, std::vector<ReplayCore>&, const EventRecord& r,
                              bool pre_bit) {
    if (!conditional(r) || r.result.ok) return;
    rep.checked++;
    if (r.msgs.empty()) return;
    if (pre_bit) {
      note(rep, r, "failed access with the bit already set emitted traffic");
      return;
    }
    if (r.action.kind == ActionKind::cwrite) {
      note(rep, r, "failed cwrite emitted traffic");
      return;
    }
    // Remaining case: cread whose install evicted one of our own tagged
    // lines. The eviction must be visible in this very record.
    for (const auto& m : r.msgs)
      if ((m.kind == MsgKind::tag_evict || m.kind == MsgKind::back_inval) && m.core == r.tid) return;
    note(rep, r, "failed cread emitted traffic without a self-eviction in it");
  });
}

AuditReport audit_conflict_witness(const EventLog& log, const MemConfig& cfg) {
  return replay(log, cfg, [&](AuditReport& rep, std::vector<ReplayCore>& cores, const EventRecord& r,
                              bool pre_bit) {
    if (!conditional(r) || r.result.ok) return;
    rep.checked++;
    if (!pre_bit) {
      note(rep, r, "failure without a prior revocation (capacity or misuse)");
      return;
    }
    if (!cores[r.tid].setter_is_write)
      note(rep, r, "revocation at record " + std::to_string(cores[r.tid].setter_record) +
                       " was not a remote write");
  });
}

}  // namespace casim
