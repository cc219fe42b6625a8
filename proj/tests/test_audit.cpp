#include <doctest.h>

#include <utility>
#include <vector>

#include "casim/audit.hpp"
#include "casim/bench.hpp"

using namespace casim;

namespace {

EventRecord rec(u64 step, u32 tid, ActionKind k, u64 addr, bool ok,
                std::vector<CoherenceMsg> msgs = {}) {
  EventRecord r;
  r.step = step;
  r.tid = tid;
  r.action = {k, addr, 0, 0};
  r.result = {ok, 0};
  r.msgs = std::move(msgs);
  return r;
}

MemConfig three_cores() {
  MemConfig mc;
  mc.core_count = 3;
  return mc;
}

MemConfig resolved_mem(const BenchConfig& cfg) {
  MemConfig mc = cfg.mem;
  if (mc.core_count < cfg.threads) mc.core_count = cfg.threads;
  return mc;
}

}  // namespace

TEST_CASE("logs from adversarial runs satisfy every audit") {
  u64 successes = 0, failures = 0;
  for (DsKind ds : {DsKind::list, DsKind::stack, DsKind::hashtable, DsKind::extbst}) {
    for (u64 seed = 1; seed <= 3; ++seed) {
      BenchConfig cfg = safety_config(ds, seed);
      cfg.keep_log = true;
      BenchResult r = run_bench(cfg);
      REQUIRE(r.run.status == RunStatus::completed);
      REQUIRE(r.violations.empty());
      MemConfig mc = resolved_mem(cfg);
      AuditReport a = audit_no_spurious_success(r.log, mc);
      CHECK(a.ok());
      successes += a.checked;
      AuditReport b = audit_failure_locality(r.log, mc);
      CHECK(b.ok());
      failures += b.checked;
    }
  }
  CHECK(successes > 0);
  CHECK(failures > 0);  // the adversarial config does provoke failed accesses
}

TEST_CASE("with overgrow mode every failure traces to a remote write") {
  for (u64 seed = 1; seed <= 4; ++seed) {
    BenchConfig cfg = safety_config(DsKind::list, seed);
    cfg.mem.no_spurious = true;
    cfg.keep_log = true;
    BenchResult r = run_bench(cfg);
    REQUIRE(r.run.status == RunStatus::completed);
    AuditReport w = audit_conflict_witness(r.log, resolved_mem(cfg));
    CHECK(w.ok());
  }
}

TEST_CASE("a success recorded after an unacknowledged revocation is flagged") {
  EventLog log;
  log.records.push_back(rec(0, 0, ActionKind::cread, 192, true, {{MsgKind::fetch_mem, 0, 3}}));
  log.records.push_back(rec(1, 1, ActionKind::store, 192, true, {{MsgKind::inval, 0, 3}}));
  log.records.push_back(rec(2, 0, ActionKind::cread, 192, true));
  AuditReport a = audit_no_spurious_success(log, three_cores());
  CHECK_FALSE(a.ok());
  CHECK(a.checked == 2);

  // the honest version of the same trace passes
  EventLog good;
  good.records.push_back(rec(0, 0, ActionKind::cread, 192, true, {{MsgKind::fetch_mem, 0, 3}}));
  good.records.push_back(rec(1, 1, ActionKind::store, 192, true, {{MsgKind::inval, 0, 3}}));
  good.records.push_back(rec(2, 0, ActionKind::cread, 192, false));
  good.records.push_back(rec(3, 0, ActionKind::untag_all, 0, true));
  good.records.push_back(rec(4, 0, ActionKind::cread, 192, true, {{MsgKind::fetch_mem, 0, 3}}));
  CHECK(audit_no_spurious_success(good, three_cores()).ok());
}

TEST_CASE("a cwrite success on a never-tagged line is flagged") {
  EventLog log;
  log.records.push_back(rec(0, 0, ActionKind::cwrite, 128, true));
  AuditReport a = audit_no_spurious_success(log, three_cores());
  CHECK(a.violations == 1);
  CHECK(a.checked == 1);
}

TEST_CASE("failures that emit traffic are caught, self-evictions excused") {
  // bit already set, yet the failed cread shows a fill
  EventLog log;
  log.records.push_back(rec(0, 0, ActionKind::cread, 192, true, {{MsgKind::fetch_mem, 0, 3}}));
  log.records.push_back(rec(1, 1, ActionKind::store, 192, true, {{MsgKind::inval, 0, 3}}));
  log.records.push_back(rec(2, 0, ActionKind::cread, 256, false, {{MsgKind::fetch_mem, 0, 4}}));
  AuditReport a = audit_failure_locality(log, three_cores());
  CHECK(a.violations == 1);

  // failed cwrite may never touch the bus
  EventLog cw;
  cw.records.push_back(rec(0, 0, ActionKind::cwrite, 128, false, {{MsgKind::inval, 1, 2}}));
  CHECK(audit_failure_locality(cw, three_cores()).violations == 1);

  // an install that victimized our own tagged line is the one legal source
  EventLog legal;
  legal.records.push_back(rec(0, 0, ActionKind::cread, 192, true, {{MsgKind::fetch_mem, 0, 3}}));
  legal.records.push_back(rec(1, 0, ActionKind::cread, 256, false,
                              {{MsgKind::fetch_mem, 0, 4},
                               {MsgKind::evict, 0, 3},
                               {MsgKind::tag_evict, 0, 3}}));
  AuditReport ok = audit_failure_locality(legal, three_cores());
  CHECK(ok.ok());
  CHECK(ok.checked == 1);

  // same shape without the self-eviction in the record is spurious
  EventLog bad;
  bad.records.push_back(rec(0, 0, ActionKind::cread, 256, false, {{MsgKind::fetch_mem, 0, 4}}));
  CHECK(audit_failure_locality(bad, three_cores()).violations == 1);
}

TEST_CASE("conflict witness demands a remote write behind every failure") {
  // clean: the revocation came from thread 1's store
  EventLog good;
  good.records.push_back(rec(0, 0, ActionKind::cread, 192, true, {{MsgKind::fetch_mem, 0, 3}}));
  good.records.push_back(rec(1, 1, ActionKind::store, 192, true, {{MsgKind::inval, 0, 3}}));
  good.records.push_back(rec(2, 0, ActionKind::cread, 192, false));
  AuditReport g = audit_conflict_witness(good, three_cores());
  CHECK(g.ok());
  CHECK(g.checked == 1);

  // orphan: nothing ever set the bit
  EventLog orphan;
  orphan.records.push_back(rec(0, 0, ActionKind::cread, 256, false));
  CHECK(audit_conflict_witness(orphan, three_cores()).violations == 1);

  // the bit was set by our own eviction, not a remote write
  EventLog evicted;
  evicted.records.push_back(rec(0, 0, ActionKind::cread, 192, true, {{MsgKind::fetch_mem, 0, 3}}));
  evicted.records.push_back(rec(1, 0, ActionKind::load, 256, true,
                                {{MsgKind::fetch_mem, 0, 4},
                                 {MsgKind::evict, 0, 3},
                                 {MsgKind::tag_evict, 0, 3}}));
  evicted.records.push_back(rec(2, 0, ActionKind::cread, 320, false));
  CHECK(audit_conflict_witness(evicted, three_cores()).violations == 1);
}
