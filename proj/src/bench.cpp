#include <ostream>
#include <random>
#include <stdexcept>

#include "casim/bench.hpp"

namespace casim {

const char* to_string(DsKind k) {
  switch (k) {
    case DsKind::list: return "list";
    case DsKind::stack: return "stack";
    case DsKind::hashtable: return "hashtable";
    case DsKind::extbst: return "extbst";
  }
  return "?";
}

const char* to_string(SmrKind k) {
  switch (k) {
    case SmrKind::none: return "none";
    case SmrKind::ca: return "ca";
    case SmrKind::qsbr: return "qsbr";
    case SmrKind::hp: return "hp";
    case SmrKind::unsafe_immediate: return "unsafe";
  }
  return "?";
}

namespace {

u64 mix(u64 a, u64 b) {
  u64 z = a + 0x9e3779b97f4a7c15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Everything a worker touches lives here behind stable pointers, so moving
// the BenchSim around never invalidates a suspended coroutine.
struct RunCtx {
  BenchConfig cfg;
  Engine* engine = nullptr;
  Smr* smr = nullptr;
  SetDs* set = nullptr;
  StackDs* stack = nullptr;
  std::shared_ptr<History> history;
  u64 global_ops = 0;
};

Task<void> set_worker(SimContext& ctx, std::shared_ptr<RunCtx> rc, u32 tid) {
  std::mt19937_64 rng(mix(rc->cfg.seed, tid));
  for (u64 i = 0; i < rc->cfg.ops_per_thread; ++i) {
    i64 key = static_cast<i64>(rng() % static_cast<u64>(rc->cfg.key_range));
    bool upd = rng() % 100 < rc->cfg.update_percent;
    bool ins = (rng() & 1) != 0;
    u64 inv = rc->engine->steps();
    char op;
    bool res;
    if (upd && ins) {
      op = 'i';
      res = co_await rc->set->insert(ctx, key);
    } else if (upd) {
      op = 'e';
      res = co_await rc->set->erase(ctx, key);
    } else {
      op = 'c';
      res = co_await rc->set->contains(ctx, key);
    }
    if (rc->history) rc->history->ops.push_back({tid, op, key, res, inv, rc->engine->steps()});
    if (rc->cfg.smr.kind == SmrKind::qsbr) co_await rc->smr->quiescent(ctx);
    if (rc->cfg.smr.kind == SmrKind::hp) co_await rc->smr->clear_slots(ctx);
    u64 done = ++rc->global_ops;
    if (rc->cfg.sample_interval != 0 && done % rc->cfg.sample_interval == 0)
      co_await ctx.snapshot(done, done);
  }
}

Task<void> stack_worker(SimContext& ctx, std::shared_ptr<RunCtx> rc, u32 tid) {
  std::mt19937_64 rng(mix(rc->cfg.seed, tid));
  for (u64 i = 0; i < rc->cfg.ops_per_thread; ++i) {
    i64 key = static_cast<i64>(rng() % static_cast<u64>(rc->cfg.key_range));
    bool upd = rng() % 100 < rc->cfg.update_percent;
    bool push = (rng() & 1) != 0;
    if (upd && push) {
      co_await rc->stack->push(ctx, key);
    } else if (upd) {
      co_await rc->stack->pop(ctx);
    } else {
      co_await rc->stack->peek(ctx);
    }
    if (rc->cfg.smr.kind == SmrKind::qsbr) co_await rc->smr->quiescent(ctx);
    if (rc->cfg.smr.kind == SmrKind::hp) co_await rc->smr->clear_slots(ctx);
    u64 done = ++rc->global_ops;
    if (rc->cfg.sample_interval != 0 && done % rc->cfg.sample_interval == 0)
      co_await ctx.snapshot(done, done);
  }
}

Task<void> prefill_set(SimContext& ctx, SetDs* s, std::vector<i64> keys) {
  for (i64 k : keys) co_await s->insert(ctx, k);
}

struct ScriptedCtx {
  Engine* engine = nullptr;
  SetDs* set = nullptr;
  std::shared_ptr<History> history;
};

Task<void> scripted_worker(SimContext& ctx, std::shared_ptr<ScriptedCtx> sc, u32 tid,
                           std::vector<std::pair<char, i64>> ops) {
  for (auto [op, key] : ops) {
    u64 inv = sc->engine->steps();
    bool res;
    switch (op) {
      case 'i': res = co_await sc->set->insert(ctx, key); break;
      case 'e': res = co_await sc->set->erase(ctx, key); break;
      case 'c': res = co_await sc->set->contains(ctx, key); break;
      default: throw std::invalid_argument("script op must be i/e/c");
    }
    sc->history->ops.push_back({tid, op, key, res, inv, sc->engine->steps()});
  }
}

Task<void> prefill_stack(SimContext& ctx, StackDs* s, std::vector<i64> keys) {
  for (i64 k : keys) co_await s->push(ctx, k);
}

}  // namespace

std::vector<i64> prefill_keys(const BenchConfig& cfg) {
  std::vector<i64> ks;
  if (cfg.prefill_step != 0)
    for (i64 k = 0; k < cfg.key_range; k += static_cast<i64>(cfg.prefill_step)) ks.push_back(k);
  return ks;
}

BenchSim build_bench(const BenchConfig& cfg) {
  if (cfg.threads == 0) throw std::invalid_argument("need at least one thread");
  if (cfg.smr.kind == SmrKind::ca && !cfg.ca_variant)
    throw std::invalid_argument("the ca scheme needs the conditional-access structure");
  if (cfg.record_history && cfg.ds == DsKind::stack)
    throw std::invalid_argument("history recording covers set workloads only");

  BenchSim sim;
  sim.cfg = cfg;
  MemConfig mc = cfg.mem;
  if (mc.core_count < cfg.threads) mc.core_count = cfg.threads;
  sim.world = std::make_unique<World>(mc);
  sim.world->heap.strict_reclaimer_check = cfg.strict_reclaimer;
  sim.smr = std::make_unique<Smr>(*sim.world, cfg.smr, cfg.threads);

  switch (cfg.ds) {
    case DsKind::list:
      sim.set = cfg.ca_variant ? std::unique_ptr<SetDs>(new CaSetList(*sim.world, *sim.smr))
                               : std::unique_ptr<SetDs>(new BaseSetList(*sim.world, *sim.smr));
      break;
    case DsKind::hashtable:
      sim.set = cfg.ca_variant
                    ? std::unique_ptr<SetDs>(new CaHashSet(*sim.world, *sim.smr, cfg.hash_buckets))
                    : std::unique_ptr<SetDs>(new BaseHashSet(*sim.world, *sim.smr, cfg.hash_buckets));
      break;
    case DsKind::extbst:
      sim.set = cfg.ca_variant ? std::unique_ptr<SetDs>(new CaBst(*sim.world, *sim.smr))
                               : std::unique_ptr<SetDs>(new BaseBst(*sim.world, *sim.smr));
      break;
    case DsKind::stack:
      sim.stack = cfg.ca_variant ? std::unique_ptr<StackDs>(new CaStack(*sim.world, *sim.smr))
                                 : std::unique_ptr<StackDs>(new TreiberStack(*sim.world, *sim.smr));
      break;
  }

  std::vector<i64> pre = prefill_keys(cfg);
  if (!pre.empty()) {
    Engine warm(*sim.world, Schedule::rr());
    warm.keep_log = false;
    if (sim.set) {
      warm.add_thread([s = sim.set.get(), pre](SimContext& ctx) { return prefill_set(ctx, s, pre); });
    } else {
      warm.add_thread(
          [s = sim.stack.get(), pre](SimContext& ctx) { return prefill_stack(ctx, s, pre); });
    }
    RunResult pr = warm.run();
    sim.prefill_ok = pr.status == RunStatus::completed && sim.world->heap.violations.empty();
    sim.world->machine.counters = MachineCounters{};
    sim.world->ca.reset_counters();
    sim.prefill_restarts = sim.set ? sim.set->restart_count() : sim.stack->restart_count();
  }

  sim.engine = std::make_unique<Engine>(*sim.world, cfg.sched);
  sim.engine->keep_log = cfg.keep_log;
  if (sim.set)
    sim.engine->reachable_cb = [s = sim.set.get()] { return s->reachable_count(); };
  else
    sim.engine->reachable_cb = [s = sim.stack.get()] { return s->reachable_count(); };

  auto rc = std::make_shared<RunCtx>();
  rc->cfg = cfg;
  rc->engine = sim.engine.get();
  rc->smr = sim.smr.get();
  rc->set = sim.set.get();
  rc->stack = sim.stack.get();
  if (cfg.record_history) {
    sim.history = std::make_shared<History>();
    rc->history = sim.history;
  }
  for (u32 t = 0; t < cfg.threads; ++t) {
    if (sim.set)
      sim.engine->add_thread([rc, t](SimContext& ctx) { return set_worker(ctx, rc, t); });
    else
      sim.engine->add_thread([rc, t](SimContext& ctx) { return stack_worker(ctx, rc, t); });
  }
  return sim;
}

BenchResult BenchSim::finish() {
  BenchResult r;
  r.run = engine->result();
  r.heap = world->heap.stats;
  r.violations = world->heap.violations;
  r.fatal = world->heap.has_fatal;
  r.restarts = ds_restarts();
  r.reachable_end = reachable();
  r.live_end = world->heap.stats.live_now;
  r.leaked = smr->leaked();
  r.backlog = smr->retired_backlog();
  for (u32 c = 0; c < world->cfg.core_count; ++c) {
    const CaCounters& cc = world->ca.state(c).counters;
    r.ca.tags += cc.tags;
    r.ca.untags += cc.untags;
    r.ca.cread_ok += cc.cread_ok;
    r.ca.cwrite_ok += cc.cwrite_ok;
    r.ca.cread_fail_conflict += cc.cread_fail_conflict;
    r.ca.cread_fail_eviction += cc.cread_fail_eviction;
    r.ca.cread_fail_capacity += cc.cread_fail_capacity;
    r.ca.cwrite_fail_revoked += cc.cwrite_fail_revoked;
    r.ca.cwrite_fail_untagged += cc.cwrite_fail_untagged;
  }
  r.machine = world->machine.counters;
  if (history) r.history = *history;
  if (engine->keep_log) r.log = std::move(engine->log);
  u64 total = cfg.ops_per_thread * cfg.threads;
  if (r.run.status == RunStatus::completed &&
      (r.run.samples.empty() || r.run.samples.back().sample_ops != total)) {
    MetricsSample s;  // synthesize the end-of-run point when the interval missed it
    s.sample_ops = total;
    s.ops_done = total;
    s.live_now = r.live_end;
    s.reachable = r.reachable_end;
    s.failed_cread = r.ca.failed_creads();
    s.failed_cwrite = r.ca.failed_cwrites();
    s.invalidations = r.machine.inval_recv;
    s.l1_miss = r.machine.l1_misses;
    s.cycles = r.machine.cycles;
    r.run.samples.push_back(s);
  }
  return r;
}

BenchResult run_bench(const BenchConfig& cfg) {
  BenchSim sim = build_bench(cfg);
  if (!sim.prefill_ok) throw std::runtime_error("prefill did not complete cleanly");
  sim.engine->run();
  return sim.finish();
}

void write_csv(std::ostream& os, const BenchConfig& cfg, const BenchResult& r) {
  const char* sched = cfg.sched.policy == SchedPolicy::round_robin ? "round_robin"
                      : cfg.sched.policy == SchedPolicy::random    ? "random"
                                                                   : "explicit";
  os << "# scheme=" << to_string(cfg.smr.kind) << " structure=" << to_string(cfg.ds)
     << " variant=" << (cfg.ca_variant ? "ca" : "base") << " threads=" << cfg.threads
     << " updates=" << cfg.update_percent << " key_range=" << cfg.key_range
     << " ops_per_thread=" << cfg.ops_per_thread << " seed=" << cfg.seed << " sched=" << sched
     << " recl_freq=" << cfg.smr.reclamation_frequency << " epoch_freq=" << cfg.smr.epoch_frequency
     << "\n";
  os << "# restarts=" << r.restarts << " reachable_end=" << r.reachable_end
     << " live_end=" << r.live_end << " leaked=" << r.leaked << " backlog=" << r.backlog
     << " violations=" << r.violations.size() << "\n";
  os << "scheme,structure,threads,updates,sample_ops,live_now,ops_done,failed_cread,"
        "failed_cwrite,invalidations,l1_miss,cycles_proxy\n";
  for (const MetricsSample& s : r.run.samples) {
    os << to_string(cfg.smr.kind) << "," << to_string(cfg.ds) << "," << cfg.threads << ","
       << cfg.update_percent << "," << s.sample_ops << "," << s.live_now << "," << s.ops_done << ","
       << s.failed_cread << "," << s.failed_cwrite << "," << s.invalidations << "," << s.l1_miss
       << "," << s.cycles << "\n";
  }
}

BenchConfig safety_config(DsKind ds, u64 seed) {
  BenchConfig c;
  c.ds = ds;
  c.ca_variant = true;
  c.smr.kind = SmrKind::ca;
  c.threads = 3;
  c.ops_per_thread = 30;
  c.update_percent = 100;
  c.key_range = 16;
  c.prefill_step = 2;
  c.seed = seed;
  c.sched = Schedule::rnd(seed);
  c.sample_interval = 0;
  c.mem.pin_tagged = true;
  return c;
}

Sim scripted_list_sim(const std::vector<i64>& prefill,
                      const std::vector<std::vector<std::pair<char, i64>>>& thread_ops,
                      const MemConfig& mem) {
  Sim sim;
  MemConfig mc = mem;
  if (mc.core_count < thread_ops.size()) mc.core_count = static_cast<u32>(thread_ops.size());
  sim.world = std::make_unique<World>(mc);
  auto pay = std::make_shared<ScriptedSetPayload>();
  SmrConfig sc;
  sc.kind = SmrKind::ca;
  pay->smr = std::make_unique<Smr>(*sim.world, sc, static_cast<u32>(thread_ops.size()));
  pay->set = std::make_unique<CaSetList>(*sim.world, *pay->smr);
  pay->history = std::make_shared<History>();
  if (!prefill.empty()) {
    Engine warm(*sim.world, Schedule::rr());
    warm.keep_log = false;
    warm.add_thread(
        [s = pay->set.get(), prefill](SimContext& ctx) { return prefill_set(ctx, s, prefill); });
    if (warm.run().status != RunStatus::completed)
      throw std::runtime_error("scripted prefill did not complete");
    sim.world->machine.counters = MachineCounters{};
    sim.world->ca.reset_counters();
  }
  sim.engine = std::make_unique<Engine>(*sim.world, Schedule::rr());
  auto rc = std::make_shared<ScriptedCtx>();
  rc->engine = sim.engine.get();
  rc->set = pay->set.get();
  rc->history = pay->history;
  for (u32 t = 0; t < thread_ops.size(); ++t) {
    sim.engine->add_thread([rc, t, ops = thread_ops[t]](SimContext& ctx) {
      return scripted_worker(ctx, rc, t, ops);
    });
  }
  sim.payload = pay;
  return sim;
}

std::vector<std::pair<SmrKind, BenchResult>> footprint_experiment(u32 threads, u64 ops_per_thread,
                                                                  i64 key_range, u64 seed) {
  std::vector<std::pair<SmrKind, BenchResult>> out;
  for (SmrKind k : {SmrKind::none, SmrKind::ca, SmrKind::qsbr, SmrKind::hp}) {
    BenchConfig c;
    c.ds = DsKind::list;
    c.ca_variant = k == SmrKind::ca;
    c.smr.kind = k;
    c.threads = threads;
    c.ops_per_thread = ops_per_thread;
    c.update_percent = 100;
    c.key_range = key_range;
    c.prefill_step = 2;
    c.seed = seed;
    c.sched = Schedule::rnd(seed);
    c.sched.max_steps = 4'000'000'000ull;  // desk-scale runs overflow the default budget
    c.sample_interval = 1000;
    c.mem.pin_tagged = c.ca_variant;
    out.emplace_back(k, run_bench(c));
  }
  return out;
}

}  // namespace casim
