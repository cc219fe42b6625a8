#include <doctest.h>

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "casim/simcore.hpp"

using namespace casim;

namespace {

Program store_seq(SimContext& ctx, std::vector<u64> addrs) {
  u64 v = 0;
  for (u64 a : addrs) co_await ctx.store(a, ++v);
}

struct Rig {
  std::unique_ptr<World> world;
  std::unique_ptr<Engine> engine;
};

// n threads, each storing 1..per to its own private run of static lines.
Rig make_rig(u32 threads, u32 per, Schedule s) {
  MemConfig mc;
  mc.core_count = threads;
  Rig r;
  r.world = std::make_unique<World>(mc);
  std::vector<std::vector<u64>> addrs(threads);
  for (u32 t = 0; t < threads; ++t)
    for (u32 i = 0; i < per; ++i) addrs[t].push_back(r.world->static_line());
  r.engine = std::make_unique<Engine>(*r.world, s);
  for (u32 t = 0; t < threads; ++t)
    r.engine->add_thread([a = addrs[t]](SimContext& ctx) { return store_seq(ctx, a); });
  return r;
}

SimFactory rig_factory(u32 threads, u32 per) {
  return [threads, per] {
    Rig r = make_rig(threads, per, Schedule::rr());
    return Sim{std::move(r.world), std::move(r.engine), {}};
  };
}

std::vector<u32> log_tids(const EventLog& log) {
  std::vector<u32> t;
  for (const auto& rec : log.records) t.push_back(rec.tid);
  return t;
}

}  // namespace

TEST_CASE("round-robin schedule produces the exact expected log") {
  Rig r = make_rig(2, 2, Schedule::rr());
  RunResult res = r.engine->run();
  CHECK(res.status == RunStatus::completed);
  CHECK(res.steps == 4);
  CHECK(r.engine->steps() == 4);
  // Statics hand out lines 1,2 to thread 0 and 3,4 to thread 1; each cold
  // store misses straight to memory.
  CHECK(r.engine->log.serialize() ==
        "0,0,store,64,ok:1,mem@0:L1\n"
        "1,1,store,192,ok:1,mem@0:L3\n"
        "2,0,store,128,ok:2,mem@0:L2\n"
        "3,1,store,256,ok:2,mem@0:L4\n");
}

TEST_CASE("explicit script runs listed tids then falls back to round-robin") {
  Rig r = make_rig(2, 2, Schedule::script({1, 1, 0}));
  RunResult res = r.engine->run();
  CHECK(res.status == RunStatus::completed);
  CHECK(log_tids(r.engine->log) == std::vector<u32>{1, 1, 0, 0});
}

TEST_CASE("random schedules are reproducible from the seed") {
  auto serialize_with = [](u64 seed) {
    Rig r = make_rig(2, 3, Schedule::rnd(seed));
    r.engine->run();
    return r.engine->log.serialize();
  };
  CHECK(serialize_with(42) == serialize_with(42));
  std::set<std::string> distinct;
  for (u64 s = 0; s < 10; ++s) distinct.insert(serialize_with(s));
  CHECK(distinct.size() > 1);
}

TEST_CASE("random scheduling picks either thread first about half the time") {
  u64 zero_first = 0;
  for (u64 seed = 0; seed < 1000; ++seed) {
    Rig r = make_rig(2, 1, Schedule::rnd(seed));
    r.engine->run();
    if (r.engine->log.records[0].tid == 0) ++zero_first;
  }
  CHECK(zero_first > 400);
  CHECK(zero_first < 600);
}

TEST_CASE("enumeration visits every maximal interleaving exactly once") {
  SUBCASE("two threads, three actions each") {
    std::set<std::string> logs;
    EnumOpts eo;
    eo.keep_log = true;
    u64 n = enumerate_schedules(rig_factory(2, 3), eo,
                                [&](Sim& sim) { logs.insert(sim.engine->log.serialize()); });
    CHECK(n == 20);  // C(6,3)
    CHECK(logs.size() == 20);
  }
  SUBCASE("two threads, two actions each") {
    CHECK(enumerate_schedules(rig_factory(2, 2), {}, nullptr) == 6);  // C(4,2)
  }
  SUBCASE("three threads, one action each") {
    CHECK(enumerate_schedules(rig_factory(3, 1), {}, nullptr) == 6);  // 3!
  }
  SUBCASE("cap aborts with the dedicated exception") {
    EnumOpts eo;
    eo.cap = 10;
    CHECK_THROWS_AS(enumerate_schedules(rig_factory(2, 3), eo, nullptr), EnumCapExceeded);
  }
}

TEST_CASE("step budget stops the run with budget_exhausted") {
  Schedule s = Schedule::rr();
  s.max_steps = 3;
  Rig r = make_rig(2, 3, s);
  RunResult res = r.engine->run();
  CHECK(res.status == RunStatus::budget_exhausted);
  CHECK(res.steps == 3);
  CHECK(r.engine->log.records.size() == 3);
}

namespace {
Program aligned_then_not(SimContext& ctx, u64 a) {
  co_await ctx.store(a, 1);
  co_await ctx.load(a + 3);  // unaligned: the machine rejects it
}
}  // namespace

TEST_CASE("an exception inside an action surfaces as a panic with step and tid") {
  MemConfig mc;
  World w(mc);
  u64 a = w.static_line();
  Engine eng(w, Schedule::rr());
  eng.add_thread([a](SimContext& ctx) { return aligned_then_not(ctx, a); });
  RunResult res = eng.run();
  CHECK(res.status == RunStatus::panicked);
  CHECK(res.panic_step == 1);
  CHECK(res.panic_tid == 0);
  CHECK(res.panic_what == "unaligned word access");
  CHECK(eng.log.records.size() == 1);  // the failing action is never logged
}

namespace {
Program sampling(SimContext& ctx, u64 a) {
  co_await ctx.store(a, 1);
  co_await ctx.store(a, 2);
  co_await ctx.snapshot(5, 10);
  co_await ctx.store(a, 3);
}
}  // namespace

TEST_CASE("snapshot actions record metric samples and ask the reachable walker") {
  MemConfig mc;
  World w(mc);
  u64 a = w.static_line();
  Engine eng(w, Schedule::rr());
  eng.reachable_cb = [] { return u64{7}; };
  eng.add_thread([a](SimContext& ctx) { return sampling(ctx, a); });
  RunResult res = eng.run();
  CHECK(res.status == RunStatus::completed);
  REQUIRE(res.samples.size() == 1);
  CHECK(res.samples[0].ops_done == 5);
  CHECK(res.samples[0].sample_ops == 10);
  CHECK(res.samples[0].reachable == 7);
  CHECK(res.samples[0].live_now == 0);
  CHECK(res.steps == 4);
}

namespace {
Task<u64> store_then_load(SimContext& ctx, u64 a) {
  co_await ctx.store(a, 1);
  co_return co_await ctx.load(a);
}
Program nested(SimContext& ctx, u64 a, u64 b, u64* out) {
  *out += co_await store_then_load(ctx, a);
  *out += co_await store_then_load(ctx, b);
}
}  // namespace

TEST_CASE("nested tasks chain through the engine one action at a time") {
  MemConfig mc;
  World w(mc);
  u64 a = w.static_line(), b = w.static_line();
  u64 out = 0;
  Engine eng(w, Schedule::rr());
  eng.add_thread([a, b, &out](SimContext& ctx) { return nested(ctx, a, b, &out); });
  RunResult res = eng.run();
  CHECK(res.status == RunStatus::completed);
  CHECK(out == 2);
  CHECK(res.steps == 4);
}
