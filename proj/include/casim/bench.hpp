#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <utility>
#include <vector>

#include "casim/lincheck.hpp"
#include "casim/smr.hpp"
#include "casim/structures.hpp"

namespace casim {

enum class DsKind : std::uint8_t { list, stack, hashtable, extbst };
const char* to_string(DsKind k);
const char* to_string(SmrKind k);

struct BenchConfig {
  DsKind ds = DsKind::list;
  bool ca_variant = true;  // conditional-access implementation vs plain baseline
  SmrConfig smr{};
  u32 threads = 3;
  u64 ops_per_thread = 30;
  u32 update_percent = 100;  // rest are lookups; updates split evenly insert/erase
  i64 key_range = 16;
  u64 prefill_step = 2;  // inserts 0, step, 2*step, ... < key_range before timing
  u64 seed = 1;
  Schedule sched = Schedule::rr();
  u64 sample_interval = 1000;  // global completed ops between metric samples
  u32 hash_buckets = 128;
  bool record_history = false;  // set workloads only; enables linearizability checks
  bool keep_log = false;
  bool strict_reclaimer = false;
  MemConfig mem{};  // core_count 0 means "one core per thread"
};

struct BenchResult {
  RunResult run;
  AllocStats heap{};
  std::vector<Violation> violations;
  bool fatal = false;
  u64 restarts = 0;
  u64 reachable_end = 0, live_end = 0;
  u64 leaked = 0, backlog = 0;
  CaCounters ca{};  // summed over cores, post-prefill
  MachineCounters machine{};
  History history;
  EventLog log;
};

// A wired simulation: world, scheme, structure, worker threads, prefill done
// and counters reset. Heap objects are stable, so the struct can be moved.
struct BenchSim {
  BenchConfig cfg;
  std::unique_ptr<World> world;
  std::unique_ptr<Smr> smr;
  std::unique_ptr<SetDs> set;  // exactly one of set / stack is non-null
  std::unique_ptr<StackDs> stack;
  std::unique_ptr<Engine> engine;
  std::shared_ptr<History> history;
  bool prefill_ok = true;
  u64 prefill_restarts = 0;

  u64 reachable() const { return set ? set->reachable_count() : stack->reachable_count(); }
  u64 ds_restarts() const {
    return (set ? set->restart_count() : stack->restart_count()) - prefill_restarts;
  }
  BenchResult finish();  // gather counters once the engine has run
};

std::vector<i64> prefill_keys(const BenchConfig& cfg);

BenchSim build_bench(const BenchConfig& cfg);
BenchResult run_bench(const BenchConfig& cfg);

// Frozen schema: comment lines echo the config, then one row per sample.
void write_csv(std::ostream& os, const BenchConfig& cfg, const BenchResult& r);

// The adversarial workload used by the randomized safety sweeps: few keys,
// all updates, so traversals constantly race against frees.
BenchConfig safety_config(DsKind ds, u64 seed);

// none / ca / qsbr / hp on the same list workload; ca uses the
// conditional-access list, the others the baseline list.
std::vector<std::pair<SmrKind, BenchResult>> footprint_experiment(u32 threads, u64 ops_per_thread,
                                                                  i64 key_range, u64 seed);

// Scripted fixed-op runs for exhaustive enumeration: conditional-access list,
// ca scheme, each thread executing its (op, key) script with invoke/response
// recording. Rebuilding from equal arguments yields an identical simulation.
struct ScriptedSetPayload {
  std::unique_ptr<Smr> smr;
  std::unique_ptr<SetDs> set;
  std::shared_ptr<History> history;
};

Sim scripted_list_sim(const std::vector<i64>& prefill,
                      const std::vector<std::vector<std::pair<char, i64>>>& thread_ops,
                      const MemConfig& mem = {});

}  // namespace casim
