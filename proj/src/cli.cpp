#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "casim/audit.hpp"
#include "casim/bench.hpp"
#include "casim/cli.hpp"

namespace casim::cli {

namespace {

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw CLI::ValidationError("--out", "cannot open " + path);
  return file;
}

void print_violations(const BenchConfig& cfg, const BenchResult& r) {
  std::cerr << "oracle violations: " << r.violations.size() << (r.fatal ? " (fatal)" : "") << "\n";
  for (size_t i = 0; i < r.violations.size() && i < 8; ++i) {
    const Violation& v = r.violations[i];
    std::cerr << "  " << to_string(v.kind) << " step=" << v.step << " tid=" << v.tid << " addr=0x"
              << std::hex << v.addr << std::dec << "\n";
  }
  std::cerr << "replay: casim replay --ds " << to_string(cfg.ds) << " --smr "
            << to_string(cfg.smr.kind) << (cfg.ca_variant ? "" : " --baseline") << " --seed "
            << cfg.seed << "\n";
}

struct CommonOpts {
  BenchConfig cfg;
  std::string sched = "random";
  std::string out;
  bool baseline = false;
  bool no_pin = false;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  static const std::map<std::string, DsKind> ds_map{{"list", DsKind::list},
                                                    {"stack", DsKind::stack},
                                                    {"hashtable", DsKind::hashtable},
                                                    {"extbst", DsKind::extbst}};
  static const std::map<std::string, SmrKind> smr_map{{"none", SmrKind::none},
                                                      {"ca", SmrKind::ca},
                                                      {"qsbr", SmrKind::qsbr},
                                                      {"hp", SmrKind::hp},
                                                      {"unsafe", SmrKind::unsafe_immediate}};
  sub->add_option("--ds", o.cfg.ds, "structure: list|stack|hashtable|extbst")
      ->transform(CLI::CheckedTransformer(ds_map));
  sub->add_option("--smr", o.cfg.smr.kind, "reclamation: none|ca|qsbr|hp|unsafe")
      ->transform(CLI::CheckedTransformer(smr_map));
  sub->add_flag("--baseline", o.baseline, "plain baseline structure instead of conditional-access");
  sub->add_option("--threads", o.cfg.threads, "worker threads (= simulated cores)");
  sub->add_option("--ops", o.cfg.ops_per_thread, "operations per thread");
  sub->add_option("--updates", o.cfg.update_percent, "update percentage, rest are lookups")
      ->check(CLI::Range(0, 100));
  sub->add_option("--key-range", o.cfg.key_range, "keys drawn from [0, range)");
  sub->add_option("--seed", o.cfg.seed, "workload/schedule seed (default: CASIM_SEED or 1)");
  sub->add_option("--sched", o.sched, "round_robin|random")
      ->check(CLI::IsMember({"round_robin", "rr", "random"}));
  sub->add_option("--recl-freq", o.cfg.smr.reclamation_frequency, "retires between reclaim scans");
  sub->add_option("--epoch-freq", o.cfg.smr.epoch_frequency, "allocs between epoch advances");
  sub->add_option("--sample-interval", o.cfg.sample_interval, "ops between metric samples");
  sub->add_flag("--no-pin", o.no_pin, "let capacity evict tagged lines");
  sub->add_flag("--strict-reclaimer", o.cfg.strict_reclaimer,
                "require a write by the freeing core before each free");
  sub->add_option("--out", o.out, "write CSV/log here instead of stdout");
}

BenchConfig finish_common(CommonOpts& o) {
  o.cfg.ca_variant = !o.baseline;
  o.cfg.mem.pin_tagged = o.cfg.ca_variant && !o.no_pin;
  o.cfg.sched = o.sched == "random" ? Schedule::rnd(o.cfg.seed) : Schedule::rr();
  o.cfg.sched.max_steps = 4'000'000'000ull;
  return o.cfg;
}

int cmd_bench(CommonOpts& o) {
  BenchConfig cfg = finish_common(o);
  BenchResult r = run_bench(cfg);
  std::ofstream f;
  write_csv(open_out(f, o.out), cfg, r);
  if (!r.violations.empty()) {
    print_violations(cfg, r);
    return 1;
  }
  return 0;
}

int cmd_footprint(CommonOpts& o) {
  BenchConfig base = finish_common(o);
  auto rows = footprint_experiment(base.threads, base.ops_per_thread, base.key_range, base.seed);
  std::ofstream f;
  std::ostream& os = open_out(f, o.out);
  int rc = 0;
  for (auto& [kind, r] : rows) {
    BenchConfig cfg = base;
    cfg.smr.kind = kind;
    cfg.ca_variant = kind == SmrKind::ca;
    write_csv(os, cfg, r);
    std::cerr << to_string(kind) << ": live_end=" << r.live_end << " reachable=" << r.reachable_end
              << " leaked=" << r.leaked << " backlog=" << r.backlog << "\n";
    if (!r.violations.empty()) {
      print_violations(cfg, r);
      rc = 1;
    }
  }
  return rc;
}

int cmd_safety(CommonOpts& o, u64 seeds) {
  BenchConfig proto = finish_common(o);
  u64 fatal = 0, plain = 0, other = 0;
  u64 first_bad = 0;
  bool bad = false;
  for (u64 s = 0; s < seeds; ++s) {
    BenchConfig cfg = safety_config(proto.ds, proto.seed + s);
    cfg.smr = proto.smr;
    cfg.ca_variant = proto.ca_variant;
    cfg.mem.pin_tagged = proto.mem.pin_tagged;
    cfg.strict_reclaimer = proto.strict_reclaimer;
    BenchResult r = run_bench(cfg);
    for (const Violation& v : r.violations) {
      if (v.kind == ViolationKind::fatal_ca_uaf)
        ++fatal;
      else if (v.kind == ViolationKind::plain_uaf)
        ++plain;
      else
        ++other;
    }
    if (!r.violations.empty() && !bad) {
      bad = true;
      first_bad = cfg.seed;
      print_violations(cfg, r);
    }
  }
  std::cout << "ds=" << to_string(proto.ds) << " variant=" << (proto.ca_variant ? "ca" : "base")
            << " smr=" << to_string(proto.smr.kind) << " seeds=" << seeds << " fatal=" << fatal
            << " plain_uaf=" << plain << " other=" << other;
  if (bad) std::cout << " first_bad_seed=" << first_bad;
  std::cout << "\n";
  return bad ? 1 : 0;
}

int cmd_replay(CommonOpts& o) {
  BenchConfig cfg = safety_config(o.cfg.ds, o.cfg.seed);
  cfg.smr = o.cfg.smr;
  cfg.ca_variant = !o.baseline;
  cfg.mem.pin_tagged = cfg.ca_variant && !o.no_pin;
  cfg.strict_reclaimer = o.cfg.strict_reclaimer;
  cfg.keep_log = true;
  BenchResult r = run_bench(cfg);
  std::ofstream f;
  std::ostream& os = open_out(f, o.out);
  os << r.log.serialize();
  os << "# violations=" << r.violations.size() << " fatal=" << (r.fatal ? 1 : 0) << "\n";
  for (const Violation& v : r.violations)
    os << "# violation " << to_string(v.kind) << " step=" << v.step << " tid=" << v.tid
       << " addr=0x" << std::hex << v.addr << std::dec << "\n";
  return r.violations.empty() ? 0 : 1;
}

int cmd_explore(u64 cap) {
  std::vector<i64> prefill{2};
  std::vector<std::vector<std::pair<char, i64>>> ops{{{'e', 2}}, {{'c', 2}}};
  MemConfig mem;
  mem.pin_tagged = true;
  SimFactory fac = [&] { return scripted_list_sim(prefill, ops, mem); };
  EnumOpts eo;
  eo.cap = cap;
  u64 bad = 0, total = 0;
  u64 count = enumerate_schedules(fac, eo, [&](Sim& sim) {
    ++total;
    auto* pay = static_cast<ScriptedSetPayload*>(sim.payload.get());
    bool lin = linearizable_set(*pay->history, prefill);
    if (!lin || !sim.world->heap.violations.empty() ||
        sim.engine->result().status != RunStatus::completed)
      ++bad;
  });
  std::cout << "interleavings=" << count << " checked=" << total << " bad=" << bad << "\n";
  return bad == 0 ? 0 : 1;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"deterministic multicore cache simulator: conditional-access memory reclamation"};
  app.require_subcommand(1);

  CommonOpts o;
  if (const char* env = std::getenv("CASIM_SEED")) o.cfg.seed = std::strtoull(env, nullptr, 10);
  // workload defaults sized for interactive runs; sweeps override
  o.cfg.threads = 4;
  o.cfg.ops_per_thread = 1000;
  o.cfg.key_range = 128;

  u64 seeds = 100;
  u64 cap = 1'000'000;

  CLI::App* bench = app.add_subcommand("bench", "run one workload, emit per-sample CSV");
  add_common(bench, o);
  CLI::App* foot = app.add_subcommand("footprint", "compare live memory across schemes");
  add_common(foot, o);
  CLI::App* safety = app.add_subcommand("safety", "randomized adversarial sweep over seeds");
  add_common(safety, o);
  safety->add_option("--seeds", seeds, "number of seeds starting at --seed");
  CLI::App* replay = app.add_subcommand("replay", "re-run one safety seed, dump the event log");
  add_common(replay, o);
  CLI::App* explore = app.add_subcommand("explore", "exhaustively enumerate a tiny list instance");
  explore->add_option("--cap", cap, "maximum number of interleavings");

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (bench->parsed()) return cmd_bench(o);
    if (foot->parsed()) return cmd_footprint(o);
    if (safety->parsed()) return cmd_safety(o, seeds);
    if (replay->parsed()) return cmd_replay(o);
    if (explore->parsed()) return cmd_explore(cap);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const EnumCapExceeded& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 2;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("casim");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace casim::cli
