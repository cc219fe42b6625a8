#include "casim/simcore.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace casim {

std::string EventLog::serialize() const {
  std::ostringstream os;
  for (const auto& r : records) {
    os << r.step << ',' << r.tid << ',' << to_string(r.action.kind) << ',' << r.action.addr << ','
       << format_outcome(r.result) << ',' << format_msgs(r.msgs) << '\n';
  }
  return os.str();
}

Engine::Engine(World& world, Schedule sched) : world_(world), sched_(std::move(sched)), rng_(sched_.seed) {}

u32 Engine::add_thread(ProgramFactory f) {
  factories_.push_back(std::move(f));
  return static_cast<u32>(factories_.size() - 1);
}

void Engine::advance(ThreadState& t) {
  t.ctx.pending_ = nullptr;
  auto h = t.started ? t.ctx.leaf_ : std::coroutine_handle<>(t.program.handle());
  t.started = true;
  h.resume();
  if (t.ctx.pending_ == nullptr) {
    t.done = true;
    if (t.program.handle().promise().ex) std::rethrow_exception(t.program.handle().promise().ex);
  }
}

void Engine::start() {
  if (started_) return;
  started_ = true;
  for (auto& f : factories_) {
    auto ts = std::make_unique<ThreadState>();
    ts->ctx.tid_ = static_cast<u32>(threads_.size());
    ts->program = f(ts->ctx);
    threads_.push_back(std::move(ts));
  }
  // First resumes run in tid order; pre-action code is thread-private, so the
  // order is unobservable.
  for (auto& t : threads_) {
    try {
      advance(*t);
    } catch (const std::exception& e) {
      res_.status = RunStatus::panicked;
      res_.panic_step = stepno_;
      res_.panic_tid = t->ctx.tid_;
      res_.panic_what = e.what();
      return;
    }
  }
}

std::vector<u32> Engine::runnable() const {
  std::vector<u32> r;
  if (res_.status == RunStatus::panicked) return r;
  for (const auto& t : threads_)
    if (!t->done) r.push_back(t->ctx.tid_);
  return r;
}

bool Engine::finished() const {
  return std::all_of(threads_.begin(), threads_.end(), [](const auto& t) { return t->done; });
}

void Engine::execute_pending(u32 tid) {
  ThreadState& t = *threads_[tid];
  SimContext::Awaiter* aw = t.ctx.pending_;
  if (!aw) throw std::logic_error("step on thread without pending action");
  aw->result = world_.execute(tid, aw->action, stepno_);
  if (keep_log)
    log.records.push_back({stepno_, tid, aw->action, aw->result, world_.machine.msgs()});
  if (aw->action.kind == ActionKind::snapshot) {
    MetricsSample s;
    s.sample_ops = aw->action.b;
    s.ops_done = aw->action.a;
    s.live_now = world_.heap.stats.live_now;
    if (reachable_cb) s.reachable = reachable_cb();
    for (u32 c = 0; c < world_.cfg.core_count; ++c) {
      const auto& cc = world_.ca.state(c).counters;
      s.failed_cread += cc.failed_creads();
      s.failed_cwrite += cc.failed_cwrites();
    }
    s.invalidations = world_.machine.counters.inval_recv;
    s.l1_miss = world_.machine.counters.l1_misses;
    s.cycles = world_.machine.counters.cycles;
    res_.samples.push_back(s);
  }
  stepno_++;
  res_.steps = stepno_;
}

void Engine::step(u32 tid) {
  ThreadState& t = *threads_[tid];
  try {
    execute_pending(tid);
    advance(t);
  } catch (const std::exception& e) {
    res_.status = RunStatus::panicked;
    res_.panic_step = stepno_;
    res_.panic_tid = tid;
    res_.panic_what = e.what();
  }
}

RunResult Engine::run() {
  start();
  while (res_.status == RunStatus::completed) {
    std::vector<u32> r = runnable();
    if (r.empty()) break;
    if (stepno_ >= sched_.max_steps) {
      res_.status = RunStatus::budget_exhausted;
      break;
    }
    u32 pick = r[0];
    switch (sched_.policy) {
      case SchedPolicy::round_robin: {
        while (threads_[rr_next_ % threads_.size()]->done) rr_next_++;
        pick = rr_next_ % threads_.size();
        rr_next_++;
        break;
      }
      case SchedPolicy::random:
        pick = r[rng_() % r.size()];
        break;
      case SchedPolicy::explicit_list: {
        while (script_pos_ < sched_.steps.size() && threads_[sched_.steps[script_pos_]]->done)
          script_pos_++;
        if (script_pos_ < sched_.steps.size()) {
          pick = sched_.steps[script_pos_++];
        } else {
          while (threads_[rr_next_ % threads_.size()]->done) rr_next_++;
          pick = rr_next_ % threads_.size();
          rr_next_++;
        }
        break;
      }
    }
    step(pick);
  }
  return res_;
}

u64 enumerate_schedules(const SimFactory& factory, const EnumOpts& opts,
                        const std::function<void(Sim&)>& visit) {
  u64 count = 0;
  std::vector<u32> path;               // chosen tid per depth
  std::vector<std::vector<u32>> alts;  // runnable set per depth
  while (true) {
    Sim sim = factory();
    sim.engine->keep_log = opts.keep_log;
    sim.engine->start();
    for (u32 tid : path) sim.engine->step(tid);
    // Extend to a maximal interleaving, always taking the first runnable.
    while (true) {
      std::vector<u32> r = sim.engine->runnable();
      if (r.empty()) break;
      alts.push_back(r);
      path.push_back(r[0]);
      sim.engine->step(r[0]);
    }
    if (++count > opts.cap) throw EnumCapExceeded(opts.cap);
    if (visit) visit(sim);
    // Backtrack to the deepest level with an unexplored sibling.
    while (!path.empty()) {
      const std::vector<u32>& r = alts.back();
      auto it = std::find(r.begin(), r.end(), path.back());
      size_t idx = static_cast<size_t>(it - r.begin());
      if (idx + 1 < r.size()) {
        path.back() = r[idx + 1];
        break;
      }
      path.pop_back();
      alts.pop_back();
    }
    if (path.empty()) return count;
  }
}

}  // namespace casim
