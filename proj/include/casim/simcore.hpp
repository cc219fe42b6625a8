#pragma once

#include <coroutine>
#include <exception>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "casim/world.hpp"

namespace casim {

// ---------------------------------------------------------------------------
// Resumable programs. A simulated thread is a coroutine that co_awaits one
// Action at a time; everything between awaits is thread-private and runs
// eagerly. Nested Task<T> calls chain through symmetric transfer, so the
// engine only ever resumes the innermost frame.
// ---------------------------------------------------------------------------

template <class T>
class Task;

namespace detail {

struct PromiseBase {
  std::coroutine_handle<> cont;
  std::exception_ptr ex;
  std::suspend_always initial_suspend() noexcept { return {}; }
  void unhandled_exception() { ex = std::current_exception(); }
};

template <class P>
struct FinalAwaiter {
  bool await_ready() noexcept { return false; }
  std::coroutine_handle<> await_suspend(std::coroutine_handle<P> h) noexcept {
    auto c = h.promise().cont;
    return c ? c : std::noop_coroutine();
  }
  void await_resume() noexcept {}
};

template <class T>
struct Promise : PromiseBase {
  T value{};
  Task<T> get_return_object();
  FinalAwaiter<Promise<T>> final_suspend() noexcept { return {}; }
  void return_value(T v) { value = std::move(v); }
};

template <>
struct Promise<void> : PromiseBase {
  Task<void> get_return_object();
  FinalAwaiter<Promise<void>> final_suspend() noexcept { return {}; }
  void return_void() {}
};

}  // namespace detail

template <class T>
class [[nodiscard]] Task {
 public:
  using promise_type = detail::Promise<T>;

  Task() = default;
  explicit Task(std::coroutine_handle<promise_type> h) : h_(h) {}
  Task(Task&& o) noexcept : h_(std::exchange(o.h_, {})) {}
  Task& operator=(Task&& o) noexcept {
    if (this != &o) {
      if (h_) h_.destroy();
      h_ = std::exchange(o.h_, {});
    }
    return *this;
  }
  Task(const Task&) = delete;
  Task& operator=(const Task&) = delete;
  ~Task() {
    if (h_) h_.destroy();
  }

  struct Awaiter {
    std::coroutine_handle<promise_type> h;
    bool await_ready() { return false; }
    std::coroutine_handle<> await_suspend(std::coroutine_handle<> outer) {
      h.promise().cont = outer;
      return h;
    }
    T await_resume() {
      if (h.promise().ex) std::rethrow_exception(h.promise().ex);
      if constexpr (!std::is_void_v<T>) return std::move(h.promise().value);
    }
  };
  Awaiter operator co_await() { return {h_}; }

  std::coroutine_handle<promise_type> handle() const { return h_; }
  bool done() const { return !h_ || h_.done(); }

 private:
  std::coroutine_handle<promise_type> h_{};
};

namespace detail {
template <class T>
Task<T> Promise<T>::get_return_object() {
  return Task<T>{std::coroutine_handle<Promise<T>>::from_promise(*this)};
}
inline Task<void> Promise<void>::get_return_object() {
  return Task<void>{std::coroutine_handle<Promise<void>>::from_promise(*this)};
}
}  // namespace detail

using Program = Task<void>;

// ---------------------------------------------------------------------------
// Action awaitables. Suspending parks the Action in the thread's SimContext;
// the engine executes it and resumes with the result.
// ---------------------------------------------------------------------------

struct CaRes {
  bool ok;
  u64 value;
};

class SimContext {
 public:
  struct Awaiter {
    SimContext* ctx;
    Action action;
    ActionResult result{};
    bool await_ready() { return false; }
    void await_suspend(std::coroutine_handle<> h) {
      ctx->pending_ = this;
      ctx->leaf_ = h;
    }
    ActionResult await_resume() { return result; }
  };
  struct LoadAw : Awaiter {
    u64 await_resume() { return result.value; }
  };
  struct BoolAw : Awaiter {
    bool await_resume() { return result.ok; }
  };
  struct CaAw : Awaiter {
    CaRes await_resume() { return {result.ok, result.value}; }
  };
  struct AddrAw : Awaiter {
    u64 await_resume() { return result.value; }
  };
  struct VoidAw : Awaiter {
    void await_resume() {}
  };

  LoadAw load(u64 addr) { return {{this, {ActionKind::load, addr, 0, 0}}}; }
  VoidAw store(u64 addr, u64 v) { return {{this, {ActionKind::store, addr, v, 0}}}; }
  BoolAw cas(u64 addr, u64 expect, u64 desired) { return {{this, {ActionKind::cas, addr, expect, desired}}}; }
  CaAw cread(u64 addr) { return {{this, {ActionKind::cread, addr, 0, 0}}}; }
  BoolAw cwrite(u64 addr, u64 v) { return {{this, {ActionKind::cwrite, addr, v, 0}}}; }
  VoidAw untag_one(u64 addr) { return {{this, {ActionKind::untag_one, addr, 0, 0}}}; }
  VoidAw untag_all() { return {{this, {ActionKind::untag_all, 0, 0, 0}}}; }
  AddrAw alloc(u64 words) { return {{this, {ActionKind::alloc, 0, words, 0}}}; }
  VoidAw free_block(u64 addr) { return {{this, {ActionKind::free_, addr, 0, 0}}}; }
  VoidAw snapshot(u64 ops_done, u64 sample_point) { return {{this, {ActionKind::snapshot, 0, ops_done, sample_point}}}; }

  u32 tid() const { return tid_; }

 private:
  friend class Engine;
  u32 tid_ = 0;
  Awaiter* pending_ = nullptr;
  std::coroutine_handle<> leaf_;
};

// ---------------------------------------------------------------------------
// Scheduling, event log, engine.
// ---------------------------------------------------------------------------

enum class SchedPolicy : std::uint8_t { round_robin, random, explicit_list };

struct Schedule {
  SchedPolicy policy = SchedPolicy::round_robin;
  u64 seed = 0;
  std::vector<u32> steps;  // explicit_list; falls back to round-robin when exhausted
  u64 max_steps = 1'000'000;

  static Schedule rr() { return {}; }
  static Schedule rnd(u64 seed) { return {SchedPolicy::random, seed, {}, 1'000'000}; }
  static Schedule script(std::vector<u32> s) { return {SchedPolicy::explicit_list, 0, std::move(s), 1'000'000}; }
};

struct EventRecord {
  u64 step;
  u32 tid;
  Action action;
  ActionResult result;
  std::vector<CoherenceMsg> msgs;
};

struct EventLog {
  std::vector<EventRecord> records;
  std::string serialize() const;  // one "step,tid,kind,addr,outcome,msgs" line per record
};

struct MetricsSample {
  u64 sample_ops = 0;  // scheduled sampling point (multiple of the interval)
  u64 ops_done = 0;    // ops actually completed when the sample ran
  u64 live_now = 0;
  u64 reachable = 0;  // structure-reported reachable nodes, when a walker is attached
  u64 failed_cread = 0, failed_cwrite = 0;
  u64 invalidations = 0, l1_miss = 0, cycles = 0;
};

enum class RunStatus : std::uint8_t { completed, budget_exhausted, panicked };

struct RunResult {
  RunStatus status = RunStatus::completed;
  u64 steps = 0;
  u64 panic_step = 0;
  u32 panic_tid = 0;
  std::string panic_what;
  std::vector<MetricsSample> samples;
};

using ProgramFactory = std::function<Program(SimContext&)>;

// Deterministic single-threaded interleaving engine. One engine step =
// executing one thread's pending Action; the thread then runs eagerly (its
// private code has no shared effects) until it parks the next Action or
// finishes.
class Engine {
 public:
  Engine(World& world, Schedule sched);

  u32 add_thread(ProgramFactory f);  // returns tid; call before start()

  // Run under the configured policy. The log is appended to `log`.
  RunResult run();

  // Step-level interface for enumeration.
  void start();
  std::vector<u32> runnable() const;
  void step(u32 tid);
  bool finished() const;
  const RunResult& result() const { return res_; }

  EventLog log;
  bool keep_log = true;                // enumeration turns this off for speed
  std::function<u64()> reachable_cb;   // sampled into MetricsSample::reachable

  World& world() { return world_; }
  u64 steps() const { return stepno_; }

 private:
  struct ThreadState {
    SimContext ctx;
    Program program;
    bool started = false;
    bool done = false;
  };

  void advance(ThreadState& t);  // resume until next action or completion
  void execute_pending(u32 tid);

  World& world_;
  Schedule sched_;
  std::vector<std::unique_ptr<ThreadState>> threads_;
  std::vector<ProgramFactory> factories_;
  std::mt19937_64 rng_;
  u64 stepno_ = 0;
  size_t script_pos_ = 0;
  u32 rr_next_ = 0;
  bool started_ = false;
  RunResult res_;
};

// ---------------------------------------------------------------------------
// Exhaustive interleaving enumeration by prefix replay. Each maximal
// interleaving of Actions is visited exactly once; the factory must build an
// identical fresh simulation every call.
// ---------------------------------------------------------------------------

struct Sim {
  std::unique_ptr<World> world;
  std::unique_ptr<Engine> engine;
  std::shared_ptr<void> payload;  // harness extras (structures, histories, ...)
};

using SimFactory = std::function<Sim()>;

struct EnumOpts {
  u64 cap = 1'000'000;  // abort when the number of interleavings exceeds this
  bool keep_log = false;
};

struct EnumCapExceeded : std::runtime_error {
  explicit EnumCapExceeded(u64 cap)
      : std::runtime_error("interleaving enumeration exceeded cap " + std::to_string(cap)) {}
};

// Returns the number of maximal interleavings; calls visit on each completed
// simulation.
u64 enumerate_schedules(const SimFactory& factory, const EnumOpts& opts,
                        const std::function<void(Sim&)>& visit);

}  // namespace casim
