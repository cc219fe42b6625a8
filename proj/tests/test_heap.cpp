#include <doctest.h>

#include <stdexcept>

#include "casim/world.hpp"

using namespace casim;

TEST_CASE("blocks are line-aligned, zeroed, and reused LIFO") {
  World w({});
  SimHeap& h = w.heap;
  u64 p1 = h.alloc(0, 4, 1);
  CHECK(p1 == World::kHeapBase);
  CHECK(p1 % 64 == 0);
  for (u32 i = 0; i < 8; ++i) CHECK(w.machine.peek(p1 + 8 * i) == 0);
  CHECK(h.stats.live_now == 1);
  CHECK(h.classify(p1) == BlockState::live);
  CHECK(h.classify(p1 + 63) == BlockState::live);  // any byte of the line

  u64 p2 = h.alloc(0, 8, 2);
  CHECK(p2 == p1 + 64);
  w.machine.poke(p2 + 8, 99);
  h.free_block(0, p2, 3);
  h.free_block(0, p1, 4);
  CHECK(h.classify(p1) == BlockState::freed);
  CHECK(h.stats.live_now == 0);
  CHECK(h.stats.freed_total == 2);

  CHECK(h.alloc(0, 4, 5) == p1);  // most recently freed comes back first
  CHECK(h.alloc(0, 4, 6) == p2);
  CHECK(w.machine.peek(p2 + 8) == 0);  // reallocation rezeroes the line
  CHECK(h.classify(p2) == BlockState::live);
  CHECK(h.violations.empty());
}

TEST_CASE("blocks never span lines") {
  World w({});
  CHECK_THROWS_AS(w.heap.alloc(0, 9, 0), std::invalid_argument);
  CHECK_THROWS_AS(w.heap.alloc(0, 0, 0), std::invalid_argument);
}

TEST_CASE("double frees and frees of foreign addresses are flagged") {
  World w({});
  SimHeap& h = w.heap;
  u64 p = h.alloc(0, 4, 1);
  h.free_block(0, p, 2);
  h.free_block(1, p, 3);
  REQUIRE(h.violations.size() == 1);
  CHECK(h.violations[0].kind == ViolationKind::double_free);
  CHECK(h.violations[0].step == 3);
  CHECK(h.violations[0].tid == 1);
  CHECK(h.violations[0].addr == p);

  h.free_block(0, p + 8, 4);  // mid-block: not a block base
  h.free_block(0, 0x999940, 5);  // never allocated
  REQUIRE(h.violations.size() == 3);
  CHECK(h.violations[1].kind == ViolationKind::bad_free);
  CHECK(h.violations[2].kind == ViolationKind::bad_free);
  CHECK(!h.has_fatal);  // none of these are the fatal class
}

TEST_CASE("accesses to freed blocks split into plain and fatal conditional") {
  World w({});
  SimHeap& h = w.heap;
  u64 p = h.alloc(0, 4, 1);
  h.note_access(0, p + 16, 2, false);
  CHECK(h.violations.empty());  // live block: fine

  h.free_block(0, p, 3);
  h.note_access(2, p + 16, 4, false);
  REQUIRE(h.violations.size() == 1);
  CHECK(h.violations[0].kind == ViolationKind::plain_uaf);
  CHECK(h.violations[0].tid == 2);
  CHECK(!h.has_fatal);

  h.note_access(2, p + 16, 5, true);  // a successful conditional access here
  REQUIRE(h.violations.size() == 2);
  CHECK(h.violations[1].kind == ViolationKind::fatal_ca_uaf);
  CHECK(h.has_fatal);

  u64 q = h.alloc(1, 4, 6);
  CHECK(q == p);  // reused: accesses are legal again
  h.note_access(2, q + 16, 7, false);
  CHECK(h.violations.size() == 2);
}

TEST_CASE("accesses outside statics and heap are wild") {
  World w({});
  ActionResult r = w.execute(0, {ActionKind::load, World::kHeapBase + 64 * 100, 0, 0}, 9);
  CHECK(r.ok);  // the machine serves it; the oracle flags it
  REQUIRE(w.heap.violations.size() == 1);
  CHECK(w.heap.violations[0].kind == ViolationKind::wild_access);
  CHECK(w.heap.violations[0].step == 9);

  w.execute(0, {ActionKind::load, 8, 0, 0}, 10);  // line 0 is reserved
  CHECK(w.heap.violations.size() == 2);
  CHECK(w.heap.violations[1].kind == ViolationKind::wild_access);

  u64 s = w.static_line();
  w.execute(0, {ActionKind::store, s, 5, 0}, 11);  // statics are legal
  CHECK(w.heap.violations.size() == 2);
}

TEST_CASE("strict mode requires the freeing core to have written the block") {
  World w({});
  SimHeap& h = w.heap;
  h.strict_reclaimer_check = true;

  u64 p = h.alloc(0, 4, 1);
  h.free_block(1, p, 2);  // nobody ever wrote it
  REQUIRE(h.violations.size() == 1);
  CHECK(h.violations[0].kind == ViolationKind::reclaimer_rule);

  u64 q = h.alloc(0, 4, 3);
  h.note_write(0, q + 16);
  h.free_block(1, q, 4);  // core 0 wrote, core 1 frees
  CHECK(h.violations.size() == 2);

  u64 r = h.alloc(0, 4, 5);
  h.note_write(1, r + 16);
  h.free_block(1, r, 6);  // the freeing core marked it first: fine
  CHECK(h.violations.size() == 2);

  // Writer masks reset on reallocation.
  u64 t = h.alloc(0, 4, 7);
  CHECK(t == r);
  h.free_block(1, t, 8);
  CHECK(h.violations.size() == 3);
}
