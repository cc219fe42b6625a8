#include <doctest.h>

#include <vector>

#include "casim/lincheck.hpp"

using namespace casim;

namespace {

OpRecord op(u32 tid, char o, i64 key, bool result, u64 invoke, u64 response) {
  return {tid, o, key, result, invoke, response};
}

bool lin(std::vector<OpRecord> ops, std::vector<i64> initial = {}) {
  History h;
  h.ops = std::move(ops);
  return linearizable_set(h, initial);
}

}  // namespace

TEST_CASE("sequential histories follow plain set semantics") {
  CHECK(lin({}));
  CHECK(lin({op(0, 'i', 5, true, 0, 1), op(0, 'c', 5, true, 2, 3)}));
  CHECK(lin({op(0, 'i', 5, true, 0, 1), op(0, 'i', 5, false, 2, 3),
             op(0, 'e', 5, true, 4, 5), op(0, 'e', 5, false, 6, 7),
             op(0, 'c', 5, false, 8, 9)}));
  // a duplicate insert cannot succeed twice
  CHECK_FALSE(lin({op(0, 'i', 4, true, 0, 1), op(0, 'i', 4, true, 2, 3)}));
  // reads cannot invent elements
  CHECK_FALSE(lin({op(0, 'c', 5, true, 0, 1)}));
}

TEST_CASE("overlapping ops may order either way; disjoint ops may not") {
  // contains overlaps the insert: both outcomes are linearizable
  CHECK(lin({op(0, 'i', 3, true, 0, 10), op(1, 'c', 3, true, 5, 7)}));
  CHECK(lin({op(0, 'i', 3, true, 0, 10), op(1, 'c', 3, false, 5, 7)}));
  // the read starts strictly after the insert responded: it must observe it
  CHECK(lin({op(0, 'i', 3, true, 0, 2), op(1, 'c', 3, true, 5, 6)}));
  CHECK_FALSE(lin({op(0, 'i', 3, true, 0, 2), op(1, 'c', 3, false, 5, 6)}));
  // stale read after a completed erase
  CHECK_FALSE(lin({op(0, 'i', 3, true, 0, 1), op(0, 'e', 3, true, 2, 3),
                   op(1, 'c', 3, true, 4, 5)}));
}

TEST_CASE("contended updates on one key admit exactly one winner") {
  CHECK(lin({op(0, 'i', 9, true, 0, 5), op(1, 'i', 9, false, 1, 4)}));
  CHECK_FALSE(lin({op(0, 'i', 9, true, 0, 5), op(1, 'i', 9, true, 1, 4)}));
  CHECK(lin({op(0, 'i', 9, true, 0, 5), op(1, 'e', 9, true, 1, 6),
             op(2, 'c', 9, false, 7, 8)}));
}

TEST_CASE("the initial set seeds the semantics") {
  CHECK(lin({op(0, 'e', 7, true, 0, 1)}, {7}));
  CHECK(lin({op(0, 'c', 7, true, 0, 1)}, {7}));
  CHECK_FALSE(lin({op(0, 'e', 7, true, 0, 1), op(0, 'e', 7, true, 2, 3)}, {7}));
  // even fully overlapped, only one erase of the same element can win
  CHECK_FALSE(lin({op(0, 'e', 7, true, 0, 5), op(1, 'e', 7, true, 1, 4)}, {7}));
  CHECK(lin({op(0, 'e', 7, true, 0, 5), op(1, 'e', 7, false, 1, 4)}, {7}));
  CHECK_FALSE(lin({op(0, 'i', 7, true, 0, 1)}, {7}));
}

TEST_CASE("a three-thread interleaving with forced reordering is accepted") {
  // T1's read responds before T0's insert responds, yet observes the insert;
  // ordering by response would reject this, real linearization accepts it.
  CHECK(lin({op(0, 'i', 1, true, 0, 10), op(1, 'c', 1, true, 2, 3),
             op(2, 'e', 1, true, 4, 12), op(1, 'c', 1, false, 13, 14)}));
}
