#pragma once

#include <vector>

#include "casim/structures.hpp"

namespace casim {

// One completed set operation as observed by the harness. invoke/response are
// engine step counts read just before the first and just after the last
// simulated action of the op, so response(a) <= invoke(b) means a finished
// strictly before b started.
struct OpRecord {
  u32 tid;
  char op;  // 'i' insert, 'e' erase, 'c' contains
  i64 key;
  bool result;
  u64 invoke = 0, response = 0;
};

struct History {
  std::vector<OpRecord> ops;
};

// True iff some sequential order of the ops respects real-time precedence and
// plain set semantics, starting from `initial`. Exponential search with
// (remaining-ops, set-contents) memoization; capped at 64 ops / 64 distinct
// keys, which is plenty for the exhaustively enumerated instances.
bool linearizable_set(const History& h, const std::vector<i64>& initial);

}  // namespace casim
