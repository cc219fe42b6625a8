#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace casim {

using u64 = std::uint64_t;
using u32 = std::uint32_t;

// One shared-memory step of a simulated thread. The engine executes exactly
// one Action atomically per scheduling decision; everything a program does
// between Actions is thread-private.
enum class ActionKind : std::uint8_t {
  load,       // addr            -> value
  store,      // addr, a=value
  cas,        // addr, a=expect, b=desired -> ok
  cread,      // addr            -> ok, value   (tags the line on success)
  cwrite,     // addr, a=value   -> ok
  untag_one,  // addr
  untag_all,  //
  alloc,      // a=words         -> value=address
  free_,      // addr
  snapshot,   // a=completed-op count; records a metrics sample
};

struct Action {
  ActionKind kind{ActionKind::load};
  u64 addr = 0;
  u64 a = 0;
  u64 b = 0;
};

struct ActionResult {
  bool ok = true;   // cas/cread/cwrite outcome; true for the rest
  u64 value = 0;    // load/cread value, alloc address
};

// Coherence traffic attributable to a single Action. `inval` is the one the
// conditional-access layer cares about: delivery of an invalidation to a
// remote core's copy.
enum class MsgKind : std::uint8_t {
  inval,        // invalidate `core`'s copy of `line` (remote write or cas)
  downgrade,    // owner `core` demoted M->S by a remote read
  fetch_l2,     // requester filled `line` from L2
  fetch_mem,    // requester filled `line` from memory (and into L2)
  writeback,    // `core` wrote back a Modified `line`
  evict,        // `core` dropped `line` by replacement
  tag_evict,    // replacement victimized a tagged line of `core`
  back_inval,   // L2 eviction invalidated `core`'s L1 copy of `line`
};

struct CoherenceMsg {
  MsgKind kind;
  std::uint8_t core;
  u64 line;
};

const char* to_string(ActionKind k);
const char* to_string(MsgKind k);

// Serialization used by the event log: "step,tid,kind,addr,outcome,msgs".
std::string format_outcome(const ActionResult& r);
std::string format_msgs(const std::vector<CoherenceMsg>& msgs);

}  // namespace casim
