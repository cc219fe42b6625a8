#include "casim/action.hpp"

#include <sstream>

namespace casim {

const char* to_string(ActionKind k) {
  switch (k) {
    case ActionKind::load: return "load";
    case ActionKind::store: return "store";
    case ActionKind::cas: return "cas";
    case ActionKind::cread: return "cread";
    case ActionKind::cwrite: return "cwrite";
    case ActionKind::untag_one: return "untagOne";
    case ActionKind::untag_all: return "untagAll";
    case ActionKind::alloc: return "alloc";
    case ActionKind::free_: return "free";
    case ActionKind::snapshot: return "snapshot";
  }
  return "?";
}

const char* to_string(MsgKind k) {
  switch (k) {
    case MsgKind::inval: return "inv";
    case MsgKind::downgrade: return "down";
    case MsgKind::fetch_l2: return "l2";
    case MsgKind::fetch_mem: return "mem";
    case MsgKind::writeback: return "wb";
    case MsgKind::evict: return "ev";
    case MsgKind::tag_evict: return "tagev";
    case MsgKind::back_inval: return "binv";
  }
  return "?";
}

std::string format_outcome(const ActionResult& r) {
  if (!r.ok) return "fail";
  std::ostringstream os;
  os << "ok:" << r.value;
  return os.str();
}

std::string format_msgs(const std::vector<CoherenceMsg>& msgs) {
  std::ostringstream os;
  for (size_t i = 0; i < msgs.size(); ++i) {
    if (i) os << ';';
    os << to_string(msgs[i].kind) << '@' << unsigned(msgs[i].core) << ":L" << msgs[i].line;
  }
  return os.str();
}

}  // namespace casim
