#include "casim/ca.hpp"

#include <algorithm>
#include <stdexcept>

namespace casim {

bool CoreCaState::tagged(u64 line) const {
  return std::binary_search(tag_set.begin(), tag_set.end(), line);
}

void CaLayer::attach(Machine* m, u32 core_count) {
  mem_ = m;
  cores_.assign(core_count, CoreCaState{});
}

CaOutcome CaLayer::cread(u32 core, u64 addr) {
  CoreCaState& st = cores_[core];
  if (st.access_revoked) {
    CaOutcome out{false, 0, st.revoke_cause};
    if (st.revoke_cause == CaFail::eviction)
      st.counters.cread_fail_eviction++;
    else
      st.counters.cread_fail_conflict++;
    st.last = out;
    return out;
  }
  u64 line = mem_->cfg.line_of(addr);
  if (st.tagged(line)) {
    // Bit clear + tagged means the line is still resident and valid: any
    // invalidation or eviction of it would have set the bit.
    if (!mem_->is_resident_valid(core, line))
      throw std::logic_error("tagged line lost without revocation");
    CaOutcome out{true, mem_->load(core, addr), CaFail::none};
    st.counters.cread_ok++;
    st.last = out;
    return out;
  }
  if (!mem_->fetch_shared(core, addr)) {
    // Flagged before any traffic: the failure leaves no trace in the caches.
    CaOutcome out{false, 0, CaFail::capacity};
    st.counters.cread_fail_capacity++;
    st.last = out;
    return out;
  }
  mem_->set_tag(core, line, true);
  st.tag_set.insert(std::upper_bound(st.tag_set.begin(), st.tag_set.end(), line), line);
  st.counters.tags++;
  if (st.access_revoked) {
    // Installing this line evicted another tagged line of ours; the access
    // must fail without reading.
    CaOutcome out{false, 0, st.revoke_cause};
    st.counters.cread_fail_eviction++;
    st.last = out;
    return out;
  }
  CaOutcome out{true, mem_->peek(addr), CaFail::none};  // fill already accounted the miss
  st.counters.cread_ok++;
  st.last = out;
  return out;
}

CaOutcome CaLayer::cwrite(u32 core, u64 addr, u64 v) {
  CoreCaState& st = cores_[core];
  if (st.access_revoked) {
    CaOutcome out{false, 0, st.revoke_cause};
    st.counters.cwrite_fail_revoked++;
    st.last = out;
    return out;
  }
  u64 line = mem_->cfg.line_of(addr);
  if (!st.tagged(line)) {
    CaOutcome out{false, 0, CaFail::untagged};
    st.counters.cwrite_fail_untagged++;
    st.last = out;
    return out;
  }
  if (!mem_->is_resident_valid(core, line))
    throw std::logic_error("tagged line lost without revocation");
  mem_->store(core, addr, v);
  CaOutcome out{true, v, CaFail::none};
  st.counters.cwrite_ok++;
  st.last = out;
  return out;
}

void CaLayer::untag_one(u32 core, u64 addr) {
  CoreCaState& st = cores_[core];
  u64 line = mem_->cfg.line_of(addr);
  auto it = std::lower_bound(st.tag_set.begin(), st.tag_set.end(), line);
  if (it == st.tag_set.end() || *it != line) return;  // no-op on untagged line
  st.tag_set.erase(it);
  mem_->set_tag(core, line, false);
  st.counters.untags++;
}

void CaLayer::untag_all(u32 core) {
  CoreCaState& st = cores_[core];
  for (u64 line : st.tag_set) mem_->set_tag(core, line, false);
  st.counters.untags += st.tag_set.size();
  st.tag_set.clear();
  st.access_revoked = false;
  st.revoke_cause = CaFail::none;
  st.last = CaOutcome{};
}

void CaLayer::on_invalidated(u32 core, u64 line) {
  CoreCaState& st = cores_[core];
  if (!st.tagged(line)) return;
  if (!st.access_revoked) {
    st.access_revoked = true;
    st.revoke_cause = CaFail::conflict;
  }
}

void CaLayer::on_tagged_evicted(u32 core, u64 line) {
  CoreCaState& st = cores_[core];
  // The physical tag bit leaves the cache with the slot; mirror that here.
  auto it = std::lower_bound(st.tag_set.begin(), st.tag_set.end(), line);
  if (it != st.tag_set.end() && *it == line) st.tag_set.erase(it);
  if (!st.access_revoked) {
    st.access_revoked = true;
    st.revoke_cause = CaFail::eviction;
  }
}

}  // namespace casim
