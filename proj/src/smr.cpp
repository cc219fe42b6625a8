#include "casim/smr.hpp"

#include <algorithm>

namespace casim {

// Epochs start at 2 so nothing is reclaimable until real grace has passed
// (free rule: retired epoch <= min announced - 2).
static constexpr u64 kFirstEpoch = 2;

Smr::Smr(World& w, const SmrConfig& c, u32 thread_count) : cfg(c), w_(w) {
  threads_.resize(thread_count);
  if (cfg.kind == SmrKind::qsbr) {
    epoch_addr_ = w_.static_line();
    w_.machine.poke(epoch_addr_, kFirstEpoch);
    for (u32 t = 0; t < thread_count; ++t) {
      announce_addr_.push_back(w_.static_line());
      w_.machine.poke(announce_addr_.back(), kFirstEpoch);
    }
  } else if (cfg.kind == SmrKind::hp) {
    for (u32 t = 0; t < thread_count; ++t) slot_addr_.push_back(w_.static_line());
  }
}

u64 Smr::retired_backlog() const {
  u64 n = 0;
  for (const auto& t : threads_) n += t.retired.size();
  return n;
}

Task<void> Smr::retire(SimContext& ctx, u64 addr) {
  switch (cfg.kind) {
    case SmrKind::none:
      leak_list_.push_back(addr);
      co_return;
    case SmrKind::ca:
    case SmrKind::unsafe_immediate:
      co_await ctx.free_block(addr);
      co_return;
    case SmrKind::qsbr: {
      PerThread& t = threads_[ctx.tid()];
      u64 e = co_await ctx.load(epoch_addr_);
      t.retired.push_back({addr, e});
      if (++t.retire_count % cfg.reclamation_frequency == 0) co_await qsbr_reclaim(ctx);
      co_return;
    }
    case SmrKind::hp: {
      PerThread& t = threads_[ctx.tid()];
      t.retired.push_back({addr, 0});
      if (++t.retire_count % cfg.reclamation_frequency == 0) co_await hp_scan(ctx);
      co_return;
    }
  }
}

Task<void> Smr::on_alloc(SimContext& ctx) {
  if (cfg.kind != SmrKind::qsbr) co_return;
  if (++alloc_count_ % cfg.epoch_frequency != 0) co_return;
  u64 e = co_await ctx.load(epoch_addr_);
  co_await ctx.cas(epoch_addr_, e, e + 1);  // lost race means someone advanced
}

Task<void> Smr::quiescent(SimContext& ctx) {
  if (cfg.kind != SmrKind::qsbr) co_return;
  u64 e = co_await ctx.load(epoch_addr_);
  co_await ctx.store(announce_addr_[ctx.tid()], e);
}

Task<void> Smr::qsbr_reclaim(SimContext& ctx) {
  u64 min_e = ~u64{0};
  for (u64 a : announce_addr_) {
    u64 e = co_await ctx.load(a);
    min_e = std::min(min_e, e);
  }
  PerThread& t = threads_[ctx.tid()];
  std::vector<Retired> keep;
  for (const Retired& r : t.retired) {
    if (min_e >= 2 && r.epoch <= min_e - 2)
      co_await ctx.free_block(r.addr);
    else
      keep.push_back(r);
  }
  t.retired = std::move(keep);
}

Task<void> Smr::publish(SimContext& ctx, u32 slot, u64 addr) {
  co_await ctx.store(slot_addr(ctx.tid(), slot), addr);
}

Task<void> Smr::clear_slots(SimContext& ctx) {
  if (cfg.kind != SmrKind::hp) co_return;
  for (u32 s = 0; s < cfg.hp_slots; ++s) co_await ctx.store(slot_addr(ctx.tid(), s), 0);
}

Task<void> Smr::hp_scan(SimContext& ctx) {
  std::vector<u64> hazards;
  for (u32 t = 0; t < threads_.size(); ++t)
    for (u32 s = 0; s < cfg.hp_slots; ++s) {
      u64 h = co_await ctx.load(slot_addr(t, s));
      if (h) hazards.push_back(h);
    }
  std::sort(hazards.begin(), hazards.end());
  PerThread& t = threads_[ctx.tid()];
  std::vector<Retired> keep;
  for (const Retired& r : t.retired) {
    if (std::binary_search(hazards.begin(), hazards.end(), r.addr))
      keep.push_back(r);
    else
      co_await ctx.free_block(r.addr);
  }
  t.retired = std::move(keep);
}

}  // namespace casim
