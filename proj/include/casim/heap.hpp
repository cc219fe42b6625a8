#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "casim/memsys.hpp"

namespace casim {

enum class BlockState : std::uint8_t { never, live, freed };

enum class ViolationKind : std::uint8_t {
  plain_uaf,      // plain load/store/cas touched a freed block
  fatal_ca_uaf,   // a cread/cwrite SUCCEEDED on a freed block — must never happen
  double_free,
  bad_free,       // free of a never-allocated address
  wild_access,    // access outside statics and any allocated block
  reclaimer_rule, // strict mode: freed without a prior write by the freeing core
};

struct Violation {
  ViolationKind kind;
  u64 step;
  u32 tid;
  u64 addr;
};

const char* to_string(ViolationKind k);

struct AllocStats {
  u64 allocated_total = 0;
  u64 freed_total = 0;
  u64 live_now = 0;
};

// Allocator plus shadow-state use-after-free oracle. Every block is one
// cacheline (nodes are line-aligned and padded); freed blocks are reused LIFO
// so reallocation hands back the most recently freed address.
class SimHeap {
 public:
  SimHeap(Machine& m, u64 base);

  u64 alloc(u32 core, u64 words, u64 step);  // zeroes the line; words <= words-per-line
  void free_block(u32 core, u64 addr, u64 step);

  BlockState classify(u64 addr) const;  // state of the block containing addr
  bool in_range(u64 addr) const { return addr >= base_ && addr < next_; }

  // Oracle hook for every successful memory access of a program.
  void note_access(u32 tid, u64 addr, u64 step, bool conditional);
  void note_write(u32 core, u64 addr);  // tracks writers for strict mode

  void report(ViolationKind k, u64 step, u32 tid, u64 addr);

  bool strict_reclaimer_check = false;
  bool has_fatal = false;
  AllocStats stats;
  std::vector<Violation> violations;
  u64 base() const { return base_; }

 private:
  struct Block {
    BlockState st = BlockState::never;
    u64 writer_mask = 0;  // cores that wrote since the block went live
    u64 alloc_step = 0, free_step = 0;
  };

  Machine& mem_;
  u64 base_, next_;
  std::unordered_map<u64, Block> blocks_;  // block base addr -> state
  std::vector<u64> free_list_;             // LIFO
};

}  // namespace casim
