#include <algorithm>
#include <bit>
#include <stdexcept>
#include <unordered_set>
#include <utility>

#include "casim/lincheck.hpp"

namespace casim {

namespace {

struct PairHash {
  size_t operator()(const std::pair<u64, u64>& p) const {
    return std::hash<u64>()(p.first * 0x9e3779b97f4a7c15ull ^ p.second);
  }
};

struct Search {
  const std::vector<OpRecord>& ops;
  std::vector<u32> keybit;
  std::unordered_set<std::pair<u64, u64>, PairHash> dead;  // states proven stuck

  bool dfs(u64 remaining, u64 state) {
    if (remaining == 0) return true;
    if (dead.count({remaining, state})) return false;
    for (u64 m = remaining; m != 0; m &= m - 1) {
      u32 i = static_cast<u32>(std::countr_zero(m));
      bool minimal = true;
      for (u64 n = remaining; n != 0; n &= n - 1) {
        u32 j = static_cast<u32>(std::countr_zero(n));
        if (j != i && ops[j].response <= ops[i].invoke) {
          minimal = false;  // j must come first
          break;
        }
      }
      if (!minimal) continue;
      u64 bit = u64{1} << keybit[i];
      bool has = (state & bit) != 0;
      bool res;
      u64 next = state;
      switch (ops[i].op) {
        case 'i': res = !has; next |= bit; break;
        case 'e': res = has; next &= ~bit; break;
        case 'c': res = has; break;
        default: throw std::invalid_argument("unknown op in history");
      }
      if (res != ops[i].result) continue;
      if (dfs(remaining & ~(u64{1} << i), next)) return true;
    }
    dead.insert({remaining, state});
    return false;
  }
};

}  // namespace

bool linearizable_set(const History& h, const std::vector<i64>& initial) {
  if (h.ops.size() > 64) throw std::invalid_argument("history too long for bitmask search");
  std::vector<i64> keys;
  auto bit_of = [&](i64 k) {
    auto it = std::find(keys.begin(), keys.end(), k);
    if (it == keys.end()) {
      keys.push_back(k);
      it = keys.end() - 1;
    }
    return static_cast<u32>(it - keys.begin());
  };
  u64 state = 0;
  for (i64 k : initial) state |= u64{1} << bit_of(k);
  Search s{h.ops, {}, {}};
  for (const auto& o : h.ops) s.keybit.push_back(bit_of(o.key));
  if (keys.size() > 64) throw std::invalid_argument("too many distinct keys");
  u64 all = h.ops.size() == 64 ? ~u64{0} : (u64{1} << h.ops.size()) - 1;
  return s.dfs(all, state);
}

}  // namespace casim
