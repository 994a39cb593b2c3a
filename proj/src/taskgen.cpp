#include "grouprl/taskgen.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

namespace grouprl {

namespace {

// Floyd-style distinct sampling when k << n; plain shuffle otherwise.
template <typename Int>
std::vector<Int> sample_without_replacement(int n, int k, std::mt19937_64& rng) {
  std::vector<Int> out;
  out.reserve(k);
  if (k * 3 >= n) {
    std::vector<Int> pool(n);
    std::iota(pool.begin(), pool.end(), Int(0));
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<int> pick(i, n - 1);
      std::swap(pool[i], pool[pick(rng)]);
      out.push_back(pool[i]);
    }
    return out;
  }
  std::unordered_set<int> used;
  while (static_cast<int>(out.size()) < k) {
    std::uniform_int_distribution<int> pick(0, n - 1);
    int v = pick(rng);
    if (used.insert(v).second) out.push_back(static_cast<Int>(v));
  }
  return out;
}

}  // namespace

PositionSpace::PositionSpace(int dpos, std::uint64_t seed) : dpos_(dpos) {
  if (dpos < 3) throw Error(ErrorCode::kInvalidArgument, "position space needs dpos >= 3");
  s_.resize(dpos);
  std::iota(s_.begin(), s_.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(s_.begin(), s_.end(), rng);
  s_inv_.resize(dpos);
  for (int i = 0; i < dpos; ++i) s_inv_[s_[i]] = i;
}

Tokenizer::Tokenizer(int d) {
  to_class_.resize(d);
  to_state_.resize(d);
  std::iota(to_class_.begin(), to_class_.end(), 0);
  for (int i = 0; i < d; ++i) to_state_[i] = static_cast<Elem>(i);
}

Tokenizer::Tokenizer(int d, std::uint64_t shuffle_seed) : Tokenizer(d) {
  std::mt19937_64 rng(shuffle_seed);
  std::shuffle(to_class_.begin(), to_class_.end(), rng);
  for (int i = 0; i < d; ++i) to_state_[to_class_[i]] = static_cast<Elem>(i);
}

Instance sample_instance(const GroupTable& table, const PositionSpace& space, int horizon,
                         std::mt19937_64& rng) {
  const int d = table.order();
  const int cap = std::min(space.l_max(), d);
  if (horizon < 2 || horizon > cap)
    throw Error(ErrorCode::kInvalidArgument, "horizon must lie in [2, min(dpos-1, d)]");
  Instance inst;
  inst.horizon = horizon;
  inst.transitions = sample_without_replacement<Elem>(d, horizon, rng);
  std::uniform_int_distribution<int> pick_state(0, d - 1);
  inst.y0 = static_cast<Elem>(pick_state(rng));
  inst.prompt_pos = sample_without_replacement<int>(space.dpos(), horizon, rng);
  inst.answer_pos.resize(horizon + 1);
  for (int l = 0; l < horizon; ++l) inst.answer_pos[l] = space.align(inst.prompt_pos[l]);
  {
    // final answer position: uniform over identifiers not used by x_{a,0..L-1}
    std::vector<char> used(space.dpos(), 0);
    for (int l = 0; l < horizon; ++l) used[inst.answer_pos[l]] = 1;
    std::uniform_int_distribution<int> pick(0, space.dpos() - horizon - 1);
    int skip = pick(rng);
    for (int x = 0; x < space.dpos(); ++x) {
      if (used[x]) continue;
      if (skip-- == 0) {
        inst.answer_pos[horizon] = x;
        break;
      }
    }
  }
  inst.states = table.compose_path(inst.transitions, inst.y0);
  return inst;
}

std::vector<std::string> validate_instance(const Instance& inst, const GroupTable& table,
                                           const PositionSpace& space) {
  std::vector<std::string> violations;
  const int L = inst.horizon;
  const int cap = std::min(space.l_max(), table.order());
  if (L < 2 || L > cap) violations.push_back("horizon out of range");
  if (static_cast<int>(inst.transitions.size()) != L ||
      static_cast<int>(inst.prompt_pos.size()) != L ||
      static_cast<int>(inst.answer_pos.size()) != L + 1 ||
      static_cast<int>(inst.states.size()) != L) {
    violations.push_back("field sizes inconsistent with horizon");
    return violations;
  }
  {
    std::unordered_set<int> seen;
    for (Elem g : inst.transitions)
      if (!seen.insert(g).second) violations.push_back("duplicate transition");
  }
  {
    std::unordered_set<int> seen;
    for (int x : inst.prompt_pos)
      if (!seen.insert(x).second) violations.push_back("duplicate prompt position");
  }
  for (int x : inst.prompt_pos)
    if (x < 0 || x >= space.dpos()) violations.push_back("prompt position out of range");
  for (int x : inst.answer_pos)
    if (x < 0 || x >= space.dpos()) violations.push_back("answer position out of range");
  for (int l = 0; l < L; ++l)
    if (inst.answer_pos[l] != space.align(inst.prompt_pos[l]))
      violations.push_back("answer position not aligned with prompt position");
  for (int l = 0; l < L; ++l)
    if (inst.answer_pos[L] == inst.answer_pos[l])
      violations.push_back("final answer position collides with earlier one");
  if (inst.y0 >= table.order()) violations.push_back("initial state out of range");
  Elem y = inst.y0;
  for (int l = 0; l < L; ++l) {
    y = table.act(inst.transitions[l], y);
    if (inst.states[l] != y) {
      violations.push_back("state chain violates the group action");
      break;
    }
  }
  return violations;
}

}  // namespace grouprl
