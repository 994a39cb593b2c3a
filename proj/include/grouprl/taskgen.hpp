#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "grouprl/group.hpp"

namespace grouprl {

/// Position identifiers are canonical basis indices in [dpos]; the hidden
/// alignment permutation 𝔰 links each prompt position to the answer position
/// one step earlier.  Frozen at construction.
class PositionSpace {
 public:
  PositionSpace(int dpos, std::uint64_t seed);

  int dpos() const { return dpos_; }
  int l_max() const { return dpos_ - 1; }
  int align(int prompt_pos) const { return s_[prompt_pos]; }           // 𝔰
  int align_inv(int answer_pos) const { return s_inv_[answer_pos]; }   // 𝔰⁻¹

 private:
  int dpos_;
  std::vector<int> s_, s_inv_;
};

/// Bijective relabeling between state indices and output class indices.
class Tokenizer {
 public:
  explicit Tokenizer(int d);                      // identity mapping
  Tokenizer(int d, std::uint64_t shuffle_seed);   // random bijection

  int d() const { return static_cast<int>(to_class_.size()); }
  int to_class(Elem state) const { return to_class_[state]; }
  Elem to_state(int cls) const { return to_state_[cls]; }

 private:
  std::vector<int> to_class_;
  std::vector<Elem> to_state_;
};

/// One reasoning problem: L distinct transitions with distinct prompt
/// positions, aligned answer positions, and the ground-truth state chain.
struct Instance {
  int horizon = 0;
  std::vector<Elem> transitions;   // g_1..g_L, pairwise distinct
  std::vector<int> prompt_pos;     // x_{p,1..L}, pairwise distinct
  std::vector<int> answer_pos;     // x_{a,0..L}
  Elem y0 = 0;
  std::vector<Elem> states;        // y_1..y_L
};

Instance sample_instance(const GroupTable& table, const PositionSpace& space, int horizon,
                         std::mt19937_64& rng);

/// Empty when the instance satisfies every structural invariant.
std::vector<std::string> validate_instance(const Instance& inst, const GroupTable& table,
                                           const PositionSpace& space);

}  // namespace grouprl
