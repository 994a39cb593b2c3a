#pragma once

#include <random>
#include <vector>

#include "grouprl/group.hpp"
#include "grouprl/spectral.hpp"
#include "grouprl/taskgen.hpp"

namespace grouprl {

/// Constants of the fixed pretrained MLP: B = C_B·ln d (natural log, so that
/// d^{attn·C_B} matches the softmax algebra) and the σ0 tie-breaker.
struct MlpConfig {
  int cb = 3;
  double b = 0.0;       // C_B ln d
  double sigma0 = 0.0;  // d^{-1/2}

  static MlpConfig make(int cb, int d);
};

/// Attention parameters: either a full dpos×dpos score matrix indexed
/// [answer position][prompt position], or the reduced scalar pair (q, r)
/// with Q[s(x), x'] = q when x' = x and r otherwise.
struct AttentionParams {
  enum class Kind { kFull, kReduced };
  Kind kind = Kind::kFull;
  int dpos = 0;
  std::vector<double> qmat;  // Full
  double q = 0.0, r = 0.0;   // Reduced

  static AttentionParams full_zero(int dpos);
  static AttentionParams reduced(double q, double r);

  double score(int answer_pos, int prompt_pos, const PositionSpace& space) const {
    if (kind == Kind::kReduced)
      return space.align(prompt_pos) == answer_pos ? q : r;
    return qmat[static_cast<std::size_t>(answer_pos) * dpos + prompt_pos];
  }
  double& full_at(int answer_pos, int prompt_pos) {
    return qmat[static_cast<std::size_t>(answer_pos) * dpos + prompt_pos];
  }
  /// Materialize reduced scalars into a full matrix.
  AttentionParams to_full(const PositionSpace& space) const;
  /// Mean matched / mean off-matched score (the (q, r) summary of a matrix).
  std::pair<double, double> two_level_summary(const PositionSpace& space) const;
};

std::vector<double> attention_weights(const AttentionParams& params, const PositionSpace& space,
                                      const Instance& inst, int step);

/// Everything the samplers and gradient code need about one step, O(L).
struct StepEval {
  std::vector<double> attn;       // attention weight per prompt position
  std::vector<int> ctx_class;     // class index of g_m(current state) per position
  std::vector<double> ctx_prob;   // probability of that class
  double vocab_prob = 0.0;        // shared probability of every other class
  double log_z = 0.0;             // log partition of the logits minus σ0
};

StepEval eval_step(const AttentionParams& params, const MlpConfig& mlp,
                   const PositionSpace& space, const Tokenizer& tok, const GroupTable& table,
                   const Instance& inst, Elem current_state, int step);

/// Structured fast path: the full logit vector over classes.
std::vector<double> step_logits(const AttentionParams& params, const MlpConfig& mlp,
                                const PositionSpace& space, const Tokenizer& tok,
                                const GroupTable& table, const Instance& inst,
                                Elem current_state, int step);

/// Reference path with explicit embeddings and a dense ReLU network.
class LiteralMlp {
 public:
  static constexpr int kMaxOrder = 16;  // d^2 neurons of width 2d

  LiteralMlp(const GroupTable& table, const Tokenizer& tok, const MlpConfig& mlp);

  std::vector<double> logits(const AttentionParams& params, const PositionSpace& space,
                             const Instance& inst, Elem current_state, int step) const;

 private:
  int d_;
  MlpConfig mlp_;
  const GroupTable& table_;
  const Tokenizer& tok_;
  std::vector<double> w_;  // [class][neuron][2d]
};

/// The step-invariant three-level law induced by a two-level attention pattern.
StepLaw step_probabilities(double attn_target, int L, int d, int cb);

struct StepDistribution {
  std::vector<double> probs;  // over classes
  std::vector<double> attn;
  StepLaw law;
};

StepDistribution step_distribution(const AttentionParams& params, const MlpConfig& mlp,
                                   const PositionSpace& space, const Tokenizer& tok,
                                   const GroupTable& table, const Instance& inst,
                                   Elem current_state, int step);

struct Rollout {
  std::vector<Elem> trajectory;     // ŷ_1..ŷ_L
  std::vector<double> log_probs;    // per step
  std::vector<char> attention_hit;  // per step: argmax attention at the aligned position
  int reward = 0;                   // 1{ŷ_L = y_L}
};

Rollout rollout(const AttentionParams& params, const MlpConfig& mlp, const PositionSpace& space,
                const Tokenizer& tok, const GroupTable& table, const Instance& inst,
                std::mt19937_64& rng, bool greedy);

}  // namespace grouprl
