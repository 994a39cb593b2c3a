#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "grouprl/policy.hpp"

namespace grouprl {

/// Horizon set 𝓛_R: L_k = min(ceil(R·L_{k-1}), L_max) until the cap is hit.
std::vector<int> horizon_set(double ratio, int l1, int l_max);

struct TrainConfig {
  double eta = 32.0;               // calibrated default for full-matrix runs on Z96
  int batch_size = 512;
  long long total_iters = 2000;
  std::vector<int> lengths;        // single entry = fixed-length training
  double baseline_momentum = 0.95;
  double entropy_coef = 1e-3;
  long long eval_cadence = 100;
  int eval_batches = 30;
  int eval_batch_size = 512;
  std::uint64_t seed = 1;
  bool reduced_params = false;
  bool sft = false;

  void validate() const;
};

struct EvalRecord {
  long long iteration = 0;
  std::vector<int> lengths;
  std::vector<double> success;         // per length, sampled rollouts (the expected
                                       // terminal reward of the stochastic policy)
  std::vector<double> greedy_success;  // per length, argmax decoding
  std::vector<double> hit_rate;        // per length, peak attention-hit rate
  double q_mean = 0.0;            // mean matched score
  double r_mean = 0.0;            // mean off-matched score
  double baseline = 0.0;
  double wall_seconds = 0.0;      // process-local; excluded from serialized metrics

  std::string to_json() const;    // deterministic key order, no timestamps
};

struct TrainState {
  AttentionParams params;
  long long iteration = 0;
  double baseline = 0.0;
  bool baseline_warm = false;
  std::uint64_t run_seed = 0;
  double cum_reward = 0.0;
  long long cum_samples = 0;
};

/// Gradient with the same shape as the attention parameters.
struct AttnGrad {
  std::vector<double> full;  // dpos×dpos when full
  double dq = 0.0, dr = 0.0; // reduced
};

/// ∇ log π of a sampled trajectory with respect to the attention parameters
/// (full matrix or the 𝔰-aligned/off-aligned sums for reduced parameters).
AttnGrad score_function_grad(const Rollout& traj, const Instance& inst,
                             const AttentionParams& params, const MlpConfig& mlp,
                             const PositionSpace& space, const Tokenizer& tok,
                             const GroupTable& table);

/// Gradient of the mean per-step policy entropy of a trajectory.
AttnGrad entropy_grad(const Rollout& traj, const Instance& inst, const AttentionParams& params,
                      const MlpConfig& mlp, const PositionSpace& space, const Tokenizer& tok,
                      const GroupTable& table);

class Trainer {
 public:
  Trainer(TrainConfig config, const GroupTable& table, const PositionSpace& space,
          const MlpConfig& mlp, const Tokenizer& tok);

  /// One REINFORCE (or SFT) iteration over a fresh batch.
  void step();
  /// Greedy evaluation at the current parameters.
  EvalRecord evaluate() const;
  /// Runs until total_iters, invoking the sink at the eval cadence (including
  /// iteration 0 and the final iteration).  Deterministic given the seed.
  void run(const std::function<void(const EvalRecord&)>& sink);
  /// Advances at most `iters` iterations with the same emission pattern;
  /// the final record is emitted exactly once when total_iters is reached.
  void run_chunk(long long iters, const std::function<void(const EvalRecord&)>& sink);

  const TrainState& state() const { return state_; }
  TrainState& mutable_state() { return state_; }
  const TrainConfig& config() const { return config_; }

  void save_checkpoint(const std::string& path) const;
  void load_checkpoint(const std::string& path);

  /// The deterministic per-sample stream used at (iteration, sample index);
  /// exposed so a sample's instance and rollout can be reproduced exactly.
  std::mt19937_64 sample_stream(long long iteration, int sample_index) const;

 private:
  void apply_update(const std::vector<AttnGrad>& grads, const std::vector<int>& sample_lengths,
                    const std::vector<int>& rewards);

  TrainConfig config_;
  bool final_record_emitted_ = false;
  const GroupTable& table_;
  const PositionSpace& space_;
  MlpConfig mlp_;
  const Tokenizer& tok_;
  TrainState state_;
};

/// Worker cap honoring the GROUP_RLVR_THREADS environment variable.
int worker_count();

}  // namespace grouprl
