#include "grouprl/train.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "grouprl/rng.hpp"
#include "parallel.hpp"

namespace grouprl {

namespace {

constexpr std::uint64_t kSaltTrain = 0x7261696e;  // batch streams
constexpr std::uint64_t kSaltEval = 0x6576616c;   // evaluation streams
constexpr double kParamCap = 50.0;

// Per-position coefficients of ∇ log π at one step: attn_m (Ξ_m - Σ_k attn_k Ξ_k)
// with Ξ_m = B (1{chosen = class of g_m} - π(class of g_m)).
void logp_step_coefs(const StepEval& ev, int chosen_class, double feature_b,
                     std::vector<double>& out) {
  const int L = static_cast<int>(ev.attn.size());
  out.resize(L);
  double bar = 0.0;
  for (int m = 0; m < L; ++m) {
    const double xi =
        feature_b * ((ev.ctx_class[m] == chosen_class ? 1.0 : 0.0) - ev.ctx_prob[m]);
    out[m] = xi;
    bar += ev.attn[m] * xi;
  }
  for (int m = 0; m < L; ++m) out[m] = ev.attn[m] * (out[m] - bar);
}

// Per-position coefficients of the step-entropy gradient:
// B attn_m (G_m - Σ_k attn_k G_k), G_m = -p_m (ln p_m + H).
void entropy_step_coefs(const StepEval& ev, int d, double feature_b, std::vector<double>& out) {
  const int L = static_cast<int>(ev.attn.size());
  out.resize(L);
  double h = 0.0;
  for (int m = 0; m < L; ++m)
    if (ev.ctx_prob[m] > 0.0) h -= ev.ctx_prob[m] * std::log(ev.ctx_prob[m]);
  if (ev.vocab_prob > 0.0 && d > L)
    h -= double(d - L) * ev.vocab_prob * std::log(ev.vocab_prob);
  double bar = 0.0;
  for (int m = 0; m < L; ++m) {
    const double g = -ev.ctx_prob[m] * (std::log(ev.ctx_prob[m]) + h);
    out[m] = g;
    bar += ev.attn[m] * g;
  }
  for (int m = 0; m < L; ++m) out[m] = feature_b * ev.attn[m] * (out[m] - bar);
}

}  // namespace

std::vector<int> horizon_set(double ratio, int l1, int l_max) {
  if (!(ratio > 1.0)) throw Error(ErrorCode::kInvalidArgument, "difficulty ratio must exceed 1");
  if (l1 < 2 || l1 > l_max)
    throw Error(ErrorCode::kInvalidArgument, "starting horizon must lie in [2, l_max]");
  std::vector<int> out{l1};
  while (out.back() < l_max) {
    const int next = std::min(static_cast<int>(std::ceil(ratio * out.back())), l_max);
    out.push_back(next);
  }
  return out;
}

void TrainConfig::validate() const {
  if (!(eta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "learning rate must be positive");
  if (baseline_momentum < 0.0 || baseline_momentum >= 1.0)
    throw Error(ErrorCode::kInvalidArgument, "baseline momentum must lie in [0, 1)");
  if (entropy_coef < 0.0)
    throw Error(ErrorCode::kInvalidArgument, "entropy coefficient must be nonnegative");
  if (batch_size < 1 || total_iters < 0 || eval_cadence < 1)
    throw Error(ErrorCode::kInvalidArgument, "bad batch/iteration configuration");
  if (lengths.empty()) throw Error(ErrorCode::kInvalidArgument, "no training lengths configured");
}

std::string EvalRecord::to_json() const {
  nlohmann::ordered_json j;
  j["iteration"] = iteration;
  j["lengths"] = lengths;
  j["success"] = success;
  j["greedy_success"] = greedy_success;
  j["hit_rate"] = hit_rate;
  j["q_mean"] = q_mean;
  j["r_mean"] = r_mean;
  j["baseline"] = baseline;
  return j.dump();
}

namespace {

struct StepCoefAccumulator {
  // Accumulates per-(step, position) coefficients into the gradient shape.
  static void add(AttnGrad& grad, const AttentionParams& params, const Instance& inst, int step,
                  const std::vector<double>& coef, double weight) {
    const int L = inst.horizon;
    if (params.kind == AttentionParams::Kind::kReduced) {
      for (int m = 0; m < L; ++m) {
        if (m == step)
          grad.dq += weight * coef[m];
        else
          grad.dr += weight * coef[m];
      }
    } else {
      const int row = inst.answer_pos[step];
      for (int m = 0; m < L; ++m)
        grad.full[static_cast<std::size_t>(row) * params.dpos + inst.prompt_pos[m]] +=
            weight * coef[m];
    }
  }
};

AttnGrad make_grad_like(const AttentionParams& params) {
  AttnGrad g;
  if (params.kind == AttentionParams::Kind::kFull)
    g.full.assign(static_cast<std::size_t>(params.dpos) * params.dpos, 0.0);
  return g;
}

}  // namespace

AttnGrad score_function_grad(const Rollout& traj, const Instance& inst,
                             const AttentionParams& params, const MlpConfig& mlp,
                             const PositionSpace& space, const Tokenizer& tok,
                             const GroupTable& table) {
  const int L = inst.horizon;
  if (static_cast<int>(traj.trajectory.size()) != L)
    throw Error(ErrorCode::kInconsistent, "trajectory length does not match instance horizon");
  AttnGrad grad = make_grad_like(params);
  std::vector<double> coef;
  Elem y = inst.y0;
  for (int step = 0; step < L; ++step) {
    const StepEval ev = eval_step(params, mlp, space, tok, table, inst, y, step);
    y = traj.trajectory[step];
    logp_step_coefs(ev, tok.to_class(y), mlp.b, coef);
    StepCoefAccumulator::add(grad, params, inst, step, coef, 1.0);
  }
  return grad;
}

AttnGrad entropy_grad(const Rollout& traj, const Instance& inst, const AttentionParams& params,
                      const MlpConfig& mlp, const PositionSpace& space, const Tokenizer& tok,
                      const GroupTable& table) {
  const int L = inst.horizon;
  if (static_cast<int>(traj.trajectory.size()) != L)
    throw Error(ErrorCode::kInconsistent, "trajectory length does not match instance horizon");
  AttnGrad grad = make_grad_like(params);
  std::vector<double> coef;
  Elem y = inst.y0;
  for (int step = 0; step < L; ++step) {
    const StepEval ev = eval_step(params, mlp, space, tok, table, inst, y, step);
    entropy_step_coefs(ev, table.order(), mlp.b, coef);
    StepCoefAccumulator::add(grad, params, inst, step, coef, 1.0 / double(L));
    y = traj.trajectory[step];
  }
  return grad;
}

Trainer::Trainer(TrainConfig config, const GroupTable& table, const PositionSpace& space,
                 const MlpConfig& mlp, const Tokenizer& tok)
    : config_(std::move(config)), table_(table), space_(space), mlp_(mlp), tok_(tok) {
  config_.validate();
  const int cap = std::min(space_.l_max(), table_.order());
  for (int l : config_.lengths)
    if (l < 2 || l > cap)
      throw Error(ErrorCode::kInvalidArgument, "training length outside [2, min(dpos-1, d)]");
  state_.params = config_.reduced_params ? AttentionParams::reduced(0.0, 0.0)
                                         : AttentionParams::full_zero(space_.dpos());
  state_.run_seed = config_.seed;
}

void Trainer::step() {
  const int batch = config_.batch_size;
  struct SampleWork {
    Instance inst;
    Rollout roll;
    int length = 0;
    std::vector<double> logp_coef;  // [step*L + m]
    std::vector<double> ent_coef;
  };
  static thread_local std::vector<double> coef_scratch;
  std::vector<SampleWork> work(batch);
  const bool sft = config_.sft;
  detail::parallel_for(batch, [&](int i) {
    SampleWork& w = work[i];
    auto rng = make_stream(state_.run_seed, kSaltTrain, static_cast<std::uint64_t>(state_.iteration),
                           static_cast<std::uint64_t>(i));
    w.length = config_.lengths.size() == 1
                   ? config_.lengths[0]
                   : config_.lengths[rng() % config_.lengths.size()];
    w.inst = sample_instance(table_, space_, w.length, rng);
    const int L = w.length;
    if (sft) {
      w.roll.trajectory = w.inst.states;  // teacher forcing: condition on ground truth
      w.roll.reward = 1;
    } else {
      w.roll = rollout(state_.params, mlp_, space_, tok_, table_, w.inst, rng, /*greedy=*/false);
    }
    // per-step coefficients
    w.logp_coef.assign(static_cast<std::size_t>(L) * L, 0.0);
    if (!sft && config_.entropy_coef > 0.0)
      w.ent_coef.assign(static_cast<std::size_t>(L) * L, 0.0);
    Elem y = w.inst.y0;
    for (int step = 0; step < L; ++step) {
      const StepEval ev = eval_step(state_.params, mlp_, space_, tok_, table_, w.inst, y, step);
      y = w.roll.trajectory[step];
      logp_step_coefs(ev, tok_.to_class(y), mlp_.b, coef_scratch);
      for (int m = 0; m < L; ++m) w.logp_coef[static_cast<std::size_t>(step) * L + m] = coef_scratch[m];
      if (!w.ent_coef.empty()) {
        entropy_step_coefs(ev, table_.order(), mlp_.b, coef_scratch);
        for (int m = 0; m < L; ++m) w.ent_coef[static_cast<std::size_t>(step) * L + m] = coef_scratch[m];
      }
    }
  });

  // serial reduction in sample order: results do not depend on worker count
  AttnGrad acc = make_grad_like(state_.params);
  double reward_sum = 0.0;
  const double baseline = state_.baseline;
  std::vector<double> coef;
  for (int i = 0; i < batch; ++i) {
    const SampleWork& w = work[i];
    const int L = w.length;
    reward_sum += w.roll.reward;
    double weight;
    if (sft) {
      weight = 1.0 / double(L);  // mean cross-entropy over steps; ascent on log-likelihood
    } else {
      weight = (double(w.roll.reward) - baseline) / double(L);  // length-normalized advantage
    }
    coef.resize(L);
    for (int step = 0; step < L; ++step) {
      for (int m = 0; m < L; ++m) coef[m] = w.logp_coef[static_cast<std::size_t>(step) * L + m];
      StepCoefAccumulator::add(acc, state_.params, w.inst, step, coef, weight);
      if (!w.ent_coef.empty()) {
        for (int m = 0; m < L; ++m) coef[m] = w.ent_coef[static_cast<std::size_t>(step) * L + m];
        StepCoefAccumulator::add(acc, state_.params, w.inst, step, coef,
                                 config_.entropy_coef / double(L));
      }
    }
  }
  const double scale = config_.eta / double(batch);
  if (state_.params.kind == AttentionParams::Kind::kFull) {
    double mx = 0.0;
    for (std::size_t i = 0; i < acc.full.size(); ++i) {
      state_.params.qmat[i] += scale * acc.full[i];
      mx = std::max(mx, std::abs(state_.params.qmat[i]));
    }
    if (mx > kParamCap) throw Error(ErrorCode::kInstability, "attention score diverged");
  } else {
    state_.params.q += scale * acc.dq;
    state_.params.r += scale * acc.dr;
    if (std::abs(state_.params.q) > kParamCap || std::abs(state_.params.r) > kParamCap)
      throw Error(ErrorCode::kInstability, "attention score diverged");
  }
  const double mean_reward = reward_sum / double(batch);
  if (!state_.baseline_warm) {
    state_.baseline = mean_reward;
    state_.baseline_warm = true;
  } else {
    state_.baseline = config_.baseline_momentum * state_.baseline +
                      (1.0 - config_.baseline_momentum) * mean_reward;
  }
  state_.cum_reward += reward_sum;
  state_.cum_samples += batch;
  ++state_.iteration;
}

EvalRecord Trainer::evaluate() const {
  EvalRecord rec;
  rec.iteration = state_.iteration;
  rec.lengths = config_.lengths;
  rec.success.resize(config_.lengths.size());
  rec.greedy_success.resize(config_.lengths.size());
  rec.hit_rate.resize(config_.lengths.size());
  const int total = config_.eval_batches * config_.eval_batch_size;
  for (std::size_t li = 0; li < config_.lengths.size(); ++li) {
    const int L = config_.lengths[li];
    std::vector<double> succ(total), greedy(total), hits(total);
    detail::parallel_for(total, [&](int i) {
      auto rng = make_stream(state_.run_seed, kSaltEval,
                             static_cast<std::uint64_t>(state_.iteration) * 131 + li,
                             static_cast<std::uint64_t>(i));
      const Instance inst = sample_instance(table_, space_, L, rng);
      const Rollout sampled =
          rollout(state_.params, mlp_, space_, tok_, table_, inst, rng, /*greedy=*/false);
      const Rollout argmax =
          rollout(state_.params, mlp_, space_, tok_, table_, inst, rng, /*greedy=*/true);
      succ[i] = sampled.reward;
      greedy[i] = argmax.reward;
      double h = 0.0;
      for (char b : argmax.attention_hit) h += b;
      hits[i] = h / double(L);
    });
    double s = 0.0, g = 0.0, h = 0.0;
    for (int i = 0; i < total; ++i) {
      s += succ[i];
      g += greedy[i];
      h += hits[i];
    }
    rec.success[li] = s / double(total);
    rec.greedy_success[li] = g / double(total);
    rec.hit_rate[li] = h / double(total);
  }
  const auto [qm, rm] = state_.params.two_level_summary(space_);
  rec.q_mean = qm;
  rec.r_mean = rm;
  rec.baseline = state_.baseline;
  return rec;
}

void Trainer::run(const std::function<void(const EvalRecord&)>& sink) {
  run_chunk(std::numeric_limits<long long>::max(), sink);
}

void Trainer::run_chunk(long long iters, const std::function<void(const EvalRecord&)>& sink) {
  long long done = 0;
  while (state_.iteration < config_.total_iters && done < iters) {
    if (state_.iteration % config_.eval_cadence == 0 && sink) sink(evaluate());
    step();
    ++done;
  }
  if (state_.iteration >= config_.total_iters && !final_record_emitted_) {
    final_record_emitted_ = true;
    if (sink) sink(evaluate());
  }
}

void Trainer::save_checkpoint(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write checkpoint: " + path);
  out.precision(17);
  out << "grouprl-checkpoint v1\n";
  out << "iteration " << state_.iteration << "\n";
  out << "seed " << state_.run_seed << "\n";
  out << "baseline " << state_.baseline << " warm " << (state_.baseline_warm ? 1 : 0) << "\n";
  out << "cum_reward " << state_.cum_reward << " cum_samples " << state_.cum_samples << "\n";
  if (state_.params.kind == AttentionParams::Kind::kReduced) {
    out << "params reduced " << state_.params.q << " " << state_.params.r << "\n";
  } else {
    out << "params full " << state_.params.dpos << "\n";
    for (int i = 0; i < state_.params.dpos; ++i) {
      for (int j = 0; j < state_.params.dpos; ++j) {
        if (j) out << " ";
        out << state_.params.qmat[static_cast<std::size_t>(i) * state_.params.dpos + j];
      }
      out << "\n";
    }
  }
}

void Trainer::load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read checkpoint: " + path);
  std::string magic, version, key, kind;
  in >> magic >> version;
  if (magic != "grouprl-checkpoint" || version != "v1")
    throw Error(ErrorCode::kInvalidData, "unrecognized checkpoint header");
  long long iter = 0;
  in >> key >> iter;
  in >> key >> state_.run_seed;
  int warm = 0;
  in >> key >> state_.baseline >> key >> warm;
  in >> key >> state_.cum_reward >> key >> state_.cum_samples;
  state_.baseline_warm = warm != 0;
  state_.iteration = iter;
  in >> key >> kind;
  if (kind == "reduced") {
    double q, r;
    in >> q >> r;
    state_.params = AttentionParams::reduced(q, r);
  } else {
    int dpos = 0;
    in >> dpos;
    if (dpos != space_.dpos())
      throw Error(ErrorCode::kInvalidData, "checkpoint dpos does not match position space");
    state_.params = AttentionParams::full_zero(dpos);
    for (double& v : state_.params.qmat) in >> v;
  }
  if (!in) throw Error(ErrorCode::kInvalidData, "truncated checkpoint");
}

std::mt19937_64 Trainer::sample_stream(long long iteration, int sample_index) const {
  return make_stream(state_.run_seed, kSaltTrain, static_cast<std::uint64_t>(iteration),
                     static_cast<std::uint64_t>(sample_index));
}

int worker_count() { return detail::env_worker_cap(); }

}  // namespace grouprl
