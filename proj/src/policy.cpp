#include "grouprl/policy.hpp"

#include <algorithm>
#include <cmath>

namespace grouprl {

MlpConfig MlpConfig::make(int cb, int d) {
  if (cb < 1 || d < 2) throw Error(ErrorCode::kInvalidArgument, "need cb >= 1 and d >= 2");
  MlpConfig m;
  m.cb = cb;
  m.b = double(cb) * std::log(double(d));
  m.sigma0 = 1.0 / std::sqrt(double(d));
  return m;
}

AttentionParams AttentionParams::full_zero(int dpos) {
  AttentionParams p;
  p.kind = Kind::kFull;
  p.dpos = dpos;
  p.qmat.assign(static_cast<std::size_t>(dpos) * dpos, 0.0);
  return p;
}

AttentionParams AttentionParams::reduced(double q, double r) {
  AttentionParams p;
  p.kind = Kind::kReduced;
  p.q = q;
  p.r = r;
  return p;
}

AttentionParams AttentionParams::to_full(const PositionSpace& space) const {
  AttentionParams p = full_zero(space.dpos());
  for (int xp = 0; xp < space.dpos(); ++xp)
    for (int xa = 0; xa < space.dpos(); ++xa)
      p.full_at(xa, xp) = (space.align(xp) == xa) ? q : r;
  if (kind == Kind::kFull) p.qmat = qmat;
  return p;
}

std::pair<double, double> AttentionParams::two_level_summary(const PositionSpace& space) const {
  if (kind == Kind::kReduced) return {q, r};
  double matched = 0.0, off = 0.0;
  const int n = space.dpos();
  for (int xp = 0; xp < n; ++xp)
    for (int xa = 0; xa < n; ++xa) {
      if (space.align(xp) == xa)
        matched += qmat[static_cast<std::size_t>(xa) * n + xp];
      else
        off += qmat[static_cast<std::size_t>(xa) * n + xp];
    }
  return {matched / n, off / (double(n) * (n - 1))};
}

std::vector<double> attention_weights(const AttentionParams& params, const PositionSpace& space,
                                      const Instance& inst, int step) {
  const int L = inst.horizon;
  if (step < 0 || step >= L) throw Error(ErrorCode::kInvalidArgument, "step out of range");
  std::vector<double> w(L);
  const int xa = inst.answer_pos[step];
  double mx = -1e300;
  for (int m = 0; m < L; ++m) {
    w[m] = params.score(xa, inst.prompt_pos[m], space);
    mx = std::max(mx, w[m]);
  }
  double z = 0.0;
  for (int m = 0; m < L; ++m) {
    w[m] = std::exp(w[m] - mx);
    z += w[m];
  }
  for (int m = 0; m < L; ++m) w[m] /= z;
  return w;
}

StepEval eval_step(const AttentionParams& params, const MlpConfig& mlp,
                   const PositionSpace& space, const Tokenizer& tok, const GroupTable& table,
                   const Instance& inst, Elem current_state, int step) {
  const int L = inst.horizon;
  const int d = table.order();
  StepEval ev;
  ev.attn = attention_weights(params, space, inst, step);
  ev.ctx_class.resize(L);
  ev.ctx_prob.resize(L);
  // logits minus the common σ0: context class m gets attn_m·B, others 0
  double z = double(d - L);  // the d-L vocabulary classes contribute e^0 each
  for (int m = 0; m < L; ++m) {
    ev.ctx_class[m] = tok.to_class(table.act(inst.transitions[m], current_state));
    z += std::exp(ev.attn[m] * mlp.b);
  }
  ev.log_z = std::log(z);
  for (int m = 0; m < L; ++m) ev.ctx_prob[m] = std::exp(ev.attn[m] * mlp.b - ev.log_z);
  ev.vocab_prob = std::exp(-ev.log_z);
  return ev;
}

std::vector<double> step_logits(const AttentionParams& params, const MlpConfig& mlp,
                                const PositionSpace& space, const Tokenizer& tok,
                                const GroupTable& table, const Instance& inst,
                                Elem current_state, int step) {
  const StepEval ev = eval_step(params, mlp, space, tok, table, inst, current_state, step);
  std::vector<double> logits(table.order(), mlp.sigma0);
  for (int m = 0; m < inst.horizon; ++m)
    logits[ev.ctx_class[m]] = ev.attn[m] * mlp.b + mlp.sigma0;
  return logits;
}

LiteralMlp::LiteralMlp(const GroupTable& table, const Tokenizer& tok, const MlpConfig& mlp)
    : d_(table.order()), mlp_(mlp), table_(table), tok_(tok) {
  if (d_ > kMaxOrder)
    throw Error(ErrorCode::kInvalidArgument, "literal MLP materialization capped at d <= 16");
  const int d = d_;
  // neuron (g, y) belongs to class τ(g∘y); weight over embeddings
  // [transition slots 0..d-1 | state slots d..2d-1]
  w_.assign(static_cast<std::size_t>(d) * d * 2 * d, 0.0);
  for (int g = 0; g < d; ++g)
    for (int y = 0; y < d; ++y) {
      const int cls = tok.to_class(table.act(static_cast<Elem>(g), static_cast<Elem>(y)));
      // neurons are indexed within their class group by y
      double* w = &w_[(static_cast<std::size_t>(cls) * d + y) * 2 * d];
      for (int s = 0; s < d; ++s) w[s] = (s == g) ? mlp_.b : -mlp_.b;
      for (int s = 0; s < d; ++s) w[d + s] = (s == y) ? mlp_.b + 2.0 * mlp_.sigma0 : -mlp_.b;
    }
}

std::vector<double> LiteralMlp::logits(const AttentionParams& params, const PositionSpace& space,
                                       const Instance& inst, Elem current_state, int step) const {
  const int d = d_;
  const std::vector<double> attn = attention_weights(params, space, inst, step);
  // attention output in R^{2d}: ½(y_k + Σ attn_m g_m)
  std::vector<double> z(2 * d, 0.0);
  for (int m = 0; m < inst.horizon; ++m) z[inst.transitions[m]] += 0.5 * attn[m];
  z[d + current_state] += 0.5;
  std::vector<double> out(d, 0.0);
  for (int cls = 0; cls < d; ++cls) {
    double acc = 0.0;
    for (int r = 0; r < d; ++r) {
      const double* w = &w_[(static_cast<std::size_t>(cls) * d + r) * 2 * d];
      double pre = 0.0;
      for (int i = 0; i < 2 * d; ++i) pre += w[i] * z[i];
      if (pre > 0.0) acc += pre;
    }
    out[cls] = acc;
  }
  return out;
}

StepLaw step_probabilities(double attn_target, int L, int d, int cb) {
  if (attn_target < 0.0 || attn_target > 1.0)
    throw Error(ErrorCode::kInvalidArgument, "attention weight must lie in [0, 1]");
  if (L < 1 || L > d) throw Error(ErrorCode::kInvalidArgument, "need 1 <= L <= d");
  const double logd = std::log(double(d));
  StepLaw law;
  law.horizon = L;
  law.degenerate = (L == d);
  const double a = std::exp(attn_target * cb * logd);
  const double bv = L > 1 ? std::exp((1.0 - attn_target) / double(L - 1) * cb * logd) : 0.0;
  const double z = a + double(L - 1) * bv + double(d - L);
  law.p1 = a / z;
  law.p2 = L > 1 ? bv / z : 0.0;
  law.p3 = 1.0 / z;
  return law;
}

StepDistribution step_distribution(const AttentionParams& params, const MlpConfig& mlp,
                                   const PositionSpace& space, const Tokenizer& tok,
                                   const GroupTable& table, const Instance& inst,
                                   Elem current_state, int step) {
  const StepEval ev = eval_step(params, mlp, space, tok, table, inst, current_state, step);
  StepDistribution out;
  out.attn = ev.attn;
  out.probs.assign(table.order(), ev.vocab_prob);
  for (int m = 0; m < inst.horizon; ++m) out.probs[ev.ctx_class[m]] = ev.ctx_prob[m];
  const int L = inst.horizon;
  out.law.horizon = L;
  out.law.degenerate = (L == table.order());
  out.law.p1 = ev.ctx_prob[step];
  double ctx = 0.0;
  for (int m = 0; m < L; ++m)
    if (m != step) ctx += ev.ctx_prob[m];
  out.law.p2 = L > 1 ? ctx / double(L - 1) : 0.0;
  out.law.p3 = ev.vocab_prob;
  return out;
}

namespace {

// Sample a class index from a StepEval; vocabulary classes by rejection
// against the context-class mask.
int sample_class(const StepEval& ev, int d, const std::vector<char>& is_ctx,
                 std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  double acc = 0.0;
  for (std::size_t m = 0; m < ev.ctx_prob.size(); ++m) {
    acc += ev.ctx_prob[m];
    if (u < acc) return ev.ctx_class[m];
  }
  std::uniform_int_distribution<int> pick(0, d - 1);
  for (;;) {
    const int cls = pick(rng);
    if (!is_ctx[cls]) return cls;
  }
}

}  // namespace

Rollout rollout(const AttentionParams& params, const MlpConfig& mlp, const PositionSpace& space,
                const Tokenizer& tok, const GroupTable& table, const Instance& inst,
                std::mt19937_64& rng, bool greedy) {
  const int L = inst.horizon;
  const int d = table.order();
  Rollout out;
  out.trajectory.resize(L);
  out.log_probs.resize(L);
  out.attention_hit.resize(L);
  std::vector<char> is_ctx(d, 0);
  Elem y = inst.y0;
  for (int step = 0; step < L; ++step) {
    const StepEval ev = eval_step(params, mlp, space, tok, table, inst, y, step);
    int chosen;
    if (greedy) {
      // vocabulary logits are always dominated; ties break to the lower class
      int best = 0;
      for (int m = 1; m < L; ++m) {
        if (ev.attn[m] > ev.attn[best] ||
            (ev.attn[m] == ev.attn[best] && ev.ctx_class[m] < ev.ctx_class[best]))
          best = m;
      }
      chosen = ev.ctx_class[best];
    } else {
      for (int m = 0; m < L; ++m) is_ctx[ev.ctx_class[m]] = 1;
      chosen = sample_class(ev, d, is_ctx, rng);
      for (int m = 0; m < L; ++m) is_ctx[ev.ctx_class[m]] = 0;
    }
    double logp = -ev.log_z;
    for (int m = 0; m < L; ++m)
      if (ev.ctx_class[m] == chosen) {
        logp = ev.attn[m] * mlp.b - ev.log_z;
        break;
      }
    int arg = 0;
    for (int m = 1; m < L; ++m)
      if (ev.attn[m] > ev.attn[arg]) arg = m;
    out.attention_hit[step] = (arg == step);
    out.log_probs[step] = logp;
    y = tok.to_state(chosen);
    out.trajectory[step] = y;
  }
  out.reward = (out.trajectory[L - 1] == inst.states[L - 1]) ? 1 : 0;
  return out;
}

}  // namespace grouprl
