#include "grouprl/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "grouprl/rng.hpp"
#include "grouprl/spectral.hpp"
#include "grouprl/train.hpp"
#include "parallel.hpp"

namespace grouprl {

namespace {

constexpr std::uint64_t kSaltDyn = 0x64796e61;

double attn_from_gap(double gap, int L) {
  // two-level softmax: e^q / (e^q + (L-1) e^r)
  return 1.0 / (1.0 + double(L - 1) * std::exp(-gap));
}

struct DynInstance {
  std::vector<Elem> context;
  Elem y0 = 0, yl = 0;
};

DynInstance sample_dyn_instance(const GroupTable& table, int L, std::mt19937_64& rng) {
  DynInstance inst;
  const int d = table.order();
  inst.context.reserve(L);
  std::vector<char> used(d, 0);
  std::uniform_int_distribution<int> pick(0, d - 1);
  while (static_cast<int>(inst.context.size()) < L) {
    const int g = pick(rng);
    if (!used[g]) {
      used[g] = 1;
      inst.context.push_back(static_cast<Elem>(g));
    }
  }
  inst.y0 = static_cast<Elem>(pick(rng));
  inst.yl = table.act(table.fold_compose(inst.context), inst.y0);
  return inst;
}

}  // namespace

void ReducedConfig::validate() const {
  if (lengths.empty()) throw Error(ErrorCode::kInvalidArgument, "no horizons configured");
  for (int l : lengths)
    if (l < 2 || l > std::min(dpos - 1, d))
      throw Error(ErrorCode::kInvalidArgument, "horizon outside [2, min(dpos-1, d)]");
  if (!(eta > 0.0) || max_steps < 1 || mc_instances < 1 || record_every < 1)
    throw Error(ErrorCode::kInvalidArgument, "bad integrator configuration");
}

double center_reward(double score_gap, int L, int d, int cb) {
  const StepLaw law = step_probabilities(attn_from_gap(score_gap, L), L, d, cb);
  double dl = 1.0;
  for (int i = 0; i < L; ++i) dl *= law.margin();
  return 1.0 / d + (1.0 - 1.0 / double(d)) * dl;
}

MixtureGrad mixture_grad(double q, double r, const std::vector<int>& lengths, int d, int dpos,
                         int cb, int mc_instances, std::uint64_t seed, std::uint64_t step_index,
                         const GroupTable& table, double fd_step) {
  const MlpConfig mlp = MlpConfig::make(cb, d);
  const int nl = static_cast<int>(lengths.size());
  MixtureGrad out;
  out.dq_per_len.assign(nl, 0.0);
  out.j_exact.assign(nl, 0.0);
  out.gq_var.assign(nl, 0.0);
  double dr_scalar = 0.0;
  for (int li = 0; li < nl; ++li) {
    const int L = lengths[li];
    const double attn = attn_from_gap(q - r, L);
    const StepLaw law = step_probabilities(attn, L, d, cb);
    const StepLaw law_hi = step_probabilities(attn_from_gap(q - (r + fd_step), L), L, d, cb);
    const StepLaw law_lo = step_probabilities(attn_from_gap(q - (r - fd_step), L), L, d, cb);
    std::vector<double> gq(mc_instances), pe(mc_instances), pe_hi(mc_instances),
        pe_lo(mc_instances);
    detail::parallel_for(mc_instances, [&](int i) {
      auto rng = make_stream(seed, kSaltDyn, step_index * 131 + static_cast<std::uint64_t>(li),
                             static_cast<std::uint64_t>(i));
      const DynInstance inst = sample_dyn_instance(table, L, rng);
      std::vector<StepLaw> laws(L, law);
      const Posteriors post = posterior_probs(laws, inst.context, inst.y0, inst.yl, table);
      double gap = 0.0;
      for (int l = 0; l < L; ++l)
        gap += (post.rho1[l] - law.p1) + (law.p2 - post.rho2[l] / double(L - 1));
      gq[i] = attn * mlp.b * (1.0 - attn) * post.p_success * gap;
      pe[i] = post.p_success;
      std::vector<StepLaw> laws_hi(L, law_hi), laws_lo(L, law_lo);
      pe_hi[i] = success_probability(laws_hi, inst.context, inst.y0, inst.yl, table);
      pe_lo[i] = success_probability(laws_lo, inst.context, inst.y0, inst.yl, table);
    });
    double gq_mean = 0.0, pe_mean = 0.0, hi_mean = 0.0, lo_mean = 0.0;
    for (int i = 0; i < mc_instances; ++i) {
      gq_mean += gq[i];
      pe_mean += pe[i];
      hi_mean += pe_hi[i];
      lo_mean += pe_lo[i];
    }
    gq_mean /= mc_instances;
    pe_mean /= mc_instances;
    hi_mean /= mc_instances;
    lo_mean /= mc_instances;
    double var = 0.0;
    for (int i = 0; i < mc_instances; ++i) var += (gq[i] - gq_mean) * (gq[i] - gq_mean);
    out.gq_var[li] = mc_instances > 1 ? var / double(mc_instances - 1) : 0.0;
    // per-entry normalization: matched entries share the scalar derivative
    out.dq_per_len[li] = gq_mean / (double(L) * dpos);
    out.j_exact[li] = pe_mean;
    dr_scalar += (hi_mean - lo_mean) / (2.0 * fd_step) / double(L);
  }
  for (int li = 0; li < nl; ++li) out.dq += out.dq_per_len[li];
  out.dq /= nl;
  // scalar d/dr of the mixture spread across the dpos(dpos-1) off entries
  out.dr = dr_scalar / nl / (double(dpos) * double(dpos - 1));
  return out;
}

PhaseTimeline integrate_reduced(const ReducedConfig& cfg, const GroupTable& table) {
  cfg.validate();
  if (table.order() != cfg.d)
    throw Error(ErrorCode::kInvalidArgument, "group order does not match configuration");
  PhaseTimeline tl;
  tl.lengths = cfg.lengths;
  const int nl = static_cast<int>(cfg.lengths.size());
  double q = cfg.q0, r = cfg.r0;
  const double f = 1.0 - 1.0 / double(cfg.d);
  for (long long t = 0; t < cfg.max_steps; ++t) {
    MixtureGrad g = mixture_grad(q, r, cfg.lengths, cfg.d, cfg.dpos, cfg.cb, cfg.mc_instances,
                                 cfg.seed, static_cast<std::uint64_t>(t), table, cfg.fd_step);
    const bool recorded = (t % cfg.record_every == 0);
    bool mastered_all = cfg.stop_when_mastered;
    if (recorded) {
      TimelineRow row;
      row.t = t;
      row.q = q;
      row.r = r;
      row.j_center.resize(nl);
      for (int li = 0; li < nl; ++li) {
        row.j_center[li] = center_reward(q - r, cfg.lengths[li], cfg.d, cfg.cb);
        mastered_all = mastered_all && ((row.j_center[li] - 1.0 / cfg.d) / f) >= 0.99;
      }
      row.j_exact = g.j_exact;
      row.gq = g.dq_per_len;
      tl.rows.push_back(std::move(row));
    }
    tl.steps_run = t + 1;
    if (recorded && mastered_all) break;  // the crossing row is already recorded
    q += cfg.eta * g.dq;
    r += cfg.eta * g.dr;
    if (std::abs(q) > 50.0 || std::abs(r) > 50.0) {
      tl.diverged = true;
      break;
    }
  }
  detect_transitions(tl, cfg.d);
  return tl;
}

void detect_transitions(PhaseTimeline& tl, int d, double vis_threshold, double mas_threshold) {
  const int nl = static_cast<int>(tl.lengths.size());
  tl.t_vis.assign(nl, std::nullopt);
  tl.t_mas.assign(nl, std::nullopt);
  tl.transitions.clear();
  if (tl.rows.empty()) return;
  const double f = 1.0 - 1.0 / double(d);
  auto excess = [&](double j) { return (j - 1.0 / double(d)) / f; };
  for (int li = 0; li < nl; ++li) {
    for (const TimelineRow& row : tl.rows) {
      const double e = excess(row.j_center[li]);
      if (!tl.t_vis[li] && e >= vis_threshold) tl.t_vis[li] = row.t;
      if (!tl.t_mas[li] && e >= mas_threshold) {
        tl.t_mas[li] = row.t;
        break;
      }
    }
  }
  const long long last_t = tl.rows.back().t;
  for (int k = 0; k + 1 < nl; ++k) {
    Transition tr;
    tr.index = k + 1;
    if (!tl.t_mas[k]) {
      tr.plateau = 0;  // the plateau between k and k+1 never opened
    } else if (tl.t_vis[k + 1]) {
      tr.plateau = std::max<long long>(0, *tl.t_vis[k + 1] - *tl.t_mas[k]);
    } else {
      tr.plateau = last_t - *tl.t_mas[k];  // still open when the run ended
      tr.plateau_censored = true;
    }
    if (tl.t_vis[k + 1] && tl.t_mas[k + 1])
      tr.rise = *tl.t_mas[k + 1] - *tl.t_vis[k + 1];
    tl.transitions.push_back(tr);
  }
}

PhaseTimeline analyze_curves(const std::vector<int>& lengths,
                             const std::vector<long long>& iterations,
                             const std::vector<std::vector<double>>& rewards, int d,
                             double vis_threshold, double mas_threshold) {
  if (rewards.size() != lengths.size())
    throw Error(ErrorCode::kInvalidArgument, "one reward curve per length required");
  for (const auto& c : rewards)
    if (c.size() != iterations.size())
      throw Error(ErrorCode::kInvalidArgument, "curve length does not match iteration axis");
  if (iterations.empty()) throw Error(ErrorCode::kInvalidArgument, "empty curves");
  PhaseTimeline tl;
  tl.lengths = lengths;
  tl.rows.resize(iterations.size());
  for (std::size_t i = 0; i < iterations.size(); ++i) {
    tl.rows[i].t = iterations[i];
    tl.rows[i].j_center.resize(lengths.size());
    for (std::size_t li = 0; li < lengths.size(); ++li)
      tl.rows[i].j_center[li] = rewards[li][i];
  }
  tl.steps_run = iterations.back() + 1;
  detect_transitions(tl, d, vis_threshold, mas_threshold);
  return tl;
}

RegimeReport regime_report(const PhaseTimeline& tl, double ratio,
                           double grokking_ratio_threshold) {
  RegimeReport rep;
  rep.ratio = ratio;
  rep.lengths = tl.lengths;
  rep.transitions = tl.transitions;
  for (const Transition& tr : tl.transitions) {
    if (tr.plateau > rep.max_plateau) {
      rep.max_plateau = tr.plateau;
      rep.max_plateau_censored = tr.plateau_censored;
    }
    if (tr.rise) {
      rep.has_completed_rise = true;
      rep.max_rise = std::max(rep.max_rise, *tr.rise);
    }
  }
  rep.statistic = double(rep.max_plateau) / std::max<double>(1.0, double(rep.max_rise));
  rep.label = (rep.max_plateau > 0 && rep.statistic >= grokking_ratio_threshold) ? "grokking"
                                                                                 : "relay";
  return rep;
}

std::vector<RegimeReport> scan_ratio(const std::vector<double>& ratios, const ReducedConfig& base,
                                     int l1, int l_max, const GroupTable& table,
                                     std::vector<PhaseTimeline>* timelines,
                                     double grokking_ratio_threshold) {
  if (ratios.empty()) throw Error(ErrorCode::kInvalidArgument, "empty ratio grid");
  std::vector<RegimeReport> out;
  for (double ratio : ratios) {
    ReducedConfig cfg = base;
    cfg.lengths = horizon_set(ratio, l1, l_max);
    PhaseTimeline tl = integrate_reduced(cfg, table);
    out.push_back(regime_report(tl, ratio, grokking_ratio_threshold));
    if (timelines) timelines->push_back(std::move(tl));
  }
  return out;
}

CriticalQ critical_q(int L, double xi, int d, int cb, bool attention_mode) {
  if (L < 2 || !(xi > 0.0) || !(xi < 1.0) || cb < 2)
    throw Error(ErrorCode::kInvalidArgument, "need L >= 2, xi in (0, 1), cb >= 2");
  CriticalQ out;
  if (attention_mode) {
    out.value = std::log((1.0 - xi) * double(L - 1) / xi);
    out.paper_form = out.value;
    out.first_order = out.value;
    return out;
  }
  // closed form of the critical-threshold lemma, with its Taylor expansion
  const double x = (std::log(double(L)) - std::log(std::log(1.0 / (1.0 - xi)))) / std::log(double(d));
  if (x >= double(cb - 1))
    throw Error(ErrorCode::kOutOfRegime, "threshold expansion undefined: x >= C_B - 1");
  const double base = std::log(double(L - 1) / double(cb - 1));
  out.paper_form = base + std::log((1.0 + x) / (1.0 - x / double(cb - 1)));
  out.first_order = base + double(cb) / double(cb - 1) * x;
  // exact inversion of the step-law reward in the score gap
  const double target = 1.0 - xi;
  const double dd = double(d);
  if (target <= 1.0 / dd)
    throw Error(ErrorCode::kOutOfRegime, "reward target below the random baseline 1/d");
  const double delta_star = std::pow((target - 1.0 / dd) / (1.0 - 1.0 / dd), 1.0 / double(L));
  // Δ(attn) is strictly increasing; check reachability then bisect
  const auto delta_at = [&](double a) {
    const StepLaw law = step_probabilities(a, L, d, cb);
    return law.margin();
  };
  if (delta_at(1.0) < delta_star)
    throw Error(ErrorCode::kOutOfRegime, "reward target unreachable at full attention");
  double lo = 1e-12, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (delta_at(mid) < delta_star)
      lo = mid;
    else
      hi = mid;
  }
  const double attn = 0.5 * (lo + hi);
  out.value = std::log(double(L - 1) * attn / (1.0 - attn));
  return out;
}

}  // namespace grouprl
