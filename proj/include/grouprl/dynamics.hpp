#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "grouprl/group.hpp"
#include "grouprl/policy.hpp"

namespace grouprl {

/// Reduced (q, r) learning dynamics driven by exact per-instance gradients.
/// Gradients are reported in the per-matrix-entry coordinates of the
/// length-normalized objective: a full-matrix run moving every matched entry
/// by η·∂q and every off entry by η·∂r reproduces this trajectory exactly.
struct ReducedConfig {
  int d = 96;
  int dpos = 64;
  int cb = 3;
  std::vector<int> lengths;       // 𝓛_R
  double eta = 2048.0;            // per-entry scale; calibrated default
  long long max_steps = 400000;
  int mc_instances = 32;
  std::uint64_t seed = 1;
  double fd_step = 1e-5;          // central difference step for ∂r
  double q0 = 0.0, r0 = 0.0;
  bool stop_when_mastered = true; // halt once every horizon passed 0.99
  long long record_every = 1;

  void validate() const;
};

struct MixtureGrad {
  double dq = 0.0;                 // per-entry ∂q of the mixture objective
  double dr = 0.0;                 // per-entry ∂r
  std::vector<double> dq_per_len;  // per-entry, one per horizon
  std::vector<double> j_exact;     // Monte Carlo mean of exact P(E) per horizon
  std::vector<double> gq_var;      // instance variance of the per-length gradient
};

MixtureGrad mixture_grad(double q, double r, const std::vector<int>& lengths, int d, int dpos,
                         int cb, int mc_instances, std::uint64_t seed, std::uint64_t step_index,
                         const GroupTable& table, double fd_step = 1e-5);

struct TimelineRow {
  long long t = 0;
  double q = 0.0, r = 0.0;
  std::vector<double> j_center;  // step-law reward 1/d + (1-1/d)Δ^L per horizon
  std::vector<double> j_exact;   // instance-averaged exact convolution reward
  std::vector<double> gq;        // per-entry per-length gradient (diagnostics)
};

struct Transition {
  int index = 0;                   // k: between lengths[k-1] and lengths[k]
  long long plateau = 0;           // 𝒯_k
  bool plateau_censored = false;   // run ended while still inside the plateau
  std::optional<long long> rise;   // T_mas,k+1 - T_vis,k+1 when both observed
};

struct PhaseTimeline {
  std::vector<int> lengths;
  std::vector<TimelineRow> rows;
  std::vector<std::optional<long long>> t_vis, t_mas;  // per horizon
  std::vector<Transition> transitions;
  bool diverged = false;
  long long steps_run = 0;
};

struct RegimeReport {
  double ratio = 0.0;  // R (0 when the horizon set was given explicitly)
  std::vector<int> lengths;
  std::vector<Transition> transitions;
  long long max_plateau = 0;
  bool max_plateau_censored = false;
  long long max_rise = 0;          // over completed inter-horizon rises
  bool has_completed_rise = false;
  double statistic = 0.0;          // max plateau / max(1, max completed rise)
  std::string label;               // "grokking" | "relay"
};

/// Integrates the reduced dynamics, recording exact rewards each iteration.
PhaseTimeline integrate_reduced(const ReducedConfig& cfg, const GroupTable& table);

/// Visible-return / mastery thresholds (0.01 / 0.99) applied to the
/// baseline-excess reward (J - 1/d)/(1 - 1/d); annotates first crossings and
/// the plateau counters.
void detect_transitions(PhaseTimeline& timeline, int d, double vis_threshold = 0.01,
                        double mas_threshold = 0.99);

/// Curve-level variant for externally produced reward series (one per length,
/// sampled at the given iterations).
PhaseTimeline analyze_curves(const std::vector<int>& lengths,
                             const std::vector<long long>& iterations,
                             const std::vector<std::vector<double>>& rewards, int d,
                             double vis_threshold = 0.01, double mas_threshold = 0.99);

RegimeReport regime_report(const PhaseTimeline& timeline, double ratio,
                           double grokking_ratio_threshold = 10.0);

std::vector<RegimeReport> scan_ratio(const std::vector<double>& ratios, const ReducedConfig& base,
                                     int l1, int l_max, const GroupTable& table,
                                     std::vector<PhaseTimeline>* timelines = nullptr,
                                     double grokking_ratio_threshold = 10.0);

struct CriticalQ {
  double value = 0.0;        // exact inversion of the step-law reward (score gap)
  double paper_form = 0.0;   // log((L-1)/(C_B-1)) + f(x) closed form
  double first_order = 0.0;  // Taylor expansion of the closed form
};

/// Threshold on the attention score gap q - r required for J_L >= 1 - xi
/// (reward mode) or attn_L >= 1 - xi (attention mode).
CriticalQ critical_q(int L, double xi, int d, int cb, bool attention_mode = false);

/// Step-law reward as a function of the score gap s = q - r.
double center_reward(double score_gap, int L, int d, int cb);

}  // namespace grouprl
