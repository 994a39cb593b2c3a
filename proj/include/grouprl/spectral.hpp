#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "grouprl/group.hpp"

namespace grouprl {

/// Probability measure on a finite group, dense over element indices.
struct GroupMeasure {
  std::vector<double> p;

  int order() const { return static_cast<int>(p.size()); }
  void validate() const;  // entries >= 0, sum within 1e-12 of 1
};

/// Small dense complex matrix, row-major.
struct CMat {
  int n = 0;
  std::vector<std::complex<double>> a;

  CMat() = default;
  explicit CMat(int dim) : n(dim), a(static_cast<std::size_t>(dim) * dim) {}
  static CMat eye(int dim);
  std::complex<double>& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  const std::complex<double>& at(int i, int j) const {
    return a[static_cast<std::size_t>(i) * n + j];
  }
  CMat mul(const CMat& o) const;
  CMat adjoint() const;
  std::complex<double> trace() const;
  double op_norm() const;  // largest singular value
  double max_abs_diff(const CMat& o) const;
};

/// One irreducible unitary representation, matrices indexed by element.
struct Irrep {
  int dim = 0;
  bool trivial = false;
  std::vector<CMat> mats;

  double character_abs(Elem g) const { return std::abs(mats[g].trace()); }
};

/// Set of irreps for one group; complete when sum of dim^2 equals the order.
struct ReprRegistry {
  std::string group_name;
  int order = 0;
  Elem identity = 0;
  bool complete = false;
  std::vector<Irrep> irreps;
};

/// Step-invariant three-level next-action law (target / in-context / vocabulary).
struct StepLaw {
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
  int horizon = 0;         // L
  bool degenerate = false; // L == d: no vocabulary distractor classes exist

  double margin() const { return p1 - p3; }        // Δ
  double ctx_margin() const { return p2 - p3; }    // δ
  void validate(int d) const;                      // mass-sum invariant
};

/// Exact success probability and per-step posteriors for one instance,
/// with the leading-term expansion and its certified remainder envelopes.
struct PosteriorReport {
  double p_success = 0.0;            // P(E)
  std::vector<double> rho1;          // P(u_l = g_l | E)
  std::vector<double> rho2;          // P(u_l in-context distractor | E), aggregate
  double leading_e = 0.0;            // 1/d + (1-1/d)Δ^L
  double bound_e = 0.0;              // envelope for |P(E) - leading_e|
  double leading_a = 0.0;            // p1/d + (1-1/d)p1 Δ^{L-1}, per step
  double bound_a = 0.0;
  double leading_b = 0.0;            // (L-1)p2/d, per step
  double bound_b = 0.0;
};

// --- measures and Fourier machinery -----------------------------------------

/// μ_l for the law with target context[target_step].
GroupMeasure one_step_measure(const StepLaw& law, std::span<const Elem> context,
                              int target_step, const GroupTable& table);

/// Exact group convolution (f*v)(g) = sum_h f(g h^-1) v(h), O(d^2).
GroupMeasure convolve(const GroupMeasure& f, const GroupMeasure& v, const GroupTable& table);

CMat fourier_transform(const GroupMeasure& m, const Irrep& irrep);

/// Fourier inversion at a point: (1/d) sum d_l Tr(f_hat(l) l(g)^-1).
double inverse_at(const ReprRegistry& registry, std::span<const CMat> transforms, Elem g);

ReprRegistry cyclic_irreps(int n);
ReprRegistry load_irreps(const std::string& path, const GroupTable& table);

double sample_operator_norm(const ReprRegistry& registry, std::span<const Elem> context,
                            int target_step);
/// max over target steps (the σ_{G^L} of the remainder bounds).
double sample_operator_norm_max(const ReprRegistry& registry, std::span<const Elem> context);

double spectral_decay_factor(const ReprRegistry& registry);

// --- exact instance oracles --------------------------------------------------

/// P(final state = yL) under per-step laws, via iterated group convolution.
double success_probability(std::span<const StepLaw> laws, std::span<const Elem> context,
                           Elem y0, Elem yL, const GroupTable& table);

/// Same quantity evaluated through the Fourier domain (cross-check path).
double success_probability_fourier(std::span<const StepLaw> laws, std::span<const Elem> context,
                                   Elem y0, Elem yL, const GroupTable& table,
                                   const ReprRegistry& registry);

struct Posteriors {
  double p_success = 0.0;
  std::vector<double> rho1;
  std::vector<double> rho2;
};

/// Forward-backward exact posteriors; laws may differ per step.
Posteriors posterior_probs(std::span<const StepLaw> laws, std::span<const Elem> context,
                           Elem y0, Elem yL, const GroupTable& table);

/// Full report for a step-invariant law. sigma/gamma default to the universal
/// bounds σ ≤ L-1, γ ≤ 1 when no registry-derived values are supplied.
PosteriorReport posterior_report(const StepLaw& law, std::span<const Elem> context,
                                 Elem y0, Elem yL, const GroupTable& table,
                                 double sigma = -1.0, double gamma = 1.0);

/// Reward characterization: center 1/d + (1-1/d)Δ^L and envelope half-width
/// (1-1/d)[(Δ+σδ)^L - Δ^L] (zero when δ = 0).
struct RewardPrediction {
  double center = 0.0;
  double half_width = 0.0;
};
RewardPrediction predicted_reward(double delta, int L, int d, double delta_small = 0.0,
                                  double sigma = 0.0);

/// d/dq of the exact instance success probability through the (q, r) map:
/// attn·B·(1-attn)·P(E)·sum_l [(rho1_l - p1) + (p2 - rho2_l/(L-1))].
double exact_grad_q_instance(const StepLaw& law, std::span<const Elem> context,
                             Elem y0, Elem yL, double attn_target, double feature_b,
                             const GroupTable& table);

/// Certified upper bound on |exact_grad_q_instance| assembled from the crude
/// remainder envelopes; same units as exact_grad_q_instance.
double flat_region_bound(double delta, double delta_small, double sigma, double p1, double p2,
                         int L, int d, double attn_target, double feature_b);

/// Fraction of in-context action sequences (other than the target one) that
/// reach yL. Exhaustive when L^L <= 10^7, Monte Carlo fallback otherwise.
double collision_probability(const GroupTable& table, std::span<const Elem> context,
                             Elem y0, Elem yL, std::uint64_t mc_seed = 0x5eed);

// --- cyclic fast path --------------------------------------------------------

/// O(L·d) success probability + posteriors for cyclic groups via characters.
/// Bit-for-bit this is the Fourier route; it is cross-checked against the
/// group-domain route in the test suite.
Posteriors cyclic_posterior_probs(std::span<const StepLaw> laws, std::span<const Elem> context,
                                  Elem y0, Elem yL, int n);
double cyclic_success_probability(std::span<const StepLaw> laws, std::span<const Elem> context,
                                  Elem y0, Elem yL, int n);

}  // namespace grouprl
