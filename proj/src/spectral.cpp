#include "grouprl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace grouprl {

namespace {

constexpr double kMassTol = 1e-12;
constexpr double kReprTol = 1e-9;

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

Elem target_product(const GroupTable& table, Elem y0, Elem yL) {
  return table.compose(yL, table.inverse(y0));  // G* with yL = G*∘y0
}

}  // namespace

void GroupMeasure::validate() const {
  double sum = 0.0;
  for (double v : p) {
    if (v < -kMassTol) throw Error(ErrorCode::kInconsistent, "negative measure entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kMassTol)
    throw Error(ErrorCode::kInconsistent, "measure mass differs from 1");
}

void StepLaw::validate(int d) const {
  const int L = horizon;
  if (L < 1 || L > d) throw Error(ErrorCode::kInvalidArgument, "law horizon out of range");
  if (p1 < -kMassTol || p2 < -kMassTol || p3 < -kMassTol)
    throw Error(ErrorCode::kInconsistent, "negative step probability");
  const double mass = p1 + (L - 1) * p2 + (d - L) * p3;
  if (std::abs(mass - 1.0) > kMassTol)
    throw Error(ErrorCode::kInconsistent, "step-law mass sum differs from 1");
}

// --- CMat --------------------------------------------------------------------

CMat CMat::eye(int dim) {
  CMat m(dim);
  for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
  return m;
}

CMat CMat::mul(const CMat& o) const {
  CMat r(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const auto v = at(i, k);
      if (v == std::complex<double>{}) continue;
      for (int j = 0; j < n; ++j) r.at(i, j) += v * o.at(k, j);
    }
  return r;
}

CMat CMat::adjoint() const {
  CMat r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r.at(i, j) = std::conj(at(j, i));
  return r;
}

std::complex<double> CMat::trace() const {
  std::complex<double> t;
  for (int i = 0; i < n; ++i) t += at(i, i);
  return t;
}

double CMat::op_norm() const {
  if (n == 0) return 0.0;
  if (n == 1) return std::abs(a[0]);
  // power iteration on A^H A
  std::vector<std::complex<double>> v(n, std::complex<double>(1.0 / std::sqrt(double(n)), 0.0));
  std::vector<std::complex<double>> w(n), u(n);
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    for (int i = 0; i < n; ++i) {
      std::complex<double> s;
      for (int j = 0; j < n; ++j) s += at(i, j) * v[j];
      w[i] = s;
    }
    for (int j = 0; j < n; ++j) {
      std::complex<double> s;
      for (int i = 0; i < n; ++i) s += std::conj(at(i, j)) * w[i];
      u[j] = s;
    }
    double norm = 0.0;
    for (auto c : u) norm += std::norm(c);
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    double next = norm;  // ||A^H A v|| -> sigma_max^2 at convergence
    for (int j = 0; j < n; ++j) v[j] = u[j] / norm;
    if (it > 8 && std::abs(next - lambda) <= 1e-14 * std::max(1.0, next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(lambda);
}

double CMat::max_abs_diff(const CMat& o) const {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - o.a[i]));
  return m;
}

// --- measures ----------------------------------------------------------------

GroupMeasure one_step_measure(const StepLaw& law, std::span<const Elem> context,
                              int target_step, const GroupTable& table) {
  const int d = table.order();
  const int L = static_cast<int>(context.size());
  if (law.horizon != L) throw Error(ErrorCode::kInvalidArgument, "law horizon != context size");
  if (target_step < 0 || target_step >= L)
    throw Error(ErrorCode::kInvalidArgument, "target step out of range");
  law.validate(d);
  GroupMeasure m;
  m.p.assign(d, law.p3);
  for (int k = 0; k < L; ++k) m.p[context[k]] = (k == target_step) ? law.p1 : law.p2;
  return m;
}

GroupMeasure convolve(const GroupMeasure& f, const GroupMeasure& v, const GroupTable& table) {
  const int d = table.order();
  if (f.order() != d || v.order() != d)
    throw Error(ErrorCode::kInvalidArgument, "measure order mismatch");
  GroupMeasure out;
  out.p.assign(d, 0.0);
  for (int h = 0; h < d; ++h) {
    const double vh = v.p[h];
    if (vh == 0.0) continue;
    const Elem hinv = table.inverse(static_cast<Elem>(h));
    for (int g = 0; g < d; ++g)
      out.p[g] += f.p[table.compose(static_cast<Elem>(g), hinv)] * vh;
  }
  return out;
}

CMat fourier_transform(const GroupMeasure& m, const Irrep& irrep) {
  const int dim = irrep.dim;
  CMat out(dim);
  for (int h = 0; h < m.order(); ++h) {
    const double w = m.p[h];
    if (w == 0.0) continue;
    const CMat& lam = irrep.mats[h];
    for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] += w * lam.a[i];
  }
  return out;
}

double inverse_at(const ReprRegistry& registry, std::span<const CMat> transforms, Elem g) {
  if (!registry.complete)
    throw Error(ErrorCode::kInconsistent, "Fourier inversion needs a complete registry");
  if (transforms.size() != registry.irreps.size())
    throw Error(ErrorCode::kInvalidArgument, "one transform per irrep required");
  std::complex<double> acc;
  for (std::size_t i = 0; i < registry.irreps.size(); ++i) {
    const Irrep& irrep = registry.irreps[i];
    const CMat inv = irrep.mats[g].adjoint();  // unitary: λ(g)^-1 = λ(g)^H
    acc += double(irrep.dim) * transforms[i].mul(inv).trace();
  }
  acc /= double(registry.order);
  if (std::abs(acc.imag()) > kReprTol)
    throw Error(ErrorCode::kInconsistent, "Fourier inversion has non-negligible imaginary part");
  return acc.real();
}

ReprRegistry cyclic_irreps(int n) {
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "cyclic order must be >= 2");
  ReprRegistry reg;
  reg.group_name = "Z" + std::to_string(n);
  reg.order = n;
  reg.identity = 0;
  reg.irreps.resize(n);
  for (int k = 0; k < n; ++k) {
    Irrep& ir = reg.irreps[k];
    ir.dim = 1;
    ir.trivial = (k == 0);
    ir.mats.resize(n, CMat(1));
    for (int g = 0; g < n; ++g) {
      const double ang = 2.0 * std::numbers::pi * double(k) * double(g) / double(n);
      ir.mats[g].a[0] = std::complex<double>(std::cos(ang), std::sin(ang));
    }
  }
  reg.complete = true;
  return reg;
}

namespace {

void validate_registry(ReprRegistry& reg, const GroupTable& table) {
  const int d = table.order();
  if (reg.order != d)
    throw Error(ErrorCode::kInvalidData, "representation file order does not match group");
  reg.identity = table.identity();
  int dim2 = 0;
  for (Irrep& ir : reg.irreps) {
    if (static_cast<int>(ir.mats.size()) != d)
      throw Error(ErrorCode::kInvalidData, "irrep is missing element matrices");
    // λ(e) = I and unitarity
    if (ir.mats[table.identity()].max_abs_diff(CMat::eye(ir.dim)) > kReprTol)
      throw Error(ErrorCode::kInvalidData, "irrep does not map identity to I");
    for (int g = 0; g < d; ++g) {
      const CMat prod = ir.mats[g].mul(ir.mats[g].adjoint());
      if (prod.max_abs_diff(CMat::eye(ir.dim)) > kReprTol)
        throw Error(ErrorCode::kInvalidData, "non-unitary representation matrix");
    }
    // homomorphism over all pairs
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        const Elem ab = table.compose(static_cast<Elem>(a), static_cast<Elem>(b));
        if (ir.mats[a].mul(ir.mats[b]).max_abs_diff(ir.mats[ab]) > kReprTol)
          throw Error(ErrorCode::kInvalidData, "representation fails homomorphism check");
      }
    ir.trivial = true;
    if (ir.dim != 1) ir.trivial = false;
    for (int g = 0; g < d && ir.trivial; ++g)
      if (std::abs(ir.mats[g].a[0] - std::complex<double>(1.0, 0.0)) > kReprTol) ir.trivial = false;
    dim2 += ir.dim * ir.dim;
  }
  reg.complete = (dim2 == d);
}

}  // namespace

ReprRegistry load_irreps(const std::string& path, const GroupTable& table) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open representation file: " + path);
  ReprRegistry reg;
  std::string key;
  int irrep_count = 0;
  if (!(in >> key >> reg.group_name) || key != "group_name")
    throw Error(ErrorCode::kInvalidData, "expected group_name");
  if (!(in >> key >> reg.order) || key != "order")
    throw Error(ErrorCode::kInvalidData, "expected order");
  if (!(in >> key >> irrep_count) || key != "irrep_count")
    throw Error(ErrorCode::kInvalidData, "expected irrep_count");
  reg.irreps.resize(irrep_count);
  for (int i = 0; i < irrep_count; ++i) {
    Irrep& ir = reg.irreps[i];
    if (!(in >> key) || key != "irrep") throw Error(ErrorCode::kInvalidData, "expected irrep");
    if (!(in >> key >> ir.dim) || key != "dimension" || ir.dim < 1)
      throw Error(ErrorCode::kInvalidData, "expected dimension");
    ir.mats.assign(reg.order, CMat(ir.dim));
    for (int g = 0; g < reg.order; ++g) {
      int elem = -1;
      if (!(in >> key >> elem) || key != "matrix" || elem != g)
        throw Error(ErrorCode::kInvalidData, "expected matrix entries in element order");
      for (int r = 0; r < ir.dim * ir.dim; ++r) {
        double re = 0.0, im = 0.0;
        if (!(in >> re >> im)) throw Error(ErrorCode::kInvalidData, "truncated matrix data");
        ir.mats[g].a[r] = std::complex<double>(re, im);
      }
    }
  }
  validate_registry(reg, table);
  return reg;
}

double sample_operator_norm(const ReprRegistry& registry, std::span<const Elem> context,
                            int target_step) {
  if (!registry.complete)
    throw Error(ErrorCode::kInconsistent, "operator norm needs a complete registry");
  double best = 0.0;
  for (const Irrep& ir : registry.irreps) {
    if (ir.trivial) continue;
    CMat sum(ir.dim);
    for (int k = 0; k < static_cast<int>(context.size()); ++k) {
      if (k == target_step) continue;
      const CMat& lam = ir.mats[context[k]];
      for (std::size_t i = 0; i < sum.a.size(); ++i) sum.a[i] += lam.a[i];
    }
    best = std::max(best, sum.op_norm());
  }
  return best;
}

double sample_operator_norm_max(const ReprRegistry& registry, std::span<const Elem> context) {
  double best = 0.0;
  for (int l = 0; l < static_cast<int>(context.size()); ++l)
    best = std::max(best, sample_operator_norm(registry, context, l));
  return best;
}

double spectral_decay_factor(const ReprRegistry& registry) {
  if (!registry.complete)
    throw Error(ErrorCode::kInconsistent, "spectral decay factor needs a complete registry");
  double best = 0.0;
  for (const Irrep& ir : registry.irreps) {
    if (ir.trivial) continue;
    for (int g = 0; g < registry.order; ++g) {
      if (g == registry.identity) continue;
      best = std::max(best, ir.character_abs(static_cast<Elem>(g)) / double(ir.dim));
    }
  }
  return best;
}

// --- instance oracles ----------------------------------------------------------

namespace {

std::vector<GroupMeasure> step_measures(std::span<const StepLaw> laws,
                                        std::span<const Elem> context, const GroupTable& table) {
  const int L = static_cast<int>(context.size());
  if (static_cast<int>(laws.size()) != L)
    throw Error(ErrorCode::kInvalidArgument, "one law per step required");
  std::vector<GroupMeasure> mu;
  mu.reserve(L);
  for (int l = 0; l < L; ++l) mu.push_back(one_step_measure(laws[l], context, l, table));
  return mu;
}

// Evaluate (suffix * mid * prefix)(g) given dense suffix/prefix and sparse mid.
double eval_triple(const GroupMeasure& suffix, std::span<const std::pair<Elem, double>> mid,
                   const GroupMeasure& prefix, Elem g, const GroupTable& table) {
  const int d = suffix.order();
  // t(h) = (mid * prefix)(h) = sum_m w_m prefix(m^-1 h), then sum_h suffix(g h^-1) t(h)
  double acc = 0.0;
  for (int h = 0; h < d; ++h) {
    double t = 0.0;
    for (const auto& [m, w] : mid)
      t += w * prefix.p[table.compose(table.inverse(m), static_cast<Elem>(h))];
    if (t != 0.0)
      acc += suffix.p[table.compose(g, table.inverse(static_cast<Elem>(h)))] * t;
  }
  return acc;
}

}  // namespace

double success_probability(std::span<const StepLaw> laws, std::span<const Elem> context,
                           Elem y0, Elem yL, const GroupTable& table) {
  if (table.cyclic_structure())
    return cyclic_success_probability(laws, context, y0, yL, table.order());
  auto mu = step_measures(laws, context, table);
  GroupMeasure acc = mu[0];
  for (std::size_t l = 1; l < mu.size(); ++l) acc = convolve(mu[l], acc, table);
  return acc.p[target_product(table, y0, yL)];
}

double success_probability_fourier(std::span<const StepLaw> laws, std::span<const Elem> context,
                                   Elem y0, Elem yL, const GroupTable& table,
                                   const ReprRegistry& registry) {
  auto mu = step_measures(laws, context, table);
  std::vector<CMat> prod;
  prod.reserve(registry.irreps.size());
  for (const Irrep& ir : registry.irreps) {
    CMat acc = fourier_transform(mu[0], ir);
    for (std::size_t l = 1; l < mu.size(); ++l) acc = fourier_transform(mu[l], ir).mul(acc);
    prod.push_back(std::move(acc));
  }
  return inverse_at(registry, prod, target_product(table, y0, yL));
}

Posteriors posterior_probs(std::span<const StepLaw> laws, std::span<const Elem> context,
                           Elem y0, Elem yL, const GroupTable& table) {
  if (table.cyclic_structure())
    return cyclic_posterior_probs(laws, context, y0, yL, table.order());
  const int L = static_cast<int>(context.size());
  auto mu = step_measures(laws, context, table);
  const Elem gstar = target_product(table, y0, yL);

  // prefix[l] = law of u_l ∘ ... ∘ u_1 (l factors); prefix[0] = δ_e
  std::vector<GroupMeasure> prefix(L + 1), suffix(L + 2);
  prefix[0].p.assign(table.order(), 0.0);
  prefix[0].p[table.identity()] = 1.0;
  for (int l = 1; l <= L; ++l) prefix[l] = convolve(mu[l - 1], prefix[l - 1], table);
  suffix[L + 1] = prefix[0];
  for (int l = L; l >= 1; --l) suffix[l] = convolve(suffix[l + 1], mu[l - 1], table);

  Posteriors out;
  out.p_success = prefix[L].p[gstar];
  if (out.p_success <= 0.0)
    throw Error(ErrorCode::kUndefined, "posterior undefined: success probability is zero");
  out.rho1.resize(L);
  out.rho2.resize(L);
  std::vector<std::pair<Elem, double>> mid;
  for (int l = 1; l <= L; ++l) {
    mid.clear();
    mid.emplace_back(context[l - 1], laws[l - 1].p1);
    const double pa = eval_triple(suffix[l + 1], mid, prefix[l - 1], gstar, table);
    mid.clear();
    for (int k = 0; k < L; ++k)
      if (k != l - 1) mid.emplace_back(context[k], laws[l - 1].p2);
    const double pb = eval_triple(suffix[l + 1], mid, prefix[l - 1], gstar, table);
    out.rho1[l - 1] = pa / out.p_success;
    out.rho2[l - 1] = pb / out.p_success;
  }
  return out;
}

namespace {

struct RemainderBounds {
  double re, ra, rb;
};

RemainderBounds remainder_bounds(const StepLaw& law, int d, double sigma, double gamma) {
  const int L = law.horizon;
  const double delta = law.margin();
  const double dsm = std::abs(law.ctx_margin());
  const double f = 1.0 - 1.0 / double(d);
  const double dpl = delta + sigma * dsm;
  RemainderBounds rb{};
  if (L >= 1) {
    rb.re = f * (ipow(dpl, L) - ipow(delta, L) - L * sigma * dsm * ipow(delta, L - 1) +
                 double(L - 1) * double(L) * gamma * dsm * ipow(delta, L - 1));
  }
  if (L >= 2) {
    rb.ra = law.p1 * f *
            (ipow(dpl, L - 1) - ipow(delta, L - 1) - double(L - 1) * sigma * dsm * ipow(delta, L - 2) +
             double(L - 1) * double(L - 1) * gamma * dsm * ipow(delta, L - 2));
    rb.rb = law.p2 * f *
            (sigma * (ipow(dpl, L - 1) - ipow(delta, L - 1)) + double(L - 1) * gamma * ipow(delta, L - 1));
  }
  return rb;
}

}  // namespace

PosteriorReport posterior_report(const StepLaw& law, std::span<const Elem> context,
                                 Elem y0, Elem yL, const GroupTable& table,
                                 double sigma, double gamma) {
  const int d = table.order();
  const int L = static_cast<int>(context.size());
  if (law.horizon != L) throw Error(ErrorCode::kInvalidArgument, "law horizon != context size");
  if (sigma < 0.0) sigma = double(std::max(0, L - 1));  // universal ‖W_l(λ)‖ bound
  std::vector<StepLaw> laws(L, law);
  Posteriors post = posterior_probs(laws, context, y0, yL, table);

  PosteriorReport rep;
  rep.p_success = post.p_success;
  rep.rho1 = std::move(post.rho1);
  rep.rho2 = std::move(post.rho2);
  const double delta = law.margin();
  const double f = 1.0 - 1.0 / double(d);
  rep.leading_e = 1.0 / d + f * ipow(delta, L);
  rep.leading_a = law.p1 / d + f * law.p1 * ipow(delta, L - 1);
  rep.leading_b = double(L - 1) * law.p2 / d;
  const RemainderBounds rb = remainder_bounds(law, d, sigma, gamma);
  rep.bound_e = rb.re;
  rep.bound_a = rb.ra;
  rep.bound_b = rb.rb;
  return rep;
}

RewardPrediction predicted_reward(double delta, int L, int d, double delta_small, double sigma) {
  if (delta < 0.0 || delta > 1.0)
    throw Error(ErrorCode::kInvalidArgument, "margin must lie in [0, 1]");
  RewardPrediction out;
  const double f = 1.0 - 1.0 / double(d);
  out.center = 1.0 / d + f * ipow(delta, L);
  out.half_width =
      delta_small > 0.0 ? f * (ipow(delta + sigma * delta_small, L) - ipow(delta, L)) : 0.0;
  return out;
}

double exact_grad_q_instance(const StepLaw& law, std::span<const Elem> context,
                             Elem y0, Elem yL, double attn_target, double feature_b,
                             const GroupTable& table) {
  const int L = static_cast<int>(context.size());
  if (L == 1) return 0.0;  // single prompt position: attention is saturated
  std::vector<StepLaw> laws(L, law);
  const Posteriors post = posterior_probs(laws, context, y0, yL, table);
  double gap = 0.0;
  for (int l = 0; l < L; ++l)
    gap += (post.rho1[l] - law.p1) + (law.p2 - post.rho2[l] / double(L - 1));
  return attn_target * feature_b * (1.0 - attn_target) * post.p_success * gap;
}

double flat_region_bound(double delta, double delta_small, double sigma, double p1, double p2,
                         int L, int d, double attn_target, double feature_b) {
  if (L < 2) return 0.0;
  delta = std::abs(delta);
  delta_small = std::abs(delta_small);
  const double f = 1.0 - 1.0 / double(d);
  const double dpl = delta + sigma * delta_small;
  const double term_a = p1 * ipow(delta, L - 1) * (1.0 - delta) + p1 * ipow(dpl, L - 1) +
                        p1 * ipow(dpl, L);
  const double term_b = p2 * ipow(delta, L) + p2 * ipow(dpl, L) +
                        p2 * sigma * ipow(dpl, L - 1) / double(L - 1);
  return attn_target * feature_b * (1.0 - attn_target) * double(L) * f * (term_a + term_b);
}

double collision_probability(const GroupTable& table, std::span<const Elem> context,
                             Elem y0, Elem yL, std::uint64_t mc_seed) {
  const int L = static_cast<int>(context.size());
  if (L == 1) return 0.0;
  double total = std::pow(double(L), L);
  if (total <= 1e7) {
    // odometer over (G^L)^L
    std::vector<int> idx(L, 0);
    long long hits = 0, count = 0;
    while (true) {
      bool is_target = true;
      for (int l = 0; l < L && is_target; ++l) is_target = (idx[l] == l);
      if (!is_target) {
        Elem y = y0;
        for (int l = 0; l < L; ++l) y = table.act(context[idx[l]], y);
        if (y == yL) ++hits;
        ++count;
      }
      int pos = 0;
      while (pos < L && ++idx[pos] == L) idx[pos++] = 0;
      if (pos == L) break;
    }
    return count > 0 ? double(hits) / double(count) : 0.0;
  }
  std::mt19937_64 rng(mc_seed);
  std::uniform_int_distribution<int> pick(0, L - 1);
  const long long samples = 1'000'000;
  long long hits = 0, count = 0;
  std::vector<int> idx(L);
  while (count < samples) {
    bool is_target = true;
    for (int l = 0; l < L; ++l) {
      idx[l] = pick(rng);
      if (idx[l] != l) is_target = false;
    }
    if (is_target) continue;
    Elem y = y0;
    for (int l = 0; l < L; ++l) y = table.act(context[idx[l]], y);
    if (y == yL) ++hits;
    ++count;
  }
  return double(hits) / double(count);
}

// --- cyclic fast path ----------------------------------------------------------

namespace {

struct CyclicWork {
  int n;
  int L;
  std::vector<std::complex<double>> roots;  // ω^j, j in [0, n)
  std::vector<std::complex<double>> tf;     // per (step, k): μ̂_l(k), k≠0 stored at k
  int gstar;

  std::complex<double> omega(long long e) const {
    long long r = e % n;
    if (r < 0) r += n;
    return roots[static_cast<std::size_t>(r)];
  }
};

CyclicWork cyclic_setup(std::span<const StepLaw> laws, std::span<const Elem> context,
                        Elem y0, Elem yL, int n) {
  const int L = static_cast<int>(context.size());
  if (static_cast<int>(laws.size()) != L)
    throw Error(ErrorCode::kInvalidArgument, "one law per step required");
  CyclicWork w;
  w.n = n;
  w.L = L;
  w.gstar = ((int(yL) - int(y0)) % n + n) % n;
  w.roots.resize(n);
  for (int j = 0; j < n; ++j) {
    const double ang = 2.0 * std::numbers::pi * double(j) / double(n);
    w.roots[j] = std::complex<double>(std::cos(ang), std::sin(ang));
  }
  // context character sums C(k) and per-step transforms
  w.tf.assign(static_cast<std::size_t>(L) * n, {});
  std::vector<std::complex<double>> ctx_sum(n);
  for (int k = 1; k < n; ++k) {
    std::complex<double> c;
    for (int l = 0; l < L; ++l) c += w.omega(static_cast<long long>(k) * context[l]);
    ctx_sum[k] = c;
  }
  for (int l = 0; l < L; ++l) {
    laws[l].validate(n);
    const double delta = laws[l].margin();
    const double dsm = laws[l].ctx_margin();
    for (int k = 1; k < n; ++k) {
      const auto t = w.omega(static_cast<long long>(k) * context[l]);
      w.tf[static_cast<std::size_t>(l) * n + k] = delta * t + dsm * (ctx_sum[k] - t);
    }
  }
  return w;
}

}  // namespace

double cyclic_success_probability(std::span<const StepLaw> laws, std::span<const Elem> context,
                                  Elem y0, Elem yL, int n) {
  CyclicWork w = cyclic_setup(laws, context, y0, yL, n);
  std::complex<double> acc(1.0, 0.0);  // k = 0 term
  for (int k = 1; k < n; ++k) {
    std::complex<double> prod(1.0, 0.0);
    for (int l = 0; l < w.L; ++l) prod *= w.tf[static_cast<std::size_t>(l) * n + k];
    acc += prod * w.omega(-static_cast<long long>(k) * w.gstar);
  }
  return acc.real() / double(n);
}

Posteriors cyclic_posterior_probs(std::span<const StepLaw> laws, std::span<const Elem> context,
                                  Elem y0, Elem yL, int n) {
  CyclicWork w = cyclic_setup(laws, context, y0, yL, n);
  const int L = w.L;
  // prefix/suffix products over steps, per frequency k >= 1
  std::vector<std::complex<double>> pre(static_cast<std::size_t>(L + 1) * n),
      suf(static_cast<std::size_t>(L + 2) * n);
  for (int k = 1; k < n; ++k) {
    pre[k] = {1.0, 0.0};
    suf[static_cast<std::size_t>(L + 1) * n + k] = {1.0, 0.0};
  }
  for (int l = 1; l <= L; ++l)
    for (int k = 1; k < n; ++k)
      pre[static_cast<std::size_t>(l) * n + k] =
          pre[static_cast<std::size_t>(l - 1) * n + k] * w.tf[static_cast<std::size_t>(l - 1) * n + k];
  for (int l = L; l >= 1; --l)
    for (int k = 1; k < n; ++k)
      suf[static_cast<std::size_t>(l) * n + k] =
          suf[static_cast<std::size_t>(l + 1) * n + k] * w.tf[static_cast<std::size_t>(l - 1) * n + k];

  Posteriors out;
  {
    std::complex<double> acc(1.0, 0.0);
    for (int k = 1; k < n; ++k)
      acc += pre[static_cast<std::size_t>(L) * n + k] * w.omega(-static_cast<long long>(k) * w.gstar);
    out.p_success = acc.real() / double(n);
  }
  if (out.p_success <= 0.0)
    throw Error(ErrorCode::kUndefined, "posterior undefined: success probability is zero");
  out.rho1.resize(L);
  out.rho2.resize(L);
  std::vector<std::complex<double>> ctx_sum(n);
  for (int k = 1; k < n; ++k) {
    std::complex<double> c;
    for (int l = 0; l < L; ++l) c += w.omega(static_cast<long long>(k) * context[l]);
    ctx_sum[k] = c;
  }
  for (int l = 1; l <= L; ++l) {
    const double p1 = laws[l - 1].p1;
    const double p2 = laws[l - 1].p2;
    std::complex<double> acc_a(p1, 0.0), acc_b(p2 * double(L - 1), 0.0);
    for (int k = 1; k < n; ++k) {
      const auto rest = suf[static_cast<std::size_t>(l + 1) * n + k] *
                        pre[static_cast<std::size_t>(l - 1) * n + k] *
                        w.omega(-static_cast<long long>(k) * w.gstar);
      const auto t = w.omega(static_cast<long long>(k) * context[l - 1]);
      acc_a += rest * (p1 * t);
      acc_b += rest * (p2 * (ctx_sum[k] - t));
    }
    out.rho1[l - 1] = acc_a.real() / double(n) / out.p_success;
    out.rho2[l - 1] = acc_b.real() / double(n) / out.p_success;
  }
  return out;
}

}  // namespace grouprl
