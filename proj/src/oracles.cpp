#include "grouprl/oracles.hpp"

namespace grouprl::oracle {

namespace {

double step_prob(const StepLaw& law, std::span<const Elem> context, int step,
                 const GroupTable& table, Elem from, Elem to) {
  // action u with u(from) = to
  const Elem u = table.compose(to, table.inverse(from));
  if (u == context[step]) return law.p1;
  for (int k = 0; k < static_cast<int>(context.size()); ++k)
    if (k != step && context[k] == u) return law.p2;
  return law.p3;
}

}  // namespace

double enumerate_success(std::span<const StepLaw> laws, std::span<const Elem> context,
                         Elem y0, Elem yL, const GroupTable& table) {
  const int L = static_cast<int>(context.size());
  const int d = table.order();
  std::vector<int> v(L > 1 ? L - 1 : 0, 0);  // intermediate states v_1..v_{L-1}
  double total = 0.0;
  for (;;) {
    double p = 1.0;
    Elem prev = y0;
    for (int l = 0; l < L - 1; ++l) {
      p *= step_prob(laws[l], context, l, table, prev, static_cast<Elem>(v[l]));
      prev = static_cast<Elem>(v[l]);
    }
    p *= step_prob(laws[L - 1], context, L - 1, table, prev, yL);
    total += p;
    int pos = 0;
    while (pos < L - 1 && ++v[pos] == d) v[pos++] = 0;
    if (pos == L - 1) break;
  }
  return total;
}

EnumeratedPosteriors enumerate_posteriors(std::span<const StepLaw> laws,
                                          std::span<const Elem> context, Elem y0, Elem yL,
                                          const GroupTable& table) {
  const int L = static_cast<int>(context.size());
  const int d = table.order();
  EnumeratedPosteriors out;
  out.rho1.assign(L, 0.0);
  out.rho2.assign(L, 0.0);
  std::vector<int> v(L > 1 ? L - 1 : 0, 0);
  for (;;) {
    double p = 1.0;
    Elem prev = y0;
    std::vector<Elem> actions(L);
    for (int l = 0; l < L; ++l) {
      const Elem to = (l == L - 1) ? yL : static_cast<Elem>(v[l]);
      actions[l] = table.compose(to, table.inverse(prev));
      p *= step_prob(laws[l], context, l, table, prev, to);
      prev = to;
    }
    out.p_success += p;
    for (int l = 0; l < L; ++l) {
      if (actions[l] == context[l]) {
        out.rho1[l] += p;
      } else {
        for (int k = 0; k < L; ++k)
          if (k != l && context[k] == actions[l]) {
            out.rho2[l] += p;
            break;
          }
      }
    }
    int pos = 0;
    while (pos < L - 1 && ++v[pos] == d) v[pos++] = 0;
    if (pos == L - 1 || L == 1) break;
  }
  if (out.p_success > 0.0) {
    for (int l = 0; l < L; ++l) {
      out.rho1[l] /= out.p_success;
      out.rho2[l] /= out.p_success;
    }
  }
  return out;
}

double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace grouprl::oracle
