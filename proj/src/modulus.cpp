#include "honestrd/modulus.hpp"

#include "honestrd/bias_variance.hpp"
#include "honestrd/ci.hpp"
#include "honestrd/normal.hpp"
#include "honestrd/quadrature.hpp"
#include "honestrd/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

namespace honestrd {

ModulusSolver::ModulusSolver(const Design& d, const SmoothnessClass& cls)
  : solver_(d, cls)
  , b0_(degenerate_threshold(d, cls))
{}

ModulusSolution ModulusSolver::at_b(double b, const OptimalCoefficients* warm) const
{
  ModulusSolution m;
  m.omega = 2.0 * b;
  if (b <= b0_) {
    m.coeffs.b = b;
    return m;
  }
  m.coeffs = solver_.solve_auto(b, warm);
  const double f = solver_.objective(m.coeffs);
  m.delta = 2.0 * std::sqrt(f);
  const double mass = solver_.plus_mass(m.coeffs);
  m.omega_prime = mass > 0.0 ? m.delta / (2.0 * mass) : std::numeric_limits<double>::infinity();
  const Design& d = solver_.design();
  const auto& cls = solver_.smoothness();
  m.gstar_values.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    m.gstar_values[i] = g_bC_eval(d.x[i], Design::on_plus_side(d.x[i]) ? Side::plus : Side::minus,
                                  m.coeffs, cls.C, cls.p);
  return m;
}

ModulusSolution ModulusSolver::at_delta(double delta, const ModulusSolution* warm) const
{
  if (!(delta > 0.0))
    throw Error(ErrorKind::DomainError, "modulus_efficiency", "delta must be positive");
  const Design& d = solver_.design();
  double wp = 0.0, wm = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    (Design::on_plus_side(d.x[i]) ? wp : wm) += 1.0 / d.sigma2[i];
  // delta(b) <= 2b / sqrt(1/wp + 1/wm), the C = 0 value, so b >= flat
  const double flat = 0.5 * delta * std::sqrt(1.0 / wp + 1.0 / wm);
  double lo = std::max(b0_, flat);
  double hi = std::numeric_limits<double>::infinity();
  const double start =
    warm != nullptr && warm->coeffs.b > lo ? warm->coeffs.b : b0_ + flat;
  ModulusSolution cur = at_b(start, warm != nullptr && warm->coeffs.b > b0_ ? &warm->coeffs : nullptr);
  if (cur.delta < delta) {
    double step = std::max(start - b0_, flat);
    while (cur.delta < delta) {
      lo = cur.coeffs.b;
      cur = at_b(lo + step, &cur.coeffs);
      step *= 2.0;
      if (!std::isfinite(step))
        throw Error(ErrorKind::NoConvergence, "modulus_efficiency", "cannot bracket delta");
    }
  }
  hi = cur.coeffs.b;
  // safeguarded Newton with db/ddelta = omega'/2
  for (int it = 0; it < 200; ++it) {
    const double err = cur.delta - delta;
    if (std::fabs(err) <= 1e-13 * delta)
      break;
    if (err > 0.0)
      hi = std::min(hi, cur.coeffs.b);
    else
      lo = std::max(lo, cur.coeffs.b);
    double next = cur.coeffs.b - err * 0.5 * cur.omega_prime;
    if (!(next > lo && next < hi) || !std::isfinite(next))
      next = 0.5 * (lo + hi);
    if (hi - lo <= 1e-15 * hi) {
      break;
    }
    cur = at_b(next, cur.coeffs.b > b0_ ? &cur.coeffs : nullptr);
  }
  if (std::fabs(cur.delta - delta) > 1e-8 * delta)
    throw Error(ErrorKind::NoConvergence, "modulus_efficiency",
                "delta(b) inversion did not converge");
  return cur;
}

double inverse_modulus(const Design& d, const SmoothnessClass& cls, double b)
{
  if (!(b > 0.0))
    throw Error(ErrorKind::DomainError, "modulus_efficiency", "b must be positive");
  return ModulusSolver(d, cls).at_b(b).delta;
}

ModulusSolution modulus(const Design& d, const SmoothnessClass& cls, double delta,
                        bool check_differentiability)
{
  const ModulusSolver ms(d, cls);
  auto m = ms.at_delta(delta);
  if (check_differentiability) {
    const double eps = 1e-4 * delta;
    const double left = (m.omega - ms.at_delta(delta - eps, &m).omega) / eps;
    const double right = (ms.at_delta(delta + eps, &m).omega - m.omega) / eps;
    m.nondifferentiable =
      std::fabs(left - right) > 1e-3 * std::max(std::fabs(left), std::fabs(right));
  }
  return m;
}

ModulusFn power_modulus(double scale, double r)
{
  if (!(r > 0.0 && r <= 1.0) || !(scale > 0.0))
    throw Error(ErrorKind::DomainError, "modulus_efficiency", "need 0 < r <= 1, scale > 0");
  return [scale, r](double delta) {
    return std::pair{scale * std::pow(delta, r), scale * r * std::pow(delta, r - 1.0)};
  };
}

double onesided_adaptation_efficiency(const ModulusFn& omega, double alpha, double beta)
{
  const double db = normal_quantile(beta) + normal_quantile(1.0 - alpha);
  if (!(db > 0.0))
    throw Error(ErrorKind::DomainError, "modulus_efficiency", "need z_beta + z_{1-alpha} > 0");
  const auto [w1, d1] = omega(db);
  const auto [w2, d2] = omega(2.0 * db);
  (void)d2;
  return w2 / (w1 + db * d1);
}

double flci_efficiency_numerator(const ModulusFn& omega, double alpha)
{
  static const GaussLegendre rule(201);
  const double z = normal_quantile(1.0 - alpha);
  return rule.integrate([&](double u) { return omega(2.0 * (z - u)).first * normal_pdf(u); },
                        -8.0, z);
}

double optimal_flci_half_length(const ModulusFn& omega, double alpha)
{
  auto half = [&](double delta) {
    const auto [w, dw] = omega(delta);
    const double t = std::max(0.0, 0.5 * w / dw - 0.5 * delta);
    return cv(t, alpha) * dw;
  };
  return search::grid_then_golden(half, search::log_grid(1e-4, 1e6, 201), 1e-10).f;
}

double flci_adaptation_efficiency(const ModulusFn& omega, double alpha)
{
  return flci_efficiency_numerator(omega, alpha) / (2.0 * optimal_flci_half_length(omega, alpha));
}

namespace {

ModulusFn design_modulus(const ModulusSolver& ms)
{
  auto last = std::make_shared<ModulusSolution>();
  return [&ms, last](double delta) {
    *last = ms.at_delta(delta, last->coeffs.b > ms.threshold() ? last.get() : nullptr);
    return std::pair{last->omega, last->omega_prime};
  };
}

} // namespace

double onesided_adaptation_efficiency(const Design& d, const SmoothnessClass& cls, double alpha,
                                      double beta)
{
  const ModulusSolver ms(validate_design(d), cls);
  return onesided_adaptation_efficiency(design_modulus(ms), alpha, beta);
}

double flci_adaptation_efficiency(const Design& d, const SmoothnessClass& cls, double alpha)
{
  const Design dv = validate_design(d);
  const ModulusSolver ms(dv, cls);
  const double num = flci_efficiency_numerator(design_modulus(ms), alpha);
  const auto opt = optimize_smoothing(dv, cls, PerformanceCriterion::flci(alpha),
                                      WeightSpec{WeightFamily::optimal, Kernel()});
  return num / (2.0 * opt.half_length);
}

namespace {

// Adaptive Simpson on [a, b].
template<class F>
double simpson(F&& f, double a, double b, double fa, double fm, double fb, double whole,
               double tol, int depth)
{
  const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template<class F>
double integrate_simpson(F&& f, double a, double b, double tol)
{
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50);
}

} // namespace

AsymptoticEfficiency asymptotic_efficiencies(double r, double alpha, double beta)
{
  if (!(r > 0.0 && r <= 1.0))
    throw Error(ErrorKind::DomainError, "modulus_efficiency", "r must lie in (0, 1]");
  (void)beta;
  AsymptoticEfficiency e;
  e.onesided = std::pow(2.0, r) / (1.0 + r);

  // E[(z - Z)^r ; Z <= z] with t = z - Z on [0, z + 8]
  const double z = normal_quantile(1.0 - alpha);
  const double moment =
    integrate_simpson([&](double t) { return std::pow(t, r) * normal_pdf(z - t); }, 0.0, z + 8.0,
                      1e-13);
  double inf = cv(0.0, alpha);
  if (r < 1.0) {
    const double slope = 0.5 * (1.0 / r - 1.0);
    auto g = [&](double delta) { return cv(slope * delta, alpha) * std::pow(delta, r - 1.0); };
    // the minimizer sits near delta ~ 1/slope; scan two decades either side
    const double c = 1.0 / slope;
    inf = search::grid_then_golden(g, search::log_grid(1e-3 * c, 1e3 * c, 121), 1e-10).f;
  }
  e.flci = std::pow(2.0, r) * moment / (2.0 * r * inf);
  return e;
}

double coverage_calibration_C(const Design& d, const WeightSet& w, double alpha_nominal,
                              double alpha_true, int p)
{
  const double t = cv_inverse(normal_quantile(1.0 - alpha_nominal / 2.0), alpha_true);
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    s += std::fabs(w.combined(i)) * std::pow(std::fabs(d.x[i]), p);
  if (!(s > 0.0))
    throw Error(ErrorKind::DomainError, "modulus_efficiency",
                "weights carry no bias sensitivity");
  return t * sd_known(w, d) / s;
}

} // namespace honestrd
