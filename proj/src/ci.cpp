#include "honestrd/ci.hpp"

#include "honestrd/bias_variance.hpp"
#include "honestrd/normal.hpp"
#include "honestrd/search.hpp"
#include "honestrd/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace honestrd {

double one_sided_ci(double estimate, double maxbias, double sd, double alpha)
{
  return estimate - maxbias - sd * normal_quantile(1.0 - alpha);
}

FixedLengthCI flci(double estimate, double maxbias, double sd, double alpha)
{
  FixedLengthCI ci;
  // cv(b/s) s -> b as s -> 0
  ci.half_length = sd > 0.0 ? cv(maxbias / sd, alpha) * sd : maxbias;
  ci.lower = estimate - ci.half_length;
  ci.upper = estimate + ci.half_length;
  return ci;
}

double criterion_from(double maxbias, double sd, const PerformanceCriterion& crit)
{
  switch (crit.kind) {
    case CriterionKind::flci_length:
      return 2.0 * (sd > 0.0 ? cv(maxbias / sd, crit.alpha) * sd : maxbias);
    case CriterionKind::excess_length_quantile:
      return 2.0 * maxbias +
             sd * (normal_quantile(1.0 - crit.alpha) + normal_quantile(crit.beta));
    case CriterionKind::worst_case_mse:
      return maxbias * maxbias + sd * sd;
  }
  return std::numeric_limits<double>::infinity();
}

CriterionValue criterion_value(const WeightSet& w, const SmoothnessClass& cls, const Design& d,
                               const PerformanceCriterion& crit)
{
  return {crit.kind, criterion_from(worst_case_bias(w, cls, d), sd_known(w, d), crit)};
}

WeightSpec WeightSpec::parse(const std::string& s)
{
  if (s == "optimal")
    return {WeightFamily::optimal, Kernel(KernelType::triangular)};
  if (s.rfind("lp:", 0) == 0)
    return {WeightFamily::local_polynomial, Kernel::parse(s.substr(3))};
  throw Error(ErrorKind::DomainError, "ci_construction", "unknown weight family '" + s + "'");
}

std::string WeightSpec::name() const
{
  return family == WeightFamily::optimal ? "optimal" : "lp:" + kernel.name();
}

VarianceSpec VarianceSpec::parse(const std::string& s)
{
  VarianceSpec v;
  if (s == "known") {
    v.mode = VarianceMode::known;
  } else if (s == "ehw") {
    v.mode = VarianceMode::ehw;
  } else if (s.rfind("nn:", 0) == 0) {
    v.mode = VarianceMode::nearest_neighbor;
    try {
      std::size_t pos = 0;
      v.neighbors = std::stoi(s.substr(3), &pos);
      if (pos != s.size() - 3)
        throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw Error(ErrorKind::DomainError, "ci_construction", "bad neighbor count in '" + s + "'");
    }
    if (v.neighbors < 1)
      throw Error(ErrorKind::DomainError, "ci_construction", "J must be >= 1");
  } else {
    throw Error(ErrorKind::DomainError, "ci_construction", "unknown variance mode '" + s + "'");
  }
  return v;
}

std::string VarianceSpec::name() const
{
  switch (mode) {
    case VarianceMode::known: return "known";
    case VarianceMode::ehw: return "ehw";
    case VarianceMode::nearest_neighbor: return "nn:" + std::to_string(neighbors);
  }
  return "known";
}

EstimateReport make_report(const WeightSet& w, const SmoothnessClass& cls, const Design& d,
                           const PerformanceCriterion& crit, double sd)
{
  EstimateReport r;
  r.estimate = w.estimate(d.y);
  r.maxbias = worst_case_bias(w, cls, d);
  r.sd = sd;
  const auto two = flci(r.estimate, r.maxbias, sd, crit.alpha);
  r.half_length = two.half_length;
  r.ci_lower = two.lower;
  r.ci_upper = two.upper;
  const double margin = r.maxbias + sd * normal_quantile(1.0 - crit.alpha);
  r.onesided_lower = r.estimate - margin;
  r.onesided_upper = r.estimate + margin;
  r.h_plus = w.h_plus;
  r.h_minus = w.h_minus;
  r.criterion_kind = crit.kind;
  r.criterion_value = criterion_from(r.maxbias, sd, crit);
  r.weights = w;
  return r;
}

namespace {

constexpr int grid_size = 60;

struct SideStats
{
  double bias = 0.0; // Taylor: sum |w||x|^p; Holder: sum w x^2
  double var = 0.0;
  bool ok = false;
};

SideStats side_stats(const Design& d, Side side, double h, const Kernel& kernel,
                     const SmoothnessClass& cls)
{
  SideStats s;
  std::vector<double> w;
  try {
    w = lp_side_weights(d, side, h, kernel, cls.p);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SingularMomentMatrix)
      return s;
    throw;
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (w[i] == 0.0)
      continue;
    if (cls.family == ClassFamily::holder)
      s.bias += w[i] * d.x[i] * d.x[i];
    else
      s.bias += std::fabs(w[i]) * std::pow(std::fabs(d.x[i]), cls.p);
    s.var += w[i] * w[i] * d.sigma2[i];
  }
  s.ok = true;
  return s;
}

double combine(const SideStats& a, const SideStats& b, const SmoothnessClass& cls,
               const PerformanceCriterion& crit)
{
  if (!a.ok || !b.ok)
    return std::numeric_limits<double>::infinity();
  const double bias = cls.family == ClassFamily::holder ? std::fabs(cls.C * (a.bias + b.bias))
                                                        : cls.C * (a.bias + b.bias);
  return criterion_from(bias, std::sqrt(a.var + b.var), crit);
}

std::vector<double> side_grid(const Design& d, Side side, int p)
{
  std::vector<double> ax;
  for (double x : d.x)
    if (Design::on_plus_side(x) == (side == Side::plus))
      ax.push_back(std::fabs(x));
  std::sort(ax.begin(), ax.end());
  const std::size_t k = std::min<std::size_t>(2 * p, ax.size()) - 1;
  return search::log_grid(std::max(ax[k], 1e-300), ax.back(), grid_size);
}

EstimateReport optimize_lp(const Design& d, const SmoothnessClass& cls,
                           const PerformanceCriterion& crit, const Kernel& kernel)
{
  const auto gp = side_grid(d, Side::plus, cls.p);
  const auto gm = side_grid(d, Side::minus, cls.p);
  std::vector<SideStats> sp(gp.size()), sm(gm.size());
  for (std::size_t i = 0; i < gp.size(); ++i)
    sp[i] = side_stats(d, Side::plus, gp[i], kernel, cls);
  for (std::size_t j = 0; j < gm.size(); ++j)
    sm[j] = side_stats(d, Side::minus, gm[j], kernel, cls);

  double best = std::numeric_limits<double>::infinity();
  int bi = -1, bj = -1;
  for (int i = static_cast<int>(gp.size()) - 1; i >= 0; --i)
    for (int j = static_cast<int>(gm.size()) - 1; j >= 0; --j) {
      const double v = combine(sp[i], sm[j], cls, crit);
      if (v < best) {
        best = v;
        bi = i;
        bj = j;
      }
    }
  if (bi < 0)
    throw Error(ErrorKind::OptimizationFailed, "ci_construction",
                "no bandwidth admits enough support points on both sides");

  double hp = gp[bi], hm = gm[bj];
  SideStats cp = sp[bi], cm = sm[bj];
  auto bracket = [](const std::vector<double>& g, double h) {
    const auto it = std::lower_bound(g.begin(), g.end(), h);
    const std::size_t k = static_cast<std::size_t>(it - g.begin());
    return std::pair{g[k > 0 ? k - 1 : 0], g[std::min(k + 1, g.size() - 1)]};
  };
  for (int sweep = 0; sweep < 2; ++sweep) {
    {
      const auto [lo, hi] = bracket(gp, hp);
      const auto m = search::golden_log(
        [&](double h) { return combine(side_stats(d, Side::plus, h, kernel, cls), cm, cls, crit); },
        lo, hi);
      if (m.f < best) {
        best = m.f;
        hp = m.x;
        cp = side_stats(d, Side::plus, hp, kernel, cls);
      }
    }
    {
      const auto [lo, hi] = bracket(gm, hm);
      const auto m = search::golden_log(
        [&](double h) { return combine(cp, side_stats(d, Side::minus, h, kernel, cls), cls, crit); },
        lo, hi);
      if (m.f < best) {
        best = m.f;
        hm = m.x;
        cm = side_stats(d, Side::minus, hm, kernel, cls);
      }
    }
  }
  const auto w = lp_weights(d, hp, hm, kernel, cls.p);
  return make_report(w, cls, d, crit, sd_known(w, d));
}

EstimateReport optimize_optimal(const Design& d, const SmoothnessClass& cls,
                                const PerformanceCriterion& crit)
{
  if (cls.family != ClassFamily::taylor)
    throw Error(ErrorKind::DomainError, "ci_construction",
                "optimal weights are defined for the Taylor class");
  if (cls.C == 0.0) {
    const auto w = gls_weights(d, cls.p);
    return make_report(w, cls, d, crit, sd_known(w, d));
  }
  OptimalSolver solver(d, cls);
  double s = 0.0;
  for (double x : d.x)
    s = std::max(s, std::fabs(x));
  const double b0 = degenerate_threshold(d, cls);
  const double lo = b0 * (1.0 + 1e-4);
  const double hi = std::max(20.0 * cls.C * std::pow(s, cls.p), 4.0 * lo);

  OptimalCoefficients warm;
  bool have_warm = false;
  auto eval = [&](double b) {
    try {
      const auto c = solver.solve_auto(b, have_warm ? &warm : nullptr);
      warm = c;
      have_warm = true;
      const auto w = weights_from_coefficients(d, cls, c);
      return criterion_from(worst_case_bias_taylor(w, cls.C, cls.p, d), sd_known(w, d), crit);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::DegenerateWeights)
        return std::numeric_limits<double>::infinity();
      throw;
    }
  };
  const auto m = search::grid_then_golden(eval, search::log_grid(lo, hi, grid_size));
  if (!std::isfinite(m.f))
    throw Error(ErrorKind::OptimizationFailed, "ci_construction",
                "no admissible b in the search range");
  const auto w = weights_from_coefficients(d, cls, solver.solve_auto(m.x));
  return make_report(w, cls, d, crit, sd_known(w, d));
}

} // namespace

EstimateReport optimize_smoothing(const Design& d, const SmoothnessClass& cls,
                                  const PerformanceCriterion& crit, const WeightSpec& spec)
{
  cls.validate();
  crit.validate();
  if (spec.family == WeightFamily::optimal)
    return optimize_optimal(d, cls, crit);
  return optimize_lp(d, cls, crit, spec.kernel);
}

EstimateReport analyze(const Design& d, const SmoothnessClass& cls,
                       const PerformanceCriterion& crit, const WeightSpec& spec,
                       const VarianceSpec& var)
{
  const Design dv = validate_design(d);
  if (var.mode == VarianceMode::known)
    return optimize_smoothing(dv, cls, crit, spec);
  if (var.mode == VarianceMode::ehw && spec.family != WeightFamily::local_polynomial)
    throw Error(ErrorKind::DomainError, "ci_construction",
                "ehw variance is defined for local polynomial weights");

  const double h = var.pilot_bandwidth > 0.0 ? var.pilot_bandwidth : default_pilot_bandwidth(dv);
  const Kernel pilot_kernel =
    spec.family == WeightFamily::local_polynomial ? spec.kernel : Kernel(KernelType::triangular);
  const auto pre = prelim_sigma2(dv, h, pilot_kernel);
  double floor = 0.0;
  for (double y : dv.y)
    floor = std::max(floor, y * y);
  floor = 1e-12 * std::max(floor, 1.0);
  Design step1 = dv;
  for (std::size_t i = 0; i < dv.size(); ++i)
    step1.sigma2[i] = std::max(Design::on_plus_side(dv.x[i]) ? pre.plus : pre.minus, floor);

  const auto chosen = optimize_smoothing(step1, cls, crit, spec);
  const WeightSet& w = chosen.weights;
  const std::vector<double> u2 = var.mode == VarianceMode::nearest_neighbor
                                   ? nn_residual_variance(dv, var.neighbors)
                                   : lp_squared_residuals(dv, w, spec.kernel, cls.p);
  return make_report(w, cls, dv, crit, sd_robust(w, u2));
}

} // namespace honestrd
