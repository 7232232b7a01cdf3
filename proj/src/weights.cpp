#include "honestrd/weights.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace honestrd {

namespace {

double soft(double t, double lambda)
{
  if (t > lambda)
    return t - lambda;
  if (t < -lambda)
    return t + lambda;
  return 0.0;
}

bool on_side(double x, Side s)
{
  return (s == Side::plus) == Design::on_plus_side(x);
}

// Intercept weights of a weighted polynomial fit of order p-1 on one side.
// kw are nonnegative fitting weights; points with kw == 0 get weight 0.
std::vector<double> intercept_weights(const Design& d, Side side, const std::vector<double>& kw,
                                      double scale, int p, const char* module)
{
  const std::size_t n = d.size();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd r(p);
  std::vector<double> distinct;
  for (std::size_t i = 0; i < n; ++i) {
    if (!on_side(d.x[i], side) || kw[i] <= 0.0)
      continue;
    distinct.push_back(d.x[i]);
    const double u = d.x[i] / scale;
    r(0) = 1.0;
    for (int j = 1; j < p; ++j)
      r(j) = r(j - 1) * u;
    M.noalias() += kw[i] * r * r.transpose();
  }
  std::sort(distinct.begin(), distinct.end());
  const auto nd = std::unique(distinct.begin(), distinct.end()) - distinct.begin();
  if (nd < p)
    throw Error(ErrorKind::SingularMomentMatrix, module,
                std::string(side == Side::plus ? "plus" : "minus") + " side has " +
                  std::to_string(nd) + " support points, need " + std::to_string(p));
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (lu.rank() < p)
    throw Error(ErrorKind::SingularMomentMatrix, module, "moment matrix is rank deficient");
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(p);
  e1(0) = 1.0;
  // M is symmetric, so e1' M^{-1} = (M^{-1} e1)'
  const Eigen::VectorXd a = lu.solve(e1);

  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!on_side(d.x[i], side) || kw[i] <= 0.0)
      continue;
    const double u = d.x[i] / scale;
    double v = 0.0, pw = 1.0;
    for (int j = 0; j < p; ++j, pw *= u)
      v += a(j) * pw;
    w[i] = kw[i] * v;
  }
  return w;
}

double side_scale(const Design& d, Side side)
{
  double s = 0.0;
  for (double x : d.x)
    if (on_side(x, side))
      s = std::max(s, std::fabs(x));
  return s > 0.0 ? s : 1.0;
}

} // namespace

WeightSet lp_weights(const Design& d, double h_plus, double h_minus, const Kernel& kernel,
                     int p)
{
  if (!(h_plus > 0.0) || !(h_minus > 0.0))
    throw Error(ErrorKind::NonpositiveBandwidth, "weights", "bandwidths must be positive");
  if (p < 1)
    throw Error(ErrorKind::DomainError, "weights", "order p must be >= 1");
  const std::size_t n = d.size();
  std::vector<double> kp(n, 0.0), km(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (Design::on_plus_side(d.x[i]))
      kp[i] = kernel(d.x[i] / h_plus);
    else
      km[i] = kernel(d.x[i] / h_minus);
  }
  WeightSet w;
  w.w_plus = intercept_weights(d, Side::plus, kp, h_plus, p, "weights");
  w.w_minus = intercept_weights(d, Side::minus, km, h_minus, p, "weights");
  w.h_plus = h_plus;
  w.h_minus = h_minus;
  w.family = WeightFamily::local_polynomial;
  w.kernel = kernel.type();
  return w;
}

std::vector<double> lp_side_weights(const Design& d, Side side, double h, const Kernel& kernel,
                                    int p)
{
  if (!(h > 0.0))
    throw Error(ErrorKind::NonpositiveBandwidth, "weights", "bandwidth must be positive");
  std::vector<double> k(d.size(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i)
    if (on_side(d.x[i], side))
      k[i] = kernel(d.x[i] / h);
  return intercept_weights(d, side, k, h, p, "weights");
}

WeightSet gls_weights(const Design& d, int p)
{
  const std::size_t n = d.size();
  std::vector<double> prec(n);
  for (std::size_t i = 0; i < n; ++i)
    prec[i] = 1.0 / d.sigma2[i];
  WeightSet w;
  w.w_plus = intercept_weights(d, Side::plus, prec, side_scale(d, Side::plus), p, "weights");
  w.w_minus = intercept_weights(d, Side::minus, prec, side_scale(d, Side::minus), p, "weights");
  w.h_plus = std::numeric_limits<double>::infinity();
  w.h_minus = std::numeric_limits<double>::infinity();
  w.family = WeightFamily::optimal;
  return w;
}

double g_bC_eval(double x, Side side, const OptimalCoefficients& c, double C, int p)
{
  const double lambda = C * std::pow(std::fabs(x), p);
  const auto& dj = side == Side::plus ? c.d_plus : c.d_minus;
  double t = side == Side::plus ? c.b - c.b_minus : c.b_minus;
  double pw = 1.0;
  for (std::size_t j = 0; j < dj.size(); ++j) {
    pw *= x;
    t += dj[j] * pw;
  }
  return side == Side::plus ? soft(t, lambda) : -soft(t, lambda);
}

double inverse_modulus_objective(const Design& d, const SmoothnessClass& cls,
                                 const OptimalCoefficients& c)
{
  double f = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Side s = Design::on_plus_side(d.x[i]) ? Side::plus : Side::minus;
    const double g = g_bC_eval(d.x[i], s, c, cls.C, cls.p);
    f += g * g / d.sigma2[i];
  }
  return f;
}

OptimalSolver::OptimalSolver(const Design& d, const SmoothnessClass& cls)
  : d_(d)
  , cls_(cls)
{
  if (cls.family != ClassFamily::taylor)
    throw Error(ErrorKind::DomainError, "weights", "optimal weights need the Taylor class");
  cls.validate();
  const std::size_t n = d.size();
  scale_ = 0.0;
  for (double x : d.x)
    scale_ = std::max(scale_, std::fabs(x));
  if (scale_ == 0.0)
    scale_ = 1.0;
  u_.resize(n);
  lambda_.resize(n);
  prec_.resize(n);
  plus_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    u_[i] = d.x[i] / scale_;
    lambda_[i] = cls.C * std::pow(std::fabs(d.x[i]), cls.p);
    prec_[i] = 1.0 / d.sigma2[i];
    plus_[i] = Design::on_plus_side(d.x[i]);
  }
}

double OptimalSolver::objective(const OptimalCoefficients& c) const
{
  return inverse_modulus_objective(d_, cls_, c);
}

double OptimalSolver::plus_mass(const OptimalCoefficients& c) const
{
  double s = 0.0;
  for (std::size_t i = 0; i < d_.size(); ++i)
    if (plus_[i])
      s += g_bC_eval(d_.x[i], Side::plus, c, cls_.C, cls_.p) * prec_[i];
  return s;
}

OptimalCoefficients OptimalSolver::solve_p1(double b) const
{
  if (cls_.p != 1)
    throw Error(ErrorKind::DomainError, "weights", "closed form applies to p = 1 only");
  if (!(b > 0.0))
    throw Error(ErrorKind::DomainError, "weights", "b must be positive");
  const double C = cls_.C;
  const std::size_t n = d_.size();
  OptimalCoefficients c;
  c.b = b;
  if (C == 0.0) {
    // no thresholding: g is flat on each side, balance the precision masses
    double wp = 0.0, wm = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      (plus_[i] ? wp : wm) += prec_[i];
    c.b_minus = b * wp / (wp + wm);
    return c;
  }
  // In units of b_plus = C h_plus: phi(a) = sum_+ (a - C x)_+ / s2 - sum_- (b - a - C|x|)_+ / s2
  auto phi = [&](double a) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (plus_[i])
        s += std::max(0.0, a - lambda_[i]) * prec_[i];
      else
        s -= std::max(0.0, b - a - lambda_[i]) * prec_[i];
    }
    return s;
  };
  double lo = 0.0, hi = b;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    if (phi(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  // phi is piecewise linear; finish with the linear interpolant on the bracket
  const double flo = phi(lo), fhi = phi(hi);
  double a = 0.5 * (lo + hi);
  if (fhi > flo)
    a = std::clamp(lo - flo * (hi - lo) / (fhi - flo), lo, hi);
  c.b_minus = b - a;
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (plus_[i])
      mass += std::max(0.0, a - lambda_[i]) * prec_[i];
  if (!(mass > 0.0))
    throw Error(ErrorKind::DegenerateWeights, "weights",
                "b is at or below the degenerate threshold: every point is thresholded");
  c.residual = std::fabs(phi(a)) / mass;
  return c;
}

OptimalCoefficients OptimalSolver::solve(double b, const OptimalCoefficients* warm) const
{
  if (!(b > 0.0))
    throw Error(ErrorKind::DomainError, "weights", "b must be positive");
  const int p = cls_.p;
  const int m = 2 * p - 1;
  const std::size_t n = d_.size();

  Eigen::VectorXd th = Eigen::VectorXd::Zero(m);
  if (warm != nullptr && warm->b > 0.0 && static_cast<int>(warm->d_plus.size()) == p - 1) {
    const double ratio = b / warm->b;
    th(0) = warm->b_minus * ratio;
    double pw = 1.0;
    for (int j = 1; j < p; ++j) {
      pw *= scale_;
      th(j) = warm->d_plus[j - 1] * pw * ratio;
      th(p - 1 + j) = warm->d_minus[j - 1] * pw * ratio;
    }
  } else {
    th(0) = 0.5 * b;
  }

  std::vector<double> t(n);
  Eigen::VectorXd a(m);
  auto fill_row = [&](std::size_t i) {
    a.setZero();
    double pw = 1.0;
    if (plus_[i]) {
      a(0) = -1.0;
      for (int j = 1; j < p; ++j) {
        pw *= u_[i];
        a(j) = pw;
      }
    } else {
      a(0) = 1.0;
      for (int j = 1; j < p; ++j) {
        pw *= u_[i];
        a(p - 1 + j) = pw;
      }
    }
  };
  auto eval = [&](const Eigen::VectorXd& v) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double ti = plus_[i] ? b - v(0) : v(0);
      double pw = 1.0;
      const int off = plus_[i] ? 0 : p - 1;
      for (int j = 1; j < p; ++j) {
        pw *= u_[i];
        ti += v(off + j) * pw;
      }
      t[i] = ti;
      const double s = soft(ti, lambda_[i]);
      f += s * s * prec_[i];
    }
    return f;
  };

  Eigen::VectorXd grad(m), step(m), trial(m);
  Eigen::MatrixXd H(m, m);
  double wsum = 0.0;
  for (double w : prec_)
    wsum += w;
  // below this the objective is zero up to rounding (degenerate region)
  const double negligible = 1e-26 * b * b * wsum;
  double f = eval(th);
  double resid = std::numeric_limits<double>::infinity();
  double mass = 0.0;
  int stalled = 0;
  int it = 0;
  const int max_iter = 500;
  for (; it < max_iter; ++it) {
    grad.setZero();
    H.setZero();
    mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = soft(t[i], lambda_[i]);
      if (s == 0.0 && lambda_[i] > 0.0)
        continue;
      fill_row(i);
      grad.noalias() += (2.0 * s * prec_[i]) * a;
      H.noalias() += (2.0 * prec_[i]) * a * a.transpose();
      if (plus_[i])
        mass += s * prec_[i];
    }
    if (f <= negligible) {
      f = 0.0;
      resid = 0.0;
      break;
    }
    resid = 0.5 * grad.lpNorm<Eigen::Infinity>() / std::max(mass, 1e-300);
    if (resid <= 1e-13 || f == 0.0)
      break;

    const double ridge = 1e-14 * std::max(H.diagonal().maxCoeff(), 1e-300);
    H.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    step = -ldlt.solve(grad);
    double slope = grad.dot(step);
    if (ldlt.info() != Eigen::Success || !step.allFinite() || !(slope < 0.0)) {
      step = -grad / std::max(H.diagonal().maxCoeff(), 1e-300);
      slope = grad.dot(step);
    }
    // predicted decrease below rounding in f: the line search can't see it
    if (-slope <= 1e-12 * f) {
      th += step;
      f = eval(th);
      if (++stalled >= 5)
        break;
      continue;
    }
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      trial = th + alpha * step;
      const double ft = eval(trial);
      if (ft <= f + 1e-4 * alpha * slope) {
        stalled = ft >= f ? stalled + 1 : 0;
        th = trial;
        f = ft;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted || stalled >= 3) {
      eval(th);
      break;
    }
  }
  if (f > 0.0)
    f = eval(th);

  OptimalCoefficients c;
  c.b = b;
  c.b_minus = th(0);
  c.d_plus.resize(p - 1);
  c.d_minus.resize(p - 1);
  double pw = 1.0;
  for (int j = 1; j < p; ++j) {
    pw *= scale_;
    c.d_plus[j - 1] = th(j) / pw;
    c.d_minus[j - 1] = th(p - 1 + j) / pw;
  }
  c.iterations = it;
  c.residual = resid;
  // rounding in t_i limits the attainable residual when the plus mass is small
  const double floor = 1e3 * std::numeric_limits<double>::epsilon() * b * wsum /
                       std::max(mass, 1e-300);
  if (!(resid <= std::max(1e-8, floor)) && f > 0.0)
    throw Error(ErrorKind::NoConvergence, "weights",
                "optimal coefficient solve stalled, residual " + format_sci(resid));
  return c;
}

OptimalCoefficients OptimalSolver::solve_auto(double b, const OptimalCoefficients* warm) const
{
  if (cls_.p == 1)
    return solve_p1(b);
  return solve(b, warm);
}

OptimalCoefficients solve_optimal_coefficients(const Design& d, const SmoothnessClass& cls,
                                               double b)
{
  return OptimalSolver(d, cls).solve_auto(b);
}

OptimalCoefficients solve_optimal_coefficients_convex(const Design& d,
                                                      const SmoothnessClass& cls, double b,
                                                      const OptimalCoefficients* warm)
{
  return OptimalSolver(d, cls).solve(b, warm);
}

WeightSet weights_from_coefficients(const Design& d, const SmoothnessClass& cls,
                                    const OptimalCoefficients& c)
{
  const std::size_t n = d.size();
  WeightSet w;
  w.w_plus.assign(n, 0.0);
  w.w_minus.assign(n, 0.0);
  double sp = 0.0, sm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (Design::on_plus_side(d.x[i])) {
      w.w_plus[i] = g_bC_eval(d.x[i], Side::plus, c, cls.C, cls.p) / d.sigma2[i];
      sp += w.w_plus[i];
    } else {
      w.w_minus[i] = g_bC_eval(d.x[i], Side::minus, c, cls.C, cls.p) / d.sigma2[i];
      sm += w.w_minus[i];
    }
  }
  if (!(sp > 0.0) || !(sm < 0.0))
    throw Error(ErrorKind::DegenerateWeights, "weights",
                "least-favorable function vanishes on a side");
  for (std::size_t i = 0; i < n; ++i) {
    w.w_plus[i] /= sp;
    w.w_minus[i] /= sm;
  }
  w.family = WeightFamily::optimal;
  if (cls.C > 0.0) {
    w.h_plus = std::pow(std::max(0.0, c.b - c.b_minus) / cls.C, 1.0 / cls.p);
    w.h_minus = std::pow(std::max(0.0, c.b_minus) / cls.C, 1.0 / cls.p);
  } else {
    w.h_plus = w.h_minus = std::numeric_limits<double>::infinity();
  }
  return w;
}

WeightSet optimal_weights(const Design& d, const SmoothnessClass& cls, double b)
{
  if (cls.family != ClassFamily::taylor)
    throw Error(ErrorKind::DomainError, "weights", "optimal weights need the Taylor class");
  if (cls.C == 0.0)
    return gls_weights(d, cls.p);
  return weights_from_coefficients(d, cls, solve_optimal_coefficients(d, cls, b));
}

double degenerate_threshold(const Design& d, const SmoothnessClass& cls)
{
  if (cls.C == 0.0)
    return 0.0;
  double minp = std::numeric_limits<double>::infinity();
  double minm = minp;
  double smax = 0.0;
  for (double x : d.x) {
    double& m = Design::on_plus_side(x) ? minp : minm;
    m = std::min(m, std::fabs(x));
    smax = std::max(smax, std::fabs(x));
  }
  if (cls.p == 1)
    return cls.C * (minp + minm);

  OptimalSolver solver(d, cls);
  double wplus = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (Design::on_plus_side(d.x[i]))
      wplus += 1.0 / d.sigma2[i];
  auto degenerate = [&](double b) {
    const auto c = solver.solve(b);
    return solver.plus_mass(c) <= 1e-12 * b * wplus;
  };
  // the threshold is at least the p = 1 style value with the polynomial terms at zero
  double lo = cls.C * (std::pow(minp, cls.p) + std::pow(minm, cls.p));
  double hi = std::max(2.0 * lo, cls.C * std::pow(smax, cls.p));
  while (degenerate(hi)) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 60 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (degenerate(mid) ? lo : hi) = mid;
  }
  return lo;
}

} // namespace honestrd
