#include "honestrd/bias_variance.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace honestrd {

UnbiasednessReport check_unbiasedness(const WeightSet& w, const Design& d, int p, double tol)
{
  const std::size_t n = d.size();
  double s = 0.0;
  for (double x : d.x)
    s = std::max(s, std::fabs(x));
  if (s == 0.0)
    s = 1.0;
  std::vector<double> mp(p, 0.0), mm(p, 0.0);
  double misplaced = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = d.x[i] / s;
    const bool plus = Design::on_plus_side(d.x[i]);
    misplaced = std::max(misplaced, std::fabs(plus ? w.w_minus[i] : w.w_plus[i]));
    double pw = 1.0;
    for (int j = 0; j < p; ++j, pw *= u) {
      mp[j] += w.w_plus[i] * pw;
      mm[j] += w.w_minus[i] * pw;
    }
  }
  double r = std::max({misplaced, std::fabs(mp[0] - 1.0), std::fabs(mm[0] - 1.0)});
  for (int j = 1; j < p; ++j)
    r = std::max({r, std::fabs(mp[j]), std::fabs(mm[j])});
  return {r, r <= tol};
}

double worst_case_bias_taylor(const WeightSet& w, double C, int p, const Design& d)
{
  const auto chk = check_unbiasedness(w, d, p);
  if (!chk.passed)
    throw Error(ErrorKind::InfiniteBias, "bias_variance",
                "weights violate the moment conditions (residual " +
                  format_sci(chk.residual) + ")");
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    s += std::fabs(w.combined(i)) * std::pow(std::fabs(d.x[i]), p);
  return C * s;
}

double worst_case_bias_holder2(const WeightSet& w, double C, const Design& d)
{
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    s += (w.w_plus[i] + w.w_minus[i]) * d.x[i] * d.x[i];
  return std::fabs(C * s);
}

double worst_case_bias(const WeightSet& w, const SmoothnessClass& cls, const Design& d)
{
  if (cls.family == ClassFamily::holder)
    return worst_case_bias_holder2(w, cls.C, d);
  return worst_case_bias_taylor(w, cls.C, cls.p, d);
}

double sd_known(const WeightSet& w, const Design& d)
{
  return sd_robust(w, d.sigma2);
}

double sd_robust(const WeightSet& w, const std::vector<double>& u2)
{
  double s = 0.0;
  for (std::size_t i = 0; i < u2.size(); ++i) {
    const double c = w.combined(i);
    s += c * c * u2[i];
  }
  return std::sqrt(s);
}

std::vector<double> nn_residual_variance(const Design& d, int J)
{
  if (J < 1)
    throw Error(ErrorKind::DomainError, "bias_variance", "J must be >= 1");
  const std::size_t n = d.size();
  std::vector<double> out(n, 0.0);
  for (int side = 0; side < 2; ++side) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (Design::on_plus_side(d.x[i]) == (side == 0))
        idx.push_back(i);
    if (idx.size() < static_cast<std::size_t>(J) + 1)
      throw Error(ErrorKind::TooFewNeighbors, "bias_variance",
                  "each side needs at least J+1 observations");
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return d.x[a] < d.x[b]; });
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(idx.size());
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::ptrdiff_t k = 0; k < m; ++k) {
      const double xi = d.x[idx[k]];
      cand.clear();
      std::ptrdiff_t lo = k - 1, hi = k + 1;
      // collect in distance order until the J-th distance is passed
      while (lo >= 0 || hi < m) {
        const double dl = lo >= 0 ? xi - d.x[idx[lo]] : INFINITY;
        const double dh = hi < m ? d.x[idx[hi]] - xi : INFINITY;
        const double next = std::min(dl, dh);
        if (static_cast<int>(cand.size()) >= J && next > cand[J - 1].first)
          break;
        if (dl <= dh)
          cand.emplace_back(dl, idx[lo--]);
        else
          cand.emplace_back(dh, idx[hi++]);
      }
      std::sort(cand.begin(), cand.end());
      double mean = 0.0;
      for (int l = 0; l < J; ++l)
        mean += d.y[cand[l].second];
      mean /= J;
      const double e = d.y[idx[k]] - mean;
      out[idx[k]] = J / (J + 1.0) * e * e;
    }
  }
  return out;
}

double default_pilot_bandwidth(const Design& d)
{
  double lo = INFINITY, hi = 0.0;
  for (double x : d.x) {
    lo = std::min(lo, std::fabs(x));
    hi = std::max(hi, std::fabs(x));
  }
  return 0.5 * (hi - lo);
}

namespace {

// Kernel-weighted polynomial fit of order p-1 on one side; returns squared
// residuals for points with positive kernel weight (others untouched) and the
// number of such points.
std::size_t side_fit_residuals(const Design& d, bool plus, double h, const Kernel& kernel,
                               int p, std::vector<double>& out)
{
  std::vector<std::size_t> idx;
  std::vector<double> kw;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (Design::on_plus_side(d.x[i]) != plus)
      continue;
    const double k = kernel(d.x[i] / h);
    if (k > 0.0) {
      idx.push_back(i);
      kw.push_back(k);
    }
  }
  const std::size_t m = idx.size();
  Eigen::MatrixXd X(m, p);
  Eigen::VectorXd y(m), sw(m);
  for (std::size_t r = 0; r < m; ++r) {
    const double u = d.x[idx[r]] / h;
    double pw = 1.0;
    for (int j = 0; j < p; ++j, pw *= u)
      X(r, j) = pw;
    y(r) = d.y[idx[r]];
    sw(r) = std::sqrt(kw[r]);
  }
  const Eigen::MatrixXd A = sw.asDiagonal() * X;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (static_cast<int>(m) < p || qr.rank() < p)
    throw Error(ErrorKind::SingularMomentMatrix, "bias_variance",
                std::string("too few points inside the bandwidth on the ") +
                  (plus ? "plus" : "minus") + " side");
  const Eigen::VectorXd beta = qr.solve(sw.asDiagonal() * y);
  const Eigen::VectorXd res = y - X * beta;
  for (std::size_t r = 0; r < m; ++r)
    out[idx[r]] = res(r) * res(r);
  return m;
}

} // namespace

SideVariance prelim_sigma2(const Design& d, double h_pilot, const Kernel& kernel)
{
  if (!(h_pilot > 0.0))
    throw Error(ErrorKind::NonpositiveBandwidth, "bias_variance",
                "pilot bandwidth must be positive");
  std::vector<double> r2(d.size(), 0.0);
  SideVariance v;
  for (int side = 0; side < 2; ++side) {
    const bool plus = side == 0;
    std::fill(r2.begin(), r2.end(), -1.0);
    const std::size_t m = side_fit_residuals(d, plus, h_pilot, kernel, 2, r2);
    double s = 0.0;
    for (double e : r2)
      if (e >= 0.0)
        s += e;
    (plus ? v.plus : v.minus) = s / static_cast<double>(m);
  }
  return v;
}

std::vector<double> lp_squared_residuals(const Design& d, const WeightSet& w,
                                         const Kernel& kernel, int p)
{
  std::vector<double> r2(d.size(), 0.0);
  side_fit_residuals(d, true, w.h_plus, kernel, p, r2);
  side_fit_residuals(d, false, w.h_minus, kernel, p, r2);
  return r2;
}

} // namespace honestrd
