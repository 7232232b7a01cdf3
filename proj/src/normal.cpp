#include "honestrd/normal.hpp"

#include "honestrd/core.hpp"

#include <cmath>
#include <numbers>

namespace honestrd {

double normal_pdf(double z)
{
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z)
{
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

namespace {

// Wichura (1988), algorithm AS241, PPND16.
double as241(double p)
{
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                 67265.770927008700853) * r + 45921.953931549871457) * r +
               13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((5226.495278852545925 * r + 28729.085735721942674) * r +
                 39307.89580009271061) * r + 21213.794301586595867) * r +
               5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0 ? -val : val;
}

// P(|Z + b| > c), written with lower tails to keep precision for large c.
double folded_tail(double c, double b)
{
  return normal_cdf(-c - b) + normal_cdf(b - c);
}

} // namespace

double normal_quantile(double p)
{
  if (!(p > 0.0 && p < 1.0))
    throw Error(ErrorKind::DomainError, "critical_values",
                "quantile requires 0 < p < 1");
  double z = as241(p);
  // one Newton polish; AS241 is already good to ~1e-16 relative
  const double f = p < 0.5 ? normal_cdf(z) - p : (1.0 - p) - normal_cdf(-z);
  const double dens = normal_pdf(z);
  if (dens > 0.0)
    z -= f / dens;
  return z;
}

double cv(double b, double alpha)
{
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorKind::DomainError, "critical_values", "alpha must lie in (0,1)");
  if (!(b >= 0.0) || !std::isfinite(b))
    throw Error(ErrorKind::DomainError, "critical_values", "b must be finite and >= 0");
  const double z = normal_quantile(1.0 - alpha / 2.0);
  double lo = std::max(b, z) - 1.0;
  double hi = b + z + 1.0;
  if (lo < 0.0)
    lo = 0.0;
  // tail is decreasing in c
  while (hi - lo > 1e-11 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (folded_tail(mid, b) > alpha)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double cv_inverse(double c, double alpha)
{
  if (c <= cv(0.0, alpha))
    return 0.0;
  // cv(t) lies in [t + z_{1-alpha} - eps, t + z_{1-alpha/2}], so c - z_{1-alpha/2} <= t <= c
  double lo = std::max(0.0, c - normal_quantile(1.0 - alpha / 2.0));
  double hi = c;
  while (folded_tail(c, hi) < alpha)
    hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    // P(|Z+t| > c) grows with t
    if (folded_tail(c, mid) < alpha)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace honestrd
