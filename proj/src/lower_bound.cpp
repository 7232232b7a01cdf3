#include "honestrd/lower_bound.hpp"

#include "honestrd/normal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace honestrd {

namespace {

bool on_side(double x, Side s)
{
  return Design::on_plus_side(x) == (s == Side::plus);
}

} // namespace

CurvatureStat curvature_stat(const Design& d, const IntervalScheme& s)
{
  if (!(s.a0 <= s.a1 && s.a1 <= s.a2 && s.a2 <= s.a3))
    throw Error(ErrorKind::DomainError, "smoothness_lower_bound",
                "interval endpoints must be ordered");
  const std::array<double, 4> a{s.a0, s.a1, s.a2, s.a3};
  std::array<double, 3> mx{}, my{}, mx2{}, ms{};
  std::array<int, 3> cnt{};
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!on_side(d.x[i], s.side))
      continue;
    const double ax = std::fabs(d.x[i]);
    for (int k = 0; k < 3; ++k) {
      if (ax >= a[k] && ax < a[k + 1]) {
        mx[k] += d.x[i];
        my[k] += d.y[i];
        mx2[k] += d.x[i] * d.x[i];
        ms[k] += d.sigma2[i];
        ++cnt[k];
        break;
      }
    }
  }
  for (int k = 0; k < 3; ++k) {
    if (cnt[k] == 0)
      throw Error(ErrorKind::EmptyInterval, "smoothness_lower_bound",
                  "interval " + std::to_string(k + 1) + " holds no observations");
    mx[k] /= cnt[k];
    my[k] /= cnt[k];
    mx2[k] /= cnt[k];
    ms[k] /= cnt[k];
  }
  if (mx[2] == mx[0])
    throw Error(ErrorKind::DegenerateDenominator, "smoothness_lower_bound",
                "outer intervals have equal mean x");
  CurvatureStat st;
  st.lambda = (mx[2] - mx[1]) / (mx[2] - mx[0]);
  const double lam = st.lambda;
  const double den = lam * mx2[0] + (1.0 - lam) * mx2[2] + mx2[1];
  if (!(den > 0.0))
    throw Error(ErrorKind::DegenerateDenominator, "smoothness_lower_bound",
                "all interval means of x^2 vanish");
  st.Z = (lam * my[0] + (1.0 - lam) * my[2] - my[1]) / den;
  const double var = lam * lam * ms[0] / cnt[0] + (1.0 - lam) * (1.0 - lam) * ms[2] / cnt[2] +
                     ms[1] / cnt[1];
  st.tau = std::sqrt(var) / den;
  st.n1 = cnt[0];
  st.n2 = cnt[1];
  st.n3 = cnt[2];
  return st;
}

double lower_ci_C(const CurvatureStat& stat, double alpha)
{
  if (!(stat.tau > 0.0))
    throw Error(ErrorKind::DomainError, "smoothness_lower_bound", "tau must be positive");
  return stat.tau * cv_inverse(std::fabs(stat.Z / stat.tau), alpha);
}

IntervalScheme default_scheme(const Design& d, Side side, int obs_per_interval)
{
  if (obs_per_interval < 2)
    throw Error(ErrorKind::DomainError, "smoothness_lower_bound",
                "need at least two observations per interval");
  std::vector<double> ax;
  for (double x : d.x)
    if (on_side(x, side))
      ax.push_back(std::fabs(x));
  const std::size_t m = static_cast<std::size_t>(obs_per_interval);
  if (ax.size() < 3 * m)
    throw Error(ErrorKind::TooFewObservations, "smoothness_lower_bound",
                "side has " + std::to_string(ax.size()) + " observations, need " +
                  std::to_string(3 * m));
  std::sort(ax.begin(), ax.end());
  IntervalScheme s;
  s.side = side;
  s.a0 = 0.0;
  s.a1 = ax[m];
  s.a2 = ax[2 * m];
  s.a3 = std::nextafter(ax.back(), std::numeric_limits<double>::infinity());
  return s;
}

} // namespace honestrd
