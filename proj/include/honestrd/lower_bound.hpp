#pragma once

#include "honestrd/core.hpp"

namespace honestrd {

//! Three adjacent intervals [a0,a1), [a1,a2), [a2,a3) in |x| on one side.
struct IntervalScheme
{
  double a0 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  Side side = Side::plus;
};

struct CurvatureStat
{
  double Z = 0.0;
  double tau = 0.0;
  double lambda = 0.0;
  int n1 = 0, n2 = 0, n3 = 0;
};

//! Second-difference statistic of interval means, scaled so that |E Z| is
//! at most C when the side's function is in the order-2 Taylor class.
//! Uses d.sigma2 for tau.
CurvatureStat curvature_stat(const Design& d, const IntervalScheme& scheme);

//! mu solving |Z/tau| = cv_alpha(mu/tau); 0 if |Z/tau| <= cv_alpha(0).
double lower_ci_C(const CurvatureStat& stat, double alpha);

//! a0 = 0 and obs_per_interval points in each of the first two intervals;
//! the remainder goes to the outermost interval.
IntervalScheme default_scheme(const Design& d, Side side, int obs_per_interval = 100);

} // namespace honestrd
