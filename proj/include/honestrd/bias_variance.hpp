#pragma once

#include "honestrd/core.hpp"
#include "honestrd/kernel.hpp"

#include <vector>

namespace honestrd {

struct UnbiasednessReport
{
  double residual = 0.0;
  bool passed = false;
};

//! Max absolute residual of the 2p moment conditions (side sums equal to one,
//! side moments of order 1..p-1 equal to zero), with x rescaled by max|x| so
//! the check does not depend on the units of x. Weight placed on the wrong
//! side of the cutoff counts as residual.
UnbiasednessReport check_unbiasedness(const WeightSet& w, const Design& d, int p,
                                      double tol = 1e-9);

//! C * sum |w_i| |x_i|^p over the Taylor class. Throws InfiniteBias when the
//! weights fail the moment conditions.
double worst_case_bias_taylor(const WeightSet& w, double C, int p, const Design& d);

//! Bias at the spline Cx^2 1{x>=0} - Cx^2 1{x<0}.
double worst_case_bias_holder2(const WeightSet& w, double C, const Design& d);

double worst_case_bias(const WeightSet& w, const SmoothnessClass& cls, const Design& d);

double sd_known(const WeightSet& w, const Design& d);

//! sqrt(sum (w_plus + w_minus)^2 u2).
double sd_robust(const WeightSet& w, const std::vector<double>& u2);

//! Nearest-neighbor variance proxies using J same-side neighbors.
std::vector<double> nn_residual_variance(const Design& d, int J);

struct SideVariance
{
  double plus = 0.0;
  double minus = 0.0;
};

//! range(|x|) / 2.
double default_pilot_bandwidth(const Design& d);

//! Side-wise mean squared residual of a kernel-weighted local linear fit at
//! the cutoff, averaged over points inside the pilot bandwidth.
SideVariance prelim_sigma2(const Design& d, double h_pilot, const Kernel& kernel);

//! Squared residuals of the side-wise order p-1 kernel fits at the bandwidths
//! stored in w. Zero outside the kernel support.
std::vector<double> lp_squared_residuals(const Design& d, const WeightSet& w,
                                         const Kernel& kernel, int p);

} // namespace honestrd
