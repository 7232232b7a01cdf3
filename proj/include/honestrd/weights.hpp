#pragma once

#include "honestrd/core.hpp"
#include "honestrd/kernel.hpp"

#include <vector>

namespace honestrd {

//! Parameters of the least-favorable function g_{b,C}: the plus side is the
//! soft-thresholded polynomial b - b_minus + sum_j d_plus[j-1] x^j, the minus
//! side the negated soft-thresholded b_minus + sum_j d_minus[j-1] x^j.
struct OptimalCoefficients
{
  double b = 0.0;
  double b_minus = 0.0;
  std::vector<double> d_plus;
  std::vector<double> d_minus;
  //! Max stationarity residual, relative to the plus-side weight mass.
  double residual = 0.0;
  int iterations = 0;
};

//! Local polynomial intercept weights of order p-1 on each side.
WeightSet lp_weights(const Design& d, double h_plus, double h_minus, const Kernel& kernel,
                     int p);

//! One side of lp_weights: a vector aligned with d.x, zero off the side.
std::vector<double> lp_side_weights(const Design& d, Side side, double h, const Kernel& kernel,
                                    int p);

//! Side-wise polynomial intercept weights with 1/sigma2 weighting over all
//! points (the C = 0 optimum).
WeightSet gls_weights(const Design& d, int p);

double g_bC_eval(double x, Side side, const OptimalCoefficients& c, double C, int p);

//! Sum_i g(x_i)^2 / sigma2_i at the given coefficients (the inverse-modulus
//! objective; delta = 2 sqrt of its minimum).
double inverse_modulus_objective(const Design& d, const SmoothnessClass& cls,
                                 const OptimalCoefficients& c);

//! Minimizer of the inverse-modulus objective over (b_minus, d_plus, d_minus).
//! Design must be validated. Uses the closed form when p == 1.
OptimalCoefficients solve_optimal_coefficients(const Design& d, const SmoothnessClass& cls,
                                               double b);

//! Same problem through the general convex solver regardless of p.
OptimalCoefficients solve_optimal_coefficients_convex(const Design& d,
                                                      const SmoothnessClass& cls, double b,
                                                      const OptimalCoefficients* warm = nullptr);

//! Weights proportional to g_{b,C}(x_i)/sigma2_i on each side. Reported
//! h_plus/h_minus are (b_plus/C)^(1/p), the triangular bandwidths when p == 1.
WeightSet weights_from_coefficients(const Design& d, const SmoothnessClass& cls,
                                    const OptimalCoefficients& c);

WeightSet optimal_weights(const Design& d, const SmoothnessClass& cls, double b);

//! Largest b for which every point can be thresholded to zero (delta(b) = 0,
//! weights undefined). Optimal weights exist only for b above it.
double degenerate_threshold(const Design& d, const SmoothnessClass& cls);

//! Reusable solver for repeated solves on one design.
class OptimalSolver
{
public:
  OptimalSolver(const Design& d, const SmoothnessClass& cls);

  //! General semismooth Newton solve.
  OptimalCoefficients solve(double b, const OptimalCoefficients* warm = nullptr) const;
  //! Closed form for p == 1.
  OptimalCoefficients solve_p1(double b) const;
  //! Dispatches on p.
  OptimalCoefficients solve_auto(double b, const OptimalCoefficients* warm = nullptr) const;

  double objective(const OptimalCoefficients& c) const;
  //! Sum over the plus side of g_+(x_i)/sigma2_i.
  double plus_mass(const OptimalCoefficients& c) const;

  const Design& design() const { return d_; }
  const SmoothnessClass& smoothness() const { return cls_; }

private:
  Design d_;
  SmoothnessClass cls_;
  double scale_ = 1.0;
  std::vector<double> u_;
  std::vector<double> lambda_;
  std::vector<double> prec_;
  std::vector<char> plus_;
};

} // namespace honestrd
