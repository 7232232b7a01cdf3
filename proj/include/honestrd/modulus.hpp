#pragma once

#include "honestrd/core.hpp"
#include "honestrd/weights.hpp"

#include <functional>
#include <vector>

namespace honestrd {

struct ModulusSolution
{
  double delta = 0.0;
  double omega = 0.0;
  double omega_prime = 0.0;
  OptimalCoefficients coeffs;
  //! g*(x_i) at the design points; the other least-favorable function is -g*.
  std::vector<double> gstar_values;
  //! Set by the optional secant check when left and right secants disagree.
  bool nondifferentiable = false;
};

//! Modulus of continuity of the jump over the Taylor class on a fixed design.
class ModulusSolver
{
public:
  ModulusSolver(const Design& d, const SmoothnessClass& cls);

  //! Solution indexed by the half-jump b (omega = 2b).
  ModulusSolution at_b(double b, const OptimalCoefficients* warm = nullptr) const;
  //! Solution with delta(b) = delta.
  ModulusSolution at_delta(double delta, const ModulusSolution* warm = nullptr) const;

  double inverse(double b) const { return at_b(b).delta; }
  //! delta(b) vanishes for b at or below this value.
  double threshold() const { return b0_; }
  const OptimalSolver& solver() const { return solver_; }

private:
  OptimalSolver solver_;
  double b0_ = 0.0;
};

//! delta = 2 sqrt(min objective) for the half-jump b.
double inverse_modulus(const Design& d, const SmoothnessClass& cls, double b);

//! omega(delta) and omega'(delta). With check_differentiability, compares
//! left and right secants at scale 1e-4 delta and flags a kink above 1e-3
//! relative disagreement.
ModulusSolution modulus(const Design& d, const SmoothnessClass& cls, double delta,
                        bool check_differentiability = false);

//! A modulus as a function delta -> (omega, omega').
using ModulusFn = std::function<std::pair<double, double>(double)>;

ModulusFn power_modulus(double scale, double r);

double onesided_adaptation_efficiency(const ModulusFn& omega, double alpha, double beta);

//! Numerator of the two-sided ratio: integral over z < z_{1-alpha} of
//! omega(2 (z_{1-alpha} - z)) phi(z), on [-8, z_{1-alpha}].
double flci_efficiency_numerator(const ModulusFn& omega, double alpha);

//! min over delta of cv(omega/(2 omega') - delta/2) omega'.
double optimal_flci_half_length(const ModulusFn& omega, double alpha);

double flci_adaptation_efficiency(const ModulusFn& omega, double alpha);

double onesided_adaptation_efficiency(const Design& d, const SmoothnessClass& cls, double alpha,
                                      double beta);
double flci_adaptation_efficiency(const Design& d, const SmoothnessClass& cls, double alpha);

struct AsymptoticEfficiency
{
  double onesided = 0.0;
  double flci = 0.0;
};

//! Limits when omega(delta) is proportional to delta^r.
AsymptoticEfficiency asymptotic_efficiencies(double r, double alpha, double beta = 0.8);

//! Largest C for which the nominal 1-alpha_nominal interval with these weights
//! keeps coverage 1-alpha_true.
double coverage_calibration_C(const Design& d, const WeightSet& w, double alpha_nominal,
                              double alpha_true, int p);

} // namespace honestrd
