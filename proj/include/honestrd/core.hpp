#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace honestrd {

enum class ErrorKind
{
  EmptySide,
  NonpositiveVariance,
  LengthMismatch,
  DomainError,
  SingularMomentMatrix,
  NonpositiveBandwidth,
  NoConvergence,
  InfiniteBias,
  TooFewNeighbors,
  OptimizationFailed,
  EmptyInterval,
  DegenerateDenominator,
  TooFewObservations,
  DegenerateWeights,
  ParseError,
};

const char* to_string(ErrorKind kind);

//! "%.3g" formatting for diagnostics in error messages.
std::string format_sci(double v);

//! Library error. `module` names the component that raised it.
class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, std::string module, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

private:
  ErrorKind kind_;
  std::string module_;
};

enum class Side
{
  plus,
  minus
};

//! Observations with the cutoff normalized to 0. Points with x == 0 belong to
//! the treated (plus) side.
struct Design
{
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> sigma2;

  std::size_t size() const { return x.size(); }
  static bool on_plus_side(double xi) { return xi >= 0.0; }
};

//! Checks the invariants of a design and returns it sorted by x (stable, with
//! y and sigma2 carried along). Idempotent.
Design validate_design(Design d);

enum class ClassFamily
{
  taylor,
  holder
};

//! F_RDT,p(C) or F_RDH,2(C).
struct SmoothnessClass
{
  ClassFamily family = ClassFamily::taylor;
  int p = 2;
  double C = 0.0;

  static SmoothnessClass taylor(int p, double C);
  static SmoothnessClass holder(double C);
  void validate() const;
};

enum class KernelType
{
  uniform,
  triangular,
  epanechnikov,
  custom
};

enum class WeightFamily
{
  local_polynomial,
  optimal
};

//! Affine estimator weights: Lhat = sum w_plus*y - sum w_minus*y.
struct WeightSet
{
  std::vector<double> w_plus;
  std::vector<double> w_minus;
  double h_plus = 0.0;
  double h_minus = 0.0;
  WeightFamily family = WeightFamily::local_polynomial;
  KernelType kernel = KernelType::triangular;

  //! Combined per-point weight w_plus[i] + w_minus[i]; supports are disjoint.
  double combined(std::size_t i) const { return w_plus[i] + w_minus[i]; }
  double estimate(const std::vector<double>& y) const;
};

enum class CriterionKind
{
  flci_length,
  excess_length_quantile,
  worst_case_mse
};

struct PerformanceCriterion
{
  CriterionKind kind = CriterionKind::flci_length;
  double alpha = 0.05;
  double beta = 0.8;

  static PerformanceCriterion flci(double alpha);
  static PerformanceCriterion excess_length(double alpha, double beta);
  static PerformanceCriterion mse(double alpha = 0.05);
  void validate() const;
};

const char* to_string(CriterionKind kind);

struct EstimateReport
{
  double estimate = 0.0;
  double maxbias = 0.0;
  double sd = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double onesided_lower = -std::numeric_limits<double>::infinity();
  double onesided_upper = std::numeric_limits<double>::infinity();
  double half_length = 0.0;
  double h_plus = 0.0;
  double h_minus = 0.0;
  CriterionKind criterion_kind = CriterionKind::flci_length;
  double criterion_value = 0.0;
  WeightSet weights;
};

} // namespace honestrd
