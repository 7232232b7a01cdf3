#include "honestrd/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace honestrd {

const char* to_string(ErrorKind kind)
{
  switch (kind) {
    case ErrorKind::EmptySide: return "EmptySide";
    case ErrorKind::NonpositiveVariance: return "NonpositiveVariance";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::SingularMomentMatrix: return "SingularMomentMatrix";
    case ErrorKind::NonpositiveBandwidth: return "NonpositiveBandwidth";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::InfiniteBias: return "InfiniteBias";
    case ErrorKind::TooFewNeighbors: return "TooFewNeighbors";
    case ErrorKind::OptimizationFailed: return "OptimizationFailed";
    case ErrorKind::EmptyInterval: return "EmptyInterval";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::TooFewObservations: return "TooFewObservations";
    case ErrorKind::DegenerateWeights: return "DegenerateWeights";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

std::string format_sci(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Error::Error(ErrorKind kind, std::string module, const std::string& what)
  : std::runtime_error(module + ": " + to_string(kind) + ": " + what)
  , kind_(kind)
  , module_(std::move(module))
{}

Design validate_design(Design d)
{
  const std::size_t n = d.x.size();
  if (d.y.size() != n || d.sigma2.size() != n)
    throw Error(ErrorKind::LengthMismatch, "core_model",
                "x, y and sigma2 must have equal length");
  if (n < 2)
    throw Error(ErrorKind::LengthMismatch, "core_model",
                "need at least two observations");
  bool plus = false, minus = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(d.x[i]) || !std::isfinite(d.y[i]))
      throw Error(ErrorKind::DomainError, "core_model",
                  "non-finite value at row " + std::to_string(i));
    if (!(d.sigma2[i] > 0.0) || !std::isfinite(d.sigma2[i]))
      throw Error(ErrorKind::NonpositiveVariance, "core_model",
                  "sigma2 must be positive (row " + std::to_string(i) + ")");
    (Design::on_plus_side(d.x[i]) ? plus : minus) = true;
  }
  if (!plus || !minus)
    throw Error(ErrorKind::EmptySide, "core_model",
                "both sides of the cutoff need observations");

  if (std::is_sorted(d.x.begin(), d.x.end()))
    return d;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d.x[a] < d.x[b]; });
  Design out;
  out.x.reserve(n);
  out.y.reserve(n);
  out.sigma2.reserve(n);
  for (auto i : order) {
    out.x.push_back(d.x[i]);
    out.y.push_back(d.y[i]);
    out.sigma2.push_back(d.sigma2[i]);
  }
  return out;
}

SmoothnessClass SmoothnessClass::taylor(int p, double C)
{
  SmoothnessClass c{ClassFamily::taylor, p, C};
  c.validate();
  return c;
}

SmoothnessClass SmoothnessClass::holder(double C)
{
  SmoothnessClass c{ClassFamily::holder, 2, C};
  c.validate();
  return c;
}

void SmoothnessClass::validate() const
{
  if (p < 1)
    throw Error(ErrorKind::DomainError, "core_model", "order p must be >= 1");
  if (!(C >= 0.0) || !std::isfinite(C))
    throw Error(ErrorKind::DomainError, "core_model", "C must be finite and >= 0");
  if (family == ClassFamily::holder && p != 2)
    throw Error(ErrorKind::DomainError, "core_model",
                "the Holder class is defined for p = 2 only");
}

double WeightSet::estimate(const std::vector<double>& y) const
{
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    s += (w_plus[i] - w_minus[i]) * y[i];
  return s;
}

PerformanceCriterion PerformanceCriterion::flci(double alpha)
{
  PerformanceCriterion c{CriterionKind::flci_length, alpha, 0.8};
  c.validate();
  return c;
}

PerformanceCriterion PerformanceCriterion::excess_length(double alpha, double beta)
{
  PerformanceCriterion c{CriterionKind::excess_length_quantile, alpha, beta};
  c.validate();
  return c;
}

PerformanceCriterion PerformanceCriterion::mse(double alpha)
{
  PerformanceCriterion c{CriterionKind::worst_case_mse, alpha, 0.8};
  c.validate();
  return c;
}

void PerformanceCriterion::validate() const
{
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorKind::DomainError, "core_model", "alpha must lie in (0,1)");
  if (kind == CriterionKind::excess_length_quantile && !(beta > 0.0 && beta < 1.0))
    throw Error(ErrorKind::DomainError, "core_model", "beta must lie in (0,1)");
}

const char* to_string(CriterionKind kind)
{
  switch (kind) {
    case CriterionKind::flci_length: return "flci";
    case CriterionKind::excess_length_quantile: return "excess";
    case CriterionKind::worst_case_mse: return "mse";
  }
  return "unknown";
}

} // namespace honestrd
