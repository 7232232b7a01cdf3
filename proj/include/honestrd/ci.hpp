#pragma once

#include "honestrd/core.hpp"
#include "honestrd/kernel.hpp"

#include <string>

namespace honestrd {

//! Lower endpoint of [c, inf): Lhat - maxbias - sd z_{1-alpha}.
double one_sided_ci(double estimate, double maxbias, double sd, double alpha);

struct FixedLengthCI
{
  double half_length = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

FixedLengthCI flci(double estimate, double maxbias, double sd, double alpha);

struct CriterionValue
{
  CriterionKind kind = CriterionKind::flci_length;
  double value = 0.0;
};

//! Criterion as a function of worst-case bias and sd.
double criterion_from(double maxbias, double sd, const PerformanceCriterion& crit);

CriterionValue criterion_value(const WeightSet& w, const SmoothnessClass& cls, const Design& d,
                               const PerformanceCriterion& crit);

struct WeightSpec
{
  WeightFamily family = WeightFamily::local_polynomial;
  Kernel kernel{KernelType::triangular};

  static WeightSpec parse(const std::string& s);
  std::string name() const;
};

//! Fills estimate, bias, sd and both interval forms for given weights.
EstimateReport make_report(const WeightSet& w, const SmoothnessClass& cls, const Design& d,
                           const PerformanceCriterion& crit, double sd);

//! Chooses the smoothing parameters minimizing the criterion under d.sigma2.
EstimateReport optimize_smoothing(const Design& d, const SmoothnessClass& cls,
                                  const PerformanceCriterion& crit, const WeightSpec& spec);

enum class VarianceMode
{
  known,
  nearest_neighbor,
  ehw
};

struct VarianceSpec
{
  VarianceMode mode = VarianceMode::known;
  int neighbors = 3;
  //! Pilot bandwidth for the preliminary variance; <= 0 means the default.
  double pilot_bandwidth = 0.0;

  static VarianceSpec parse(const std::string& s);
  std::string name() const;
};

//! Preliminary variance, weight choice, and final interval with the variance
//! mode's standard error. The design is validated (and sorted) first; the
//! report's weights are aligned with the sorted design.
EstimateReport analyze(const Design& d, const SmoothnessClass& cls,
                       const PerformanceCriterion& crit, const WeightSpec& spec,
                       const VarianceSpec& var);

} // namespace honestrd
