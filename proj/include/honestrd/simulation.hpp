#pragma once

#include "honestrd/ci.hpp"
#include "honestrd/core.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace honestrd {

//! Odd quadratic spline with knots b1 < b2: C (x^2 - 2(|x|-b1)_+^2 + 2(|x|-b2)_+^2) sign(x).
double spline_f(double x, double C, double b1, double b2);

//! Regression function of one of the four benchmark designs (4 is f = 0).
std::function<double(double)> benchmark_function(int design_id, double C);

//! Counter-based generator: draw k of replication r depends only on (seed, r, k).
class RngStream
{
public:
  RngStream(std::uint64_t seed, std::uint64_t rep);

  std::uint64_t next_bits();
  //! Uniform on the open interval (0, 1).
  double uniform();
  double normal();

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

RngStream rng_stream(std::uint64_t seed, std::uint64_t rep);

struct McDesign
{
  std::function<double(double)> f;
  //! True jump of f at the cutoff.
  double jump = 0.0;
  double sigma2 = 0.1295;
  int n = 500;
  int reps = 1000;
  std::uint64_t seed = 1;
  //! Reuse one draw of x for every replication instead of redrawing it.
  bool fixed_x = false;
};

enum class CiForm
{
  flci,
  onesided_lower
};

struct McMethod
{
  SmoothnessClass cls = SmoothnessClass::holder(1.0);
  PerformanceCriterion crit = PerformanceCriterion::flci(0.05);
  WeightSpec weights{};
  VarianceSpec variance{VarianceMode::nearest_neighbor, 3, 0.0};
  CiForm form = CiForm::flci;
};

struct McResult
{
  int reps = 0;
  double coverage = 0.0;
  //! Mean two-sided length, or mean excess length Lf - c for one-sided.
  double mean_length = 0.0;
  double mean_bias = 0.0;
  double mc_standard_error = 0.0;
};

//! x for replication `rep`: uniform on [-1, 1], drawn before the errors.
std::vector<double> draw_x(std::uint64_t seed, std::uint64_t rep, int n);

//! Sample of replication `rep` (x from draw_x unless fixed_x is given).
Design draw_sample(const McDesign& design, std::uint64_t rep,
                   const std::vector<double>* fixed_x = nullptr);

//! Replications run on `threads` workers; the result does not depend on it.
McResult run_mc(const McDesign& design, const McMethod& method, int threads = 1);

} // namespace honestrd
