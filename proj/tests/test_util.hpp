#pragma once

#include "honestrd/core.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace honestrd::testing {

// n points evenly spread over [-1, 1], none exactly at the cutoff
inline Design uniform_design(int n, double sigma2 = 1.0)
{
  Design d;
  for (int i = 0; i < n; ++i) {
    d.x.push_back(-1.0 + (2.0 * i + 1.0) / n);
    d.y.push_back(0.0);
    d.sigma2.push_back(sigma2);
  }
  return d;
}

// Random heteroskedastic design with at least `per_side` points per side.
inline Design random_design(std::mt19937_64& gen, int n, int per_side = 3)
{
  std::uniform_real_distribution<double> ux(-1.0, 1.0), us(0.3, 3.0);
  std::normal_distribution<double> nz;
  Design d;
  for (int i = 0; i < n; ++i) {
    double x = ux(gen);
    if (i < per_side)
      x = std::abs(x) + 1e-3;
    else if (i < 2 * per_side)
      x = -std::abs(x) - 1e-3;
    d.x.push_back(x);
    d.y.push_back(nz(gen));
    d.sigma2.push_back(us(gen));
  }
  return validate_design(d);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b)
{
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

} // namespace honestrd::testing
