#pragma once

#include <vector>

namespace honestrd {

struct GaussLegendre
{
  std::vector<double> nodes;   // on [-1, 1]
  std::vector<double> weights;

  explicit GaussLegendre(int n);

  template<class F>
  double integrate(F&& f, double a, double b) const
  {
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      s += weights[i] * f(mid + half * nodes[i]);
    return s * half;
  }
};

} // namespace honestrd
