#pragma once

#include <cmath>
#include <vector>

namespace honestrd::search {

//! n log-spaced points from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, int n)
{
  std::vector<double> g(n);
  if (n == 1 || hi <= lo) {
    g.assign(n, hi);
    return g;
  }
  const double a = std::log(lo), step = (std::log(hi) - a) / (n - 1);
  for (int i = 0; i < n; ++i)
    g[i] = std::exp(a + step * i);
  g.front() = lo;
  g.back() = hi;
  return g;
}

struct Minimum
{
  double x = 0.0;
  double f = INFINITY;
};

//! Golden-section search of f over [lo, hi] in log coordinates.
template<class F>
Minimum golden_log(F&& f, double lo, double hi, double rel_tol = 1e-7, int max_iter = 100)
{
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = std::log(lo), b = std::log(hi);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(std::exp(c)), fd = f(std::exp(d));
  for (int it = 0; it < max_iter && (b - a) > rel_tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(std::exp(d));
    }
  }
  return fc <= fd ? Minimum{std::exp(c), fc} : Minimum{std::exp(d), fd};
}

//! Grid scan from the largest point down (ties keep the larger x) followed by
//! golden refinement between the neighbors of the grid minimum.
template<class F>
Minimum grid_then_golden(F&& f, const std::vector<double>& grid, double rel_tol = 1e-7)
{
  Minimum best;
  int k = -1;
  for (int i = static_cast<int>(grid.size()) - 1; i >= 0; --i) {
    const double v = f(grid[i]);
    if (v < best.f) {
      best = {grid[i], v};
      k = i;
    }
  }
  if (k < 0)
    return best;
  const double lo = grid[k > 0 ? k - 1 : k];
  const double hi = grid[k + 1 < static_cast<int>(grid.size()) ? k + 1 : k];
  if (hi > lo) {
    const auto g = golden_log(f, lo, hi, rel_tol);
    if (g.f < best.f)
      best = g;
  }
  return best;
}

} // namespace honestrd::search
