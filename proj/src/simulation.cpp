#include "honestrd/simulation.hpp"

#include "honestrd/normal.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace honestrd {

double spline_f(double x, double C, double b1, double b2)
{
  const double a = std::fabs(x);
  const double k1 = std::max(0.0, a - b1), k2 = std::max(0.0, a - b2);
  const double v = C * (a * a - 2.0 * k1 * k1 + 2.0 * k2 * k2);
  return x > 0.0 ? v : (x < 0.0 ? -v : 0.0);
}

std::function<double(double)> benchmark_function(int design_id, double C)
{
  switch (design_id) {
    case 1: return [C](double x) { return spline_f(x, C, 0.45, 0.75); };
    case 2: return [C](double x) { return spline_f(x, C, 0.4, 0.9); };
    case 3: return [C](double x) { return spline_f(x, C, 0.25, 0.65); };
    case 4: return [](double) { return 0.0; };
    default: break;
  }
  throw Error(ErrorKind::DomainError, "simulation", "design id must be 1, 2, 3 or 4");
}

namespace {

std::uint64_t splitmix(std::uint64_t z)
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t rep)
  : key_(splitmix(splitmix(seed) ^ (rep * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL)))
{}

std::uint64_t RngStream::next_bits()
{
  return splitmix(key_ ^ splitmix(counter_++));
}

double RngStream::uniform()
{
  return (static_cast<double>(next_bits() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal()
{
  return normal_quantile(uniform());
}

RngStream rng_stream(std::uint64_t seed, std::uint64_t rep)
{
  return RngStream(seed, rep);
}

std::vector<double> draw_x(std::uint64_t seed, std::uint64_t rep, int n)
{
  RngStream rng(seed, rep);
  std::vector<double> x(n);
  for (auto& v : x)
    v = 2.0 * rng.uniform() - 1.0;
  return x;
}

Design draw_sample(const McDesign& design, std::uint64_t rep, const std::vector<double>* fixed_x)
{
  RngStream rng(design.seed, rep);
  Design d;
  d.x.resize(design.n);
  for (auto& v : d.x)
    v = 2.0 * rng.uniform() - 1.0;
  if (fixed_x != nullptr)
    d.x = *fixed_x;
  const double sd = std::sqrt(design.sigma2);
  d.y.resize(design.n);
  for (int i = 0; i < design.n; ++i)
    d.y[i] = design.f(d.x[i]) + sd * rng.normal();
  d.sigma2.assign(design.n, design.sigma2);
  return d;
}

McResult run_mc(const McDesign& design, const McMethod& method, int threads)
{
  if (design.reps < 1)
    throw Error(ErrorKind::DomainError, "simulation", "reps must be >= 1");
  struct Outcome
  {
    char covered = 0;
    double length = 0.0;
    double bias = 0.0;
  };
  std::vector<Outcome> out(design.reps);
  // a fixed design is the x draw of the replication index one past the end
  std::vector<double> fixed;
  if (design.fixed_x)
    fixed = draw_x(design.seed, static_cast<std::uint64_t>(design.reps), design.n);

  auto run_one = [&](int r) {
    const Design d = draw_sample(design, static_cast<std::uint64_t>(r),
                                 design.fixed_x ? &fixed : nullptr);
    const auto rep = analyze(d, method.cls, method.crit, method.weights, method.variance);
    Outcome o;
    o.bias = rep.estimate - design.jump;
    if (method.form == CiForm::flci) {
      o.covered = rep.ci_lower <= design.jump && design.jump <= rep.ci_upper;
      o.length = rep.ci_upper - rep.ci_lower;
    } else {
      o.covered = rep.onesided_lower <= design.jump;
      o.length = design.jump - rep.onesided_lower;
    }
    out[r] = o;
  };

  threads = std::max(1, std::min(threads, design.reps));
  if (threads == 1) {
    for (int r = 0; r < design.reps; ++r)
      run_one(r);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int r = next++; r < design.reps; r = next++) {
          try {
            run_one(r);
          } catch (...) {
            std::lock_guard lk(err_mu);
            if (!err)
              err = std::current_exception();
          }
        }
      });
    for (auto& th : pool)
      th.join();
    if (err)
      std::rethrow_exception(err);
  }

  // reduce in replication order
  McResult res;
  res.reps = design.reps;
  double cov = 0.0, len = 0.0, bias = 0.0;
  for (const auto& o : out) {
    cov += o.covered;
    len += o.length;
    bias += o.bias;
  }
  res.coverage = cov / design.reps;
  res.mean_length = len / design.reps;
  res.mean_bias = bias / design.reps;
  res.mc_standard_error = std::sqrt(res.coverage * (1.0 - res.coverage) / design.reps);
  return res;
}

} // namespace honestrd
