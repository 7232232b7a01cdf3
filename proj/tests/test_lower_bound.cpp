#include "honestrd/lower_bound.hpp"
#include "honestrd/normal.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace honestrd;
using namespace honestrd::testing;

namespace {

Design side_design(int n_side, double sigma2 = 1.0)
{
  return validate_design(uniform_design(2 * n_side, sigma2));
}

} // namespace

TEST_CASE("default scheme splits the side into three intervals")
{
  auto d = side_design(300);
  auto s = default_scheme(d, Side::plus, 100);
  auto st = curvature_stat(d, s);
  CHECK(st.n1 == 100);
  CHECK(st.n2 == 100);
  CHECK(st.n3 == 100);

  auto e = side_design(320);
  auto se = default_scheme(e, Side::minus, 100);
  auto ste = curvature_stat(e, se);
  CHECK(ste.n1 == 100);
  CHECK(ste.n2 == 100);
  CHECK(ste.n3 == 120);

  try {
    default_scheme(side_design(250), Side::plus, 100);
    FAIL("expected TooFewObservations");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::TooFewObservations);
  }
}

TEST_CASE("curvature statistic errors")
{
  auto d = side_design(30);
  IntervalScheme s{0.0, 0.1, 0.2, 0.2, Side::plus};
  try {
    curvature_stat(d, s);
    FAIL("expected EmptyInterval");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyInterval);
  }
}

TEST_CASE("affine functions are annihilated")
{
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int rep = 0; rep < 20; ++rep) {
    auto d = random_design(gen, 400, 20);
    const double a = u(gen), b = u(gen), c = u(gen), e = u(gen);
    for (std::size_t i = 0; i < d.size(); ++i)
      d.y[i] = d.x[i] >= 0 ? a + b * d.x[i] : c + e * d.x[i];
    for (Side side : {Side::plus, Side::minus}) {
      auto st = curvature_stat(d, default_scheme(d, side, 40));
      CHECK(std::abs(st.Z) < 1e-12);
      CHECK(lower_ci_C(st, 0.5) == 0.0);
    }
  }
}

TEST_CASE("pure quadratic matches the substitution formula")
{
  auto d = side_design(300);
  const double C = 0.7;
  for (std::size_t i = 0; i < d.size(); ++i)
    d.y[i] = C * d.x[i] * d.x[i];
  auto s = default_scheme(d, Side::plus, 100);
  auto st = curvature_stat(d, s);
  double m[3] = {0, 0, 0}, mx[3] = {0, 0, 0};
  int cnt[3] = {0, 0, 0};
  const double a[4] = {s.a0, s.a1, s.a2, s.a3};
  for (double x : d.x)
    for (int k = 0; k < 3; ++k)
      if (x >= 0 && x >= a[k] && x < a[k + 1]) {
        m[k] += x * x;
        mx[k] += x;
        ++cnt[k];
      }
  for (int k = 0; k < 3; ++k) {
    m[k] /= cnt[k];
    mx[k] /= cnt[k];
  }
  const double lam = (mx[2] - mx[1]) / (mx[2] - mx[0]);
  const double want = C * (lam * m[0] + (1 - lam) * m[2] - m[1]) / (lam * m[0] + (1 - lam) * m[2] + m[1]);
  CHECK(st.Z == doctest::Approx(want).epsilon(1e-12));
  CHECK(std::abs(st.Z) <= C);
}

TEST_CASE("scale equivariance")
{
  std::mt19937_64 gen(12);
  std::normal_distribution<double> nz;
  auto d = side_design(300, 0.01);
  for (std::size_t i = 0; i < d.size(); ++i)
    d.y[i] = 0.3 * d.x[i] * d.x[i] + 0.1 * nz(gen);
  auto s = default_scheme(d, Side::plus, 100);
  auto st = curvature_stat(d, s);
  auto e = d;
  for (std::size_t i = 0; i < d.size(); ++i) {
    e.y[i] *= -3.0;
    e.sigma2[i] *= 9.0;
  }
  auto se = curvature_stat(e, s);
  CHECK(se.Z == doctest::Approx(-3.0 * st.Z).epsilon(1e-12));
  CHECK(se.tau == doctest::Approx(3.0 * st.tau).epsilon(1e-12));
  CHECK(lower_ci_C(se, 0.5) == doctest::Approx(3.0 * lower_ci_C(st, 0.5)).epsilon(1e-9));
}

TEST_CASE("lower confidence bound")
{
  CurvatureStat st;
  st.tau = 1.0;
  st.Z = cv(0.0, 0.05);
  CHECK(lower_ci_C(st, 0.05) == 0.0);
  st.Z = -3.0;
  CHECK(lower_ci_C(st, 0.05) == doctest::Approx(1.355).epsilon(1e-3));
  st.tau = 2.0;
  st.Z = 6.0;
  CHECK(lower_ci_C(st, 0.05) == doctest::Approx(2 * 1.355).epsilon(1e-3));
  // a less confident bound sits higher: nonincreasing in the level 1 - alpha
  double prev = 0.0;
  for (double a : {0.01, 0.05, 0.1, 0.3, 0.5}) {
    const double v = lower_ci_C(st, a);
    CHECK(v >= prev);
    prev = v;
  }
  st.tau = 0.0;
  CHECK_THROWS_AS(lower_ci_C(st, 0.05), Error);
}

TEST_CASE("lower bound covers: P(muhat <= |mu|) >= 1 - alpha")
{
  std::mt19937_64 gen(99);
  std::normal_distribution<double> nz;
  const int reps = 20000;
  int covered = 0;
  for (int r = 0; r < reps; ++r) {
    CurvatureStat st;
    st.tau = 1.0;
    st.Z = 1.0 + nz(gen);
    covered += lower_ci_C(st, 0.05) <= 1.0;
  }
  const double cov = double(covered) / reps;
  CHECK(cov >= 0.95 - 2 * std::sqrt(0.05 * 0.95 / reps));
}

TEST_CASE("noise variance of Z matches tau")
{
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nz;
  auto d = side_design(300, 0.25);
  auto s = default_scheme(d, Side::plus, 100);
  const double tau = curvature_stat(d, s).tau;
  const int reps = 10000;
  double m = 0.0, m2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    for (auto& y : d.y)
      y = 0.5 * nz(gen);
    const double z = curvature_stat(d, s).Z;
    m += z / reps;
    m2 += z * z / reps;
  }
  CHECK(std::abs(m) < 4 * tau / std::sqrt(double(reps)));
  CHECK(std::sqrt(m2 - m * m) == doctest::Approx(tau).epsilon(0.05));
}
