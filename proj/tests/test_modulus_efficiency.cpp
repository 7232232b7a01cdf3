#include "honestrd/bias_variance.hpp"
#include "honestrd/modulus.hpp"
#include "honestrd/normal.hpp"
#include "honestrd/weights.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace honestrd;
using namespace honestrd::testing;

TEST_CASE("inverse modulus: two-point closed form and limits")
{
  const double x0 = 0.1, C = 1.5;
  Design d{{-x0, x0}, {0, 0}, {1, 1}};
  auto cls = SmoothnessClass::taylor(1, C);
  for (double b : {0.2, 0.5, 1.0}) {
    const double want = 2 * std::sqrt(2.0) * std::max(0.0, b / 2 - C * x0);
    CHECK(inverse_modulus(d, cls, b) == doctest::Approx(want).epsilon(1e-10));
  }
  CHECK(inverse_modulus(d, cls, 0.29) == 0.0);
  CHECK(inverse_modulus(d, cls, 1e-9) == 0.0);
}

TEST_CASE("inverse modulus is increasing in b")
{
  std::mt19937_64 gen(8);
  for (int rep = 0; rep < 5; ++rep) {
    auto d = random_design(gen, 80, 6);
    for (int p : {1, 2, 3}) {
      ModulusSolver ms(d, SmoothnessClass::taylor(p, 1.0));
      double prev = 0.0;
      for (double b = ms.threshold() * 1.01 + 1e-4; b < 3.0; b *= 1.6) {
        const double delta = ms.inverse(b);
        CHECK(delta > prev);
        prev = delta;
      }
    }
  }
}

TEST_CASE("modulus: concavity, derivative and identities")
{
  auto d = validate_design(uniform_design(200));
  for (int p : {1, 2}) {
    auto cls = SmoothnessClass::taylor(p, 1.0);
    ModulusSolver ms(d, cls);
    std::vector<double> grid;
    for (int k = 0; k < 12; ++k)
      grid.push_back(0.2 * std::pow(1.5, k));
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double delta = grid[k];
      auto s = ms.at_delta(delta);
      CHECK(s.delta == doctest::Approx(delta).epsilon(1e-10));
      CHECK(s.omega == doctest::Approx(2 * s.coeffs.b));

      const double eps = 1e-4 * delta;
      const double fd = (ms.at_delta(delta + eps).omega - ms.at_delta(delta - eps).omega) / (2 * eps);
      CHECK(s.omega_prime == doctest::Approx(fd).epsilon(1e-4));

      auto w = weights_from_coefficients(d, cls, s.coeffs);
      CHECK(sd_known(w, d) == doctest::Approx(s.omega_prime).epsilon(1e-6));
      CHECK(worst_case_bias_taylor(w, cls.C, p, d) ==
            doctest::Approx(0.5 * (s.omega - delta * s.omega_prime)).epsilon(1e-6));

      if (k + 1 < grid.size()) {
        const double a = grid[k], b = grid[k + 1];
        const double mid = ms.at_delta(0.5 * (a + b)).omega;
        CHECK(mid >= 0.5 * (s.omega + ms.at_delta(b).omega) - 1e-7);
        CHECK(ms.at_delta(b).omega / b <= s.omega / a * (1 + 1e-10));
      }
    }
  }
}

TEST_CASE("least-favorable values and differentiability flag")
{
  auto d = validate_design(uniform_design(100));
  auto s = modulus(d, SmoothnessClass::taylor(2, 1.0), 1.0, true);
  CHECK_FALSE(s.nondifferentiable);
  double f = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    f += s.gstar_values[i] * s.gstar_values[i] / d.sigma2[i];
  CHECK(2 * std::sqrt(f) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(modulus(d, SmoothnessClass::taylor(2, 1.0), -1.0), Error);
}

TEST_CASE("asymptotic efficiencies")
{
  CHECK(asymptotic_efficiencies(1.0, 0.05).onesided == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(asymptotic_efficiencies(2.0 / 3.0, 0.05).onesided == doctest::Approx(0.95245).epsilon(1e-5));
  CHECK(asymptotic_efficiencies(0.8, 0.05).onesided == doctest::Approx(0.96728).epsilon(1e-5));
  CHECK(std::abs(asymptotic_efficiencies(1.0, 0.05).flci - 0.8499) < 1e-4);
  CHECK(std::abs(asymptotic_efficiencies(0.8, 0.05).flci - 0.957) < 1e-3);
  CHECK(std::abs(asymptotic_efficiencies(2.0 / 3.0, 0.05).flci - 0.956) < 1e-3);
  for (double r = 0.5; r <= 1.0; r += 0.05) {
    auto e = asymptotic_efficiencies(r, 0.05);
    CHECK(e.onesided > 0.5);
    CHECK(e.onesided <= 1.0);
    CHECK(e.flci > 0.5);
    CHECK(e.flci <= 1.0);
  }
}

TEST_CASE("generic efficiency on a power modulus matches the closed forms")
{
  for (double r : {0.5, 2.0 / 3.0, 0.8, 1.0}) {
    auto m = power_modulus(2.7, r);
    auto e = asymptotic_efficiencies(r, 0.05);
    CHECK(onesided_adaptation_efficiency(m, 0.05, 0.8) == doctest::Approx(e.onesided).epsilon(1e-9));
    CHECK(flci_adaptation_efficiency(m, 0.05) == doctest::Approx(e.flci).epsilon(1e-6));
  }
  // lower bound omega(2 delta) / (2 omega(delta)) >= 1/2
  auto m = power_modulus(1.0, 0.6);
  const double db = normal_quantile(0.8) + normal_quantile(0.95);
  const double lb = m(2 * db).first / (2 * m(db).first);
  CHECK(onesided_adaptation_efficiency(m, 0.05, 0.8) >= lb);
  CHECK(lb >= 0.5);
}

TEST_CASE("finite-sample efficiencies approach the r = 4/5 limits")
{
  auto d = validate_design(uniform_design(2000));
  auto cls = SmoothnessClass::taylor(2, 1.0);
  const double one = onesided_adaptation_efficiency(d, cls, 0.05, 0.8);
  const double two = flci_adaptation_efficiency(d, cls, 0.05);
  CHECK(std::abs(one - 0.967) < 0.02);
  CHECK(std::abs(two - 0.957) < 0.02);
  CHECK(one <= 1.0);
  CHECK(two <= 1.0);
}

TEST_CASE("coverage calibration")
{
  auto d = validate_design(uniform_design(100));
  auto w = lp_weights(d, 0.5, 0.5, Kernel(), 2);
  CHECK(coverage_calibration_C(d, w, 0.05, 0.05, 2) == 0.0);
  // t* solves cv_.1(t) = z_.975 and lies between the Table 1 rows 0.6 and 0.7
  const double t = cv_inverse(normal_quantile(0.975), 0.1);
  CHECK(t > 0.6);
  CHECK(t < 0.7);
  CHECK(cv(t, 0.1) == doctest::Approx(normal_quantile(0.975)).epsilon(1e-9));
  const double c1 = coverage_calibration_C(d, w, 0.05, 0.1, 2);
  CHECK(c1 * worst_case_bias_taylor(w, 1.0, 2, d) / sd_known(w, d) == doctest::Approx(t).epsilon(1e-10));
  auto d4 = d;
  for (auto& s : d4.sigma2)
    s *= 4.0;
  CHECK(coverage_calibration_C(d4, w, 0.05, 0.1, 2) == doctest::Approx(2 * c1).epsilon(1e-12));
}
