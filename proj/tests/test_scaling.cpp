#include <cmath>

#include <doctest.h>

#include "dpt/errors.hpp"
#include "dpt/scaling.hpp"

using namespace dpt;
using namespace dpt::scaling;

namespace {

ScalingSeries power_series(double c, double e, double lo, double hi, int n) {
  ScalingSeries s;
  for (double x : logspace(lo, hi, n)) {
    s.control.push_back(x);
    s.values.push_back(c * std::pow(x, e));
  }
  return s;
}

// Synthetic data obeying delta_n = kappa2^-zeta F(eps kappa2^-zeta) with F = 1/(1+x).
std::vector<CollapseCurve> synthetic_collapse(double zeta) {
  std::vector<CollapseCurve> curves;
  for (double k2 : {1e-9, 1e-8, 1e-7}) {
    CollapseCurve c;
    c.kappa2 = k2;
    for (double x : logspace(0.1, 10.0, 40)) {
      const double eps = x * std::pow(k2, zeta);
      c.series.control.push_back(eps);
      c.series.values.push_back(std::pow(k2, -zeta) / (1.0 + x));
    }
    curves.push_back(c);
  }
  return curves;
}

}  // namespace

TEST_CASE("logspace endpoints") {
  const auto g = logspace(1e-8, 1e-4, 5);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == doctest::Approx(1e-8));
  CHECK(g[2] == doctest::Approx(1e-6));
  CHECK(g.back() == doctest::Approx(1e-4));
}

TEST_CASE("exact power laws are recovered to roundoff") {
  for (double e : {-1.0, -0.5, 0.25, 2.0 / 3.0}) {
    const auto fit = fit_power_law(power_series(3.7, e, 1e-9, 1e-5, 17));
    CHECK(std::abs(fit.exponent - e) <= 1e-12);
    CHECK(fit.coefficient == doctest::Approx(3.7).epsilon(1e-11));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.accepted);
    CHECK(fit.points == 17);
  }
}

TEST_CASE("signed fit restores the sign") {
  auto s = power_series(-0.125, -1.0, 1e-8, 1e-4, 11);
  const auto fit = fit_signed_power_law(s);
  CHECK(fit.coefficient == doctest::Approx(-0.125).epsilon(1e-11));
  CHECK(fit.exponent == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_THROWS_AS(fit_power_law(s), NonPositiveValue);
  s.values[3] = -s.values[3];
  CHECK_THROWS_AS(fit_signed_power_law(s), NonPositiveValue);
}

TEST_CASE("fit guards") {
  CHECK_THROWS_AS(fit_power_law(power_series(1.0, 1.0, 1e-3, 1e-2, 20)), InsufficientRange);
  CHECK_THROWS_AS(fit_power_law(power_series(1.0, 1.0, 1e-6, 1e-2, 5)), InsufficientRange);
  auto s = power_series(1.0, 1.0, 1e-6, 1e-2, 12);
  s.values[4] = 0.0;
  CHECK_THROWS_AS(fit_power_law(s), NonPositiveValue);
}

TEST_CASE("window restriction and sensitivity") {
  const auto s = power_series(2.0, -0.5, 1e-9, 1e-3, 25);
  const auto w = window(s, 1e-8, 1e-5);
  CHECK(w.control.front() >= 1e-8 * (1 - 1e-12));
  CHECK(w.control.back() <= 1e-5 * (1 + 1e-12));
  CHECK(window_sensitivity(s) <= 1e-12);

  ScalingSeries bent = s;
  for (std::size_t k = 0; k < bent.values.size(); ++k) bent.values[k] *= 1.0 + 30.0 * std::sqrt(bent.control[k]);
  CHECK(window_sensitivity(bent) > 1e-3);
}

TEST_CASE("exponent estimate carries a sign convention") {
  const auto est = estimate_exponent(power_series(1.0, -1.0, 1e-8, 1e-4, 21), -1.0);
  CHECK(est.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(est.error <= 1e-10);
}

TEST_CASE("perfect scaling data collapse to zero spread") {
  const auto curves = synthetic_collapse(0.5);
  const auto r = collapse(curves, 0.5, 1.0);
  CHECK(r.spread <= 1e-12);
  CHECK(r.xi == doctest::Approx(2.0));
  CHECK_FALSE(r.master_curve.empty());
  CHECK(r.overlap.first == doctest::Approx(0.1));
  CHECK(r.overlap.second == doctest::Approx(10.0));
  for (const auto& m : r.master_curve) CHECK(m.f == doctest::Approx(1.0 / (1.0 + m.x)).epsilon(1e-3));

  const auto off = collapse(curves, 0.55, 1.0);
  CHECK(off.spread > 0.05);
}

TEST_CASE("collapse guards") {
  auto curves = synthetic_collapse(0.5);
  curves.pop_back();
  CHECK_THROWS_AS(collapse(curves, 0.5, 1.0), InvalidParameter);
  auto far = synthetic_collapse(0.5);
  for (auto& v : far[0].series.control) v *= 1e6;
  CHECK_THROWS_AS(collapse(far, 0.5, 1.0), EmptyOverlap);
}

TEST_CASE("coherence number from synthetic exponents") {
  CoherenceInputs in;
  in.static_eps = power_series(0.13, -1.0, 1e-8, 1e-4, 21);
  in.static_kappa2 = power_series(1.6, -0.5, 1e-9, 1e-5, 17);
  in.dynamic_eps = power_series(20.0, 1.0, 1e-8, 1e-4, 21);
  in.dynamic_kappa2 = power_series(3.2, 0.5, 1e-9, 1e-5, 17);
  const auto r = coherence_number(in);
  CHECK(r.xi == doctest::Approx(2.0).epsilon(1e-11));
  CHECK(r.xi_t == doctest::Approx(2.0).epsilon(1e-11));
  CHECK(r.nu_x.value == doctest::Approx(1.0));
  CHECK(r.zeta_x.value == doctest::Approx(0.5));
  CHECK(r.consistent);

  in.static_kappa2 = power_series(1.6, -2.0 / 3.0, 1e-9, 1e-5, 17);
  in.dynamic_kappa2 = power_series(3.2, 1.0 / 3.0, 1e-9, 1e-5, 17);
  in.dynamic_eps = power_series(1.2, 0.5, 1e-8, 1e-4, 21);
  const auto s = coherence_number(in);
  CHECK(s.xi == doctest::Approx(1.5).epsilon(1e-11));
  CHECK(s.xi_t == doctest::Approx(1.5).epsilon(1e-11));
}
