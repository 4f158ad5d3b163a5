#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rgreen/drivers.hpp"
#include "rgreen/error.hpp"
#include "rgreen/potential.hpp"

using namespace rgreen;

namespace {

constexpr double kGolden = 0.6180339887498949;

MapFamily circle_family(double radius, cplx center = 0.0) {
  MapFamily f;
  f.curve.kind = ParamCurve::Kind::circle;
  f.curve.center = center;
  f.curve.radius = radius;
  return f;
}

MapFamily affine_family(MapFamily::Form form = MapFamily::Form::power_plus_c) {
  MapFamily f;
  f.form = form;
  f.curve.kind = ParamCurve::Kind::affine;
  f.curve.slope = 1.0;
  return f;
}

Param at(double t) {
  Param p;
  p.t = t;
  return p;
}

// Kolmogorov-Smirnov statistic of a sample against a continuous cdf.
template <class Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  double d = 0.0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return d;
}

}  // namespace

TEST_CASE("orbit examples") {
  const auto constant = DriverSystem::constant(circle_family(0.0), at(0.0));
  const auto maps = orbit(constant, at(0.0), 3);
  REQUIRE(maps.size() == 3);
  const auto z2 = RationalMapP1::power_plus_constant(2, 0.0).normalized();
  for (const auto& f : maps) CHECK(coefficient_distance(f, z2) < 1e-12);

  const auto rot = DriverSystem::circle_rotation(circle_family(0.1), 0.25);
  const auto params = parameter_orbit(rot, at(0.0), 2);
  const auto c0 = rot.family().curve.at(rot.coordinate(params[0]));
  const auto c1 = rot.family().curve.at(rot.coordinate(params[1]));
  CHECK(std::abs(c0 - cplx(0.1, 0.0)) < 1e-15);
  CHECK(std::abs(c1 - cplx(0.0, 0.1)) < 1e-15);
  const auto rmaps = orbit(rot, at(0.0), 2);
  CHECK(coefficient_distance(rmaps[1], RationalMapP1::power_plus_constant(2, cplx(0, 0.1))) < 1e-12);

  const auto dbl = DriverSystem::doubling(circle_family(0.1));
  const auto cyc = parameter_orbit(dbl, rational_param(1, 3), 5);
  for (std::size_t i = 0; i < cyc.size(); ++i) {
    CHECK(cyc[i].den == 3);
    CHECK(cyc[i].num == (i % 2 == 0 ? 1u : 2u));
  }
}

TEST_CASE("orbit leaving the domain reports the index") {
  const auto logistic = DriverSystem::logistic(circle_family(0.1));
  try {
    (void)orbit(logistic, at(1.5), 4);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(e.index() == 0);
  }
}

TEST_CASE("semigroup law F^i(F^m(t)) = F^(i+m)(t)") {
  std::vector<DriverSystem> drivers = {DriverSystem::circle_rotation(circle_family(0.1), kGolden),
                                       DriverSystem::logistic(circle_family(0.1)),
                                       DriverSystem::iid_shift(circle_family(0.1)),
                                       DriverSystem::contraction(affine_family(), 0.5)};
  for (const auto& d : drivers) {
    Param start = at(0.3141);
    start.stream = 99;
    const auto whole = parameter_orbit(d, start, 30);
    const auto tail = parameter_orbit(d, d.iterate(start, 10), 20);
    for (std::size_t i = 0; i < 20; ++i) CHECK(tail[i] == whole[10 + i]);
  }
  const auto dbl = DriverSystem::doubling(circle_family(0.1));
  const Param r = rational_param(12345, 99991);
  const auto whole = parameter_orbit(dbl, r, 40);
  const auto tail = parameter_orbit(dbl, dbl.iterate(r, 7), 33);
  for (std::size_t i = 0; i < 33; ++i) CHECK(tail[i] == whole[7 + i]);
}

TEST_CASE("birkhoff diagnostics of the constant z^2 driver") {
  const auto constant = DriverSystem::constant(circle_family(0.0), at(0.0));
  const auto d = birkhoff_diagnostics(constant, at(0.0), 64);
  for (double m : d.birkhoff_partial_means) CHECK(m == 0.0);
  CHECK(d.epsilon == 0.0);
  CHECK(d.compliant());
  CHECK_THROWS_AS(birkhoff_diagnostics(constant, at(0.0), 8), std::invalid_argument);
}

TEST_CASE("synthetic linear drift raises the non-integrability flag") {
  std::vector<double> v(128);
  for (std::size_t n = 0; n < v.size(); ++n) v[n] = -static_cast<double>(n);
  const auto d = diagnose_log_eta(v);
  CHECK(d.non_integrable);
  CHECK_FALSE(d.compliant());

  std::vector<double> bounded(128);
  for (std::size_t n = 0; n < bounded.size(); ++n) bounded[n] = -1.0 - std::sin(0.7 * n);
  CHECK_FALSE(diagnose_log_eta(bounded).non_integrable);
}

TEST_CASE("a degenerate orbit records -inf and is flagged") {
  const auto pencil = DriverSystem::constant(affine_family(MapFamily::Form::pencil), at(0.0));
  const auto d = birkhoff_diagnostics(pencil, at(0.0), 32);
  CHECK(d.hit_degenerate);
  CHECK(std::isinf(d.per_step_log_eta[0]));
  CHECK_FALSE(d.compliant());
}

TEST_CASE("epsilon certificate shrinks on a family bounded away from M") {
  // pencil (z^2, c w^2 + z w) with c on a circle avoiding 0
  MapFamily fam = circle_family(0.3, 0.5);
  fam.form = MapFamily::Form::pencil;
  const auto rot = DriverSystem::circle_rotation(fam, kGolden);
  double prev = INFINITY;
  for (std::size_t len : {64, 128, 256, 512}) {
    const auto d = birkhoff_diagnostics(rot, at(0.1), len);
    CHECK(d.compliant());
    CHECK(d.epsilon <= prev);
    prev = d.epsilon;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("shifted start converges to the same Birkhoff limit") {
  MapFamily fam = circle_family(0.3, 0.5);
  fam.form = MapFamily::Form::pencil;
  const auto rot = DriverSystem::circle_rotation(fam, kGolden);
  const auto a = birkhoff_diagnostics(rot, at(0.1), 512);
  const auto b = birkhoff_diagnostics(rot, rot.step(at(0.1)), 512);
  double bound = 0.0;
  for (double v : a.per_step_log_eta) bound = std::max(bound, std::abs(v));
  for (std::size_t n = 1; n <= 512; ++n)
    CHECK(std::abs(a.birkhoff_partial_means[n - 1] - b.birkhoff_partial_means[n - 1]) <= 2.0 * bound / n + 1e-12);
}

TEST_CASE("sampling the invariant measures") {
  const auto constant = DriverSystem::constant(circle_family(0.0), at(0.42));
  for (const auto& p : sample_lambda(constant, 50, 1)) CHECK(p == at(0.42));

  const auto rot = DriverSystem::circle_rotation(circle_family(0.1), kGolden);
  const auto draws = sample_lambda(rot, 100000, 2);
  double s = 0.0;
  for (const auto& p : draws) s += p.t;
  CHECK(std::abs(s / draws.size() - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / draws.size()));

  const auto dbl = DriverSystem::doubling(circle_family(0.1));
  std::vector<double> ts;
  for (const auto& p : sample_lambda(dbl, 100000, 3)) ts.push_back(dbl.coordinate(p));
  CHECK(ks_statistic(ts, [](double x) { return x; }) < 0.01);

  const auto logistic = DriverSystem::logistic(circle_family(0.1));
  std::vector<double> ls;
  for (const auto& p : sample_lambda(logistic, 100000, 4)) ls.push_back(p.t);
  CHECK(ks_statistic(ls, [](double x) { return 2.0 / std::numbers::pi * std::asin(std::sqrt(x)); }) < 0.01);

  const auto a = sample_lambda(rot, 10, 77), b = sample_lambda(rot, 10, 77);
  CHECK(a == b);
}

TEST_CASE("the logistic arcsine law is preserved by one step") {
  const auto logistic = DriverSystem::logistic(circle_family(0.1));
  std::vector<double> ls;
  for (const auto& p : sample_lambda(logistic, 100000, 9)) ls.push_back(logistic.step(p).t);
  CHECK(ks_statistic(ls, [](double x) { return 2.0 / std::numbers::pi * std::asin(std::sqrt(x)); }) < 0.01);
}

TEST_CASE("recurrence times") {
  const auto constant = DriverSystem::constant(circle_family(0.0), at(0.0));
  const auto all = recurrence_times(constant, at(0.0), 10, 0.01);
  CHECK(all.size() == 10);

  const auto half = DriverSystem::circle_rotation(circle_family(0.1), 0.5);
  const auto even = recurrence_times(half, at(0.0), 20, 0.1);
  REQUIRE(even.size() == 10);
  for (std::size_t k = 0; k < even.size(); ++k) CHECK(even[k] == 2 * (k + 1));

  const auto golden = DriverSystem::circle_rotation(circle_family(0.1), kGolden);
  const auto fib = recurrence_times(golden, at(0.0), 100, 0.02);
  CHECK(std::find(fib.begin(), fib.end(), 89u) != fib.end());
  CHECK_THROWS_AS(recurrence_times(golden, at(0.0), 10, 0.0), std::invalid_argument);
}

TEST_CASE("iid shift: reproducible sequences and a sequence metric") {
  const auto shift = DriverSystem::iid_shift(circle_family(0.1));
  const auto a = sample_lambda(shift, 2, 5);
  CHECK(shift.distance(a[0], a[0]) == 0.0);
  CHECK(shift.distance(a[0], a[1]) > 0.0);
  CHECK(shift.coordinate(shift.step(a[0])) == shift.coordinate(shift.iterate(a[0], 1)));
  CHECK(driver_kind_from_string("iid_shift") == DriverKind::iid_shift);
  CHECK_THROWS_AS(driver_kind_from_string("bogus"), ConfigError);
}
