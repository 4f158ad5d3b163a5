#include "rgreen/drivers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "rgreen/error.hpp"
#include "rgreen/numerics.hpp"

namespace rgreen {

namespace {

double frac(double x) noexcept { return x - std::floor(x); }

double circle_distance(double a, double b) noexcept {
  const double d = std::abs(frac(a) - frac(b));
  return std::min(d, 1.0 - d);
}

double shift_entry(std::uint64_t stream, std::uint64_t position) noexcept {
  return static_cast<double>(derive_seed(stream, position) >> 11) * 0x1.0p-53;
}

}  // namespace

cplx ParamCurve::at(double t) const noexcept {
  if (kind == Kind::circle) return center + std::polar(radius, 2.0 * std::numbers::pi * t);
  return center + t * slope;
}

RationalMapP1 MapFamily::raw_map(double t) const {
  const cplx c = curve.at(t);
  if (form == Form::power_plus_c) return RationalMapP1::power_plus_constant(degree, c);
  std::vector<cplx> num(degree + 1, 0.0), den(degree + 1, 0.0);
  num[0] = 1.0;
  den[degree - 1] = 1.0;
  den[degree] = c;
  return {std::move(num), std::move(den)};
}

std::string to_string(DriverKind kind) {
  switch (kind) {
    case DriverKind::constant: return "constant";
    case DriverKind::circle_rotation: return "circle_rotation";
    case DriverKind::doubling: return "doubling";
    case DriverKind::logistic: return "logistic";
    case DriverKind::iid_shift: return "iid_shift";
    case DriverKind::contraction: return "contraction";
  }
  return "unknown";
}

DriverKind driver_kind_from_string(const std::string& name) {
  for (auto k : {DriverKind::constant, DriverKind::circle_rotation, DriverKind::doubling,
                 DriverKind::logistic, DriverKind::iid_shift, DriverKind::contraction})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown driver kind: " + name);
}

// ------------------------------------------------------------ DriverSystem

DriverSystem DriverSystem::constant(MapFamily family, Param anchor) {
  DriverSystem d(DriverKind::constant, std::move(family));
  d.anchor_ = anchor;
  return d;
}

DriverSystem DriverSystem::circle_rotation(MapFamily family, double alpha) {
  DriverSystem d(DriverKind::circle_rotation, std::move(family));
  d.alpha_ = frac(alpha);
  return d;
}

DriverSystem DriverSystem::doubling(MapFamily family) {
  return {DriverKind::doubling, std::move(family)};
}

DriverSystem DriverSystem::logistic(MapFamily family) {
  return {DriverKind::logistic, std::move(family)};
}

DriverSystem DriverSystem::iid_shift(MapFamily family) {
  return {DriverKind::iid_shift, std::move(family)};
}

DriverSystem DriverSystem::contraction(MapFamily family, double factor, Param anchor) {
  if (!(factor > 0.0 && factor < 1.0))
    throw std::invalid_argument("contraction factor must lie in (0, 1)");
  DriverSystem d(DriverKind::contraction, std::move(family));
  d.factor_ = factor;
  d.anchor_ = anchor;
  return d;
}

Param DriverSystem::step(const Param& p) const {
  Param q = p;
  switch (kind_) {
    case DriverKind::constant:
      break;
    case DriverKind::circle_rotation:
      q.t = frac(p.t + alpha_);
      break;
    case DriverKind::doubling:
      if (p.den != 0) {
        q.num = (2 * p.num) % p.den;
        q.t = static_cast<double>(q.num) / static_cast<double>(q.den);
      } else {
        q.t = frac(2.0 * p.t);
      }
      break;
    case DriverKind::logistic:
      q.t = 4.0 * p.t * (1.0 - p.t);
      break;
    case DriverKind::iid_shift:
      q.offset = p.offset + 1;
      q.t = shift_entry(q.stream, q.offset);
      break;
    case DriverKind::contraction:
      q.t = anchor_.t + factor_ * (p.t - anchor_.t);
      break;
  }
  return q;
}

Param DriverSystem::iterate(Param p, std::size_t n) const {
  for (std::size_t i = 0; i < n; ++i) p = step(p);
  return p;
}

double DriverSystem::coordinate(const Param& p) const {
  switch (kind_) {
    case DriverKind::iid_shift:
      return shift_entry(p.stream, p.offset);
    case DriverKind::doubling:
      return p.den != 0 ? static_cast<double>(p.num) / static_cast<double>(p.den) : p.t;
    default:
      return p.t;
  }
}

double DriverSystem::distance(const Param& a, const Param& b) const {
  switch (kind_) {
    case DriverKind::circle_rotation:
    case DriverKind::doubling:
      return circle_distance(coordinate(a), coordinate(b));
    case DriverKind::iid_shift: {
      double s = 0.0;
      for (std::uint64_t i = 0; i < 16; ++i)
        s += std::ldexp(std::abs(shift_entry(a.stream, a.offset + i) - shift_entry(b.stream, b.offset + i)),
                        -static_cast<int>(i) - 1);
      return s;
    }
    default:
      return std::abs(coordinate(a) - coordinate(b));
  }
}

void DriverSystem::check_domain(const Param& p, std::size_t index) const {
  const double t = coordinate(p);
  if (!std::isfinite(t)) throw DomainError("parameter is not finite", index);
  if (kind_ == DriverKind::logistic && (t < 0.0 || t > 1.0))
    throw DomainError("logistic parameter outside [0, 1]", index);
  if (kind_ == DriverKind::doubling && p.den != 0 && p.num >= p.den)
    throw DomainError("rational parameter numerator not reduced", index);
}

Param rational_param(std::uint64_t num, std::uint64_t den) {
  if (den == 0 || den >= (std::uint64_t{1} << 62))
    throw std::invalid_argument("rational_param: denominator must lie in [1, 2^62)");
  Param p;
  p.den = den;
  p.num = num % den;
  p.t = static_cast<double>(p.num) / static_cast<double>(den);
  return p;
}

// ---------------------------------------------------------------- orbits

std::vector<Param> parameter_orbit(const DriverSystem& driver, const Param& f0, std::size_t length) {
  if (length == 0) throw std::invalid_argument("orbit length must be >= 1");
  std::vector<Param> out;
  out.reserve(length);
  Param p = f0;
  for (std::size_t i = 0; i < length; ++i) {
    driver.check_domain(p, i);
    out.push_back(p);
    p = driver.step(p);
  }
  return out;
}

std::vector<RationalMapP1> orbit(const DriverSystem& driver, const Param& f0, std::size_t length) {
  const auto params = parameter_orbit(driver, f0, length);
  std::vector<RationalMapP1> maps;
  maps.reserve(length);
  for (const auto& p : params) maps.push_back(driver.map_at(p));
  return maps;
}

std::vector<Param> sample_lambda(const DriverSystem& driver, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("sample_lambda: count must be >= 1");
  Rng rng(splitmix64(seed));
  std::vector<Param> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Param p;
    switch (driver.kind()) {
      case DriverKind::constant:
      case DriverKind::contraction:
        p = driver.anchor();
        break;
      case DriverKind::circle_rotation:
        p.t = uniform01(rng);
        break;
      case DriverKind::doubling: {
        const std::uint64_t den = (rng() >> 3) | (std::uint64_t{1} << 61) | 1u;
        p = rational_param(uniform_index(rng, den), den);
        break;
      }
      case DriverKind::logistic: {
        const double s = std::sin(std::numbers::pi * uniform01(rng) / 2.0);
        p.t = s * s;
        break;
      }
      case DriverKind::iid_shift:
        p.stream = rng();
        p.offset = 0;
        p.t = shift_entry(p.stream, 0);
        break;
    }
    out.push_back(p);
  }
  return out;
}

std::vector<std::size_t> recurrence_times(const DriverSystem& driver, const Param& f0,
                                          std::size_t horizon, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("recurrence radius must be > 0");
  std::vector<std::size_t> times;
  Param p = f0;
  for (std::size_t n = 1; n <= horizon; ++n) {
    p = driver.step(p);
    if (driver.distance(p, f0) < radius) times.push_back(n);
  }
  return times;
}

// ------------------------------------------------------------ diagnostics

OrbitDiagnostics diagnose_log_eta(std::vector<double> log_eta, const DiagnosticsOptions& opts) {
  const std::size_t L = log_eta.size();
  if (L < 16) throw std::invalid_argument("diagnostics need at least 16 orbit points");
  OrbitDiagnostics out;
  out.per_step_log_eta = std::move(log_eta);
  const auto& v = out.per_step_log_eta;

  out.birkhoff_partial_means.resize(L);
  double sum = 0.0;
  for (std::size_t n = 1; n <= L; ++n) {
    sum += v[n - 1];
    out.birkhoff_partial_means[n - 1] = sum / static_cast<double>(n);
    if (std::isinf(v[n - 1]) && v[n - 1] < 0) out.hit_degenerate = true;
  }
  const auto& means = out.birkhoff_partial_means;

  for (std::size_t n = 8; 2 * n <= L; n *= 2)
    out.cauchy_differences.push_back(std::abs(means[2 * n - 1] - means[n - 1]));

  out.n0 = (L + 1) / 2;
  double eps = 0.0;
  for (std::size_t n = std::max<std::size_t>(out.n0, 1); n < L; ++n)
    eps = std::max(eps, std::max(0.0, -v[n]) / static_cast<double>(n));
  out.epsilon = out.hit_degenerate ? std::numeric_limits<double>::infinity() : eps;

  if (!out.hit_degenerate) {
    std::vector<double> xs, ys;
    for (std::size_t n = out.n0; n <= L; ++n) {
      xs.push_back(static_cast<double>(n));
      ys.push_back(means[n - 1]);
    }
    out.drift_slope = fit_line(xs, ys).slope;
    const auto& c = out.cauchy_differences;
    const bool growing = c.size() < 2 || c.back() >= c[c.size() - 2];
    out.non_integrable = out.drift_slope < -opts.drift_tolerance && growing;
  } else {
    out.non_integrable = true;
  }
  return out;
}

OrbitDiagnostics birkhoff_diagnostics(const DriverSystem& driver, const Param& f0,
                                      std::size_t length, const DiagnosticsOptions& opts) {
  if (length < 16) throw std::invalid_argument("birkhoff_diagnostics: length must be >= 16");
  const auto params = parameter_orbit(driver, f0, length);
  std::vector<double> log_eta;
  log_eta.reserve(length);
  for (const auto& p : params)
    log_eta.push_back(degeneracy_proxy(driver.family().raw_map(driver.coordinate(p))).log_eta);
  return diagnose_log_eta(std::move(log_eta), opts);
}

}  // namespace rgreen
