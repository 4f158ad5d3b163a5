#include "rgreen/projective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "rgreen/error.hpp"
#include "rgreen/numerics.hpp"

namespace rgreen {

namespace {

constexpr int kSupSamples = 4096;
constexpr int kSupCandidates = 4;

std::string describe(std::span<const cplx> coeffs) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (i) os << ", ";
    os << '(' << coeffs[i].real() << ", " << coeffs[i].imag() << ')';
  }
  os << ']';
  return os.str();
}

// sum_j c[j] z^(d-j) w^j by homogeneous Horner.
cplx binary_form(std::span<const cplx> c, cplx z, cplx w) noexcept {
  cplx acc = c[0];
  cplx wp = 1.0;
  for (std::size_t j = 1; j < c.size(); ++j) {
    wp *= w;
    acc = acc * z + c[j] * wp;
  }
  return acc;
}

// Polynomial in one variable, coefficients highest degree first.
cplx horner(std::span<const cplx> c, cplx t, cplx* derivative) noexcept {
  cplx p = c[0], dp = 0.0;
  for (std::size_t j = 1; j < c.size(); ++j) {
    dp = dp * t + p;
    p = p * t + c[j];
  }
  if (derivative) *derivative = dp;
  return p;
}

std::vector<cplx> polynomial_roots(std::span<const cplx> c) {
  const std::size_t m = c.size() - 1;
  std::vector<cplx> roots;
  roots.reserve(m);
  if (m == 1) {
    roots.push_back(-c[1] / c[0]);
  } else if (m == 2) {
    const cplx a = c[0], b = c[1], k = c[2];
    cplx disc = std::sqrt(b * b - 4.0 * a * k);
    if (std::real(std::conj(b) * disc) < 0.0) disc = -disc;
    const cplx q = -0.5 * (b + disc);
    if (q == 0.0) {
      roots.assign(2, 0.0);
    } else {
      roots.push_back(q / a);
      roots.push_back(k / q);
    }
  } else if (m >= 3) {
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(m, m);
    for (std::size_t i = 0; i < m; ++i) companion(0, i) = -c[i + 1] / c[0];
    for (std::size_t i = 1; i < m; ++i) companion(i, i - 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
    if (solver.info() != Eigen::Success)
      throw RootFindError("companion eigenvalue solver did not converge for " + describe(c));
    for (std::size_t i = 0; i < m; ++i) roots.push_back(solver.eigenvalues()(i));
  }
  return roots;
}

void newton_polish(std::span<const cplx> c, cplx& t) noexcept {
  cplx dp;
  double res = std::abs(horner(c, t, &dp));
  for (int it = 0; it < 8 && res > 0.0; ++it) {
    if (dp == 0.0) return;
    const cplx next = t - horner(c, t, nullptr) / dp;
    if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) return;
    cplx dnext;
    const double rnext = std::abs(horner(c, next, &dnext));
    if (!(rnext < res)) return;
    t = next;
    dp = dnext;
    res = rnext;
  }
}

}  // namespace

// ---------------------------------------------------------------- PointP1

PointP1::PointP1(cplx z, cplx w) {
  const double az = std::abs(z), aw = std::abs(w);
  if (!std::isfinite(az) || !std::isfinite(aw))
    throw std::invalid_argument("PointP1: non-finite coordinates");
  const double m = std::max(az, aw);
  if (m == 0.0) throw std::invalid_argument("PointP1: both coordinates vanish");
  int e = 0;
  std::frexp(m, &e);
  const double s = std::ldexp(1.0, -e);
  z_ = z * s;
  w_ = w * s;
}

cplx PointP1::affine() const noexcept {
  if (w_ == 0.0) return {std::numeric_limits<double>::infinity(), 0.0};
  return z_ / w_;
}

double spherical_distance(const PointP1& x, const PointP1& y) noexcept {
  const double d = std::abs(x.z() * y.w() - y.z() * x.w()) / (x.norm() * y.norm());
  return std::min(d, 1.0);
}

// ----------------------------------------------------------- RationalMapP1

RationalMapP1::RationalMapP1(std::vector<cplx> num, std::vector<cplx> den)
    : degree_(static_cast<int>(num.size()) - 1), num_(std::move(num)), den_(std::move(den)) {
  if (num_.size() != den_.size())
    throw std::invalid_argument("RationalMapP1: numerator and denominator lengths differ");
  if (degree_ < 2) throw std::invalid_argument("RationalMapP1: degree must be >= 2");
  for (const auto* v : {&num_, &den_})
    for (cplx c : *v)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
        throw std::invalid_argument("RationalMapP1: non-finite coefficient");
  resultant_ = rgreen::resultant(num_, den_);
}

RationalMapP1 RationalMapP1::power_plus_constant(int degree, cplx c) {
  if (degree < 2) throw std::invalid_argument("power_plus_constant: degree must be >= 2");
  std::vector<cplx> num(degree + 1, 0.0), den(degree + 1, 0.0);
  num[0] = 1.0;
  num[degree] = c;
  den[degree] = 1.0;
  return {std::move(num), std::move(den)};
}

void RationalMapP1::lift(cplx z, cplx w, cplx& p, cplx& q) const noexcept {
  p = binary_form(num_, z, w);
  q = binary_form(den_, z, w);
}

void RationalMapP1::require_holomorphic() const {
  if (!is_holomorphic()) throw DegenerateMapError("map in M: resultant vanishes");
}

double RationalMapP1::lift_sup() const {
  // |F|^2 on the unit sphere only depends on the projective point.
  auto sphere_value = [this](cplx z, cplx w) {
    cplx p, q;
    lift(z, w, p, q);
    return std::norm(p) + std::norm(q);
  };
  auto chart_value = [&](int chart, double re, double im) {
    const cplx t(re, im);
    const double n = std::sqrt(1.0 + std::norm(t));
    return chart == 0 ? sphere_value(t / n, 1.0 / n) : sphere_value(1.0 / n, t / n);
  };

  struct Candidate {
    double value;
    cplx z, w;
  };
  std::vector<Candidate> samples;
  samples.reserve(kSupSamples);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < kSupSamples; ++i) {
    const double cos_theta = 1.0 - 2.0 * (i + 0.5) / kSupSamples;
    const double theta = std::acos(cos_theta);
    const double phi = golden * i;
    const cplx z = std::polar(std::sin(theta / 2), phi);
    const cplx w = std::cos(theta / 2);
    samples.push_back({sphere_value(z, w), z, w});
  }
  std::partial_sort(samples.begin(), samples.begin() + kSupCandidates, samples.end(),
                    [](const Candidate& a, const Candidate& b) { return a.value > b.value; });

  double best = samples.front().value;
  const double step = std::sqrt(4.0 * std::numbers::pi / kSupSamples);
  for (int k = 0; k < kSupCandidates; ++k) {
    const auto& c = samples[k];
    const int chart = std::abs(c.z) <= std::abs(c.w) ? 0 : 1;
    const cplx t = chart == 0 ? c.z / c.w : c.w / c.z;
    const auto r = nelder_mead_2d(
        [&](double x, double y) { return -chart_value(chart, x, y); }, {t.real(), t.imag()}, step,
        1e-11);
    best = std::max(best, -r.value);
  }
  return std::sqrt(best);
}

RationalMapP1 RationalMapP1::normalized() const {
  const double s = lift_sup();
  if (!(s > 0.0)) throw NumericError("cannot normalize a map whose lift vanishes identically");
  RationalMapP1 out = scaled(1.0 / s);
  out.normalization_ = normalization_ * s;
  out.normalized_ = true;
  return out;
}

RationalMapP1 RationalMapP1::scaled(cplx lambda) const {
  std::vector<cplx> num(num_), den(den_);
  for (auto& c : num) c *= lambda;
  for (auto& c : den) c *= lambda;
  RationalMapP1 out(std::move(num), std::move(den));
  out.normalization_ = normalization_;
  return out;
}

// --------------------------------------------------------------- resultant

cplx resultant(std::span<const cplx> num, std::span<const cplx> den) {
  if (num.size() != den.size() || num.size() < 2)
    throw std::invalid_argument("resultant: forms must share a degree >= 1");
  const std::size_t d = num.size() - 1, n = 2 * d;
  std::vector<cplx> m(n * n, 0.0);
  double scale = 0.0;
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t j = 0; j <= d; ++j) {
      m[r * n + r + j] = num[j];
      m[(r + d) * n + r + j] = den[j];
      scale = std::max({scale, std::abs(num[j]), std::abs(den[j])});
    }
  if (scale == 0.0) return 0.0;
  const double tiny = 16.0 * std::numeric_limits<double>::epsilon() * scale;

  cplx det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(m[r * n + k]) > std::abs(m[piv * n + k])) piv = r;
    if (std::abs(m[piv * n + k]) <= tiny) return 0.0;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m[k * n + j], m[piv * n + j]);
      det = -det;
    }
    const cplx p = m[k * n + k];
    det *= p;
    for (std::size_t r = k + 1; r < n; ++r) {
      const cplx factor = m[r * n + k] / p;
      if (factor == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) m[r * n + j] -= factor * m[k * n + j];
    }
  }
  return det;
}

double log_eta_max(int degree) noexcept { return degree * std::log(degree + 1.0); }

DegeneracyProxy degeneracy_proxy(const RationalMapP1& f) {
  DegeneracyProxy out;
  double cmax = 0.0;
  for (cplx c : f.num()) cmax = std::max(cmax, std::abs(c));
  for (cplx c : f.den()) cmax = std::max(cmax, std::abs(c));
  const double ares = std::abs(f.resultant());
  out.log_coeff_norm = std::log(cmax);
  out.log_resultant = ares > 0.0 ? std::log(ares) : -std::numeric_limits<double>::infinity();
  out.degenerate = !(ares > 0.0);
  out.log_eta = out.degenerate ? -std::numeric_limits<double>::infinity()
                               : out.log_resultant - 2.0 * f.degree() * out.log_coeff_norm;
  return out;
}

// ---------------------------------------------------------------- dynamics

PointP1 evaluate(const RationalMapP1& f, const PointP1& x) {
  f.require_holomorphic();
  cplx p, q;
  f.lift(x.z(), x.w(), p, q);
  if (p == 0.0 && q == 0.0)
    throw NumericError("internal consistency: lift of a holomorphic map vanished at a point");
  return {p, q};
}

std::vector<PointP1> preimages(const RationalMapP1& f, const PointP1& y) {
  f.require_holomorphic();
  const int d = f.degree();
  // Solutions of w_y P(z, w) - z_y Q(z, w) = 0.
  std::vector<cplx> r(d + 1);
  for (int j = 0; j <= d; ++j) r[j] = y.w() * f.num()[j] - y.z() * f.den()[j];

  int lead = 0;
  while (lead <= d && r[lead] == 0.0) ++lead;
  if (lead > d) throw RootFindError("preimage equation vanishes identically: " + describe(r));
  int trail = d;
  while (r[trail] == 0.0) --trail;

  std::vector<PointP1> out;
  out.reserve(d);
  for (int k = 0; k < lead; ++k) out.push_back(PointP1::infinity());
  for (int k = trail; k < d; ++k) out.emplace_back(0.0, 1.0);

  if (trail > lead) {
    // p(t) = sum_{j=lead}^{trail} r_j t^(trail-j); q(u) reverses it (u = 1/t).
    std::span<const cplx> forward(r.data() + lead, trail - lead + 1);
    std::vector<cplx> reversed(forward.rbegin(), forward.rend());
    const bool use_forward = std::abs(forward.front()) >= std::abs(forward.back());
    std::vector<cplx> roots = polynomial_roots(use_forward ? forward : std::span<const cplx>(reversed));
    for (cplx root : roots) {
      // Polish in whichever chart keeps the root inside the unit disk.
      cplx t = use_forward ? root : (root == 0.0 ? cplx(std::numeric_limits<double>::infinity()) : 1.0 / root);
      if (std::abs(t) <= 1.0) {
        newton_polish(forward, t);
        out.emplace_back(t, 1.0);
      } else {
        cplx u = use_forward ? 1.0 / t : root;
        newton_polish(reversed, u);
        out.emplace_back(1.0, u);
      }
    }
  }

  for (const auto& x : out) {
    if (spherical_distance(evaluate(f, x), y) >= 1e-8)
      throw RootFindError("preimage residual above 1e-8 for coefficients " + describe(r));
  }
  return out;
}

// -------------------------------------------------------------------- json

nlohmann::json complex_to_json(cplx c) { return nlohmann::json::array({c.real(), c.imag()}); }

cplx complex_from_json(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError("expected a complex number [re, im], got " + j.dump());
}

void to_json(nlohmann::json& j, const RationalMapP1& f) {
  nlohmann::json num = nlohmann::json::array(), den = nlohmann::json::array();
  for (cplx c : f.num()) num.push_back(complex_to_json(c));
  for (cplx c : f.den()) den.push_back(complex_to_json(c));
  j = nlohmann::json{{"degree", f.degree()}, {"num", num}, {"den", den}};
}

RationalMapP1 map_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("map literal must be an object");
  for (const auto& [key, _] : j.items())
    if (key != "degree" && key != "num" && key != "den")
      throw ConfigError("unknown key in map literal: " + key);
  if (!j.contains("degree") || !j.contains("num") || !j.contains("den"))
    throw ConfigError("map literal needs degree, num and den");
  const int d = j.at("degree").get<int>();
  std::vector<cplx> num, den;
  for (const auto& c : j.at("num")) num.push_back(complex_from_json(c));
  for (const auto& c : j.at("den")) den.push_back(complex_from_json(c));
  if (static_cast<int>(num.size()) != d + 1 || static_cast<int>(den.size()) != d + 1)
    throw ConfigError("map literal: coefficient arrays must have degree + 1 entries");
  return {std::move(num), std::move(den)};
}

}  // namespace rgreen
