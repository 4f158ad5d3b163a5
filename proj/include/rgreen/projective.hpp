#pragma once

// Points of the Riemann sphere and degree-d rational maps given by their
// homogeneous lifts F = (P, Q), P and Q binary forms of degree d.

#include <complex>
#include <span>
#include <vector>

#include <json.hpp>

namespace rgreen {

using cplx = std::complex<double>;

/// Homogeneous point [z : w]. The stored representative is rescaled by a
/// power of two so that max(|z|, |w|) lies in [1/2, 1); rescaling is exact.
class PointP1 {
 public:
  PointP1() : z_(0.0), w_(1.0) {}
  PointP1(cplx z, cplx w);

  /// [t : 1]
  static PointP1 from_affine(cplx t) { return {t, 1.0}; }
  static PointP1 infinity() { return {1.0, 0.0}; }

  cplx z() const noexcept { return z_; }
  cplx w() const noexcept { return w_; }
  double norm() const noexcept { return std::hypot(std::abs(z_), std::abs(w_)); }

  /// 0 when |z| <= |w| (coordinate z/w), 1 otherwise (coordinate w/z).
  int chart() const noexcept { return std::abs(z_) <= std::abs(w_) ? 0 : 1; }
  cplx chart_coordinate() const noexcept { return chart() == 0 ? z_ / w_ : w_ / z_; }

  /// z/w, infinite when w = 0.
  cplx affine() const noexcept;
  bool is_infinity() const noexcept { return w_ == 0.0; }

  /// Exact projective equality: z1 w2 == z2 w1.
  friend bool operator==(const PointP1& a, const PointP1& b) noexcept {
    return a.z_ * b.w_ == b.z_ * a.w_;
  }

 private:
  cplx z_, w_;
};

/// Chordal distance |z1 w2 - z2 w1| / (|x| |y|), in [0, 1].
double spherical_distance(const PointP1& x, const PointP1& y) noexcept;

/// Degree-d endomorphism of P^1. Coefficients run from z^d down to w^d:
/// P(z, w) = sum_j num[j] z^(d-j) w^j.
class RationalMapP1 {
 public:
  RationalMapP1(std::vector<cplx> num, std::vector<cplx> den);

  /// z^d + c, lift (z^d + c w^d, w^d).
  static RationalMapP1 power_plus_constant(int degree, cplx c);

  int degree() const noexcept { return degree_; }
  std::span<const cplx> num() const noexcept { return num_; }
  std::span<const cplx> den() const noexcept { return den_; }

  /// The scalar the original coefficients were divided by; 1 for a raw map.
  double normalization() const noexcept { return normalization_; }
  bool is_normalized() const noexcept { return normalized_; }

  /// Copy whose lift has sup 1 on the unit sphere of C^2.
  RationalMapP1 normalized() const;
  RationalMapP1 scaled(cplx lambda) const;

  /// Sup of |F| over the unit sphere, by dense sampling plus local refinement.
  double lift_sup() const;

  cplx resultant() const noexcept { return resultant_; }
  bool is_holomorphic() const noexcept { return resultant_ != 0.0; }

  /// F(z, w) for an arbitrary representative.
  void lift(cplx z, cplx w, cplx& p, cplx& q) const noexcept;

  /// Throws DegenerateMapError when the resultant vanishes.
  void require_holomorphic() const;

  friend bool operator==(const RationalMapP1&, const RationalMapP1&) = default;

 private:
  int degree_;
  std::vector<cplx> num_, den_;
  double normalization_ = 1.0;
  bool normalized_ = false;
  cplx resultant_;
};

struct DegeneracyProxy {
  double log_resultant = 0.0;
  double log_coeff_norm = 0.0;
  /// log |Res| - 2d log max|coeff|; -infinity exactly on the degeneracy locus.
  double log_eta = 0.0;
  bool degenerate = false;
};

/// Upper bound of log eta for degree d (Hadamard: d log(d+1)).
double log_eta_max(int degree) noexcept;

/// Sylvester determinant of the two binary forms. Elimination pivots below
/// 16 eps |M|_max count as zero, so numerically singular matrices give 0.
cplx resultant(std::span<const cplx> num, std::span<const cplx> den);
inline cplx resultant(const RationalMapP1& f) { return f.resultant(); }

DegeneracyProxy degeneracy_proxy(const RationalMapP1& f);

PointP1 evaluate(const RationalMapP1& f, const PointP1& x);

/// The d solutions of f(x) = y, repeated according to multiplicity.
std::vector<PointP1> preimages(const RationalMapP1& f, const PointP1& y);

/// Map literal {"degree": d, "num": [[re, im], ...], "den": [...]}.
void to_json(nlohmann::json& j, const RationalMapP1& f);
RationalMapP1 map_from_json(const nlohmann::json& j);

nlohmann::json complex_to_json(cplx c);
/// Accepts [re, im] or a bare real number.
cplx complex_from_json(const nlohmann::json& j);

}  // namespace rgreen
