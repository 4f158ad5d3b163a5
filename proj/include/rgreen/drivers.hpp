#pragma once

// Parameter-space drivers F with known invariant measures, the map families
// they feed, and Birkhoff-type diagnostics of log eta along driver orbits.

#include <cstdint>
#include <string>
#include <vector>

#include "rgreen/projective.hpp"

namespace rgreen {

/// A parameter point. Only the fields used by the driver kind are meaningful.
struct Param {
  double t = 0.0;
  /// Exact rational t = num / den (den odd) for the doubling driver; den == 0 means unused.
  std::uint64_t num = 0, den = 0;
  /// iid_shift: identity of the sampled sequence and the current shift position.
  std::uint64_t stream = 0, offset = 0;

  friend bool operator==(const Param&, const Param&) = default;
};

/// Curve c(t) in the complex plane.
struct ParamCurve {
  enum class Kind { circle, affine };
  Kind kind = Kind::circle;
  cplx center = 0.0;  ///< circle: center; affine: offset c(0)
  double radius = 0.0;
  cplx slope = 0.0;  ///< affine only

  cplx at(double t) const noexcept;
};

/// Maps t to a rational map. `power_plus_c` is z^d + c(t); `pencil` is the
/// lift (z^d, c(t) w^d + z w^(d-1)), which leaves H_d exactly when c(t) = 0.
struct MapFamily {
  enum class Form { power_plus_c, pencil };
  Form form = Form::power_plus_c;
  int degree = 2;
  ParamCurve curve;

  RationalMapP1 raw_map(double t) const;
  RationalMapP1 map(double t) const { return raw_map(t).normalized(); }
};

enum class DriverKind { constant, circle_rotation, doubling, logistic, iid_shift, contraction };

std::string to_string(DriverKind kind);
DriverKind driver_kind_from_string(const std::string& name);

class DriverSystem {
 public:
  /// F = id, Lambda = point mass at `anchor`.
  static DriverSystem constant(MapFamily family, Param anchor);
  /// t -> t + alpha mod 1, Lebesgue measure.
  static DriverSystem circle_rotation(MapFamily family, double alpha);
  /// t -> 2t mod 1, Lebesgue measure. Exact on rational parameters.
  static DriverSystem doubling(MapFamily family);
  /// t -> 4t(1-t), arcsine measure.
  static DriverSystem logistic(MapFamily family);
  /// Shift on i.i.d. uniform sequences generated lazily from a seeded stream.
  static DriverSystem iid_shift(MapFamily family);
  /// t -> anchor + factor (t - anchor), 0 < factor < 1; Lambda = point mass at the anchor.
  static DriverSystem contraction(MapFamily family, double factor, Param anchor = {});

  DriverKind kind() const noexcept { return kind_; }
  const MapFamily& family() const noexcept { return family_; }
  double alpha() const noexcept { return alpha_; }
  double factor() const noexcept { return factor_; }
  const Param& anchor() const noexcept { return anchor_; }
  int parameter_dim() const noexcept { return 1; }

  /// One application of F.
  Param step(const Param& p) const;
  Param iterate(Param p, std::size_t n) const;

  /// The real coordinate handed to the family.
  double coordinate(const Param& p) const;
  RationalMapP1 map_at(const Param& p) const { return family_.map(coordinate(p)); }

  /// Parameter-space metric: circle distance for rotation/doubling, |dt| for
  /// interval drivers, a weighted sequence metric for the shift.
  double distance(const Param& a, const Param& b) const;

  /// Throws DomainError when p is outside the driver's domain.
  void check_domain(const Param& p, std::size_t index) const;

 private:
  DriverSystem(DriverKind kind, MapFamily family) : kind_(kind), family_(std::move(family)) {}

  DriverKind kind_;
  MapFamily family_;
  double alpha_ = 0.0;
  double factor_ = 0.5;
  Param anchor_{};
};

/// Doubling-driver parameter num/den with den odd (and reduced mod den).
Param rational_param(std::uint64_t num, std::uint64_t den);

/// [F^0(p), ..., F^(length-1)(p)].
std::vector<Param> parameter_orbit(const DriverSystem& driver, const Param& f0, std::size_t length);

/// [f_0, ..., f_(length-1)], each normalized.
std::vector<RationalMapP1> orbit(const DriverSystem& driver, const Param& f0, std::size_t length);

/// i.i.d. draws from the driver's invariant measure; reproducible under seed.
std::vector<Param> sample_lambda(const DriverSystem& driver, std::size_t count, std::uint64_t seed);

/// All n in [1, horizon] with distance(F^n(t0), t0) < radius.
std::vector<std::size_t> recurrence_times(const DriverSystem& driver, const Param& f0,
                                          std::size_t horizon, double radius);

struct OrbitDiagnostics {
  std::vector<double> per_step_log_eta;
  /// entry n-1 holds (1/n) sum_{i<n} log eta(f_i)
  std::vector<double> birkhoff_partial_means;
  /// |mean_(2n) - mean_n| for n = 8, 16, ... inside the window
  std::vector<double> cauchy_differences;
  /// Smallest eps with log eta(f_n) >= -eps n on [n0, length), n0 = ceil(length / 2).
  double epsilon = 0.0;
  std::size_t n0 = 0;
  /// Least-squares slope of the partial means over the second half.
  double drift_slope = 0.0;
  bool hit_degenerate = false;
  bool non_integrable = false;

  bool compliant() const noexcept { return !hit_degenerate && !non_integrable; }
};

struct DiagnosticsOptions {
  /// Partial means falling faster than this per step (while the Cauchy
  /// differences grow) raise the non-integrability flag.
  double drift_tolerance = 0.05;
};

OrbitDiagnostics diagnose_log_eta(std::vector<double> log_eta, const DiagnosticsOptions& opts = {});

OrbitDiagnostics birkhoff_diagnostics(const DriverSystem& driver, const Param& f0,
                                      std::size_t length, const DiagnosticsOptions& opts = {});

}  // namespace rgreen
