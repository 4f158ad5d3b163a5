#pragma once

// Observables, DSH-norm surrogates, and Monte-Carlo estimates of the decay of
// correlations <mu(f_0), (F_(n-1))^* phi . psi> - <mu(f_n), phi><mu(f_0), psi>.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "rgreen/drivers.hpp"
#include "rgreen/measure.hpp"
#include "rgreen/potential.hpp"

namespace rgreen {

class Observable {
 public:
  enum class Kind { smooth_builtin, grid_function, custom };

  /// Builtins: "one", "re", "im", "inv", "cos<k>", "sin<k>" (circle harmonics,
  /// k >= 1) and "logdist" (log chordal distance to [1:1]).
  static Observable builtin(const std::string& name);
  /// Bilinear interpolation of node values in the chart of the point.
  static Observable grid_function(const std::string& name, GridSpec grid, std::vector<double> values);
  static Observable custom(const std::string& name, std::function<double(const PointP1&)> fn,
                           double sup_bound = std::numeric_limits<double>::infinity());

  const std::string& name() const noexcept { return name_; }
  Kind kind() const noexcept { return kind_; }
  /// ||phi||_inf, infinite when unbounded.
  double sup_bound() const noexcept { return scale_abs() * sup_bound_; }
  /// Closed-form L1 norm and dd^c mass (positive plus negative) when known, NaN otherwise.
  double known_l1() const noexcept { return scale_abs() * known_l1_; }
  double known_laplacian_mass() const noexcept { return scale_abs() * known_mass_; }
  bool has_known_dsh() const noexcept { return known_l1_ == known_l1_; }
  bool is_constant() const noexcept { return constant_; }

  double operator()(const PointP1& x) const { return scale_ * fn_(x); }
  Observable scaled(double factor) const;

 private:
  double scale_abs() const noexcept { return scale_ < 0 ? -scale_ : scale_; }

  std::string name_;
  Kind kind_ = Kind::custom;
  std::function<double(const PointP1&)> fn_;
  double scale_ = 1.0;
  double sup_bound_ = std::numeric_limits<double>::infinity();
  double known_l1_ = std::numeric_limits<double>::quiet_NaN();
  double known_mass_ = std::numeric_limits<double>::quiet_NaN();
  bool constant_ = false;
};

struct DshEstimate {
  double l1 = 0.0;
  double positive_mass = 0.0;
  double negative_mass = 0.0;
  double norm() const noexcept { return l1 + positive_mass + negative_mass; }
};

/// L1(omega) norm plus the Jordan masses of the discrete dd^c psi on the grid.
DshEstimate dsh_decomposition(const Observable& psi, const GridSpec& grid);
/// The closed form when the observable carries one, the grid decomposition otherwise.
double estimate_dsh_norm(const Observable& psi, const GridSpec& grid = {128, 2.0});

struct PairingRow {
  std::string name;
  double pairing = 0.0;  ///< <mu, psi>
  double std_error = 0.0;
  double dsh_norm = 0.0;
  /// |<mu, psi>| / ((1 + g_sup) ||psi||_DSH)
  double ratio = 0.0;
  /// ||psi||_DSH / ((1 + g_sup) ||psi||^mu_DSH), ||psi||^mu_DSH = |<mu, psi>| + (DSH - L1)
  double reverse_ratio = 0.0;
};

struct PairingReport {
  std::vector<PairingRow> rows;
  double g_sup = 0.0;
  /// max ratio over the rows: the fitted constant of the forward inequality
  double fitted_constant = 0.0;
  double fitted_reverse_constant = 0.0;
};

PairingRow check_pairing_bound(const GreenMeasure& mu, double g_sup, const Observable& psi,
                               const GridSpec& grid = {128, 2.0});
PairingReport check_pairing_bounds(const GreenMeasure& mu, double g_sup, const std::vector<Observable>& psis,
                                   const GridSpec& grid = {128, 2.0});

struct MixingOptions {
  std::vector<int> depths;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  PointP1 root = PointP1(cplx(2.0, 0.3), 1.0);
  /// Preimage walks go this far beyond the largest depth.
  int sampler_margin = 20;
  int bootstrap_replicates = 200;
  /// Grid and depth of the shifted-orbit potentials g_n.
  GridSpec potential_grid{64, 2.0};
  int potential_depth = 20;
  /// Run even when the driver fails its diagnostics.
  bool force = false;
};

struct MixingRow {
  int n = 0;
  double correlation = 0.0;  ///< signed estimate
  double std_error = 0.0;
  double err_low = 0.0, err_high = 0.0;  ///< bootstrap 95% interval
  double g_n_sup = 0.0;
  /// d^-n (1 + ||g_n||)^2 ||phi||_inf ||psi||_DSH
  double bound_shape = 0.0;
};

struct MixingReport {
  std::vector<MixingRow> rows;
  int degree = 2;
  double phi_sup = 0.0;
  double psi_dsh = 0.0;
  /// Slope of log |correlation| in n over depths whose correlation exceeds
  /// three standard errors; NaN unless at least four such depths exist.
  double fitted_rate = std::numeric_limits<double>::quiet_NaN();
  int significant_depths = 0;
  /// |c_n| <= K shape_n + 3 se_n at every depth, with K fitted on the first half.
  double fitted_constant = 0.0;
  bool dominated = false;
  bool hypothesis_violated = false;

  bool rate_available() const noexcept { return fitted_rate == fitted_rate; }
};

/// Throws HypothesisError when the driver fails its diagnostics unless `force`.
MixingReport mixing_experiment(const DriverSystem& driver, const Param& f0, const Observable& phi,
                               const Observable& psi, const MixingOptions& options);

/// CSV: n, correlation, err_low, err_high, g_n_sup, paper_bound_shape
void write_mixing_csv(const MixingReport& report, std::ostream& out);

struct RecurrenceRow {
  std::size_t alpha_n = 0;
  /// <mu(f_0), (F_(alpha-1))^* phi . psi> - <mu(f_0), phi><mu(f_0), psi>
  double correlation = 0.0;
  double std_error = 0.0;
  double tv_binned = 0.0;
};

struct RecurrenceReport {
  std::vector<RecurrenceRow> rows;
  double phi_mean = 0.0, psi_mean = 0.0;
};

/// Along the recurrence times of f0. The clouds for mu(f_alpha) reuse the
/// seed of mu(f_0) so the distance column only sees the change of measure.
RecurrenceReport recurrence_experiment(const DriverSystem& driver, const Param& f0, const Observable& phi,
                                       const Observable& psi, std::size_t horizon, double radius,
                                       const MixingOptions& options);

/// CSV: alpha_n, correlation, tv_binned
void write_recurrence_csv(const RecurrenceReport& report, std::ostream& out);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct OperatorIdentityCheck {
  /// <mu(f_0), (phi o f_0) psi>
  McEstimate direct;
  /// <mu(f_1), phi . Lambda_0 psi>, Lambda_0 = (f_0)_* / d
  McEstimate transferred;
};

OperatorIdentityCheck operator_identity_check(const DriverSystem& driver, const Param& f0, const Observable& phi,
                                              const Observable& psi, const MixingOptions& options);

/// <mu(f_1), (f_0)_* psi_0 / d> for psi_0 = psi - <mu(f_0), psi>; zero in exact arithmetic.
McEstimate mean_zero_pushforward(const DriverSystem& driver, const Param& f0, const Observable& psi,
                                 const MixingOptions& options);

}  // namespace rgreen
