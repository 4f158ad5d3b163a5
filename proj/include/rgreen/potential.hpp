#pragma once

// Potentials of pulled-back Fubini-Study forms and the random Green potential
//   g_n = sum_{i=0}^{n} u_i(f_{i-1} o ... o f_0) / d^i
// sampled on a two-chart grid of the sphere.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rgreen/drivers.hpp"
#include "rgreen/projective.hpp"

namespace rgreen {

/// Two square grids of (resolution + 1)^2 nodes on [-extent, extent]^2, one in
/// the z chart ([t : 1]) and one in the 1/z chart ([1 : t]). Doubling the
/// resolution yields a node superset.
struct GridSpec {
  int resolution = 128;
  double extent = 2.0;

  int nodes_per_side() const noexcept { return resolution + 1; }
  std::size_t nodes_per_chart() const noexcept {
    return static_cast<std::size_t>(nodes_per_side()) * nodes_per_side();
  }
  std::size_t node_count() const noexcept { return 2 * nodes_per_chart(); }
  double spacing() const noexcept { return 2.0 * extent / resolution; }

  /// Node index layout: chart-major, then row j (imaginary axis), then column i.
  std::size_t index(int chart, int i, int j) const noexcept {
    return static_cast<std::size_t>(chart) * nodes_per_chart() +
           static_cast<std::size_t>(j) * nodes_per_side() + static_cast<std::size_t>(i);
  }
  cplx coordinate(int i, int j) const noexcept {
    return {-extent + spacing() * i, -extent + spacing() * j};
  }
  PointP1 point(int chart, int i, int j) const {
    const cplx t = coordinate(i, j);
    return chart == 0 ? PointP1(t, 1.0) : PointP1(1.0, t);
  }
  PointP1 point(std::size_t index) const;

  /// Throws std::invalid_argument unless resolution >= 64 and extent >= 2
  /// (the charts must overlap on 1/2 < |z| < 2).
  void validate() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// u_f(x) = (1/d) log|F(x~)| - log|x~| for the normalized lift F. Always <= 0.
double potential_u(const RationalMapP1& f, const PointP1& x);

struct SupEstimate {
  double value = 0.0;
  PointP1 argmax;
  /// Grid plus local refinement can only under-estimate the true sup.
  bool lower_bound = true;
};

/// max |u_f| over the grid, refined by Nelder-Mead from the best nodes.
SupEstimate sup_norm_u(const RationalMapP1& f, const GridSpec& grid);

/// Euclidean distance between sup-normalized coefficient vectors after
/// matching the phase of the first nonzero coefficient.
double coefficient_distance(const RationalMapP1& f, const RationalMapP1& g);

struct LipschitzSample {
  double sup_difference = 0.0;
  double map_distance = 0.0;
};

LipschitzSample lipschitz_check(const RationalMapP1& f, const RationalMapP1& g, const GridSpec& grid);

/// Extrapolation of the unseen terms: ||u_i|| <= M e^(eps_p (i - n)), with M
/// the max of the last five recorded sups. eps_p plays the role of eps * p.
struct TailModel {
  double eps_p = 0.0;
};

struct PotentialSeries {
  std::shared_ptr<const std::vector<RationalMapP1>> orbit;
  int depth = 0;
  int degree = 2;
  GridSpec grid;
  /// terms_sup[i] estimates ||u_i||_inf, i = 0..depth
  std::vector<double> terms_sup;
  /// tail_bounds[k] bounds ||g - g_k||_inf from the recorded terms after k
  /// plus the extrapolated remainder; non-increasing in k.
  std::vector<double> tail_bounds;
  TailModel tail_model;
  /// g_depth at every grid node
  std::vector<double> values;
  /// f_depth o ... o f_0 at every grid node, kept for deepening
  std::vector<PointP1> images;

  double tail_bound() const { return tail_bounds.back(); }
  double sup_abs() const;
  double value(int chart, int i, int j) const { return values[grid.index(chart, i, j)]; }
};

PotentialSeries green_series(std::span<const RationalMapP1> orbit, int depth, const GridSpec& grid,
                             TailModel tail = {});

/// One more term, one map application per node. Needs orbit->size() > depth + 1.
PotentialSeries deepen(const PotentialSeries& series);

/// g_depth at a single point for the orbit (f_0, f_1, ...).
double green_potential_at(std::span<const RationalMapP1> orbit, int depth, const PointP1& x);

/// Grid dump: header "chart,re,im,g_value", one row per node.
void write_grid_csv(const PotentialSeries& series, std::ostream& out);

/// Term ledger {i, terms_sup, weight} and tail bounds as JSON.
nlohmann::json series_ledger(const PotentialSeries& series);

struct ExponentFit {
  double log_constant = 0.0;
  double exponent = 0.0;
  double r2 = 0.0;
  std::vector<double> minus_log_eta;
  std::vector<double> log_sup_u;
};

/// Fits log ||u_f|| = log C + p (-log eta(f)) over the given maps.
ExponentFit fit_distance_exponent(std::span<const RationalMapP1> maps, const GridSpec& grid);

struct ContinuityRow {
  Param start;
  double sup_difference = 0.0;
};

struct ContinuityReport {
  std::vector<ContinuityRow> rows;
  /// sup_n eta(F^i(f_{n,0}))^(-p) / d^i for i = 0..depth
  std::vector<double> h_terms;
  double h_sum = 0.0;
  double p_hat = 1.0;
  bool strictly_decreasing = false;
  bool hypothesis_violated = false;
};

/// sup |g^(n) - g^(0)| for each perturbed start, against the base start.
ContinuityReport continuity_experiment(const DriverSystem& driver, const Param& base,
                                       std::span<const Param> perturbations, int depth,
                                       const GridSpec& grid, double p_hat);

}  // namespace rgreen
