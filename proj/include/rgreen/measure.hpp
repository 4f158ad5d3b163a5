#pragma once

// The Green measure mu(f_0) two ways: the discrete Laplacian of g on the
// two-chart grid, and random walks down the preimage tree of the orbit.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rgreen/potential.hpp"
#include "rgreen/projective.hpp"

namespace rgreen {

struct GreenMeasure {
  enum class Method { laplacian, preimage, fubini_study };

  std::size_t orbit_index = 0;
  Method method = Method::preimage;
  int depth_used = 0;

  /// Per-node masses (dual cell of each node, weighted by the chart partition
  /// of unity), same layout as GridSpec::index. Empty for pure clouds.
  GridSpec grid;
  std::vector<double> grid_masses;
  /// Total before renormalization, and the factor the masses were multiplied by.
  double raw_total_mass = 1.0;
  double renormalization = 1.0;
  /// Sum of |negative node masses| that were clipped to zero.
  double clipped_mass = 0.0;
  bool mass_defect = false;

  /// Equal-weight samples.
  std::vector<PointP1> cloud;

  bool has_grid() const noexcept { return !grid_masses.empty(); }
  bool has_cloud() const noexcept { return !cloud.empty(); }
};

const char* to_string(GreenMeasure::Method m) noexcept;

struct MeasureDistance {
  double tv_binned = 0.0;
  /// NaN unless both measures carry a cloud.
  double energy_dist = 0.0;
};

/// Partition of unity on the chart overlap: weight of chart coordinate t,
/// 1 for |t| <= 1/2, 0 for |t| >= 2, and weight(t) + weight(1/t) = 1.
double chart_weight(cplx t) noexcept;

/// omega-mass of the rectangle [x0, x1] x [y0, y1] of a chart (omega has total mass 1).
double fs_rectangle_volume(double x0, double x1, double y0, double y1) noexcept;

/// omega-mass of the dual cell of node (i, j).
double fs_cell_volume(const GridSpec& grid, int i, int j) noexcept;

/// omega + dd^c v for node values v (layout of GridSpec::index). The 5-point
/// Laplacian over 2 pi gives the dd^c part; masses below zero are clipped.
GreenMeasure measure_from_grid_values(const GridSpec& grid, std::span<const double> values);

/// measure_from_potential needs series.tail_bound() below this.
inline constexpr double kMeasureTailLimit = 1e-4;

/// omega + dd^c g_n. Throws NumericError("deepen series") when the tail is too large.
GreenMeasure measure_from_potential(const PotentialSeries& series, double tail_limit = kMeasureTailLimit);

/// m samples of mu(f_{orbit_index}) from the walk root <- f_depth <- ... <- f_0
/// choosing a uniform preimage at each step (repeated roots count with
/// multiplicity). `orbit` starts at f_{orbit_index}. Requires m >= 1000.
GreenMeasure measure_by_preimages(std::span<const RationalMapP1> orbit, int depth, const PointP1& root,
                                  std::size_t m, std::uint64_t seed, std::size_t orbit_index = 0);

/// Uniform (omega-distributed) cloud.
GreenMeasure sample_fubini_study(std::size_t m, std::uint64_t seed);

/// One uniformly chosen preimage per sample.
std::vector<PointP1> pullback_cloud(const RationalMapP1& f, std::span<const PointP1> cloud, std::uint64_t seed);
std::vector<PointP1> pushforward_cloud(const RationalMapP1& f, std::span<const PointP1> cloud);

/// Fixed binning of the sphere: 65 latitude bands (the equator |z| = 1 lies
/// inside the middle band) by 32 longitude sectors.
inline constexpr int kLatitudeBands = 65;
inline constexpr int kLongitudeSectors = 32;
std::size_t bin_of(const PointP1& x) noexcept;
/// Normalized histogram: grid masses when present, the cloud otherwise.
std::vector<double> binned(const GreenMeasure& mu);

double tv_distance(std::span<const double> p, std::span<const double> q);
/// V-statistic energy distance under the chordal metric on at most
/// `max_points` leading samples of each cloud.
double energy_distance(std::span<const PointP1> a, std::span<const PointP1> b, std::size_t max_points = 2000);

MeasureDistance measure_distance(const GreenMeasure& a, const GreenMeasure& b);

/// Pulls mu_next back through f_i (one random preimage per sample) and
/// compares with mu_i: d^-1 f_i^* mu(f_(i+1)) = mu(f_i).
MeasureDistance invariance_pullback_check(const GreenMeasure& mu_next, const RationalMapP1& f_i,
                                          const GreenMeasure& mu_i, std::uint64_t seed);

/// Pushes mu_i forward through f_i and compares with mu_next.
MeasureDistance invariance_pushforward_check(const GreenMeasure& mu_i, const RationalMapP1& f_i,
                                             const GreenMeasure& mu_next);

/// Cloud CSV: "re,im,chart" with chart coordinates.
void write_cloud_csv(std::span<const PointP1> cloud, std::ostream& out);
/// One JSON header line, then the node masses as little-endian float64.
void write_grid_masses(const GreenMeasure& mu, std::ostream& out);

}  // namespace rgreen
