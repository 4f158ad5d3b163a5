#include "rgreen/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "rgreen/error.hpp"
#include "rgreen/numerics.hpp"

namespace rgreen {

namespace {

constexpr double kPi = std::numbers::pi;

// Antiderivative of 1/(1+x^2+y^2)^2 in both variables.
double fs_corner(double x, double y) noexcept {
  const double sx = std::sqrt(1.0 + x * x), sy = std::sqrt(1.0 + y * y);
  return 0.5 * (x / sx * std::atan(y / sx) + y / sy * std::atan(x / sy));
}

// smoothstep with S(x) + S(1 - x) = 1
double smoothstep(double x) noexcept {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

void rethrow_first(const std::vector<std::exception_ptr>& errors) {
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

const char* to_string(GreenMeasure::Method m) noexcept {
  switch (m) {
    case GreenMeasure::Method::laplacian: return "laplacian";
    case GreenMeasure::Method::preimage: return "preimage";
    case GreenMeasure::Method::fubini_study: return "fubini_study";
  }
  return "unknown";
}

double chart_weight(cplx t) noexcept {
  const double r = std::abs(t);
  if (r <= 0.5) return 1.0;
  if (r >= 2.0) return 0.0;
  return 1.0 - smoothstep((std::log2(r) + 1.0) / 2.0);
}

double fs_rectangle_volume(double x0, double x1, double y0, double y1) noexcept {
  return (fs_corner(x1, y1) - fs_corner(x0, y1) - fs_corner(x1, y0) + fs_corner(x0, y0)) / kPi;
}

double fs_cell_volume(const GridSpec& grid, int i, int j) noexcept {
  const double h = grid.spacing(), e = grid.extent;
  const cplx t = grid.coordinate(i, j);
  return fs_rectangle_volume(std::max(-e, t.real() - h / 2), std::min(e, t.real() + h / 2),
                             std::max(-e, t.imag() - h / 2), std::min(e, t.imag() + h / 2));
}

GreenMeasure measure_from_grid_values(const GridSpec& grid, std::span<const double> values) {
  grid.validate();
  if (values.size() != grid.node_count())
    throw std::invalid_argument("measure_from_grid_values: value count does not match the grid");
  for (double v : values)
    if (!std::isfinite(v)) throw NumericError("measure_from_grid_values: non-finite grid value");

  GreenMeasure mu;
  mu.method = GreenMeasure::Method::laplacian;
  mu.grid = grid;
  mu.grid_masses.assign(grid.node_count(), 0.0);
  const int n = grid.nodes_per_side();

  for (int chart = 0; chart < 2; ++chart) {
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double w = chart_weight(grid.coordinate(i, j));
        if (w == 0.0) continue;  // every boundary node has |t| >= 2
        const double lap = values[grid.index(chart, i + 1, j)] + values[grid.index(chart, i - 1, j)] +
                           values[grid.index(chart, i, j + 1)] + values[grid.index(chart, i, j - 1)] -
                           4.0 * values[grid.index(chart, i, j)];
        mu.grid_masses[grid.index(chart, i, j)] = w * (fs_cell_volume(grid, i, j) + lap / (2.0 * kPi));
      }
  }

  double raw = 0.0, clipped = 0.0;
  for (double& m : mu.grid_masses) {
    raw += m;
    if (m < 0.0) {
      clipped -= m;
      m = 0.0;
    }
  }
  double total = 0.0;
  for (double m : mu.grid_masses) total += m;
  if (!(total > 0.0)) throw NumericError("measure_from_grid_values: no positive mass");
  mu.raw_total_mass = raw;
  mu.clipped_mass = clipped;
  mu.renormalization = 1.0 / total;
  for (double& m : mu.grid_masses) m *= mu.renormalization;
  mu.mass_defect = std::abs(raw - 1.0) > 0.01;
  return mu;
}

GreenMeasure measure_from_potential(const PotentialSeries& series, double tail_limit) {
  if (!(series.tail_bound() < tail_limit)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "deepen series: tail bound %.3g at depth %d exceeds %.3g",
                  series.tail_bound(), series.depth, tail_limit);
    throw NumericError(buf);
  }
  GreenMeasure mu = measure_from_grid_values(series.grid, series.values);
  mu.depth_used = series.depth;
  return mu;
}

GreenMeasure measure_by_preimages(std::span<const RationalMapP1> orbit, int depth, const PointP1& root,
                                  std::size_t m, std::uint64_t seed, std::size_t orbit_index) {
  if (m < 1000) throw std::invalid_argument("measure_by_preimages: need m >= 1000 samples");
  if (depth < 0 || orbit.size() < static_cast<std::size_t>(depth) + 1)
    throw std::invalid_argument("measure_by_preimages: orbit shorter than depth + 1");
  for (int i = 0; i <= depth; ++i)
    if (!orbit[i].is_holomorphic()) throw DegenerateMapError("map in M", orbit_index + i);

  GreenMeasure mu;
  mu.method = GreenMeasure::Method::preimage;
  mu.orbit_index = orbit_index;
  mu.depth_used = depth;
  mu.cloud.resize(m);
  std::vector<std::exception_ptr> errors(m);
  const auto count = static_cast<std::ptrdiff_t>(m);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    PointP1 y = root;
    int i = depth;
    try {
      for (; i >= 0; --i) {
        const auto pre = preimages(orbit[i], y);
        y = pre[uniform_index(rng, pre.size())];
      }
      mu.cloud[k] = y;
    } catch (const RootFindError& e) {
      errors[k] = std::make_exception_ptr(RootFindError(
          std::string(e.what()) + " (sample " + std::to_string(k) + ", orbit index " +
          std::to_string(orbit_index + i) + ")"));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  rethrow_first(errors);
  return mu;
}

GreenMeasure sample_fubini_study(std::size_t m, std::uint64_t seed) {
  GreenMeasure mu;
  mu.method = GreenMeasure::Method::fubini_study;
  mu.cloud.reserve(m);
  Rng rng(splitmix64(seed));
  for (std::size_t k = 0; k < m; ++k) {
    const double c = 2.0 * uniform01(rng) - 1.0;
    const double phase = 2.0 * kPi * uniform01(rng);
    mu.cloud.emplace_back(std::polar(std::sqrt((1.0 - c) / 2.0), phase), std::sqrt((1.0 + c) / 2.0));
  }
  return mu;
}

std::vector<PointP1> pullback_cloud(const RationalMapP1& f, std::span<const PointP1> cloud, std::uint64_t seed) {
  f.require_holomorphic();
  std::vector<PointP1> out(cloud.size());
  std::vector<std::exception_ptr> errors(cloud.size());
  const auto count = static_cast<std::ptrdiff_t>(cloud.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    try {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
      const auto pre = preimages(f, cloud[k]);
      out[k] = pre[uniform_index(rng, pre.size())];
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  rethrow_first(errors);
  return out;
}

std::vector<PointP1> pushforward_cloud(const RationalMapP1& f, std::span<const PointP1> cloud) {
  f.require_holomorphic();
  std::vector<PointP1> out;
  out.reserve(cloud.size());
  for (const auto& x : cloud) out.push_back(evaluate(f, x));
  return out;
}

// ------------------------------------------------------------- distances

std::size_t bin_of(const PointP1& x) noexcept {
  const double theta = 2.0 * std::atan2(std::abs(x.z()), std::abs(x.w()));
  const int band = std::clamp(static_cast<int>(std::floor(theta / (kPi / (kLatitudeBands - 1)) + 0.5)), 0,
                              kLatitudeBands - 1);
  const double phi = std::arg(x.z() * std::conj(x.w()));
  const int sector = std::clamp(static_cast<int>(std::floor((phi + kPi) / (2.0 * kPi) * kLongitudeSectors)), 0,
                                kLongitudeSectors - 1);
  return static_cast<std::size_t>(band) * kLongitudeSectors + sector;
}

std::vector<double> binned(const GreenMeasure& mu) {
  std::vector<double> h(static_cast<std::size_t>(kLatitudeBands) * kLongitudeSectors, 0.0);
  if (mu.has_grid()) {
    for (std::size_t k = 0; k < mu.grid_masses.size(); ++k)
      if (mu.grid_masses[k] != 0.0) h[bin_of(mu.grid.point(k))] += mu.grid_masses[k];
  } else if (mu.has_cloud()) {
    const double w = 1.0 / static_cast<double>(mu.cloud.size());
    for (const auto& x : mu.cloud) h[bin_of(x)] += w;
  } else {
    throw std::invalid_argument("binned: measure has neither grid masses nor a cloud");
  }
  return h;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("tv_distance: histogram sizes differ");
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += std::abs(p[k] - q[k]);
  return 0.5 * s;
}

double energy_distance(std::span<const PointP1> a, std::span<const PointP1> b, std::size_t max_points) {
  const std::size_t na = std::min(a.size(), max_points), nb = std::min(b.size(), max_points);
  if (na == 0 || nb == 0) throw std::invalid_argument("energy_distance: empty cloud");
  auto mean_distance = [](std::span<const PointP1> x, std::span<const PointP1> y) {
    std::vector<double> rows(x.size());
    const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (const auto& q : y) s += spherical_distance(x[i], q);
      rows[i] = s;
    }
    double s = 0.0;
    for (double r : rows) s += r;
    return s / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
  };
  const auto sa = a.first(na), sb = b.first(nb);
  const double e = 2.0 * mean_distance(sa, sb) - mean_distance(sa, sa) - mean_distance(sb, sb);
  return std::max(0.0, e);
}

MeasureDistance measure_distance(const GreenMeasure& a, const GreenMeasure& b) {
  MeasureDistance d;
  d.tv_binned = tv_distance(binned(a), binned(b));
  d.energy_dist = a.has_cloud() && b.has_cloud() ? energy_distance(a.cloud, b.cloud)
                                                 : std::numeric_limits<double>::quiet_NaN();
  return d;
}

MeasureDistance invariance_pullback_check(const GreenMeasure& mu_next, const RationalMapP1& f_i,
                                          const GreenMeasure& mu_i, std::uint64_t seed) {
  if (!mu_next.has_cloud() || !mu_i.has_cloud())
    throw std::invalid_argument("invariance_pullback_check: both measures need a sample cloud");
  GreenMeasure pulled;
  pulled.cloud = pullback_cloud(f_i, mu_next.cloud, seed);
  return measure_distance(pulled, mu_i);
}

MeasureDistance invariance_pushforward_check(const GreenMeasure& mu_i, const RationalMapP1& f_i,
                                             const GreenMeasure& mu_next) {
  if (!mu_next.has_cloud() || !mu_i.has_cloud())
    throw std::invalid_argument("invariance_pushforward_check: both measures need a sample cloud");
  GreenMeasure pushed;
  pushed.cloud = pushforward_cloud(f_i, mu_i.cloud);
  return measure_distance(pushed, mu_next);
}

// ----------------------------------------------------------------- output

void write_cloud_csv(std::span<const PointP1> cloud, std::ostream& out) {
  out << "re,im,chart\n";
  char line[96];
  for (const auto& x : cloud) {
    const cplx t = x.chart_coordinate();
    std::snprintf(line, sizeof line, "%.17g,%.17g,%d\n", t.real(), t.imag(), x.chart());
    out << line;
  }
}

void write_grid_masses(const GreenMeasure& mu, std::ostream& out) {
  if (!mu.has_grid()) throw std::invalid_argument("write_grid_masses: measure has no grid");
  const nlohmann::json header = {{"resolution", mu.grid.resolution},
                                 {"extent", mu.grid.extent},
                                 {"charts", 2},
                                 {"layout", "chart, row (imaginary), column (real)"},
                                 {"dtype", "<f8"},
                                 {"count", mu.grid_masses.size()}};
  out << header.dump() << '\n';
  out.write(reinterpret_cast<const char*>(mu.grid_masses.data()),
            static_cast<std::streamsize>(mu.grid_masses.size() * sizeof(double)));
}

}  // namespace rgreen
