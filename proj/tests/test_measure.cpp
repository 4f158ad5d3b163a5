#include <doctest.h>

#include <cmath>
#include <numbers>
#include <cstring>
#include <set>
#include <sstream>

#include "rgreen/drivers.hpp"
#include "rgreen/error.hpp"
#include "rgreen/measure.hpp"
#include "rgreen/potential.hpp"

using namespace rgreen;

namespace {

constexpr double kGolden = 0.6180339887498949;

RationalMapP1 power(int d, cplx c = 0.0) { return RationalMapP1::power_plus_constant(d, c).normalized(); }

std::vector<RationalMapP1> constant_orbit(const RationalMapP1& f, std::size_t len) {
  return std::vector<RationalMapP1>(len, f);
}

std::vector<RationalMapP1> rotation_orbit(double radius, double alpha, std::size_t len) {
  MapFamily fam;
  fam.curve.radius = radius;
  return orbit(DriverSystem::circle_rotation(fam, alpha), Param{}, len);
}

// Laplacian measure from the shallowest series whose tail is below the limit.
GreenMeasure laplacian_measure(const std::vector<RationalMapP1>& orbit, const GridSpec& grid) {
  auto s = green_series(orbit, 8, grid);
  while (!(s.tail_bound() < kMeasureTailLimit)) s = deepen(s);
  return measure_from_potential(s);
}

double annulus_mass(const GreenMeasure& mu, double lo, double hi) {
  double m = 0.0;
  for (std::size_t k = 0; k < mu.grid_masses.size(); ++k) {
    const double r = std::abs(mu.grid.point(k).affine());
    if (r > lo && r < hi) m += mu.grid_masses[k];
  }
  return m;
}

const PointP1 kRoot(cplx(2.0, 0.3), 1.0);

}  // namespace

TEST_CASE("partition of unity on the chart overlap") {
  CHECK(chart_weight(0.3) == 1.0);
  CHECK(chart_weight(cplx(0.0, 0.5)) == 1.0);
  CHECK(chart_weight(2.0) == 0.0);
  CHECK(chart_weight(1.0) == doctest::Approx(0.5).epsilon(1e-15));
  for (int k = 1; k < 40; ++k) {
    const cplx t = std::polar(0.4 + 0.05 * k, 0.3 * k);
    CHECK(chart_weight(t) + chart_weight(1.0 / t) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("Fubini-Study rectangle volumes") {
  // the unit disc of the z chart is half the sphere; the whole plane is all of it
  CHECK(fs_rectangle_volume(-1e9, 1e9, -1e9, 1e9) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(fs_rectangle_volume(0, 1e9, 0, 1e9) == doctest::Approx(0.25).epsilon(1e-8));
  // omega = dA / (pi (1 + |z|^2)^2); midpoint rule on a small square
  const double h = 1e-3, x = 0.7, y = -0.4;
  const double expected = h * h / (std::numbers::pi * std::pow(1 + x * x + y * y, 2));
  CHECK(fs_rectangle_volume(x - h / 2, x + h / 2, y - h / 2, y + h / 2) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("zero potential gives omega") {
  const GridSpec grid{128, 2.0};
  const std::vector<double> zero(grid.node_count(), 0.0);
  const auto mu = measure_from_grid_values(grid, zero);
  CHECK(mu.raw_total_mass == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(mu.clipped_mass == 0.0);
  for (int chart = 0; chart < 2; ++chart)
    for (int j = 1; j < grid.resolution; ++j)
      for (int i = 1; i < grid.resolution; ++i) {
        const double expected = chart_weight(grid.coordinate(i, j)) * fs_cell_volume(grid, i, j);
        CHECK(std::abs(mu.grid_masses[grid.index(chart, i, j)] - expected * mu.renormalization) < 1e-6);
      }
}

TEST_CASE("measure from the z^2 potential lives on the unit circle") {
  const auto mu = laplacian_measure(constant_orbit(power(2), 40), GridSpec{256, 2.0});
  CHECK(annulus_mass(mu, 0.9, 1.1) >= 0.99);
  CHECK(mu.raw_total_mass >= 0.99);
  CHECK(mu.raw_total_mass <= 1.01);
  CHECK_FALSE(mu.mass_defect);
  for (double m : mu.grid_masses) CHECK(m >= -1e-9);
}

TEST_CASE("measure from the z^2 + 0.1 potential sits on the sampler support") {
  const auto orbit = constant_orbit(power(2, 0.1), 40);
  const auto mu = laplacian_measure(orbit, GridSpec{512, 2.0});
  const auto cloud = measure_by_preimages(orbit, 20, kRoot, 100000, 1);
  // sampler support, dilated by one latitude band
  std::set<std::size_t> support;
  for (const auto& x : cloud.cloud) {
    const std::size_t b = bin_of(x);
    for (int dl : {-1, 0, 1}) {
      const auto band = static_cast<long>(b / kLongitudeSectors) + dl;
      if (band >= 0 && band < kLatitudeBands)
        support.insert(static_cast<std::size_t>(band) * kLongitudeSectors + b % kLongitudeSectors);
    }
  }
  const auto hist = binned(mu);
  double inside = 0.0;
  for (std::size_t b : support) inside += hist[b];
  CHECK(inside >= 0.99);
  CHECK(mu.raw_total_mass >= 0.99);
  CHECK(mu.raw_total_mass <= 1.01);
}

TEST_CASE("a shallow series is refused") {
  const auto s = green_series(constant_orbit(power(2), 4), 3, GridSpec{64, 2.0});
  CHECK_THROWS_WITH_AS(measure_from_potential(s), doctest::Contains("deepen series"), NumericError);
}

TEST_CASE("preimage sampler examples") {
  const auto orbit = constant_orbit(power(2), 16);
  const auto mu = measure_by_preimages(orbit, 15, PointP1(2.0, 1.0), 10000, 3);
  std::size_t near_circle = 0;
  for (const auto& x : mu.cloud) near_circle += std::abs(std::abs(x.affine()) - 1.0) < 0.01;
  CHECK(near_circle >= 9900);

  const auto two = measure_by_preimages(orbit, 0, PointP1(4.0, 1.0), 10000, 4);
  std::size_t plus = 0;
  for (const auto& x : two.cloud) {
    const cplx z = x.affine();
    CHECK(std::min(std::abs(z - 2.0), std::abs(z + 2.0)) < 1e-12);
    plus += z.real() > 0;
  }
  CHECK(std::abs(static_cast<double>(plus) - 5000.0) < 3 * 50.0);
  // pushing the depth-0 cloud forward recovers the root
  for (const auto& y : pushforward_cloud(orbit[0], two.cloud)) CHECK(spherical_distance(y, PointP1(4.0, 1.0)) < 1e-14);

  CHECK_THROWS_AS(measure_by_preimages(orbit, 15, kRoot, 999, 0), std::invalid_argument);
}

TEST_CASE("sampler is reproducible and depends on the seed") {
  const auto orbit = rotation_orbit(0.05, kGolden, 21);
  const auto a = measure_by_preimages(orbit, 20, kRoot, 2000, 7);
  const auto b = measure_by_preimages(orbit, 20, kRoot, 2000, 7);
  const auto c = measure_by_preimages(orbit, 20, kRoot, 2000, 8);
  CHECK(a.cloud == b.cloud);
  CHECK_FALSE(a.cloud == c.cloud);
}

TEST_CASE("root independence") {
  const auto orbit = rotation_orbit(0.05, kGolden, 21);
  const auto a = measure_by_preimages(orbit, 20, kRoot, 10000, 11);
  const auto b = measure_by_preimages(orbit, 20, PointP1(cplx(-0.4, 1.7), 1.0), 10000, 12);
  CHECK(measure_distance(a, b).tv_binned < 0.05);
}

TEST_CASE("distances vanish on identical inputs and are nonnegative") {
  const auto orbit = constant_orbit(power(2), 16);
  const auto mu = measure_by_preimages(orbit, 15, kRoot, 4000, 5);
  const auto self = measure_distance(mu, mu);
  CHECK(self.tv_binned == 0.0);
  CHECK(self.energy_dist == 0.0);
  const auto fs = sample_fubini_study(4000, 6);
  const auto far = measure_distance(mu, fs);
  CHECK(far.tv_binned > 0.2);
  CHECK(far.energy_dist > 0.0);
  const auto grid_only = laplacian_measure(constant_orbit(power(2), 40), GridSpec{64, 2.0});
  CHECK(std::isnan(measure_distance(grid_only, mu).energy_dist));
}

TEST_CASE("Fubini-Study cloud matches the cell volumes") {
  const GridSpec grid{512, 2.0};
  const auto omega = measure_from_grid_values(grid, std::vector<double>(grid.node_count(), 0.0));
  const auto cloud = sample_fubini_study(1000000, 9);
  CHECK(tv_distance(binned(omega), binned(cloud)) < 0.05);
}

TEST_CASE("invariance on the constant z^2 orbit") {
  const auto orbit = constant_orbit(power(2), 17);
  const auto mu0 = measure_by_preimages(orbit, 15, kRoot, 10000, 21);
  const auto mu1 = measure_by_preimages(std::span(orbit).subspan(1), 15, kRoot, 10000, 22, 1);
  CHECK(invariance_pullback_check(mu1, orbit[0], mu0, 23).tv_binned < 0.05);
  CHECK(invariance_pushforward_check(mu0, orbit[0], mu1).tv_binned < 0.05);
  // negative control: omega is not invariant
  const auto fs = sample_fubini_study(10000, 24);
  CHECK(invariance_pullback_check(fs, orbit[0], mu0, 25).tv_binned > 0.2);
}

TEST_CASE("pushforward invariance on the rotation driver") {
  const auto orbit = rotation_orbit(0.05, kGolden, 22);
  const std::span<const RationalMapP1> all(orbit);
  const auto mu0 = measure_by_preimages(all, 20, kRoot, 10000, 31);
  const auto mu1 = measure_by_preimages(all.subspan(1), 20, kRoot, 10000, 32, 1);
  CHECK(invariance_pushforward_check(mu0, orbit[0], mu1).tv_binned < 0.08);
}

TEST_CASE("pullback then pushforward returns the cloud") {
  const auto orbit = rotation_orbit(0.05, kGolden, 22);
  const auto mu = measure_by_preimages(std::span(orbit).subspan(1), 20, kRoot, 10000, 41, 1);
  const auto back = pullback_cloud(orbit[0], mu.cloud, 42);
  GreenMeasure round;
  round.cloud = pushforward_cloud(orbit[0], back);
  CHECK(measure_distance(round, mu).tv_binned < 0.02);
}

TEST_CASE("Laplacian and preimage measures agree on z^2") {
  const auto orbit = constant_orbit(power(2), 40);
  const auto lap = laplacian_measure(orbit, GridSpec{512, 2.0});
  const auto pre = measure_by_preimages(orbit, 20, kRoot, 100000, 51);
  CHECK(measure_distance(lap, pre).tv_binned < 0.05);
}

TEST_CASE("binning") {
  CHECK(bin_of(PointP1(0.0, 1.0)) / kLongitudeSectors == 0);
  CHECK(bin_of(PointP1(1.0, 0.0)) / kLongitudeSectors == kLatitudeBands - 1);
  // the equator sits in the middle band
  for (int k = 0; k < 16; ++k)
    CHECK(bin_of(PointP1(std::polar(1.0, 0.4 * k), 1.0)) / kLongitudeSectors == kLatitudeBands / 2);
  const std::vector<double> p{0.5, 0.5, 0.0}, q{0.0, 0.5, 0.5};
  CHECK(tv_distance(p, q) == doctest::Approx(0.5));
}

TEST_CASE("artifact writers") {
  const auto orbit = constant_orbit(power(2), 3);
  const auto mu = measure_by_preimages(orbit, 2, kRoot, 1000, 61);
  std::ostringstream csv;
  write_cloud_csv(mu.cloud, csv);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "re,im,chart");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 1000);

  const GridSpec grid{64, 2.0};
  const auto omega = measure_from_grid_values(grid, std::vector<double>(grid.node_count(), 0.0));
  std::ostringstream bin;
  write_grid_masses(omega, bin);
  const std::string s = bin.str();
  const auto nl = s.find('\n');
  const auto header = nlohmann::json::parse(s.substr(0, nl));
  CHECK(header["resolution"] == 64);
  CHECK(s.size() - nl - 1 == grid.node_count() * sizeof(double));
  double first = 0.0;
  std::memcpy(&first, s.data() + nl + 1, sizeof first);
  CHECK(first == omega.grid_masses[0]);
  CHECK_THROWS_AS(write_grid_masses(mu, bin), std::invalid_argument);
}
