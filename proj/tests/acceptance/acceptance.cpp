// Acceptance run: one [PASS]/[FAIL] line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include <unistd.h>

#include "rgreen/drivers.hpp"
#include "rgreen/experiment.hpp"
#include "rgreen/measure.hpp"
#include "rgreen/mixing.hpp"
#include "rgreen/potential.hpp"

using namespace rgreen;
namespace fs = std::filesystem;

namespace {

constexpr double kGolden = 0.6180339887498949;
const double kLog2 = std::numbers::ln2;
const PointP1 kRoot(cplx(2.0, 0.3), 1.0);

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Param at(double t) {
  Param p;
  p.t = t;
  return p;
}

MapFamily circle_family(double radius, cplx center = 0.0) {
  MapFamily f;
  f.curve.center = center;
  f.curve.radius = radius;
  return f;
}

MapFamily affine_family() {
  MapFamily f;
  f.curve.kind = ParamCurve::Kind::affine;
  f.curve.slope = 1.0;
  return f;
}

double sup_difference(const PotentialSeries& a, const PotentialSeries& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) m = std::max(m, std::abs(a.values[k] - b.values[k]));
  return m;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// 1. u of z^d at [1:1] against the hand evaluation of the lift, and sup |u|.
Outcome potential_exactness() {
  Outcome o{true, ""};
  for (int d = 2; d <= 4; ++d) {
    const auto f = RationalMapP1::power_plus_constant(d, 0.0).normalized();
    // unit representative (1, 1)/sqrt 2 maps to (2^(-d/2), 2^(-d/2)), norm 2^((1-d)/2)
    const double lift = std::log(std::hypot(std::pow(2.0, -0.5 * d), std::pow(2.0, -0.5 * d))) / d;
    const double u = potential_u(f, PointP1(1.0, 1.0));
    const double sup = sup_norm_u(f, GridSpec{64, 2.0}).value;
    const double expected_sup = kLog2 * (d - 1) / (2.0 * d);
    const bool ok = std::abs(u - lift) < 1e-12 && std::abs(sup - expected_sup) < 1e-3;
    o.pass &= ok;
    o.detail += format("d=%d |u-lift|=%.1e |sup-closed|=%.1e; ", d, std::abs(u - lift), std::abs(sup - expected_sup));
  }
  return o;
}

// 2. Certified tails on the golden rotation, r = 0.1, grid 256^2.
Outcome series_convergence() {
  const auto driver = DriverSystem::circle_rotation(circle_family(0.1), kGolden);
  const auto diag = birkhoff_diagnostics(driver, at(0.0), 256);
  const TailModel tail{diag.epsilon};
  const auto maps = orbit(driver, at(0.0), 26);
  const GridSpec grid{256, 2.0};
  Outcome o{true, format("eps=%.3g; ", diag.epsilon)};
  double tail20 = 0.0;
  for (int n : {5, 10, 15, 20}) {
    const auto s = green_series(maps, n, grid, tail);
    const auto s5 = green_series(maps, n + 5, grid, tail);
    const double diff = sup_difference(s, s5);
    o.pass &= diff <= s.tail_bound();
    o.detail += format("n=%d diff=%.2e tail=%.2e; ", n, diff, s.tail_bound());
    if (n == 20) tail20 = s.tail_bound();
  }
  o.pass &= tail20 < 1e-4;
  return o;
}

// 3. Laplacian of g versus the preimage sampler at 512^2, depth 20, m = 1e5.
Outcome oracle_equivalence() {
  struct Case {
    const char* name;
    DriverSystem driver;
  };
  const Case cases[] = {{"z^2", DriverSystem::constant(circle_family(0.0), at(0.0))},
                        {"z^2+0.1", DriverSystem::constant(circle_family(0.0, 0.1), at(0.0))},
                        {"rotation r=0.05", DriverSystem::circle_rotation(circle_family(0.05), kGolden)}};
  Outcome o{true, ""};
  for (const auto& c : cases) {
    const auto maps = orbit(c.driver, at(0.0), 61);
    auto s = green_series(maps, 20, GridSpec{512, 2.0});
    while (!(s.tail_bound() < kMeasureTailLimit)) s = deepen(s);
    const auto lap = measure_from_potential(s);
    const auto pre = measure_by_preimages(maps, 20, kRoot, 100000, 101);
    const double tv = measure_distance(lap, pre).tv_binned;
    o.pass &= tv < 0.05 && !lap.mass_defect;
    o.detail += format("%s tv=%.4f mass=%.4f; ", c.name, tv, lap.raw_total_mass);
  }
  return o;
}

// 4. Pullback and pushforward invariance on the rotation driver, i = 0, 1, 2.
Outcome invariance() {
  const auto driver = DriverSystem::circle_rotation(circle_family(0.05), kGolden);
  const auto maps = orbit(driver, at(0.0), 25);
  const std::span<const RationalMapP1> all(maps);
  std::vector<GreenMeasure> mu;
  for (std::size_t i = 0; i <= 3; ++i) mu.push_back(measure_by_preimages(all.subspan(i, 21), 20, kRoot, 100000, 200 + i, i));
  Outcome o{true, ""};
  for (std::size_t i = 0; i <= 2; ++i) {
    const double pull = invariance_pullback_check(mu[i + 1], maps[i], mu[i], 300 + i).tv_binned;
    const double push = invariance_pushforward_check(mu[i], maps[i], mu[i + 1]).tv_binned;
    o.pass &= pull < 0.05 && push < 0.08;
    o.detail += format("i=%zu pull=%.4f push=%.4f; ", i, pull, push);
  }
  return o;
}

// 5. Decay rate, dominance and constant-phi annihilation on the rotation driver.
Outcome mixing_decay() {
  const auto driver = DriverSystem::circle_rotation(circle_family(0.05), kGolden);
  MixingOptions opts;
  opts.depths = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  opts.samples = 100000;
  opts.seed = 11;
  const auto rep = mixing_experiment(driver, at(0.0), Observable::builtin("cos1"), Observable::builtin("logdist"), opts);
  const auto flat = mixing_experiment(driver, at(0.0), Observable::builtin("one"), Observable::builtin("logdist"), opts);
  bool flat_ok = true;
  for (const auto& r : flat.rows) flat_ok &= std::abs(r.correlation) <= 3.0 * r.std_error;
  Outcome o;
  o.pass = rep.rate_available() && rep.fitted_rate <= -kLog2 + 0.15 && rep.dominated && flat_ok;
  o.detail = format("rate=%.3f (bound %.3f) significant=%d dominated=%d K=%.3g constant-phi ok=%d", rep.fitted_rate,
                    -kLog2 + 0.15, rep.significant_depths, rep.dominated, rep.fitted_constant, flat_ok);
  return o;
}

// 6. Circle harmonics under z^2 are exactly uncorrelated.
Outcome exact_zero() {
  const auto driver = DriverSystem::constant(circle_family(0.0), at(0.0));
  MixingOptions opts;
  opts.depths = {1, 2, 3, 4, 5, 6, 7, 8};
  opts.samples = 100000;
  opts.seed = 6;
  const auto rep = mixing_experiment(driver, at(0.0), Observable::builtin("cos1"), Observable::builtin("cos1"), opts);
  Outcome o{true, ""};
  double worst = 0.0;
  for (const auto& r : rep.rows) {
    o.pass &= std::abs(r.correlation) <= 3.0 * r.std_error;
    worst = std::max(worst, std::abs(r.correlation) / r.std_error);
  }
  o.detail = format("max |c|/se = %.2f over n=1..8", worst);
  return o;
}

// 7. Continuity along z^2 + 1/n.
Outcome continuity() {
  const auto driver = DriverSystem::constant(affine_family(), at(0.0));
  std::vector<Param> starts;
  for (int n : {4, 8, 16, 32}) starts.push_back(at(1.0 / n));
  const auto rep = continuity_experiment(driver, at(0.0), starts, 20, GridSpec{128, 2.0}, 1.0);
  Outcome o;
  const double first = rep.rows.front().sup_difference, last = rep.rows.back().sup_difference;
  o.pass = rep.strictly_decreasing && last < first / 4;
  o.detail = "sup differences";
  for (const auto& r : rep.rows) o.detail += format(" %.4g", r.sup_difference);
  return o;
}

// 8. Recurrence on the period-2 rotation.
Outcome recurrence() {
  const auto driver = DriverSystem::circle_rotation(circle_family(0.05), 0.5);
  MixingOptions opts;
  opts.samples = 100000;
  opts.seed = 5;
  const auto rep =
      recurrence_experiment(driver, at(0.0), Observable::builtin("cos1"), Observable::builtin("re"), 12, 0.1, opts);
  Outcome o{!rep.rows.empty(), ""};
  double worst_tv = 0.0, worst_z = 0.0;
  for (const auto& r : rep.rows) {
    o.pass &= r.alpha_n % 2 == 0 && r.tv_binned < 0.05 && std::abs(r.correlation) <= 3.0 * r.std_error;
    worst_tv = std::max(worst_tv, r.tv_binned);
    worst_z = std::max(worst_z, std::abs(r.correlation) / r.std_error);
  }
  o.detail = format("%zu even returns, max tv=%.4f, max |c|/se=%.2f", rep.rows.size(), worst_tv, worst_z);
  return o;
}

// 9. Diagnostics: constant z^2 and a synthetic linear drift.
Outcome diagnostics() {
  const auto d = birkhoff_diagnostics(DriverSystem::constant(circle_family(0.0), at(0.0)), at(0.0), 256);
  bool zeros = true;
  for (double m : d.birkhoff_partial_means) zeros &= m == 0.0;
  std::vector<double> drift(256);
  for (std::size_t n = 0; n < drift.size(); ++n) drift[n] = -0.5 * static_cast<double>(n);
  const bool flagged = diagnose_log_eta(drift).non_integrable;
  Outcome o;
  o.pass = zeros && d.epsilon == 0.0 && flagged;
  o.detail = format("partial means zero=%d epsilon=%g drift flagged=%d", zeros, d.epsilon, flagged);
  return o;
}

// 10. Two runs of each randomized pipeline with the same config and seed.
Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("rgreen_acceptance_" + std::to_string(::getpid()));
  ExperimentConfig c;
  c.driver.kind = DriverKind::circle_rotation;
  c.driver.alpha = kGolden;
  c.driver.family = circle_family(0.05);
  c.grid = {64, 2.0};
  c.depth = 12;
  c.samples = 5000;
  c.depths = {1, 2, 3};
  c.indices = {0, 1};
  c.horizon = 40;
  c.radius = 0.05;
  c.perturbations = {at(0.01), at(0.005)};
  c.seed = 99;
  Outcome o{true, ""};
  std::size_t compared = 0;
  for (const auto& sub : subcommands()) {
    RunFlags a, b;
    a.out = (root / (sub + "_a")).string();
    b.out = (root / (sub + "_b")).string();
    b.threads = 1;
    const auto ra = run_experiment(sub, c, a);
    const auto rb = run_experiment(sub, c, b);
    for (const auto& name : ra.artifacts) {
      const bool same = slurp(fs::path(*a.out) / name) == slurp(fs::path(*b.out) / name);
      if (!same) o.detail += sub + "/" + name + " differs; ";
      o.pass &= same;
      ++compared;
    }
    o.pass &= ra.artifacts == rb.artifacts;
  }
  fs::remove_all(root);
  o.detail += format("%zu artifacts compared across %zu subcommands", compared, subcommands().size());
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"potential exactness", potential_exactness}, {"series convergence", series_convergence},
      {"oracle equivalence of measures", oracle_equivalence}, {"invariance", invariance},
      {"mixing decay", mixing_decay}, {"exact-zero oracle", exact_zero},
      {"continuity", continuity}, {"recurrence", recurrence},
      {"diagnostics", diagnostics}, {"determinism", determinism}};
  int failures = 0, k = 0;
  for (const auto& [name, run] : criteria) {
    ++k;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d (%s, %.1fs): %s\n", o.pass ? "PASS" : "FAIL", k, name, secs, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  std::printf("%d/%d criteria passed\n", k - failures, k);
  return failures == 0 ? 0 : 1;
}
