#include "rgreen/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "rgreen/error.hpp"
#include "rgreen/numerics.hpp"

namespace rgreen {

namespace {

constexpr double kPi = std::numbers::pi;

int parse_harmonic(const std::string& name, const char* prefix) {
  const std::size_t len = std::char_traits<char>::length(prefix);
  if (name.size() <= len || name.compare(0, len, prefix) != 0) return 0;
  int k = 0;
  for (std::size_t i = len; i < name.size(); ++i) {
    if (name[i] < '0' || name[i] > '9' || k > 1000) return 0;
    k = 10 * k + (name[i] - '0');
  }
  return k;
}

// 2 Re or 2 Im of (z conj(w))^k / (|z|^2k + |w|^2k)
double harmonic(const PointP1& x, int k, bool imaginary) {
  const cplx a = std::pow(x.z() * std::conj(x.w()), k);
  const double den = std::pow(std::norm(x.z()), k) + std::pow(std::norm(x.w()), k);
  return 2.0 * (imaginary ? a.imag() : a.real()) / den;
}

std::vector<double> evaluate_all(const Observable& f, std::span<const PointP1> xs) {
  std::vector<double> out(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) out[k] = f(xs[k]);
  return out;
}

McEstimate mc_mean(std::span<const double> v) { return {mean(v), standard_error(v)}; }

struct BootstrapSummary {
  double std_error = 0.0, low = 0.0, high = 0.0;
};

BootstrapSummary summarize(std::vector<double> reps) {
  BootstrapSummary s;
  if (reps.empty()) return s;
  const double m = mean(reps);
  double var = 0.0;
  for (double r : reps) var += (r - m) * (r - m);
  s.std_error = reps.size() > 1 ? std::sqrt(var / static_cast<double>(reps.size() - 1)) : 0.0;
  std::sort(reps.begin(), reps.end());
  const auto at = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(reps.size() - 1) + 0.5));
    return reps[std::min(idx, reps.size() - 1)];
  };
  s.low = at(0.025);
  s.high = at(0.975);
  return s;
}

// Pairs (prod_j, psi_j) are resampled jointly; `second` independently. The
// statistic is mean(prod) - mean(second) * mean(psi).
BootstrapSummary bootstrap_correlation(std::span<const double> prod, std::span<const double> psi,
                                       std::span<const double> second, int replicates, std::uint64_t seed) {
  std::vector<double> reps(std::max(replicates, 0));
  const std::size_t m = prod.size(), m2 = second.size();
  for (int b = 0; b < replicates; ++b) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    double sp = 0.0, ss = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = uniform_index(rng, m);
      sp += prod[i];
      ss += psi[i];
    }
    for (std::size_t k = 0; k < m2; ++k) s2 += second[uniform_index(rng, m2)];
    reps[b] = sp / m - (s2 / m2) * (ss / m);
  }
  return summarize(std::move(reps));
}

std::vector<PointP1> sample_cloud(std::span<const RationalMapP1> maps, std::size_t start, int depth,
                                  const MixingOptions& o, std::uint64_t seed) {
  return measure_by_preimages(maps.subspan(start, depth + 1), depth, o.root, o.samples, seed, start).cloud;
}

double transfer(const RationalMapP1& f, const Observable& psi, const PointP1& y) {
  const auto pre = preimages(f, y);
  double s = 0.0;
  for (const auto& x : pre) s += psi(x);
  return s / static_cast<double>(pre.size());
}

void check_samples(const MixingOptions& o) {
  if (o.samples < 1000) throw std::invalid_argument("mixing: need at least 1000 samples");
  if (o.sampler_margin < 1) throw std::invalid_argument("mixing: sampler margin must be >= 1");
}

}  // namespace

// ---------------------------------------------------------------- observables

Observable Observable::builtin(const std::string& name) {
  Observable o;
  o.name_ = name;
  o.kind_ = Kind::smooth_builtin;
  o.sup_bound_ = 1.0;
  if (name == "one") {
    o.fn_ = [](const PointP1&) { return 1.0; };
    o.constant_ = true;
    o.known_l1_ = 1.0;
    o.known_mass_ = 0.0;
  } else if (name == "re" || name == "im") {
    const bool im = name == "im";
    o.fn_ = [im](const PointP1& x) {
      const cplx a = x.z() * std::conj(x.w());
      return (im ? a.imag() : a.real()) / (std::norm(x.z()) + std::norm(x.w()));
    };
    o.sup_bound_ = 0.5;
  } else if (name == "inv") {
    o.fn_ = [](const PointP1& x) { return std::norm(x.w()) / (std::norm(x.z()) + std::norm(x.w())); };
  } else if (int k = parse_harmonic(name, "cos"); k > 0) {
    o.fn_ = [k](const PointP1& x) { return harmonic(x, k, false); };
  } else if (int k = parse_harmonic(name, "sin"); k > 0) {
    o.fn_ = [k](const PointP1& x) { return harmonic(x, k, true); };
  } else if (name == "logdist") {
    // dd^c log dist(., a) = delta_a - omega, and dist^2 is uniform under omega
    // so the L1 norm is 1/2.
    const PointP1 a(1.0, 1.0);
    o.fn_ = [a](const PointP1& x) { return std::max(std::log(spherical_distance(x, a)), -700.0); };
    o.sup_bound_ = std::numeric_limits<double>::infinity();
    o.known_l1_ = 0.5;
    o.known_mass_ = 2.0;
  } else {
    throw std::invalid_argument("unknown observable: " + name);
  }
  return o;
}

Observable Observable::grid_function(const std::string& name, GridSpec grid, std::vector<double> values) {
  grid.validate();
  if (values.size() != grid.node_count())
    throw std::invalid_argument("grid observable: value count does not match the grid");
  Observable o;
  o.name_ = name;
  o.kind_ = Kind::grid_function;
  double sup = 0.0;
  for (double v : values) sup = std::max(sup, std::abs(v));
  o.sup_bound_ = sup;
  auto shared = std::make_shared<const std::vector<double>>(std::move(values));
  o.fn_ = [grid, shared](const PointP1& x) {
    const int chart = x.chart();
    const cplx t = x.chart_coordinate();
    const double h = grid.spacing();
    const double u = (t.real() + grid.extent) / h, v = (t.imag() + grid.extent) / h;
    const int i = std::clamp(static_cast<int>(std::floor(u)), 0, grid.resolution - 1);
    const int j = std::clamp(static_cast<int>(std::floor(v)), 0, grid.resolution - 1);
    const double a = u - i, b = v - j;
    const auto& g = *shared;
    return (1 - a) * (1 - b) * g[grid.index(chart, i, j)] + a * (1 - b) * g[grid.index(chart, i + 1, j)] +
           (1 - a) * b * g[grid.index(chart, i, j + 1)] + a * b * g[grid.index(chart, i + 1, j + 1)];
  };
  return o;
}

Observable Observable::custom(const std::string& name, std::function<double(const PointP1&)> fn, double sup_bound) {
  Observable o;
  o.name_ = name;
  o.kind_ = Kind::custom;
  o.fn_ = std::move(fn);
  o.sup_bound_ = sup_bound;
  return o;
}

Observable Observable::scaled(double factor) const {
  Observable o = *this;
  o.scale_ *= factor;
  return o;
}

// ------------------------------------------------------------------ DSH norms

DshEstimate dsh_decomposition(const Observable& psi, const GridSpec& grid) {
  grid.validate();
  std::vector<double> v(grid.node_count());
  for (std::size_t k = 0; k < v.size(); ++k) {
    v[k] = psi(grid.point(k));
    if (!std::isfinite(v[k])) throw NumericError("dsh estimate: observable '" + psi.name() + "' is not finite on the grid");
  }
  DshEstimate est;
  const int n = grid.nodes_per_side();
  for (int chart = 0; chart < 2; ++chart)
    for (int j = 1; j + 1 < n; ++j)
      for (int i = 1; i + 1 < n; ++i) {
        const double w = chart_weight(grid.coordinate(i, j));
        if (w == 0.0) continue;
        const double c = v[grid.index(chart, i, j)];
        est.l1 += w * std::abs(c) * fs_cell_volume(grid, i, j);
        const double lap = v[grid.index(chart, i + 1, j)] + v[grid.index(chart, i - 1, j)] +
                           v[grid.index(chart, i, j + 1)] + v[grid.index(chart, i, j - 1)] - 4.0 * c;
        const double mass = w * lap / (2.0 * kPi);
        (mass > 0 ? est.positive_mass : est.negative_mass) += std::abs(mass);
      }
  return est;
}

double estimate_dsh_norm(const Observable& psi, const GridSpec& grid) {
  if (psi.has_known_dsh()) return psi.known_l1() + psi.known_laplacian_mass();
  return dsh_decomposition(psi, grid).norm();
}

PairingRow check_pairing_bound(const GreenMeasure& mu, double g_sup, const Observable& psi, const GridSpec& grid) {
  if (!mu.has_cloud()) throw std::invalid_argument("check_pairing_bound: measure has no sample cloud");
  PairingRow row;
  row.name = psi.name();
  const auto vals = evaluate_all(psi, mu.cloud);
  row.pairing = mean(vals);
  row.std_error = psi.is_constant() ? 0.0 : standard_error(vals);
  double l1, mass;
  if (psi.has_known_dsh()) {
    l1 = psi.known_l1();
    mass = psi.known_laplacian_mass();
  } else {
    const auto est = dsh_decomposition(psi, grid);
    l1 = est.l1;
    mass = est.positive_mass + est.negative_mass;
  }
  row.dsh_norm = l1 + mass;
  const double factor = 1.0 + g_sup;
  row.ratio = row.dsh_norm > 0 ? std::abs(row.pairing) / (factor * row.dsh_norm) : 0.0;
  const double mu_norm = std::abs(row.pairing) + mass;
  row.reverse_ratio = mu_norm > 0 ? row.dsh_norm / (factor * mu_norm) : 0.0;
  return row;
}

PairingReport check_pairing_bounds(const GreenMeasure& mu, double g_sup, const std::vector<Observable>& psis,
                                   const GridSpec& grid) {
  PairingReport rep;
  rep.g_sup = g_sup;
  for (const auto& psi : psis) {
    rep.rows.push_back(check_pairing_bound(mu, g_sup, psi, grid));
    rep.fitted_constant = std::max(rep.fitted_constant, rep.rows.back().ratio);
    rep.fitted_reverse_constant = std::max(rep.fitted_reverse_constant, rep.rows.back().reverse_ratio);
  }
  return rep;
}

// --------------------------------------------------------------------- mixing

MixingReport mixing_experiment(const DriverSystem& driver, const Param& f0, const Observable& phi,
                               const Observable& psi, const MixingOptions& o) {
  check_samples(o);
  if (o.depths.empty()) throw std::invalid_argument("mixing: no depths given");
  std::vector<int> depths = o.depths;
  std::sort(depths.begin(), depths.end());
  depths.erase(std::unique(depths.begin(), depths.end()), depths.end());
  if (depths.front() < 1) throw std::invalid_argument("mixing: depths must be >= 1");
  if (!std::isfinite(phi.sup_bound())) throw std::invalid_argument("mixing: phi must be bounded");

  MixingReport rep;
  const int max_depth = depths.back();
  const int walk = max_depth + o.sampler_margin;
  const std::size_t length = static_cast<std::size_t>(max_depth + std::max(walk, o.potential_depth)) + 1;

  const auto diag = birkhoff_diagnostics(driver, f0, std::max<std::size_t>(64, length));
  if (!diag.compliant()) {
    if (!o.force)
      throw HypothesisError("driver fails the integrability diagnostics; rerun with --force to explore anyway");
    rep.hypothesis_violated = true;
  }

  const auto maps = orbit(driver, f0, length);
  const std::span<const RationalMapP1> all(maps);
  rep.degree = maps.front().degree();
  rep.phi_sup = phi.sup_bound();
  rep.psi_dsh = estimate_dsh_norm(psi);

  const auto x = sample_cloud(all, 0, walk, o, derive_seed(o.seed, 0));
  const auto psi_vals = evaluate_all(psi, x);
  std::vector<PointP1> y = x;
  int applied = 0;  // y = f_(applied-1) o ... o f_0 (x)

  for (int n : depths) {
    for (; applied < n; ++applied) y = pushforward_cloud(maps[applied], y);
    std::vector<double> prod(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) prod[j] = phi(y[j]) * psi_vals[j];
    const auto second = evaluate_all(phi, sample_cloud(all, n, walk, o, derive_seed(o.seed, 1 + n)));

    MixingRow row;
    row.n = n;
    row.correlation = mean(prod) - mean(second) * mean(psi_vals);
    const auto boot = bootstrap_correlation(prod, psi_vals, second, o.bootstrap_replicates,
                                            derive_seed(o.seed, 1000000 + n));
    row.std_error = boot.std_error;
    row.err_low = boot.low;
    row.err_high = boot.high;
    row.g_n_sup = green_series(all.subspan(n, o.potential_depth + 1), o.potential_depth, o.potential_grid).sup_abs();
    row.bound_shape = std::pow(static_cast<double>(rep.degree), -n) * (1.0 + row.g_n_sup) * (1.0 + row.g_n_sup) *
                      rep.phi_sup * rep.psi_dsh;
    rep.rows.push_back(row);
  }

  std::vector<double> ns, logs, weights;
  for (const auto& r : rep.rows)
    if (std::abs(r.correlation) > 3.0 * r.std_error && r.std_error > 0) {
      ns.push_back(r.n);
      logs.push_back(std::log(std::abs(r.correlation)));
      const double snr = std::abs(r.correlation) / r.std_error;
      weights.push_back(snr * snr);
    }
  rep.significant_depths = static_cast<int>(ns.size());
  if (ns.size() >= 4) rep.fitted_rate = fit_line(ns, logs, weights).slope;

  const std::size_t half = (rep.rows.size() + 1) / 2;
  for (std::size_t k = 0; k < half; ++k) {
    const auto& r = rep.rows[k];
    if (std::abs(r.correlation) > 3.0 * r.std_error && r.bound_shape > 0)
      rep.fitted_constant = std::max(rep.fitted_constant, std::abs(r.correlation) / r.bound_shape);
  }
  rep.dominated = std::all_of(rep.rows.begin(), rep.rows.end(), [&](const MixingRow& r) {
    return std::abs(r.correlation) <= rep.fitted_constant * r.bound_shape + 3.0 * r.std_error;
  });
  return rep;
}

void write_mixing_csv(const MixingReport& report, std::ostream& out) {
  out << "n,correlation,err_low,err_high,g_n_sup,paper_bound_shape\n";
  char line[256];
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.n, r.correlation, r.err_low,
                  r.err_high, r.g_n_sup, r.bound_shape);
    out << line;
  }
}

RecurrenceReport recurrence_experiment(const DriverSystem& driver, const Param& f0, const Observable& phi,
                                       const Observable& psi, std::size_t horizon, double radius,
                                       const MixingOptions& o) {
  check_samples(o);
  const auto times = recurrence_times(driver, f0, horizon, radius);
  if (times.empty()) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "no recurrence within horizon %zu at radius %g; enlarge either", horizon, radius);
    throw NumericError(buf);
  }
  const int walk = o.sampler_margin;
  const auto maps = orbit(driver, f0, times.back() + walk + 1);
  const std::span<const RationalMapP1> all(maps);

  const std::uint64_t cloud_seed = derive_seed(o.seed, 0);
  GreenMeasure mu0 = measure_by_preimages(all.first(walk + 1), walk, o.root, o.samples, cloud_seed);
  const auto h0 = binned(mu0);
  const auto& x = mu0.cloud;
  const auto psi_vals = evaluate_all(psi, x);
  const auto phi_vals = evaluate_all(phi, x);

  RecurrenceReport rep;
  rep.phi_mean = mean(phi_vals);
  rep.psi_mean = mean(psi_vals);
  std::vector<PointP1> y = x;
  std::size_t applied = 0;
  for (std::size_t a : times) {
    for (; applied < a; ++applied) y = pushforward_cloud(maps[applied], y);
    std::vector<double> prod(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) prod[j] = phi(y[j]) * psi_vals[j];

    RecurrenceRow row;
    row.alpha_n = a;
    row.correlation = mean(prod) - rep.phi_mean * rep.psi_mean;
    // joint resampling of (prod, phi, psi)
    std::vector<double> reps(std::max(o.bootstrap_replicates, 0));
    const std::size_t m = x.size();
    for (int b = 0; b < o.bootstrap_replicates; ++b) {
      Rng rng(derive_seed(derive_seed(o.seed, 2000000 + a), b));
      double sp = 0, sf = 0, ss = 0;
      for (std::size_t k = 0; k < m; ++k) {
        const std::size_t i = uniform_index(rng, m);
        sp += prod[i];
        sf += phi_vals[i];
        ss += psi_vals[i];
      }
      reps[b] = sp / m - (sf / m) * (ss / m);
    }
    row.std_error = summarize(std::move(reps)).std_error;

    const auto mu_a = measure_by_preimages(all.subspan(a, walk + 1), walk, o.root, o.samples, cloud_seed, a);
    row.tv_binned = tv_distance(binned(mu_a), h0);
    rep.rows.push_back(row);
  }
  return rep;
}

void write_recurrence_csv(const RecurrenceReport& report, std::ostream& out) {
  out << "alpha_n,correlation,tv_binned\n";
  char line[128];
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g\n", r.alpha_n, r.correlation, r.tv_binned);
    out << line;
  }
}

OperatorIdentityCheck operator_identity_check(const DriverSystem& driver, const Param& f0, const Observable& phi,
                                              const Observable& psi, const MixingOptions& o) {
  check_samples(o);
  const int walk = o.sampler_margin;
  const auto maps = orbit(driver, f0, walk + 2);
  const std::span<const RationalMapP1> all(maps);

  const auto x = sample_cloud(all, 0, walk, o, derive_seed(o.seed, 0));
  std::vector<double> direct(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) direct[j] = phi(evaluate(maps[0], x[j])) * psi(x[j]);

  const auto y = sample_cloud(all, 1, walk, o, derive_seed(o.seed, 1));
  std::vector<double> moved(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) moved[j] = phi(y[j]) * transfer(maps[0], psi, y[j]);

  return {mc_mean(direct), mc_mean(moved)};
}

McEstimate mean_zero_pushforward(const DriverSystem& driver, const Param& f0, const Observable& psi,
                                 const MixingOptions& o) {
  check_samples(o);
  const int walk = o.sampler_margin;
  const auto maps = orbit(driver, f0, walk + 2);
  const std::span<const RationalMapP1> all(maps);

  const auto psi0 = mc_mean(evaluate_all(psi, sample_cloud(all, 0, walk, o, derive_seed(o.seed, 0))));
  const auto y = sample_cloud(all, 1, walk, o, derive_seed(o.seed, 1));
  std::vector<double> v(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) v[j] = transfer(maps[0], psi, y[j]) - psi0.value;
  const auto est = mc_mean(v);
  return {est.value, std::hypot(est.std_error, psi0.std_error)};
}

}  // namespace rgreen
