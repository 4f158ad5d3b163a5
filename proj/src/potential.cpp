#include "rgreen/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "rgreen/error.hpp"
#include "rgreen/numerics.hpp"

namespace rgreen {

namespace {

constexpr int kSupGridResolution = 64;
constexpr int kRefineStarts = 4;

double u_unchecked(const RationalMapP1& f, cplx z, cplx w) noexcept {
  cplx p, q;
  f.lift(z, w, p, q);
  const double u = 0.5 * std::log(std::norm(p) + std::norm(q)) / f.degree() -
                   0.5 * std::log(std::norm(z) + std::norm(w));
  return std::min(u, 0.0);
}

double u_in_chart(const RationalMapP1& f, int chart, cplx t) noexcept {
  return chart == 0 ? u_unchecked(f, t, 1.0) : u_unchecked(f, 1.0, t);
}

const RationalMapP1& checked(const RationalMapP1& f) {
  f.require_holomorphic();
  if (!f.is_normalized())
    throw std::invalid_argument("potential_u: the map must be normalized (call normalized())");
  return f;
}

std::vector<RationalMapP1> prepared_orbit(std::span<const RationalMapP1> orbit) {
  std::vector<RationalMapP1> out;
  out.reserve(orbit.size());
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    if (!orbit[i].is_holomorphic()) throw DegenerateMapError("map in M", i);
    out.push_back(orbit[i].is_normalized() ? orbit[i] : orbit[i].normalized());
  }
  return out;
}

void apply_term(PotentialSeries& s, int i) {
  const auto& f = (*s.orbit)[i];
  const double weight = std::pow(static_cast<double>(s.degree), -i);
  const auto n = static_cast<std::ptrdiff_t>(s.values.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const PointP1& x = s.images[k];
    s.values[k] += weight * u_unchecked(f, x.z(), x.w());
    cplx p, q;
    f.lift(x.z(), x.w(), p, q);
    s.images[k] = PointP1(p, q);
  }
  s.terms_sup.push_back(sup_norm_u(f, GridSpec{kSupGridResolution, 2.0}).value);
}

void update_tails(PotentialSeries& s) {
  const int n = s.depth;
  const double d = s.degree;
  double m = 0.0;
  for (int i = std::max(0, n - 4); i <= n; ++i) m = std::max(m, s.terms_sup[i]);
  const double rho = std::exp(s.tail_model.eps_p) / d;
  const double extrapolated = rho < 1.0 ? m * rho / (1.0 - rho) * std::pow(d, -n)
                                        : std::numeric_limits<double>::infinity();
  s.tail_bounds.assign(n + 1, 0.0);
  double acc = extrapolated;
  for (int k = n; k >= 0; --k) {
    s.tail_bounds[k] = acc;
    acc += s.terms_sup[k] * std::pow(d, -k);
  }
}

}  // namespace

PointP1 GridSpec::point(std::size_t index) const {
  const auto per = nodes_per_chart();
  const int chart = static_cast<int>(index / per);
  const auto rem = index % per;
  const int j = static_cast<int>(rem / nodes_per_side());
  const int i = static_cast<int>(rem % nodes_per_side());
  return point(chart, i, j);
}

void GridSpec::validate() const {
  if (resolution < 64) throw std::invalid_argument("grid resolution must be >= 64");
  if (!(extent >= 2.0)) throw std::invalid_argument("grid extent must be >= 2 so the charts overlap");
}

double potential_u(const RationalMapP1& f, const PointP1& x) {
  checked(f);
  return u_unchecked(f, x.z(), x.w());
}

SupEstimate sup_norm_u(const RationalMapP1& f, const GridSpec& grid) {
  checked(f);
  grid.validate();
  const std::size_t n = grid.node_count();
  std::vector<double> vals(n);
  for (std::size_t k = 0; k < n; ++k) {
    const PointP1 x = grid.point(k);
    vals[k] = -u_unchecked(f, x.z(), x.w());
  }
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = k;
  std::partial_sort(order.begin(), order.begin() + kRefineStarts, order.end(),
                    [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });

  SupEstimate best{vals[order[0]], grid.point(order[0]), true};
  for (int r = 0; r < kRefineStarts; ++r) {
    const PointP1 start = grid.point(order[r]);
    const int chart = start.chart();
    const cplx t = start.chart_coordinate();
    const auto res = nelder_mead_2d(
        [&](double x, double y) { return u_in_chart(f, chart, {x, y}); }, {t.real(), t.imag()},
        grid.spacing() / 2, 1e-10);
    if (-res.value > best.value) {
      const cplx c(res.x[0], res.x[1]);
      best.value = -res.value;
      best.argmax = chart == 0 ? PointP1(c, 1.0) : PointP1(1.0, c);
    }
  }
  return best;
}

double coefficient_distance(const RationalMapP1& f, const RationalMapP1& g) {
  if (f.degree() != g.degree()) throw std::invalid_argument("coefficient_distance: degrees differ");
  const RationalMapP1 fn = f.is_normalized() ? f : f.normalized();
  const RationalMapP1 gn = g.is_normalized() ? g : g.normalized();
  std::vector<cplx> a(fn.num().begin(), fn.num().end()), b(gn.num().begin(), gn.num().end());
  a.insert(a.end(), fn.den().begin(), fn.den().end());
  b.insert(b.end(), gn.den().begin(), gn.den().end());
  cplx phase = 1.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] != 0.0) {
      if (b[k] != 0.0) phase = std::polar(1.0, std::arg(a[k]) - std::arg(b[k]));
      break;
    }
  }
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::norm(a[k] - phase * b[k]);
  return std::sqrt(s);
}

LipschitzSample lipschitz_check(const RationalMapP1& f, const RationalMapP1& g, const GridSpec& grid) {
  const RationalMapP1 fn = f.is_normalized() ? f : f.normalized();
  const RationalMapP1 gn = g.is_normalized() ? g : g.normalized();
  checked(fn);
  checked(gn);
  grid.validate();
  LipschitzSample out;
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    const PointP1 x = grid.point(k);
    out.sup_difference = std::max(
        out.sup_difference, std::abs(u_unchecked(fn, x.z(), x.w()) - u_unchecked(gn, x.z(), x.w())));
  }
  out.map_distance = coefficient_distance(fn, gn);
  return out;
}

// ------------------------------------------------------------------ series

double PotentialSeries::sup_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

PotentialSeries green_series(std::span<const RationalMapP1> orbit, int depth, const GridSpec& grid,
                             TailModel tail) {
  grid.validate();
  if (depth < 0) throw std::invalid_argument("green_series: depth must be >= 0");
  if (orbit.size() < static_cast<std::size_t>(depth) + 1)
    throw std::invalid_argument("green_series: orbit shorter than depth + 1");

  PotentialSeries s;
  s.orbit = std::make_shared<const std::vector<RationalMapP1>>(prepared_orbit(orbit));
  s.degree = orbit.front().degree();
  for (const auto& f : *s.orbit)
    if (f.degree() != s.degree) throw std::invalid_argument("green_series: orbit degrees differ");
  s.grid = grid;
  s.tail_model = tail;
  s.values.assign(grid.node_count(), 0.0);
  s.images.resize(grid.node_count());
  for (std::size_t k = 0; k < s.images.size(); ++k) s.images[k] = grid.point(k);

  for (int i = 0; i <= depth; ++i) apply_term(s, i);
  s.depth = depth;
  update_tails(s);
  return s;
}

PotentialSeries deepen(const PotentialSeries& series) {
  if (series.orbit->size() < static_cast<std::size_t>(series.depth) + 2)
    throw std::invalid_argument("deepen: orbit has no map at index depth + 1");
  PotentialSeries s = series;
  apply_term(s, series.depth + 1);
  s.depth = series.depth + 1;
  update_tails(s);
  return s;
}

double green_potential_at(std::span<const RationalMapP1> orbit, int depth, const PointP1& x) {
  if (orbit.size() < static_cast<std::size_t>(depth) + 1)
    throw std::invalid_argument("green_potential_at: orbit shorter than depth + 1");
  double g = 0.0;
  PointP1 y = x;
  for (int i = 0; i <= depth; ++i) {
    const auto& f = checked(orbit[i]);
    g += std::pow(static_cast<double>(f.degree()), -i) * u_unchecked(f, y.z(), y.w());
    if (i < depth) y = evaluate(f, y);
  }
  return g;
}

void write_grid_csv(const PotentialSeries& series, std::ostream& out) {
  out << "chart,re,im,g_value\n";
  const auto& g = series.grid;
  char line[128];
  for (int chart = 0; chart < 2; ++chart)
    for (int j = 0; j < g.nodes_per_side(); ++j)
      for (int i = 0; i < g.nodes_per_side(); ++i) {
        const cplx t = g.coordinate(i, j);
        std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g\n", chart, t.real(), t.imag(),
                      series.value(chart, i, j));
        out << line;
      }
}

nlohmann::json series_ledger(const PotentialSeries& series) {
  nlohmann::json terms = nlohmann::json::array();
  for (int i = 0; i <= series.depth; ++i)
    terms.push_back({{"i", i},
                     {"terms_sup", series.terms_sup[i]},
                     {"weight", std::pow(static_cast<double>(series.degree), -i)}});
  return {{"depth", series.depth},
          {"degree", series.degree},
          {"grid", {{"resolution", series.grid.resolution}, {"extent", series.grid.extent}}},
          {"eps_p", series.tail_model.eps_p},
          {"terms", terms},
          {"tail_bounds", series.tail_bounds},
          {"tail_bound", series.tail_bound()},
          {"sup_abs", series.sup_abs()}};
}

ExponentFit fit_distance_exponent(std::span<const RationalMapP1> maps, const GridSpec& grid) {
  ExponentFit fit;
  for (const auto& f : maps) {
    const auto proxy = degeneracy_proxy(f);
    if (proxy.degenerate) continue;
    const double sup = sup_norm_u(f.is_normalized() ? f : f.normalized(), grid).value;
    if (!(sup > 0.0)) continue;
    fit.minus_log_eta.push_back(-proxy.log_eta);
    fit.log_sup_u.push_back(std::log(sup));
  }
  if (fit.minus_log_eta.size() < 2)
    throw NumericError("fit_distance_exponent: need two non-degenerate maps with nonzero potentials");
  const auto line = fit_line(fit.minus_log_eta, fit.log_sup_u);
  fit.exponent = line.slope;
  fit.log_constant = line.intercept;
  fit.r2 = line.r2;
  return fit;
}

ContinuityReport continuity_experiment(const DriverSystem& driver, const Param& base,
                                       std::span<const Param> perturbations, int depth,
                                       const GridSpec& grid, double p_hat) {
  ContinuityReport report;
  report.p_hat = p_hat;
  const auto len = static_cast<std::size_t>(depth) + 1;
  const auto base_series = green_series(orbit(driver, base, len), depth, grid);

  const int d = driver.family().degree;
  report.h_terms.assign(len, 0.0);
  auto accumulate_h = [&](const Param& start) {
    const auto params = parameter_orbit(driver, start, len);
    for (std::size_t i = 0; i < len; ++i) {
      const double log_eta = degeneracy_proxy(driver.family().raw_map(driver.coordinate(params[i]))).log_eta;
      const double term = std::exp(-p_hat * log_eta) * std::pow(static_cast<double>(d), -static_cast<double>(i));
      report.h_terms[i] = std::max(report.h_terms[i], term);
    }
  };
  accumulate_h(base);

  for (const auto& start : perturbations) {
    accumulate_h(start);
    const auto s = green_series(orbit(driver, start, len), depth, grid);
    double diff = 0.0;
    for (std::size_t k = 0; k < s.values.size(); ++k)
      diff = std::max(diff, std::abs(s.values[k] - base_series.values[k]));
    report.rows.push_back({start, diff});
  }

  report.h_sum = 0.0;
  for (double t : report.h_terms) report.h_sum += t;
  bool violated = !std::isfinite(report.h_sum);
  if (!violated && depth >= 4) {
    const std::size_t half = len / 2;
    violated = !(report.h_terms.back() < report.h_terms[half]);
  }
  report.hypothesis_violated = violated;

  report.strictly_decreasing = true;
  for (std::size_t k = 1; k < report.rows.size(); ++k)
    if (!(report.rows[k].sup_difference < report.rows[k - 1].sup_difference))
      report.strictly_decreasing = false;
  return report;
}

}  // namespace rgreen
