#include "rgreen/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "rgreen/error.hpp"
#include "rgreen/measure.hpp"
#include "rgreen/numerics.hpp"
#include "rgreen/mixing.hpp"

namespace rgreen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// A validation failure tied to a key path such as "driver.family.degree".
class KeyError : public ConfigError {
 public:
  KeyError(std::string key, const std::string& what)
      : ConfigError("config error at '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Reads an object and remembers which keys were consumed; finish() rejects the rest.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw KeyError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }
  std::string path(const std::string& key) const { return join(path_, key); }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw KeyError(path(key), "expected a number");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) throw KeyError(path(key), "expected an integer");
        if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)
          throw KeyError(path(key), "expected a non-negative integer");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw KeyError(path(key), "expected a string");
      }
      return v.get<T>();
    } catch (const json::exception& e) {
      throw KeyError(path(key), e.what());
    }
  }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) throw KeyError(join(path_, key), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

cplx read_complex(const json& j, const std::string& path) {
  try {
    return complex_from_json(j);
  } catch (const std::exception& e) {
    throw KeyError(path, std::string("expected [re, im] or a number: ") + e.what());
  }
}

json family_to_json(const MapFamily& f) {
  json curve = {{"kind", f.curve.kind == ParamCurve::Kind::circle ? "circle" : "affine"},
                {"center", complex_to_json(f.curve.center)}};
  if (f.curve.kind == ParamCurve::Kind::circle)
    curve["radius"] = f.curve.radius;
  else
    curve["slope"] = complex_to_json(f.curve.slope);
  return {{"form", f.form == MapFamily::Form::power_plus_c ? "power_plus_c" : "pencil"},
          {"degree", f.degree},
          {"curve", curve}};
}

MapFamily family_from_json(const json& j, const std::string& path) {
  Reader r(j, path);
  MapFamily f;
  const auto form = r.get<std::string>("form", "power_plus_c");
  if (form == "power_plus_c")
    f.form = MapFamily::Form::power_plus_c;
  else if (form == "pencil")
    f.form = MapFamily::Form::pencil;
  else
    throw KeyError(r.path("form"), "expected power_plus_c or pencil");
  f.degree = r.get<int>("degree", 2);
  if (f.degree < 2 || f.degree > 8) throw KeyError(r.path("degree"), "degree must lie in [2, 8]");
  if (r.has("curve")) {
    Reader c(r.raw("curve"), r.path("curve"));
    const auto kind = c.get<std::string>("kind", "circle");
    if (kind == "circle")
      f.curve.kind = ParamCurve::Kind::circle;
    else if (kind == "affine")
      f.curve.kind = ParamCurve::Kind::affine;
    else
      throw KeyError(c.path("kind"), "expected circle or affine");
    if (c.has("center")) f.curve.center = read_complex(c.raw("center"), c.path("center"));
    f.curve.radius = c.get<double>("radius", 0.0);
    if (c.has("slope")) f.curve.slope = read_complex(c.raw("slope"), c.path("slope"));
    c.finish();
  }
  r.finish();
  return f;
}

Param param_at(const json& j, const std::string& path) {
  try {
    return param_from_json(j);
  } catch (const KeyError&) {
    throw;
  } catch (const std::exception& e) {
    throw KeyError(path, e.what());
  }
}

template <class T>
std::vector<T> read_list(Reader& r, const std::string& key, std::vector<T> fallback) {
  if (!r.has(key)) return fallback;
  const json& v = r.raw(key);
  if (!v.is_array()) throw KeyError(r.path(key), "expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto where = r.path(key) + "[" + std::to_string(i) + "]";
    if constexpr (std::is_same_v<T, double>) {
      if (!v[i].is_number()) throw KeyError(where, "expected a number");
    } else {
      if (!v[i].is_number_integer() || v[i].get<long long>() < 0)
        throw KeyError(where, "expected a non-negative integer");
    }
    out.push_back(v[i].get<T>());
  }
  return out;
}

std::size_t line_of(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

// Follows the dotted key path through the raw text; good enough to point at
// the offending line of a hand-written config.
std::size_t line_of_key(const std::string& text, const std::string& key) {
  std::size_t pos = 0;
  std::stringstream parts(key);
  std::string part;
  while (std::getline(parts, part, '.')) {
    part = part.substr(0, part.find('['));
    const auto hit = text.find("\"" + part + "\"", pos);
    if (hit == std::string::npos) break;
    pos = hit;
  }
  return line_of(text, pos);
}

// ------------------------------------------------------------------ running

struct Output {
  fs::path dir;
  bool stamped = false;
  std::vector<std::string> files;

  void write(const std::string& name, const std::string& body) {
    const fs::path p = dir / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw NumericError("cannot write " + p.string());
    if (stamped && name.ends_with(".csv")) f << "# hypothesis violated\n";
    f << body;
    if (!f) throw NumericError("write failed for " + p.string());
    files.push_back(name);
  }
  void write_json(const std::string& name, json j) {
    j["hypothesis_violated"] = stamped;
    write(name, j.dump(2) + "\n");
  }
};

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<RationalMapP1> config_orbit(const DriverSystem& driver, const ExperimentConfig& c, std::size_t length) {
  return orbit(driver, c.driver.f0, length);
}

void run_orbit_diagnostics(const OrbitDiagnostics& d, Output& out) {
  std::ostringstream csv;
  csv << "n,log_eta,partial_mean\n";
  for (std::size_t n = 0; n < d.per_step_log_eta.size(); ++n)
    csv << n << ',' << fmt(d.per_step_log_eta[n]) << ',' << fmt(d.birkhoff_partial_means[n]) << '\n';
  out.write("diagnostics.csv", csv.str());
  json j = {{"epsilon", number_or_null(d.epsilon)},
            {"n0", d.n0},
            {"drift_slope", d.drift_slope},
            {"cauchy_differences", d.cauchy_differences},
            {"hit_degenerate", d.hit_degenerate},
            {"non_integrable", d.non_integrable},
            {"compliant", d.compliant()}};
  out.write_json("diagnostics.json", j);
}

TailModel tail_model(const ExperimentConfig& c, const OrbitDiagnostics& d) {
  return {std::isfinite(d.epsilon) ? d.epsilon * c.p_hat : 0.0};
}

void run_potential(const DriverSystem& driver, const ExperimentConfig& c, const OrbitDiagnostics& d, Output& out) {
  const auto maps = config_orbit(driver, c, c.depth + 1);
  const auto s = green_series(maps, c.depth, c.grid, tail_model(c, d));
  std::ostringstream csv;
  write_grid_csv(s, csv);
  out.write("grid.csv", csv.str());
  json ledger = series_ledger(s);
  ledger["epsilon"] = number_or_null(d.epsilon);
  ledger["p_hat"] = c.p_hat;
  out.write_json("ledger.json", ledger);
}

PotentialSeries deep_enough(const std::vector<RationalMapP1>& maps, const ExperimentConfig& c, TailModel tail) {
  auto s = green_series(maps, c.depth, c.grid, tail);
  while (!(s.tail_bound() < c.tail_tolerance) && s.depth < c.max_depth) s = deepen(s);
  return s;
}

void run_measure(const DriverSystem& driver, const ExperimentConfig& c, const OrbitDiagnostics& d, Output& out) {
  const auto maps = config_orbit(driver, c, std::max(c.depth, c.max_depth) + 1);
  const auto s = deep_enough(maps, c, tail_model(c, d));
  const auto lap = measure_from_potential(s, c.tail_tolerance);
  const auto cloud = measure_by_preimages(maps, c.depth, PointP1(c.root, 1.0), c.samples, c.seed);
  const auto dist = measure_distance(lap, cloud);

  std::ostringstream bin, csv;
  write_grid_masses(lap, bin);
  out.write("masses.bin", bin.str());
  write_cloud_csv(cloud.cloud, csv);
  out.write("cloud.csv", csv.str());
  out.write_json("measure.json", {{"tv_binned", dist.tv_binned},
                                  {"energy_dist", number_or_null(dist.energy_dist)},
                                  {"raw_total_mass", lap.raw_total_mass},
                                  {"renormalization", lap.renormalization},
                                  {"clipped_mass", lap.clipped_mass},
                                  {"mass_defect", lap.mass_defect},
                                  {"potential_depth", s.depth},
                                  {"tail_bound", s.tail_bound()},
                                  {"sampler_depth", c.depth},
                                  {"samples", c.samples}});
}

void run_invariance(const DriverSystem& driver, const ExperimentConfig& c, Output& out) {
  if (c.indices.empty()) throw KeyError("indices", "need at least one orbit index");
  const std::size_t top = *std::max_element(c.indices.begin(), c.indices.end());
  const auto maps = config_orbit(driver, c, top + c.depth + 2);
  const std::span<const RationalMapP1> all(maps);
  const PointP1 root(c.root, 1.0);
  auto cloud_at = [&](std::size_t i) {
    return measure_by_preimages(all.subspan(i, c.depth + 1), c.depth, root, c.samples, derive_seed(c.seed, i), i);
  };
  std::ostringstream csv;
  csv << "i,pullback_tv,pullback_energy,pushforward_tv,pushforward_energy\n";
  json rows = json::array();
  for (std::size_t i : c.indices) {
    const auto mu_i = cloud_at(i), mu_next = cloud_at(i + 1);
    const auto pull = invariance_pullback_check(mu_next, maps[i], mu_i, derive_seed(c.seed, 1000000 + i));
    const auto push = invariance_pushforward_check(mu_i, maps[i], mu_next);
    csv << i << ',' << fmt(pull.tv_binned) << ',' << fmt(pull.energy_dist) << ',' << fmt(push.tv_binned) << ','
        << fmt(push.energy_dist) << '\n';
    rows.push_back(json{{"i", i},
                    {"pullback_tv", pull.tv_binned},
                    {"pullback_energy", pull.energy_dist},
                    {"pushforward_tv", push.tv_binned},
                    {"pushforward_energy", push.energy_dist}});
  }
  out.write("invariance.csv", csv.str());
  out.write_json("invariance.json", {{"rows", rows}, {"depth", c.depth}, {"samples", c.samples}});
}

bool run_continuity(const DriverSystem& driver, const ExperimentConfig& c, Output& out) {
  if (c.perturbations.empty()) throw KeyError("perturbations", "need at least one perturbed start");
  const auto rep = continuity_experiment(driver, c.driver.f0, c.perturbations, c.depth, c.grid, c.p_hat);
  std::ostringstream csv;
  csv << "t,sup_difference\n";
  for (const auto& r : rep.rows) csv << fmt(driver.coordinate(r.start)) << ',' << fmt(r.sup_difference) << '\n';
  out.write("continuity.csv", csv.str());
  std::vector<json> h;
  for (double v : rep.h_terms) h.push_back(number_or_null(v));
  out.write_json("continuity.json", {{"h_terms", h},
                                     {"h_sum", number_or_null(rep.h_sum)},
                                     {"p_hat", rep.p_hat},
                                     {"strictly_decreasing", rep.strictly_decreasing},
                                     {"h_violated", rep.hypothesis_violated}});
  return rep.hypothesis_violated;
}

MixingOptions mixing_options(const ExperimentConfig& c, const RunFlags& flags) {
  MixingOptions o;
  o.depths = c.depths;
  o.samples = c.samples;
  o.seed = c.seed;
  o.root = PointP1(c.root, 1.0);
  o.force = flags.force;
  return o;
}

bool run_mixing(const DriverSystem& driver, const ExperimentConfig& c, const RunFlags& flags, Output& out) {
  const auto rep = mixing_experiment(driver, c.driver.f0, Observable::builtin(c.phi), Observable::builtin(c.psi),
                                     mixing_options(c, flags));
  std::ostringstream csv;
  write_mixing_csv(rep, csv);
  out.write("mixing.csv", csv.str());
  json rows = json::array();
  for (const auto& r : rep.rows) rows.push_back(json{{"n", r.n}, {"std_error", r.std_error}});
  out.write_json("mixing.json", {{"fitted_rate", number_or_null(rep.fitted_rate)},
                                 {"significant_depths", rep.significant_depths},
                                 {"fitted_constant", rep.fitted_constant},
                                 {"dominated", rep.dominated},
                                 {"phi_sup", rep.phi_sup},
                                 {"psi_dsh", rep.psi_dsh},
                                 {"degree", rep.degree},
                                 {"std_errors", rows}});
  return rep.hypothesis_violated;
}

void run_recurrence(const DriverSystem& driver, const ExperimentConfig& c, const RunFlags& flags, Output& out) {
  const auto rep = recurrence_experiment(driver, c.driver.f0, Observable::builtin(c.phi), Observable::builtin(c.psi),
                                         c.horizon, c.radius, mixing_options(c, flags));
  std::ostringstream csv;
  write_recurrence_csv(rep, csv);
  out.write("recurrence.csv", csv.str());
  json se = json::array();
  for (const auto& r : rep.rows) se.push_back(r.std_error);
  out.write_json("recurrence.json",
                 {{"phi_mean", rep.phi_mean}, {"psi_mean", rep.psi_mean}, {"std_errors", se}});
}

void run_calibration(const DriverSystem& driver, const ExperimentConfig& c, Output& out) {
  std::vector<double> ts = c.calibration;
  if (ts.empty())
    for (int k = 0; k < 9; ++k) ts.push_back(k / 8.0);
  const auto& fam = driver.family();
  std::vector<RationalMapP1> raw;
  for (double t : ts) raw.push_back(fam.raw_map(t));
  const auto fit = fit_distance_exponent(raw, c.grid);

  std::ostringstream csv;
  csv << "t,minus_log_eta,log_sup_u\n";
  json lip = json::array();
  double lip_constant = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const auto proxy = degeneracy_proxy(raw[k]);
    if (proxy.degenerate) {
      csv << fmt(ts[k]) << ",inf,nan\n";
      continue;
    }
    const double sup = sup_norm_u(raw[k].normalized(), c.grid).value;
    csv << fmt(ts[k]) << ',' << fmt(-proxy.log_eta) << ',' << fmt(std::log(sup)) << '\n';
    if (k + 1 < ts.size() && raw[k + 1].is_holomorphic()) {
      const auto s = lipschitz_check(raw[k], raw[k + 1], c.grid);
      const double ratio = s.map_distance > 0 ? s.sup_difference / s.map_distance : 0.0;
      lip_constant = std::max(lip_constant, ratio);
      lip.push_back(json{{"t_a", ts[k]},
                     {"t_b", ts[k + 1]},
                     {"sup_difference", s.sup_difference},
                     {"map_distance", s.map_distance},
                     {"ratio", ratio}});
    }
  }
  out.write("calibration.csv", csv.str());
  out.write_json("calibration.json", {{"exponent", fit.exponent},
                                      {"log_constant", fit.log_constant},
                                      {"r2", fit.r2},
                                      {"lipschitz", lip},
                                      {"lipschitz_constant", lip_constant}});
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

// ------------------------------------------------------------------ config

json param_to_json(const Param& p) {
  json j = {{"t", p.t}};
  if (p.den != 0) {
    j["num"] = p.num;
    j["den"] = p.den;
  }
  if (p.stream != 0 || p.offset != 0) {
    j["stream"] = p.stream;
    j["offset"] = p.offset;
  }
  return j;
}

Param param_from_json(const json& j) {
  if (j.is_number()) {
    Param p;
    p.t = j.get<double>();
    return p;
  }
  Reader r(j, "param");
  Param p;
  p.t = r.get<double>("t", 0.0);
  const auto num = r.get<std::uint64_t>("num", 0), den = r.get<std::uint64_t>("den", 0);
  if (den != 0) {
    p = rational_param(num, den);
  } else if (r.has("num")) {
    throw KeyError("param.den", "num given without den");
  }
  p.stream = r.get<std::uint64_t>("stream", 0);
  p.offset = r.get<std::uint64_t>("offset", 0);
  r.finish();
  return p;
}

json to_json(const ExperimentConfig& c) {
  const auto& d = c.driver;
  json driver = {{"kind", to_string(d.kind)},
                 {"family", family_to_json(d.family)},
                 {"f0", param_to_json(d.f0)},
                 {"alpha", d.alpha},
                 {"factor", d.factor},
                 {"anchor", param_to_json(d.anchor)}};
  json perts = json::array();
  for (const auto& p : c.perturbations) perts.push_back(param_to_json(p));
  return {{"driver", driver},
          {"grid", {{"resolution", c.grid.resolution}, {"extent", c.grid.extent}}},
          {"depth", c.depth},
          {"length", c.length},
          {"samples", c.samples},
          {"depths", c.depths},
          {"indices", c.indices},
          {"root", complex_to_json(c.root)},
          {"observables", {{"phi", c.phi}, {"psi", c.psi}}},
          {"perturbations", perts},
          {"p_hat", c.p_hat},
          {"horizon", c.horizon},
          {"radius", c.radius},
          {"calibration", c.calibration},
          {"output", c.output},
          {"seed", c.seed},
          {"tolerances", {{"tail", c.tail_tolerance}, {"drift", c.drift_tolerance}}},
          {"max_depth", c.max_depth}};
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  Reader r(j, "");
  if (r.has("driver")) {
    Reader d(r.raw("driver"), "driver");
    const auto kind = d.get<std::string>("kind", "constant");
    try {
      c.driver.kind = driver_kind_from_string(kind);
    } catch (const ConfigError& e) {
      throw KeyError("driver.kind", e.what());
    }
    if (d.has("family")) c.driver.family = family_from_json(d.raw("family"), "driver.family");
    if (d.has("f0")) c.driver.f0 = param_at(d.raw("f0"), "driver.f0");
    if (d.has("anchor")) c.driver.anchor = param_at(d.raw("anchor"), "driver.anchor");
    c.driver.alpha = d.get<double>("alpha", 0.0);
    c.driver.factor = d.get<double>("factor", 0.5);
    if (c.driver.kind == DriverKind::contraction && !(c.driver.factor > 0 && c.driver.factor < 1))
      throw KeyError("driver.factor", "contraction factor must lie in (0, 1)");
    d.finish();
  }
  if (r.has("grid")) {
    Reader g(r.raw("grid"), "grid");
    c.grid.resolution = g.get<int>("resolution", c.grid.resolution);
    c.grid.extent = g.get<double>("extent", c.grid.extent);
    g.finish();
    if (c.grid.resolution < 64) throw KeyError("grid.resolution", "must be >= 64");
    if (!(c.grid.extent >= 2.0)) throw KeyError("grid.extent", "must be >= 2 so the charts overlap");
  }
  c.depth = r.get<int>("depth", c.depth);
  if (c.depth < 0) throw KeyError("depth", "must be >= 0");
  c.length = r.get<std::size_t>("length", c.length);
  if (c.length < 16) throw KeyError("length", "diagnostics need length >= 16");
  c.samples = r.get<std::size_t>("samples", c.samples);
  if (c.samples < 1000) throw KeyError("samples", "must be >= 1000");
  c.depths = read_list<int>(r, "depths", c.depths);
  c.indices = read_list<std::size_t>(r, "indices", c.indices);
  if (r.has("root")) c.root = read_complex(r.raw("root"), "root");
  if (r.has("observables")) {
    Reader o(r.raw("observables"), "observables");
    c.phi = o.get<std::string>("phi", c.phi);
    c.psi = o.get<std::string>("psi", c.psi);
    o.finish();
    for (const auto& [key, name] : {std::pair{"phi", c.phi}, std::pair{"psi", c.psi}}) {
      try {
        (void)Observable::builtin(name);
      } catch (const std::exception& e) {
        throw KeyError(std::string("observables.") + key, e.what());
      }
    }
  }
  if (r.has("perturbations")) {
    const json& v = r.raw("perturbations");
    if (!v.is_array()) throw KeyError("perturbations", "expected a list");
    for (std::size_t i = 0; i < v.size(); ++i)
      c.perturbations.push_back(param_at(v[i], "perturbations[" + std::to_string(i) + "]"));
  }
  c.p_hat = r.get<double>("p_hat", c.p_hat);
  c.horizon = r.get<std::size_t>("horizon", c.horizon);
  c.radius = r.get<double>("radius", c.radius);
  if (!(c.radius > 0)) throw KeyError("radius", "must be > 0");
  c.calibration = read_list<double>(r, "calibration", c.calibration);
  c.output = r.get<std::string>("output", c.output);
  c.seed = r.get<std::uint64_t>("seed", c.seed);
  if (r.has("tolerances")) {
    Reader t(r.raw("tolerances"), "tolerances");
    c.tail_tolerance = t.get<double>("tail", c.tail_tolerance);
    c.drift_tolerance = t.get<double>("drift", c.drift_tolerance);
    t.finish();
  }
  c.max_depth = r.get<int>("max_depth", c.max_depth);
  r.finish();
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error (line " + std::to_string(line_of(text, e.byte > 0 ? e.byte - 1 : 0)) +
                      "): " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const KeyError& e) {
    throw ConfigError(std::string(e.what()) + " (line " + std::to_string(line_of_key(text, e.key())) + ")");
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

DriverSystem make_driver(const DriverConfig& c) {
  switch (c.kind) {
    case DriverKind::constant: return DriverSystem::constant(c.family, c.anchor);
    case DriverKind::circle_rotation: return DriverSystem::circle_rotation(c.family, c.alpha);
    case DriverKind::doubling: return DriverSystem::doubling(c.family);
    case DriverKind::logistic: return DriverSystem::logistic(c.family);
    case DriverKind::iid_shift: return DriverSystem::iid_shift(c.family);
    case DriverKind::contraction: return DriverSystem::contraction(c.family, c.factor, c.anchor);
  }
  throw ConfigError("unknown driver kind");
}

// ------------------------------------------------------------------ running

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"orbit-diagnostics", "potential",  "measure", "invariance",
                                                 "continuity",        "mixing",     "recurrence",
                                                 "calibrate-distance"};
  return names;
}

std::string sha256_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw NumericError("cannot read " + path + " for checksumming");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (f) {
    f.read(buf, sizeof buf);
    if (f.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(f.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

RunResult run_experiment(const std::string& subcommand, ExperimentConfig c, const RunFlags& flags) {
  const auto& names = subcommands();
  if (std::find(names.begin(), names.end(), subcommand) == names.end())
    throw ConfigError("unknown subcommand: " + subcommand);
  if (flags.seed) c.seed = *flags.seed;
  if (flags.out) c.output = *flags.out;
#ifdef _OPENMP
  if (flags.threads > 0) omp_set_num_threads(flags.threads);
#endif
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();

  Output out;
  out.dir = c.output;
  fs::create_directories(out.dir);
  const DriverSystem driver = make_driver(c.driver);

  DiagnosticsOptions dopts;
  dopts.drift_tolerance = c.drift_tolerance;
  const auto diag = birkhoff_diagnostics(driver, c.driver.f0, c.length, dopts);

  RunResult result;
  const bool gated = subcommand != "orbit-diagnostics" && subcommand != "calibrate-distance";
  if (gated && !diag.compliant()) {
    if (!flags.force)
      throw HypothesisError("driver fails the integrability diagnostics (epsilon " + fmt(diag.epsilon) +
                            ", drift " + fmt(diag.drift_slope) + "); rerun with --force to explore anyway");
    result.hypothesis_violated = true;
    out.stamped = true;
  }

  if (subcommand == "orbit-diagnostics") {
    run_orbit_diagnostics(diag, out);
    result.hypothesis_violated = !diag.compliant();
  } else if (subcommand == "potential") {
    run_potential(driver, c, diag, out);
  } else if (subcommand == "measure") {
    run_measure(driver, c, diag, out);
  } else if (subcommand == "invariance") {
    run_invariance(driver, c, out);
  } else if (subcommand == "continuity") {
    result.hypothesis_violated |= run_continuity(driver, c, out);
  } else if (subcommand == "mixing") {
    result.hypothesis_violated |= run_mixing(driver, c, flags, out);
  } else if (subcommand == "recurrence") {
    run_recurrence(driver, c, flags, out);
  } else {
    run_calibration(driver, c, out);
  }

  json artifacts = json::array();
  for (const auto& name : out.files) {
    const auto p = (out.dir / name).string();
    artifacts.push_back(json{{"file", name}, {"sha256", sha256_file(p)}, {"bytes", fs::file_size(p)}});
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const json manifest = {{"tool", "rgreen"},
                         {"version", kToolVersion},
                         {"subcommand", subcommand},
                         {"seed", c.seed},
                         {"config", to_json(c)},
                         {"started_utc", started},
                         {"wall_clock_seconds", seconds},
                         {"threads", flags.threads},
                         {"hypothesis_violated", result.hypothesis_violated},
                         {"artifacts", artifacts}};
  std::ofstream(out.dir / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';

  result.artifacts = out.files;
  result.output_dir = out.dir.string();
  result.exit_code = result.hypothesis_violated && flags.strict ? kExitHypothesis : kExitOk;
  if (result.hypothesis_violated) result.message = "hypothesis violated";
  return result;
}

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const HypothesisError*>(&e)) return kExitHypothesis;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return kExitConfig;
  return kExitNumeric;
}

}  // namespace rgreen
