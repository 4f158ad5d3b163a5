// Python bindings for the rgreen core.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <limits>

#include "rgreen/drivers.hpp"
#include "rgreen/error.hpp"
#include "rgreen/experiment.hpp"
#include "rgreen/measure.hpp"
#include "rgreen/mixing.hpp"
#include "rgreen/potential.hpp"
#include "rgreen/projective.hpp"

namespace py = pybind11;
using namespace rgreen;
using nlohmann::json;

namespace {

PointP1 to_point(const py::object& x) {
  if (py::isinstance<py::tuple>(x)) {
    const auto t = x.cast<std::pair<cplx, cplx>>();
    return {t.first, t.second};
  }
  const auto z = x.cast<cplx>();
  return std::isinf(z.real()) || std::isinf(z.imag()) ? PointP1::infinity() : PointP1::from_affine(z);
}

// Affine coordinate, complex infinity for [1:0].
cplx from_point(const PointP1& p) {
  return p.is_infinity() ? cplx(std::numeric_limits<double>::infinity(), 0.0) : p.affine();
}

py::array_t<cplx> cloud_array(const std::vector<PointP1>& cloud) {
  py::array_t<cplx> out(static_cast<py::ssize_t>(cloud.size()));
  auto v = out.mutable_unchecked<1>();
  for (std::size_t k = 0; k < cloud.size(); ++k) v(k) = from_point(cloud[k]);
  return out;
}

std::vector<PointP1> cloud_from(const py::array_t<cplx>& a) {
  std::vector<PointP1> out;
  auto v = a.unchecked<1>();
  for (py::ssize_t k = 0; k < v.shape(0); ++k)
    out.push_back(std::isinf(v(k).real()) || std::isinf(v(k).imag()) ? PointP1::infinity()
                                                                       : PointP1::from_affine(v(k)));
  return out;
}

ExperimentConfig config_from(const std::string& text) { return parse_config(text); }

std::vector<RationalMapP1> config_orbit(const std::string& config, std::size_t length) {
  const auto c = config_from(config);
  return orbit(make_driver(c.driver), c.driver.f0, length);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Random Green potentials, measures and mixing on the Riemann sphere";

  // translators run newest first, so the base class goes in first
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<HypothesisError>(m, "HypothesisError", PyExc_RuntimeError);
  py::register_exception<DegenerateMapError>(m, "DegenerateMapError", PyExc_ArithmeticError);

  py::class_<RationalMapP1>(m, "RationalMap")
      .def(py::init<std::vector<cplx>, std::vector<cplx>>(), py::arg("num"), py::arg("den"),
           "Lift (P, Q); coefficient k multiplies z^(d-k) w^k.")
      .def_static("power_plus_constant", &RationalMapP1::power_plus_constant, py::arg("degree"), py::arg("c"))
      .def_property_readonly("degree", &RationalMapP1::degree)
      .def_property_readonly("num", [](const RationalMapP1& f) { return std::vector<cplx>(f.num().begin(), f.num().end()); })
      .def_property_readonly("den", [](const RationalMapP1& f) { return std::vector<cplx>(f.den().begin(), f.den().end()); })
      .def("normalized", &RationalMapP1::normalized)
      .def("resultant", &RationalMapP1::resultant)
      .def("is_holomorphic", &RationalMapP1::is_holomorphic)
      .def("log_eta", [](const RationalMapP1& f) { return degeneracy_proxy(f).log_eta; })
      .def("__call__", [](const RationalMapP1& f, const py::object& x) { return from_point(evaluate(f, to_point(x))); })
      .def("preimages", [](const RationalMapP1& f, const py::object& y) {
        std::vector<cplx> out;
        for (const auto& p : preimages(f, to_point(y))) out.push_back(from_point(p));
        return out;
      })
      .def("__repr__", [](const RationalMapP1& f) {
        json j;
        to_json(j, f);
        return "RationalMap(" + j.dump() + ")";
      });

  m.def("spherical_distance", [](const py::object& a, const py::object& b) {
    return spherical_distance(to_point(a), to_point(b));
  });
  m.def("log_eta_max", &log_eta_max);
  m.def("potential_u", [](const RationalMapP1& f, const py::object& x) { return potential_u(f, to_point(x)); },
        py::arg("f"), py::arg("x"));
  m.def("sup_norm_u", [](const RationalMapP1& f, int resolution, double extent) {
    return sup_norm_u(f, GridSpec{resolution, extent}).value;
  }, py::arg("f"), py::arg("resolution") = 64, py::arg("extent") = 2.0);
  m.def("green_potential_at", [](const std::vector<RationalMapP1>& maps, int depth, const py::object& x) {
    return green_potential_at(maps, depth, to_point(x));
  }, py::arg("maps"), py::arg("depth"), py::arg("x"));

  py::class_<PotentialSeries>(m, "PotentialSeries")
      .def_readonly("depth", &PotentialSeries::depth)
      .def_readonly("degree", &PotentialSeries::degree)
      .def_readonly("terms_sup", &PotentialSeries::terms_sup)
      .def_readonly("tail_bounds", &PotentialSeries::tail_bounds)
      .def_property_readonly("tail_bound", &PotentialSeries::tail_bound)
      .def_property_readonly("resolution", [](const PotentialSeries& s) { return s.grid.resolution; })
      .def_property_readonly("extent", [](const PotentialSeries& s) { return s.grid.extent; })
      .def_property_readonly("values", [](const PotentialSeries& s) {
        const py::ssize_t n = s.grid.nodes_per_side();
        py::array_t<double> out({py::ssize_t{2}, n, n});
        std::copy(s.values.begin(), s.values.end(), out.mutable_data());
        return out;
      }, "g_n as an array [chart, row (imaginary), column (real)]")
      .def("deepen", &deepen);

  m.def("green_series", [](const std::vector<RationalMapP1>& maps, int depth, int resolution, double extent,
                           double eps_p) {
    return green_series(maps, depth, GridSpec{resolution, extent}, TailModel{eps_p});
  }, py::arg("maps"), py::arg("depth"), py::arg("resolution") = 128, py::arg("extent") = 2.0, py::arg("eps_p") = 0.0);

  py::class_<GreenMeasure>(m, "GreenMeasure")
      .def_readonly("depth_used", &GreenMeasure::depth_used)
      .def_readonly("orbit_index", &GreenMeasure::orbit_index)
      .def_readonly("raw_total_mass", &GreenMeasure::raw_total_mass)
      .def_readonly("renormalization", &GreenMeasure::renormalization)
      .def_readonly("clipped_mass", &GreenMeasure::clipped_mass)
      .def_readonly("mass_defect", &GreenMeasure::mass_defect)
      .def_property_readonly("method", [](const GreenMeasure& mu) { return std::string(to_string(mu.method)); })
      .def_property_readonly("cloud", [](const GreenMeasure& mu) { return cloud_array(mu.cloud); })
      .def_property_readonly("grid_masses", [](const GreenMeasure& mu) {
        return py::array_t<double>(static_cast<py::ssize_t>(mu.grid_masses.size()), mu.grid_masses.data());
      })
      .def("histogram", &binned);

  m.def("measure_from_potential", [](const PotentialSeries& s) { return measure_from_potential(s); });
  m.def("measure_by_preimages", [](const std::vector<RationalMapP1>& maps, int depth, const py::object& root,
                                   std::size_t m_samples, std::uint64_t seed) {
    py::gil_scoped_release release;
    return measure_by_preimages(maps, depth, to_point(root), m_samples, seed);
  }, py::arg("maps"), py::arg("depth"), py::arg("root") = cplx(2.0, 0.3), py::arg("m") = 10000, py::arg("seed") = 0);
  m.def("cloud_measure", [](const py::array_t<cplx>& cloud) {
    GreenMeasure mu;
    mu.cloud = cloud_from(cloud);
    return mu;
  });
  m.def("measure_distance", [](const GreenMeasure& a, const GreenMeasure& b) {
    const auto d = measure_distance(a, b);
    return py::dict(py::arg("tv_binned") = d.tv_binned, py::arg("energy_dist") = d.energy_dist);
  });

  py::class_<Observable>(m, "Observable")
      .def_static("builtin", &Observable::builtin, py::arg("name"))
      .def_property_readonly("name", &Observable::name)
      .def_property_readonly("sup_bound", &Observable::sup_bound)
      .def("__call__", [](const Observable& o, const py::object& x) { return o(to_point(x)); })
      .def("scaled", &Observable::scaled);
  m.def("estimate_dsh_norm", [](const Observable& psi, int resolution) {
    return estimate_dsh_norm(psi, GridSpec{resolution, 2.0});
  }, py::arg("psi"), py::arg("resolution") = 128);

  // Driver-level entry points take the JSON experiment config as text.
  m.def("parse_config", [](const std::string& text) { return to_json(config_from(text)).dump(); },
        "Validate a config and return its fully resolved JSON.");
  m.def("orbit", &config_orbit, py::arg("config"), py::arg("length"));
  m.def("birkhoff_diagnostics", [](const std::string& config, std::size_t length) {
    const auto c = config_from(config);
    DiagnosticsOptions opts;
    opts.drift_tolerance = c.drift_tolerance;
    const auto d = birkhoff_diagnostics(make_driver(c.driver), c.driver.f0, length, opts);
    return py::dict(py::arg("log_eta") = d.per_step_log_eta, py::arg("partial_means") = d.birkhoff_partial_means,
                    py::arg("epsilon") = d.epsilon, py::arg("drift_slope") = d.drift_slope,
                    py::arg("hit_degenerate") = d.hit_degenerate, py::arg("non_integrable") = d.non_integrable,
                    py::arg("compliant") = d.compliant());
  }, py::arg("config"), py::arg("length") = 64);
  m.def("mixing_experiment", [](const std::string& config, bool force) {
    const auto c = config_from(config);
    MixingOptions o;
    o.depths = c.depths;
    o.samples = c.samples;
    o.seed = c.seed;
    o.root = PointP1(c.root, 1.0);
    o.force = force;
    MixingReport rep;
    {
      py::gil_scoped_release release;
      rep = mixing_experiment(make_driver(c.driver), c.driver.f0, Observable::builtin(c.phi),
                              Observable::builtin(c.psi), o);
    }
    py::list rows;
    for (const auto& r : rep.rows)
      rows.append(py::dict(py::arg("n") = r.n, py::arg("correlation") = r.correlation,
                           py::arg("std_error") = r.std_error, py::arg("err_low") = r.err_low,
                           py::arg("err_high") = r.err_high, py::arg("g_n_sup") = r.g_n_sup,
                           py::arg("bound_shape") = r.bound_shape));
    return py::dict(py::arg("rows") = rows, py::arg("fitted_rate") = rep.fitted_rate,
                    py::arg("significant_depths") = rep.significant_depths,
                    py::arg("fitted_constant") = rep.fitted_constant, py::arg("dominated") = rep.dominated,
                    py::arg("hypothesis_violated") = rep.hypothesis_violated);
  }, py::arg("config"), py::arg("force") = false);

  m.def("run_experiment", [](const std::string& subcommand, const std::string& config, std::optional<std::string> out,
                             std::optional<std::uint64_t> seed, bool strict, bool force) {
    RunFlags flags;
    flags.out = out;
    flags.seed = seed;
    flags.strict = strict;
    flags.force = force;
    RunResult r;
    {
      py::gil_scoped_release release;
      r = run_experiment(subcommand, config_from(config), flags);
    }
    return py::dict(py::arg("exit_code") = r.exit_code, py::arg("hypothesis_violated") = r.hypothesis_violated,
                    py::arg("artifacts") = r.artifacts, py::arg("output_dir") = r.output_dir);
  }, py::arg("subcommand"), py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none(),
     py::arg("strict") = false, py::arg("force") = false);
  m.def("subcommands", &subcommands);
  m.attr("__version__") = kToolVersion;
}
