#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fpplab/coupling.hpp"
#include "fpplab/estimators.hpp"
#include "fpplab/experiment.hpp"
#include "fpplab/fpp.hpp"
#include "fpplab/lattice.hpp"

namespace py = pybind11;
using namespace fpplab;

namespace {

// JSON crosses the boundary as text; the Python side decodes it.
std::string dumps(const nlohmann::json& j) { return j.dump(); }

ExperimentConfig config_from_text(const std::string& text) {
  try {
    return config_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "fpplab core bindings";
  m.attr("__version__") = FPPLAB_VERSION;

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_MemoryError);

  py::class_<WeightLaw>(m, "WeightLaw")
      .def_static("parse", &parse_law_spec, py::arg("spec"))
      .def("cdf", &WeightLaw::cdf)
      .def("sf", &WeightLaw::sf)
      .def("pdf", &WeightLaw::pdf)
      .def("quantile", &WeightLaw::quantile)
      .def("quantile_sf", &WeightLaw::quantile_sf)
      .def("mean", &WeightLaw::mean)
      .def("variance", &WeightLaw::variance)
      .def_property_readonly("positive_support", &WeightLaw::positive_support)
      .def("describe", &WeightLaw::describe)
      .def("to_json", [](const WeightLaw& l) { return dumps(law_to_json(l)); })
      .def("__repr__", &WeightLaw::describe);

  py::class_<QuantileCoupling>(m, "QuantileCoupling")
      .def(py::init<WeightLaw>(), py::arg("law"))
      .def("h", &QuantileCoupling::h)
      .def("h_inverse", &QuantileCoupling::h_inverse)
      .def("g", &QuantileCoupling::g, py::arg("s"), py::arg("tau"))
      .def_property_readonly("gaussian_mode", &QuantileCoupling::gaussian_mode)
      .def_property_readonly("saturation_count", &QuantileCoupling::saturation_count)
      .def("good_set_member", [](const QuantileCoupling& c, double s, double delta) {
        return b_delta_member(c, s, delta);
      })
      .def("good_set_mass", [](const QuantileCoupling& c, double delta) { return good_set_mass(c, delta); })
      .def("estimate_delta0", [](const QuantileCoupling& c, double target) {
        const auto r = estimate_delta0(c, target);
        return py::make_tuple(r.delta0, r.achieved_mass);
      }, py::arg("target_mass") = 0.999);

  m.def("annulus_size", &annulus_size, py::arg("k"));
  m.def("scales", [](int n) {
    const auto s = scales(n);
    return py::make_tuple(s.k0, s.k1);
  }, py::arg("n"));
  m.def("tau_norm2", [](int n, double r) { return tau_schedule(n, r).norm2(); }, py::arg("n"), py::arg("r"));
  m.def("count_paths_pk", &count_paths_pk, py::arg("k"));

  m.def("passage_time", [](const std::string& law, int n, int radius, std::uint64_t seed, std::vector<double> rs) {
    const WeightLaw w = parse_law_spec(law);
    if (!w.positive_support()) throw ValidationError("passage times need a law with support in (0, inf)");
    const Environment env = Environment::lazy(w, GridBox(radius), seed);
    py::gil_scoped_release release;
    const auto res = passage_time_profile(env, QuantileCoupling(w), n, rs, {0, 0}, {n, 0}, radius);
    std::vector<std::pair<double, bool>> out;
    for (const auto& r : res) out.emplace_back(r.time, r.touched_boundary);
    return out;
  }, py::arg("law"), py::arg("n"), py::arg("radius"), py::arg("seed"), py::arg("r_values") = std::vector<double>{0.0},
     "T_r(0, (n, 0)) in [-radius, radius]^2 for each r; returns (time, touched_boundary) pairs.");

  m.def("concentration_function", [](std::vector<double> v, double w) {
    const auto c = concentration_function(v, w);
    return py::dict(py::arg("q_hat") = c.q_hat, py::arg("a_star") = c.a_star, py::arg("count") = c.count,
                    py::arg("stderr") = c.std_error);
  }, py::arg("values"), py::arg("width") = 1.0);
  m.def("variance_estimate", [](std::vector<double> v) {
    const auto e = variance_estimate(v);
    return py::dict(py::arg("mean") = e.mean, py::arg("variance") = e.variance, py::arg("stderr") = e.std_error);
  }, py::arg("values"));
  m.def("binomial_log_tail", &binomial_log_tail, py::arg("m"), py::arg("p"), py::arg("threshold"));

  m.def("default_config", [] { return dumps(config_to_json(ExperimentConfig{})); });
  m.def("config_hash", [](const std::string& cfg) { return config_hash(config_from_text(cfg)); });
  m.def("run_experiment", [](const std::string& cfg, const std::string& out_dir) {
    const ExperimentConfig c = config_from_text(cfg);
    ResultRecord rec;
    {
      py::gil_scoped_release release;
      rec = run_experiment(c);
    }
    if (!out_dir.empty()) emit_outputs(rec, out_dir);
    return py::make_tuple(results_csv(rec), dumps(results_json(rec)));
  }, py::arg("config"), py::arg("out_dir") = "", "Returns (csv_text, summary_json_text).");
  m.def("coupling_checks", [](const std::string& law, std::uint64_t seed) {
    const WeightLaw w = parse_law_spec(law);
    return dumps(checks_to_json(w.describe(), coupling_checks(w, seed)));
  }, py::arg("law"), py::arg("seed") = 1);
  m.def("mw_checks", [](const std::string& law, std::size_t trials, std::uint64_t seed) {
    const WeightLaw w = parse_law_spec(law);
    auto checks = mw_checks(w, trials, seed);
    checks.push_back(gaussian_closed_form_check());
    return dumps(checks_to_json(w.describe(), checks));
  }, py::arg("law"), py::arg("trials") = 100000, py::arg("seed") = 1);
}
