#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ecwm/analysis.hpp"
#include "ecwm/calibration.hpp"
#include "ecwm/errors.hpp"
#include "ecwm/estimation.hpp"
#include "ecwm/model.hpp"
#include "ecwm/simulator.hpp"
#include "ecwm/survey_io.hpp"
#include "ecwm/timeweights.hpp"

namespace py = pybind11;

namespace {

ecwm::ModelKind parse_kind(const std::string& name) {
  if (name == "cwm") return ecwm::ModelKind::CWM;
  if (name == "ecwm") return ecwm::ModelKind::ECWM;
  if (name == "ecwm_ra") return ecwm::ModelKind::ECWM_RA;
  if (name == "one_sayers") return ecwm::ModelKind::OneSayers;
  if (name == "one_sayers_ra") return ecwm::ModelKind::OneSayersRA;
  throw ecwm::config_error("unknown model '" + name + "'");
}

ecwm::ModelSpec make_spec(const std::string& model, std::optional<double> gamma) {
  const ecwm::ModelKind kind = parse_kind(model);
  ecwm::ModelSpec spec{kind, ecwm::has_gamma(kind) ? std::optional<double>(gamma.value_or(0.0)) : std::nullopt};
  spec.validate();
  return spec;
}

py::dict fit_dict(const ecwm::FitResult& fit) {
  py::dict d;
  d["model"] = std::string(ecwm::to_string(fit.spec.kind));
  d["pi"] = fit.pi_hat;
  d["pi_raw"] = fit.pi_raw;
  d["theta"] = fit.theta_hat ? py::cast(*fit.theta_hat) : py::none();
  d["gamma"] = fit.gamma_fixed;
  d["loglik"] = fit.loglik;
  d["g2"] = fit.gof.g2;
  d["df"] = fit.gof.df;
  d["p_value"] = fit.gof.p_value;
  d["boundary"] = fit.boundary;
  return d;
}

ecwm::KeyValueConfig config_from(const py::dict& values) {
  std::ostringstream text;
  for (const auto& [k, v] : values) text << py::str(k).cast<std::string>() << " = " << py::str(v).cast<std::string>() << '\n';
  std::istringstream in(text.str());
  return ecwm::KeyValueConfig::parse(in);
}

}  // namespace

PYBIND11_MODULE(_ecwm, m) {
  m.doc() = "Crosswise-model prevalence estimation with one-saying and random-answering corrections";
  m.attr("__version__") = ecwm::kToolVersion;

  // Held for the life of the interpreter.
  static PyObject* error_type = PyErr_NewException("ecwm._ecwm.EcwmError", PyExc_ValueError, nullptr);
  m.attr("EcwmError") = py::handle(error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ecwm::Error& e) {
      static const char* kinds[] = {"domain", "design", "data", "config", "numerical", "internal"};
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("kind") = kinds[static_cast<int>(e.kind())];
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  m.def(
      "response_probs",
      [](const std::string& model, double pi, double theta, double gamma, double p) {
        const auto spec = make_spec(model, gamma);
        return ecwm::response_probs(spec, {pi, theta, gamma}, ecwm::DesignParams(p)).probs;
      },
      py::arg("model"), py::arg("pi"), py::arg("theta") = 0.0, py::arg("gamma") = 0.0, py::arg("p") = 0.2,
      "Cell probabilities in the order 1|1, 2|1, 1|2, 2|2 (answer 1 = DIFFERENT).");

  m.def(
      "fit",
      [](const std::string& model, std::array<double, 4> counts, double p, std::optional<double> gamma) {
        return fit_dict(ecwm::fit_mle(make_spec(model, gamma), ecwm::ResponseCounts(counts), ecwm::DesignParams(p),
                                      ecwm::Solver::Exact));
      },
      py::arg("model"), py::arg("counts"), py::arg("p"), py::arg("gamma") = py::none());

  m.def(
      "expected_bias",
      [](double pi, double theta, double gamma) {
        const auto b = ecwm::expected_bias(pi, theta, gamma);
        return std::make_pair(b.expected_pi_hat, b.bias);
      },
      py::arg("pi"), py::arg("theta"), py::arg("gamma"));

  m.def(
      "solve_beta",
      [](double t0, double t50, double w0, double w50) {
        const auto w = ecwm::solve_beta(t0, t50, w0, w50);
        return std::make_pair(w.beta0, w.beta);
      },
      py::arg("t0"), py::arg("t50"), py::arg("w0") = 0.1, py::arg("w50") = 0.9);

  m.def(
      "gamma_delta_pi",
      [](std::array<double, 4> all, std::array<double, 4> correct, double p, const std::string& base) {
        const auto g = ecwm::gamma_delta_pi(ecwm::ResponseCounts(all), ecwm::ResponseCounts(correct),
                                            ecwm::DesignParams(p), parse_kind(base));
        py::dict d;
        d["gamma"] = g.gamma_hat;
        d["pi_in"] = g.pi_in;
        d["pi_out"] = g.pi_out;
        d["delta_pi"] = g.delta_pi;
        d["pi_ra_target"] = g.pi_ra_target;
        d["theta"] = g.theta_hat;
        d["negative_delta"] = g.negative_delta;
        d["boundary"] = g.boundary;
        return d;
      },
      py::arg("all_counts"), py::arg("control_correct_counts"), py::arg("p"), py::arg("base") = "one_sayers");

  m.def(
      "simulate_csv",
      [](const py::dict& settings, std::uint64_t seed) {
        std::uint64_t cfg_seed = seed;
        const auto spec = ecwm::population_from(config_from(settings), cfg_seed);
        std::ostringstream out;
        ecwm::write_survey_csv(out, ecwm::to_respondents(ecwm::simulate(spec, seed)));
        return out.str();
      },
      py::arg("settings"), py::arg("seed") = 1, "Simulated survey as CSV text.");

  m.def(
      "fit_survey_json",
      [](const std::string& csv, const py::dict& settings) {
        std::istringstream in(csv);
        const auto data = ecwm::read_survey_csv(in);
        const auto cfg = ecwm::RunConfig::from(config_from(settings));
        return ecwm::to_json(ecwm::run_fit(data.respondents, cfg)).dump();
      },
      py::arg("csv"), py::arg("settings"), "Model-ladder report for CSV text, as a JSON string.");
}
