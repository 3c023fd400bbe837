// Python bindings: thin wrappers over the C++ library. Matrices come back as
// numpy arrays, sweeps and summaries as plain Python containers.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/stl.h>

#include <sstream>

#include "geozero/acceptance.hpp"
#include "geozero/config.hpp"
#include "geozero/errors.hpp"
#include "geozero/experiments.hpp"
#include "geozero/filter_analysis.hpp"
#include "geozero/gates.hpp"

namespace py = pybind11;
using namespace geozero;

namespace {

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

Operator compile_sequence(const SequenceSpec& seq, const DerivedCouplings& dc) { return compile_analytic(seq, dc).matrix; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Zero-field three-level spin control: gates, sequences, filter functions and experiments";
  m.attr("__version__") = GEOZERO_VERSION;

  py::register_exception<Error>(m, "GeozeroError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init<>())
      .def_readwrite("D", &SystemParams::D)
      .def_readwrite("d_par", &SystemParams::d_par)
      .def_readwrite("d_perp", &SystemParams::d_perp)
      .def_readwrite("Pi", &SystemParams::Pi)
      .def_readwrite("Delta", &SystemParams::Delta)
      .def_readwrite("delta", &SystemParams::delta)
      .def_readwrite("gamma_e", &SystemParams::gamma_e)
      .def("validate", &SystemParams::validate)
      .def("resonance", &SystemParams::resonance);

  py::class_<DerivedCouplings>(m, "DerivedCouplings")
      .def_readonly("delta_prime", &DerivedCouplings::delta_prime)
      .def_readonly("psi", &DerivedCouplings::psi)
      .def_readonly("omega_res", &DerivedCouplings::omega_res)
      .def_readonly("omega_bar", &DerivedCouplings::omega_bar)
      .def_readonly("T_prime", &DerivedCouplings::T_prime)
      .def_readonly("Omega", &DerivedCouplings::Omega);

  m.def("matched_couplings", &matched_couplings, py::arg("params") = SystemParams{});
  m.def("derived_couplings", &derived_couplings, py::arg("params"), py::arg("Omega"));
  m.def("rwa_hamiltonian", py::overload_cast<const DerivedCouplings&, double, double>(&rwa_hamiltonian),
        py::arg("couplings"), py::arg("Omega"), py::arg("phi"));

  m.def("u_phi", [](const DerivedCouplings& dc, double phi) { return u_phi(dc, phi).matrix; }, py::arg("couplings"),
        py::arg("phi"));
  m.def("g_theta", [](const DerivedCouplings& dc, double phi, double theta) { return g_theta(dc, phi, theta).matrix; },
        py::arg("couplings"), py::arg("phi"), py::arg("theta"));

  py::enum_<SegmentKind>(m, "SegmentKind").value("DRIVE", SegmentKind::kDrive).value("FREE", SegmentKind::kFree);

  py::class_<PulseSegment>(m, "PulseSegment")
      .def_readonly("kind", &PulseSegment::kind)
      .def_readonly("duration", &PulseSegment::duration)
      .def_readonly("Omega", &PulseSegment::Omega)
      .def_readonly("phi", &PulseSegment::phi);

  py::class_<SequenceSpec>(m, "SequenceSpec")
      .def_readonly("name", &SequenceSpec::name)
      .def_readonly("segments", &SequenceSpec::segments)
      .def("total_duration", &SequenceSpec::total_duration)
      .def("to_text", [](const SequenceSpec& s) { return to_sequence_text(s); })
      .def_static("from_text", [](const std::string& text) {
        std::istringstream in(text);
        return parse_sequence_text(in);
      });

  m.def("build_ramsey", &build_ramsey, py::arg("couplings"), py::arg("t_free"));
  m.def("build_echo", &build_echo, py::arg("couplings"), py::arg("t_total"));
  m.def("build_zdd", &build_zdd, py::arg("couplings"), py::arg("N"), py::arg("t"));
  m.def("build_plain_train", &build_plain_train, py::arg("couplings"), py::arg("count"), py::arg("t"),
        py::arg("phi") = 0.0);
  m.def("build_phase_pattern_train", &build_phase_pattern_train, py::arg("couplings"), py::arg("phases"), py::arg("t"),
        py::arg("name") = "phase-pattern");
  m.def("compile_analytic", &compile_sequence, py::arg("sequence"), py::arg("couplings"),
        "Propagator of the whole sequence in the rotating frame, basis (|+1>, |0>, |-1>).");

  py::enum_<PulseConvention>(m, "PulseConvention")
      .value("INSTANTANEOUS", PulseConvention::kInstantaneous)
      .value("ZERO_DURING_PULSE", PulseConvention::kZeroDuringPulse);

  py::class_<ModulationFunction>(m, "ModulationFunction")
      .def_readonly("breakpoints", &ModulationFunction::breakpoints)
      .def_readonly("values", &ModulationFunction::values)
      .def("duration", &ModulationFunction::duration)
      .def("value", &ModulationFunction::value, py::arg("t"));

  m.def("modulation_function", &modulation_function, py::arg("sequence"),
        py::arg("convention") = PulseConvention::kInstantaneous);
  m.def("filter_function", &filter_function, py::arg("modulation"), py::arg("omega"));
  m.def(
      "filter_functions",
      [](const ModulationFunction& y, const std::vector<double>& omegas) {
        std::vector<double> out;
        out.reserve(omegas.size());
        for (double w : omegas) out.push_back(filter_function(y, w));
        return out;
      },
      py::arg("modulation"), py::arg("omegas"));

  m.def("command_names", &command_names);
  m.def(
      "parse_config",
      [](const std::string& text) { return serialize_config(parse_config_text(text)); }, py::arg("text"),
      "Validates an INI configuration and returns its normalized text.");
  m.def(
      "run_command",
      [](const std::string& name, const std::string& config_text) {
        CommandOutput out;
        {
          const RunConfig c = parse_config_text(config_text);
          py::gil_scoped_release release;
          out = run_command(name, c);
        }
        py::dict files;
        for (const auto& a : out.artifacts) files[py::str(a.filename)] = a.content;
        py::dict result;
        result["name"] = out.name;
        result["files"] = files;
        result["parameters"] = json_to_py(out.parameters);
        result["summary"] = json_to_py(out.summary);
        return result;
      },
      py::arg("name"), py::arg("config") = "",
      "Runs an experiment in memory; returns {'name', 'files', 'parameters', 'summary'}.");
  m.def(
      "run_acceptance",
      [](const std::vector<int>& only) {
        AcceptanceOptions o;
        o.only = only;
        std::vector<CriterionResult> results;
        {
          py::gil_scoped_release release;
          results = run_acceptance(o, nullptr);
        }
        py::list out;
        for (const auto& r : results) {
          py::dict d;
          d["id"] = r.id;
          d["title"] = r.title;
          d["passed"] = r.passed;
          d["detail"] = r.detail;
          d["seconds"] = r.seconds;
          out.append(d);
        }
        return out;
      },
      py::arg("only") = std::vector<int>{});
  m.def("version", &version_string);
}
