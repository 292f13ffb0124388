#include <cmath>
#include <optional>
#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"
#include "vfshm/cli.hpp"
#include "vfshm/damage.hpp"
#include "vfshm/errors.hpp"
#include "vfshm/io.hpp"
#include "vfshm/lscf.hpp"
#include "vfshm/metrics.hpp"
#include "vfshm/simulators.hpp"
#include "vfshm/stabilization.hpp"
#include "vfshm/vector_fitting.hpp"

namespace py = pybind11;
using namespace vfshm;
using CVec = std::vector<Complex>;
using RVec = std::vector<double>;

namespace {

template <class T>
py::array_t<T> array(const std::vector<T>& v) {
  return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::object from_json(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

FrequencyResponse response(const RVec& freq_hz, const CVec& values) {
  return FrequencyResponse(FrequencyGrid(freq_hz), values);
}

SignalPart parse_part(const std::string& s) {
  if (s == "real") return SignalPart::Real;
  if (s == "magnitude") return SignalPart::Magnitude;
  if (s == "complex") return SignalPart::Complex;
  throw ConfigError("part must be real, magnitude or complex");
}

MetricOptions metric_options(const std::string& part, const std::string& normalization) {
  MetricOptions o;
  o.part = parse_part(part);
  if (normalization == "per-point") o.normalization = RmsdNormalization::PerPoint;
  else if (normalization == "sum-ratio") o.normalization = RmsdNormalization::SumRatio;
  else throw ConfigError("normalization must be per-point or sum-ratio");
  return o;
}

MdofSystem chain(const std::string& system, bool damaged, const std::vector<std::tuple<int, double, double>>& damage) {
  MdofSystem sys;
  if (system == "mdof") sys = reference_five_dof();
  else if (system == "emi-host") sys = emi_host_chain();
  else throw ConfigError("system must be mdof or emi-host");
  std::vector<DamageEdit> edits;
  if (damaged) edits.push_back({1, 0.75, 1.25});
  for (const auto& [e, kf, cf] : damage) {
    if (e < 0) throw ConfigError("damage element index must be non-negative");
    edits.push_back({static_cast<std::size_t>(e), kf, cf});
  }
  return edits.empty() ? sys : apply_damage(sys, edits);
}

ModalParameters modes_from(const std::vector<std::pair<double, double>>& modes) {
  ModalParameters m;
  for (const auto& [f, z] : modes) {
    const double w = kTwoPi * f;
    m.modes.push_back({f, z, Complex(-z * w, w * std::sqrt(std::max(0.0, 1.0 - z * z)))});
  }
  return m;
}

}  // namespace

PYBIND11_MODULE(_vfshm, m) {
  m.doc() = "Vector fitting, LSCF, stabilization and impedance damage metrics";

  auto config = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  auto numeric = py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<IllConditionedError>(m, "IllConditionedError", numeric.ptr());
  (void)config;

  m.def(
      "vector_fit",
      [](const RVec& freq_hz, const CVec& h, int order, int max_iterations, double convergence_tol,
         bool enforce_stability, bool include_d, bool include_h, RVec weights, std::uint64_t seed) {
        VfOptions o;
        o.order = order;
        o.max_iterations = max_iterations;
        o.convergence_tol = convergence_tol;
        o.enforce_stability = enforce_stability;
        o.include_d = include_d;
        o.include_h = include_h;
        o.weights = std::move(weights);
        o.seed = seed;
        VfResult r;
        {
          py::gil_scoped_release release;
          r = vector_fit(response(freq_hz, h), o);
        }
        py::dict out;
        out["poles"] = array(r.model.poles);
        out["residues"] = array(r.model.residues);
        out["d"] = r.model.d;
        out["h"] = r.model.h;
        out["diagnostics"] = from_json(io::to_json(r.diagnostics));
        return out;
      },
      py::arg("freq_hz"), py::arg("h"), py::arg("order") = 10, py::arg("max_iterations") = 10,
      py::arg("convergence_tol") = 1e-10, py::arg("enforce_stability") = true, py::arg("include_d") = true,
      py::arg("include_h") = true, py::arg("weights") = RVec{}, py::arg("seed") = 42,
      "Fit a pole-residue model to samples h(j 2 pi f). Poles and residues are in rad/s.");

  m.def(
      "evaluate_model",
      [](const CVec& poles, const CVec& residues, double d, double h, const RVec& freq_hz) {
        RationalModel model{poles, residues, d, h};
        const auto r = evaluate_model(model, FrequencyGrid(freq_hz));
        return array(CVec(r.values().begin(), r.values().end()));
      },
      py::arg("poles"), py::arg("residues"), py::arg("d") = 0.0, py::arg("h") = 0.0, py::arg("freq_hz"));

  m.def(
      "lscf_fit",
      [](const RVec& freq_hz, const CVec& h, int order) {
        const auto r = lscf_fit(response(freq_hz, h), order);
        py::dict out;
        out["numerator"] = array(r.model.numerator);
        out["denominator"] = array(r.model.denominator);
        out["frequency_scale"] = r.model.frequency_scale;
        out["condition_estimate"] = r.condition_estimate;
        out["poles"] = array(polynomial_poles(r.model));
        return out;
      },
      py::arg("freq_hz"), py::arg("h"), py::arg("order"));

  m.def(
      "modal_parameters",
      [](const CVec& poles, const std::string& units) {
        if (units != "rad/s" && units != "hz") throw ConfigError("units must be rad/s or hz");
        return from_json(io::to_json(poles_to_modal(poles, units == "hz" ? PoleUnits::Hz : PoleUnits::RadPerSecond)));
      },
      py::arg("poles"), py::arg("units") = "rad/s");

  m.def(
      "order_sweep",
      [](const RVec& freq_hz, const CVec& h, int n_min, int n_max, int n_step, double freq_tol, double damp_tol,
         int min_persistence, bool in_band_only, double min_significance, int max_iterations) {
        SweepConfig cfg;
        cfg.n_min = n_min;
        cfg.n_max = n_max;
        cfg.n_step = n_step;
        cfg.freq_tol = freq_tol;
        cfg.damp_tol = damp_tol;
        cfg.min_persistence = min_persistence;
        cfg.in_band_only = in_band_only;
        cfg.min_significance = min_significance;
        VfOptions o;
        o.max_iterations = max_iterations;
        StabilizationResult r;
        {
          py::gil_scoped_release release;
          r = order_sweep(response(freq_hz, h), cfg, o);
        }
        py::list clusters;
        for (const auto& c : r.clusters) {
          py::dict d;
          d["pole"] = c.representative_pole;
          d["frequency_hz"] = std::abs(c.representative_pole) / kTwoPi;
          d["stable"] = c.stable;
          std::vector<int> orders;
          for (const auto& mb : c.members) orders.push_back(mb.order);
          d["orders"] = orders;
          clusters.append(d);
        }
        py::list failures;
        for (const auto& f : r.failures) failures.append(py::make_tuple(f.order, f.message));
        py::dict out;
        out["clusters"] = clusters;
        out["stable_modes"] = from_json(io::to_json(stable_modal_set(r)))["modes"];
        out["failures"] = failures;
        out["warnings"] = r.warnings;
        return out;
      },
      py::arg("freq_hz"), py::arg("h"), py::arg("n_min") = 2, py::arg("n_max") = 20, py::arg("n_step") = 2,
      py::arg("freq_tol") = 1e-3, py::arg("damp_tol") = 0.05, py::arg("min_persistence") = 3,
      py::arg("in_band_only") = true, py::arg("min_significance") = 1.0, py::arg("max_iterations") = 10);

  m.def(
      "rmsd",
      [](const RVec& freq_hz, const CVec& investigative, const CVec& baseline, const std::string& part,
         const std::string& normalization) {
        return rmsd(response(freq_hz, investigative), response(freq_hz, baseline),
                    metric_options(part, normalization));
      },
      py::arg("freq_hz"), py::arg("investigative"), py::arg("baseline"), py::arg("part") = "real",
      py::arg("normalization") = "per-point");

  m.def(
      "xcorr",
      [](const RVec& freq_hz, const CVec& investigative, const CVec& baseline, const std::string& part) {
        return xcorr_metric(response(freq_hz, investigative), response(freq_hz, baseline),
                            metric_options(part, "per-point"));
      },
      py::arg("freq_hz"), py::arg("investigative"), py::arg("baseline"), py::arg("part") = "real");

  m.def(
      "windowed_metric",
      [](const RVec& freq_hz, const CVec& investigative, const CVec& baseline, double window_hz,
         const std::string& kind, const std::string& part, const std::string& normalization) {
        MetricKind k;
        if (kind == "rmsd") k = MetricKind::Rmsd;
        else if (kind == "xcorr") k = MetricKind::Xcorr;
        else throw ConfigError("kind must be rmsd or xcorr");
        const auto s = windowed_metric(response(freq_hz, investigative), response(freq_hz, baseline), window_hz, k,
                                       metric_options(part, normalization));
        py::list out;
        for (const auto& e : s.entries) {
          py::dict d;
          d["center_hz"] = e.center_hz;
          d["f_lo"] = e.f_lo;
          d["f_hi"] = e.f_hi;
          d["partial"] = e.partial;
          d["value"] = e.value ? py::object(py::float_(*e.value)) : py::object(py::none());
          d["error"] = e.error;
          out.append(d);
        }
        return out;
      },
      py::arg("freq_hz"), py::arg("investigative"), py::arg("baseline"), py::arg("window_hz"),
      py::arg("kind") = "rmsd", py::arg("part") = "real", py::arg("normalization") = "per-point");

  m.def(
      "mdof_frf",
      [](const RVec& freq_hz, const std::string& system, bool damaged,
         const std::vector<std::tuple<int, double, double>>& damage) {
        const auto r = mdof_frf(chain(system, damaged, damage), FrequencyGrid(freq_hz));
        return array(CVec(r.values().begin(), r.values().end()));
      },
      py::arg("freq_hz"), py::arg("system") = "mdof", py::arg("damaged") = false,
      py::arg("damage") = std::vector<std::tuple<int, double, double>>{},
      "Receptance at the drive point. damage: (0-based element, stiffness factor, damping factor).");

  m.def(
      "mdof_poles",
      [](const std::string& system, bool damaged, const std::vector<std::tuple<int, double, double>>& damage) {
        return array(mdof_poles(chain(system, damaged, damage)));
      },
      py::arg("system") = "mdof", py::arg("damaged") = false,
      py::arg("damage") = std::vector<std::tuple<int, double, double>>{});

  m.def(
      "emi_impedance",
      [](const RVec& freq_hz, bool damaged, std::optional<double> d13) {
        auto p = pzt5h_wafer();
        if (d13) p.d13 = *d13;
        const auto r = emi_coupled_impedance(p, mdof_mechanical_impedance(chain("emi-host", damaged, {})),
                                             FrequencyGrid(freq_hz));
        py::dict out;
        out["impedance"] = array(CVec(r.impedance.values().begin(), r.impedance.values().end()));
        out["flagged"] = r.flagged;
        return out;
      },
      py::arg("freq_hz"), py::arg("damaged") = false, py::arg("d13") = py::none(),
      "Electrical impedance of the PZT-5H wafer on the stand-in host chain.");

  m.def(
      "assess",
      [](const std::vector<std::pair<double, double>>& baseline,
         const std::vector<std::pair<double, double>>& investigative, double freq_pct, double damp_pct,
         double match_tol_pct) {
        DamageThresholds t{freq_pct, damp_pct};
        return from_json(io::to_json(assess(modes_from(baseline), modes_from(investigative), t, std::nullopt,
                                            match_tol_pct)));
      },
      py::arg("baseline"), py::arg("investigative"), py::arg("freq_pct") = 0.1, py::arg("damp_pct") = 10.0,
      py::arg("match_tol_pct") = kDefaultMatchTolPct,
      "Compare two mode lists of (frequency_hz, damping_ratio) pairs.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli_dispatch(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line interface in-process; returns (exit_code, stdout, stderr).");
}
