#include "vfshm/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "vfshm/core_types.hpp"
#include "vfshm/damage.hpp"
#include "vfshm/errors.hpp"
#include "vfshm/io.hpp"
#include "vfshm/lscf.hpp"
#include "vfshm/metrics.hpp"
#include "vfshm/simulators.hpp"
#include "vfshm/stabilization.hpp"
#include "vfshm/vector_fitting.hpp"

namespace vfshm {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Band = std::pair<double, double>;

constexpr double kDefaultWindowHz = 10000.0;

struct RunConfig {
  VfOptions vf;
  SweepConfig sweep;
  std::optional<double> window_hz;
  MetricOptions metric;
  DamageThresholds thresholds;
  double match_tol_pct = kDefaultMatchTolPct;
  std::optional<Band> band;
  fs::path out_dir = ".";
};

// Unknown keys are rejected so that a typo does not silently fall back to a default.
void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown config key '" + where + "." + key + "'");
  }
}

template <class T>
void read_into(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

SignalPart parse_part(const std::string& s) {
  if (s == "real") return SignalPart::Real;
  if (s == "magnitude") return SignalPart::Magnitude;
  if (s == "complex") return SignalPart::Complex;
  throw ConfigError("part must be real, magnitude or complex (got '" + s + "')");
}

RmsdNormalization parse_normalization(const std::string& s) {
  if (s == "per-point") return RmsdNormalization::PerPoint;
  if (s == "sum-ratio") return RmsdNormalization::SumRatio;
  throw ConfigError("normalization must be per-point or sum-ratio (got '" + s + "')");
}

RunConfig load_config(const std::optional<std::string>& path) {
  RunConfig cfg;
  if (!path) return cfg;
  json j;
  try {
    j = json::parse(io::read_file(*path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + *path + ": " + e.what());
  }
  try {
    check_keys(j, {"seed", "band", "out_dir", "vf", "sweep", "metrics", "thresholds", "match_tol_pct"}, "config");
    read_into(j, "seed", cfg.vf.seed);
    if (j.contains("band")) {
      const auto b = j.at("band").get<std::vector<double>>();
      if (b.size() != 2) throw ConfigError("config.band must be [f_lo, f_hi]");
      cfg.band = Band{b[0], b[1]};
    }
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("vf")) {
      const auto& v = j.at("vf");
      check_keys(v, {"order", "max_iterations", "convergence_tol", "enforce_stability", "include_d", "include_h"},
                 "vf");
      read_into(v, "order", cfg.vf.order);
      read_into(v, "max_iterations", cfg.vf.max_iterations);
      read_into(v, "convergence_tol", cfg.vf.convergence_tol);
      read_into(v, "enforce_stability", cfg.vf.enforce_stability);
      read_into(v, "include_d", cfg.vf.include_d);
      read_into(v, "include_h", cfg.vf.include_h);
    }
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      check_keys(s, {"n_min", "n_max", "n_step", "freq_tol", "damp_tol", "min_persistence", "in_band_only",
                     "min_significance"},
                 "sweep");
      read_into(s, "n_min", cfg.sweep.n_min);
      read_into(s, "n_max", cfg.sweep.n_max);
      read_into(s, "n_step", cfg.sweep.n_step);
      read_into(s, "freq_tol", cfg.sweep.freq_tol);
      read_into(s, "damp_tol", cfg.sweep.damp_tol);
      read_into(s, "min_persistence", cfg.sweep.min_persistence);
      read_into(s, "in_band_only", cfg.sweep.in_band_only);
      read_into(s, "min_significance", cfg.sweep.min_significance);
    }
    if (j.contains("metrics")) {
      const auto& m = j.at("metrics");
      check_keys(m, {"window_hz", "part", "normalization"}, "metrics");
      if (m.contains("window_hz")) cfg.window_hz = m.at("window_hz").get<double>();
      if (m.contains("part")) cfg.metric.part = parse_part(m.at("part").get<std::string>());
      if (m.contains("normalization"))
        cfg.metric.normalization = parse_normalization(m.at("normalization").get<std::string>());
    }
    if (j.contains("thresholds")) {
      const auto& t = j.at("thresholds");
      check_keys(t, {"freq_pct", "damp_pct"}, "thresholds");
      read_into(t, "freq_pct", cfg.thresholds.freq_pct);
      read_into(t, "damp_pct", cfg.thresholds.damp_pct);
    }
    read_into(j, "match_tol_pct", cfg.match_tol_pct);
  } catch (const json::exception& e) {
    throw ConfigError("config " + *path + ": " + e.what());
  }
  return cfg;
}

std::vector<double> split_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ':')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ConfigError(what + ": cannot parse '" + text + "'");
    }
  }
  return out;
}

Band parse_band(const std::string& text) {
  const auto v = split_numbers(text, "--band");
  if (v.size() != 2 || !(v[0] > 0.0) || !(v[1] > v[0])) throw ConfigError("--band expects f_lo:f_hi with 0 < f_lo < f_hi");
  return {v[0], v[1]};
}

void apply_orders(const std::string& text, SweepConfig& sweep) {
  const auto v = split_numbers(text, "--orders");
  if (v.size() != 2 && v.size() != 3) throw ConfigError("--orders expects n_min:n_max[:step]");
  for (double x : v)
    if (x != std::floor(x)) throw ConfigError("--orders values must be integers");
  sweep.n_min = static_cast<int>(v[0]);
  sweep.n_max = static_cast<int>(v[1]);
  if (v.size() == 3) sweep.n_step = static_cast<int>(v[2]);
}

// Precedence, lowest first: config file, VFSHM_SEED, --seed.
void apply_seed(RunConfig& cfg, const std::optional<std::uint64_t>& flag) {
  if (const char* env = std::getenv("VFSHM_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      cfg.vf.seed = v;
    } catch (const std::exception&) {
      throw ConfigError(std::string("VFSHM_SEED is not an unsigned integer: '") + env + "'");
    }
  }
  if (flag) cfg.vf.seed = *flag;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string modes_csv(const ModalParameters& modal) {
  std::string out = "frequency_hz,damping_ratio\n";
  char buf[80];
  for (const auto& m : modal.modes) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", m.frequency_hz, m.damping_ratio);
    out += buf;
  }
  return out;
}

// Analytical poles for oracle checks, one row per pole (both members of a pair).
std::string poles_csv(const std::vector<Complex>& poles) {
  std::string out = "re_rad_s,im_rad_s,frequency_hz,damping_ratio\n";
  char buf[120];
  for (const auto& p : poles) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", p.real(), p.imag(), std::abs(p) / kTwoPi,
                  -p.real() / std::abs(p));
    out += buf;
  }
  return out;
}

// Modes of the stable poles; unstable ones are counted but not reported.
ModalParameters stable_modes(const std::vector<Complex>& poles, int* unstable_count) {
  std::vector<Complex> stable;
  for (const auto& p : poles)
    if (p.real() < 0.0) stable.push_back(p);
  if (unstable_count) *unstable_count = static_cast<int>(poles.size() - stable.size());
  return poles_to_modal(stable, PoleUnits::RadPerSecond);
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string system = "mdof";
  bool damaged = false;
  std::vector<std::string> damage;
  std::optional<std::string> band;
  std::optional<std::size_t> points;
  std::optional<double> snr_db;
  std::string out;
};

DamageEdit parse_damage(const std::string& text) {
  const auto v = split_numbers(text, "--damage");
  if (v.size() != 3 || v[0] < 1 || v[0] != std::floor(v[0]))
    throw ConfigError("--damage expects element:stiffness_factor:damping_factor with a 1-based element");
  return {static_cast<std::size_t>(v[0]) - 1, v[1], v[2]};
}

int run_simulate(const SimulateArgs& a, RunConfig& cfg, std::ostream& out) {
  const bool emi = a.system == "emi";
  if (!emi && a.system != "mdof") throw ConfigError("--system must be mdof or emi");
  const Band band = a.band ? parse_band(*a.band) : cfg.band.value_or(emi ? Band{30000.0, 100000.0} : Band{100.0, 450.0});
  const std::size_t points = a.points.value_or(emi ? 1401 : 3501);
  if (points < 2) throw ConfigError("--points must be at least 2");

  MdofSystem sys = emi ? emi_host_chain() : reference_five_dof();
  std::vector<DamageEdit> edits;
  if (a.damaged) edits.push_back({1, 0.75, 1.25});
  for (const auto& d : a.damage) edits.push_back(parse_damage(d));
  if (!edits.empty()) sys = apply_damage(sys, edits);

  const auto grid = FrequencyGrid::linspace(band.first, band.second, points);
  std::map<std::string, std::string> meta;
  meta["system"] = a.system;
  meta["generator"] = "vfshm simulate";
  std::string edit_text;
  for (const auto& e : edits) {
    std::ostringstream s;
    s << (edit_text.empty() ? "" : ";") << "k" << e.element + 1 << "x" << e.stiffness_factor << ",c"
      << e.element + 1 << "x" << e.damping_factor;
    edit_text += s.str();
  }
  meta["damage"] = edit_text.empty() ? "none" : edit_text;

  FrequencyResponse response = [&] {
    if (!emi) return mdof_frf(sys, grid);
    const auto result = emi_coupled_impedance(pzt5h_wafer(), mdof_mechanical_impedance(sys), grid);
    meta["flagged_points"] = std::to_string(result.flagged.size());
    return result.impedance;
  }();

  if (a.snr_db) {
    const double sigma = response.rms() / std::pow(10.0, *a.snr_db / 20.0) / std::sqrt(2.0);
    std::mt19937_64 rng(cfg.vf.seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    std::vector<Complex> noisy(response.values().begin(), response.values().end());
    for (auto& z : noisy) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      z += Complex(re, im);
    }
    response = FrequencyResponse(response.grid(), std::move(noisy));
    meta["noise_snr_db"] = std::to_string(*a.snr_db);
    meta["seed"] = std::to_string(cfg.vf.seed);
  }

  const fs::path out_path = a.out.empty() ? cfg.out_dir / (emi ? "emi.csv" : "frf.csv") : fs::path(a.out);
  io::save_measurement(out_path, response, meta);
  fs::path poles_path = out_path;
  poles_path.replace_extension(".poles.csv");
  io::write_file(poles_path, poles_csv(mdof_poles(sys)));
  out << "wrote " << out_path.string() << " (" << response.size() << " points) and " << poles_path.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string input;
  std::string method = "vf";
  std::optional<int> order;
  std::optional<int> max_iterations;
  bool no_stability = false;
};

int run_fit(const FitArgs& a, RunConfig& cfg, std::ostream& out) {
  const auto meas = io::load_measurement(a.input, cfg.band);
  const auto& h = meas.response;
  const int order = a.order.value_or(cfg.vf.order);
  const double rms_h = h.rms();
  json diag;
  FrequencyResponse fitted = h;

  if (a.method == "vf") {
    VfOptions opts = cfg.vf;
    opts.order = order;
    if (a.max_iterations) opts.max_iterations = *a.max_iterations;
    if (a.no_stability) opts.enforce_stability = false;
    const auto result = vector_fit(h, opts);
    fitted = evaluate_model(result.model, h.grid());
    io::write_file(cfg.out_dir / "model.json", dump(io::to_json(result.model)));
    diag = io::to_json(result.diagnostics);
    int unstable = 0;
    diag["modal"] = io::to_json(stable_modes(result.model.poles, &unstable));
    diag["unstable_poles"] = unstable;
  } else if (a.method == "lscf") {
    const auto result = lscf_fit(h, order);
    fitted = result.model.evaluate(h.grid());
    io::write_file(cfg.out_dir / "model.json", dump(io::to_json(result.model)));
    double sum = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) sum += std::norm(h[i] - fitted[i]);
    diag["final_rms_error"] = std::sqrt(sum / static_cast<double>(h.size()));
    diag["system_condition_estimate"] = result.condition_estimate;
    int unstable = 0;
    diag["modal"] = io::to_json(stable_modes(polynomial_poles(result.model), &unstable));
    diag["unstable_poles"] = unstable;
    diag["seed"] = cfg.vf.seed;
  } else {
    throw ConfigError("--method must be vf or lscf");
  }
  diag["method"] = a.method;
  diag["order"] = order;
  diag["rms_of_data"] = rms_h;
  diag["relative_rms_error"] = rms_h > 0.0 ? diag["final_rms_error"].get<double>() / rms_h : 0.0;
  io::write_file(cfg.out_dir / "diagnostics.json", dump(diag));
  io::save_measurement(cfg.out_dir / "fitted.csv", fitted, {{"source", a.input}, {"method", a.method}});
  out << a.method << " order " << order << ": final_rms_error " << diag["final_rms_error"].get<double>()
      << " (relative " << diag["relative_rms_error"].get<double>() << ")\n";
  for (const auto& m : diag["modal"]["modes"])
    out << "  mode " << m["frequency_hz"].get<double>() << " Hz, zeta " << m["damping_ratio"].get<double>() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- stabilize

struct SweepArgs {
  std::optional<std::string> orders;
  std::optional<double> freq_tol;
  std::optional<double> damp_tol;
  std::optional<int> min_persistence;
};

void apply_sweep_args(const SweepArgs& a, RunConfig& cfg) {
  if (a.orders) apply_orders(*a.orders, cfg.sweep);
  if (a.freq_tol) cfg.sweep.freq_tol = *a.freq_tol;
  if (a.damp_tol) cfg.sweep.damp_tol = *a.damp_tol;
  if (a.min_persistence) cfg.sweep.min_persistence = *a.min_persistence;
}

StabilizationResult sweep_and_log(const FrequencyResponse& h, const RunConfig& cfg, const std::string& label,
                                  std::ostream& err) {
  auto result = order_sweep(h, cfg.sweep, cfg.vf);
  for (const auto& w : result.warnings) err << label << ": warning: " << w << "\n";
  for (const auto& f : result.failures) err << label << ": order " << f.order << " failed: " << f.message << "\n";
  return result;
}

void write_sweep(const StabilizationResult& result, const FrequencyResponse& h, const fs::path& csv,
                 const fs::path& svg) {
  const auto rows = io::stabilization_rows(result);
  io::write_file(csv, io::format_stabilization_csv(rows));
  if (!svg.empty()) io::write_file(svg, io::stabilization_svg(rows, h.grid().front(), h.grid().back()));
}

int run_stabilize(const std::string& input, const SweepArgs& a, RunConfig& cfg, std::ostream& out,
                  std::ostream& err) {
  apply_sweep_args(a, cfg);
  const auto meas = io::load_measurement(input, cfg.band);
  const auto result = sweep_and_log(meas.response, cfg, input, err);
  write_sweep(result, meas.response, cfg.out_dir / "stabilization.csv", cfg.out_dir / "stabilization.svg");
  const auto modal = stable_modal_set(result);
  io::write_file(cfg.out_dir / "modes.csv", modes_csv(modal));
  out << modal.modes.size() << " stable modes\n";
  for (const auto& m : modal.modes) out << "  " << m.frequency_hz << " Hz, zeta " << m.damping_ratio << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- metrics

MetricValues standard_metrics(const FrequencyResponse& inv, const FrequencyResponse& base, const MetricOptions& o) {
  return {rmsd(inv, base, o), xcorr_metric(inv, base, o)};
}

double resolve_window(const RunConfig& cfg, const FrequencyResponse& base, std::ostream& err) {
  if (cfg.window_hz) return *cfg.window_hz;
  const double span = base.grid().back() - base.grid().front();
  if (span >= kDefaultWindowHz) return kDefaultWindowHz;
  err << "note: band narrower than " << kDefaultWindowHz << " Hz; using window " << span / 10.0 << " Hz\n";
  return span / 10.0;
}

int run_metrics(const std::string& base_path, const std::string& inv_path, RunConfig& cfg, std::ostream& out,
                std::ostream& err) {
  const auto base = io::load_measurement(base_path, cfg.band).response;
  const auto inv = io::load_measurement(inv_path, cfg.band).response;
  const auto standard = standard_metrics(inv, base, cfg.metric);
  const double window = resolve_window(cfg, base, err);
  const auto wr = windowed_metric(inv, base, window, MetricKind::Rmsd, cfg.metric);
  const auto wx = windowed_metric(inv, base, window, MetricKind::Xcorr, cfg.metric);
  io::write_file(cfg.out_dir / "windowed_rmsd.csv", io::format_windowed_csv(wr));
  io::write_file(cfg.out_dir / "windowed_xcorr.csv", io::format_windowed_csv(wx));
  io::write_file(cfg.out_dir / "windowed_rmsd.svg", io::windowed_svg(wr, "Windowed RMSD"));
  io::write_file(cfg.out_dir / "windowed_xcorr.svg", io::windowed_svg(wx, "Windowed XCORR"));
  io::write_file(cfg.out_dir / "metrics.json",
                 dump({{"rmsd", standard.rmsd}, {"xcorr", standard.xcorr}, {"window_hz", window}}));
  for (const auto* series : {&wr, &wx})
    for (const auto& e : series->entries)
      if (!e.value) err << "window " << e.f_lo << "-" << e.f_hi << " Hz not evaluated: " << e.error << "\n";
  out << "rmsd " << standard.rmsd << "\nxcorr " << standard.xcorr << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- assess / report

struct AssessArgs {
  std::string baseline;
  std::string investigative;
  std::optional<std::string> control;
  std::optional<double> freq_threshold;
  std::optional<double> damp_threshold;
  std::optional<double> match_tol;
};

int run_assess(const AssessArgs& a, const SweepArgs& s, RunConfig& cfg, std::ostream& out, std::ostream& err) {
  apply_sweep_args(s, cfg);
  if (a.freq_threshold) cfg.thresholds.freq_pct = *a.freq_threshold;
  if (a.damp_threshold) cfg.thresholds.damp_pct = *a.damp_threshold;
  if (a.match_tol) cfg.match_tol_pct = *a.match_tol;

  const auto base = io::load_measurement(a.baseline, cfg.band).response;
  const auto inv = io::load_measurement(a.investigative, cfg.band).response;
  const auto base_sweep = sweep_and_log(base, cfg, "baseline", err);
  const auto inv_sweep = sweep_and_log(inv, cfg, "investigative", err);
  write_sweep(base_sweep, base, cfg.out_dir / "baseline_stabilization.csv", {});
  write_sweep(inv_sweep, inv, cfg.out_dir / "investigative_stabilization.csv", {});
  const auto base_modes = stable_modal_set(base_sweep);
  const auto inv_modes = stable_modal_set(inv_sweep);

  std::optional<MetricValues> metrics;
  if (base.grid() == inv.grid()) {
    try {
      metrics = standard_metrics(inv, base, cfg.metric);
    } catch (const DataError& e) {
      err << "warning: standard metrics skipped: " << e.what() << "\n";
    }
  } else {
    err << "warning: standard metrics skipped: measurements are on different grids\n";
  }

  DamageReport report;
  if (a.control) {
    const auto ctrl = io::load_measurement(*a.control, cfg.band).response;
    const auto ctrl_sweep = sweep_and_log(ctrl, cfg, "control", err);
    write_sweep(ctrl_sweep, ctrl, cfg.out_dir / "control_stabilization.csv", {});
    report = assess_with_control(base_modes, inv_modes, stable_modal_set(ctrl_sweep), metrics, cfg.match_tol_pct);
  } else {
    report = assess(base_modes, inv_modes, cfg.thresholds, metrics, cfg.match_tol_pct);
  }
  json j = io::to_json(report);
  j["inputs"] = {{"baseline", a.baseline}, {"investigative", a.investigative}};
  if (a.control) j["inputs"]["control"] = *a.control;
  j["seed"] = cfg.vf.seed;
  io::write_file(cfg.out_dir / "assess.json", dump(j));
  const auto text = io::render_report(report);
  io::write_file(cfg.out_dir / "report.txt", text);
  out << text;
  return kExitOk;
}

int run_report(const std::string& input, const std::optional<std::string>& out_path, std::ostream& out) {
  json j;
  try {
    j = json::parse(io::read_file(input));
  } catch (const json::parse_error& e) {
    throw DataError(input + ": " + e.what());
  }
  const auto text = io::render_report(io::damage_report_from_json(j));
  if (out_path) io::write_file(*out_path, text);
  out << text;
  return kExitOk;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vector-fitting modal identification for impedance-based structural health monitoring", "vfshm"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> band;
  std::optional<std::string> out_dir;
  app.add_option("--config", config_path, "RunConfig JSON file");
  app.add_option("--seed", seed, "seed for randomized steps (overrides VFSHM_SEED and the config)");
  app.add_option("--band", band, "analysis band f_lo:f_hi in Hz");
  app.add_option("--out-dir", out_dir, "directory for output files");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "synthesize a 5-DoF FRF or an EMI impedance");
  simulate->add_option("--system", sim.system, "mdof or emi")->capture_default_str();
  simulate->add_flag("--damaged", sim.damaged, "apply the reference damage (k2 x0.75, c2 x1.25)");
  simulate->add_option("--damage", sim.damage, "extra damage element:kf:cf, element 1-based (repeatable)");
  simulate->add_option("--points", sim.points, "number of grid points");
  simulate->add_option("--noise-snr-db", sim.snr_db, "add complex Gaussian noise at this SNR");
  simulate->add_option("--out", sim.out, "output CSV path");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit a rational model to one measurement");
  fit_cmd->add_option("--input", fit.input, "measurement CSV")->required();
  fit_cmd->add_option("--method", fit.method, "vf or lscf")->capture_default_str();
  fit_cmd->add_option("--order", fit.order, "model order N");
  fit_cmd->add_option("--max-iterations", fit.max_iterations, "VF relocation iterations");
  fit_cmd->add_flag("--no-stability", fit.no_stability, "do not flip unstable poles");

  std::string stab_input;
  SweepArgs sweep;
  auto* stabilize = app.add_subcommand("stabilize", "order sweep and stabilization diagram");
  stabilize->add_option("--input", stab_input, "measurement CSV")->required();
  auto add_sweep_options = [&](CLI::App* cmd) {
    cmd->add_option("--orders", sweep.orders, "n_min:n_max[:step]");
    cmd->add_option("--freq-tol", sweep.freq_tol, "relative frequency tolerance");
    cmd->add_option("--damp-tol", sweep.damp_tol, "relative damping tolerance");
    cmd->add_option("--min-persistence", sweep.min_persistence, "consecutive orders for a stable pole");
  };
  add_sweep_options(stabilize);

  std::string met_base, met_inv;
  std::optional<double> window;
  std::optional<std::string> part, normalization;
  auto* metrics = app.add_subcommand("metrics", "standard and windowed RMSD/XCORR");
  metrics->add_option("--baseline", met_base, "baseline CSV")->required();
  metrics->add_option("--investigative", met_inv, "investigative CSV")->required();
  metrics->add_option("--window-hz", window, "window width in Hz");
  metrics->add_option("--part", part, "real, magnitude or complex");
  metrics->add_option("--normalization", normalization, "per-point or sum-ratio");

  AssessArgs as;
  auto* assess_cmd = app.add_subcommand("assess", "modal damage assessment of two measurements");
  assess_cmd->add_option("--baseline", as.baseline, "baseline CSV")->required();
  assess_cmd->add_option("--investigative", as.investigative, "investigative CSV")->required();
  assess_cmd->add_option("--control", as.control, "repeat baseline used to set thresholds");
  assess_cmd->add_option("--freq-threshold", as.freq_threshold, "frequency threshold, percent");
  assess_cmd->add_option("--damp-threshold", as.damp_threshold, "damping threshold, percent");
  assess_cmd->add_option("--match-tol", as.match_tol, "mode matching tolerance, percent");
  add_sweep_options(assess_cmd);

  std::string report_input;
  std::optional<std::string> report_out;
  auto* report = app.add_subcommand("report", "render a previous assess.json as text");
  report->add_option("--input", report_input, "assess.json")->required();
  report->add_option("--out", report_out, "also write the text here");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunConfig cfg = load_config(config_path);
  apply_seed(cfg, seed);
  if (band) cfg.band = parse_band(*band);
  if (out_dir) cfg.out_dir = *out_dir;
  if (window) cfg.window_hz = *window;
  if (part) cfg.metric.part = parse_part(*part);
  if (normalization) cfg.metric.normalization = parse_normalization(*normalization);

  if (simulate->parsed()) return run_simulate(sim, cfg, out);
  if (fit_cmd->parsed()) return run_fit(fit, cfg, out);
  if (stabilize->parsed()) return run_stabilize(stab_input, sweep, cfg, out, err);
  if (metrics->parsed()) return run_metrics(met_base, met_inv, cfg, out, err);
  if (assess_cmd->parsed()) return run_assess(as, sweep, cfg, out, err);
  return run_report(report_input, report_out, out);
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: internal failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace vfshm
