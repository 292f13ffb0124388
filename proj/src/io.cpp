#include "vfshm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vfshm/errors.hpp"

namespace vfshm::io {
namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }
Complex complex_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json mode_json(const Mode& m) {
  return {{"frequency_hz", m.frequency_hz}, {"damping_ratio", m.damping_ratio}, {"pole", complex_json(m.pole)}};
}
Mode mode_from(const json& j) {
  return {j.at("frequency_hz").get<double>(), j.at("damping_ratio").get<double>(), complex_from(j.at("pole"))};
}

bool is_comment_or_blank(const std::string& line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

}  // namespace

Measurement parse_measurement(const std::string& text, const std::string& source,
                              std::optional<std::pair<double, double>> band) {
  std::map<std::string, std::string> metadata;
  std::vector<double> hz;
  std::vector<Complex> values;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const auto body = trim(std::string_view(t).substr(1));
      const auto sep = body.find_first_of(":=");
      if (sep != std::string::npos) metadata[trim(body.substr(0, sep))] = trim(body.substr(sep + 1));
      continue;
    }
    const auto fields = split(t, ',');
    if (!header_seen && hz.empty() && !parse_double(fields.front())) {
      if (fields != std::vector<std::string>{"frequency_hz", "re_z", "im_z"})
        throw DataError(source + ":" + std::to_string(line_no) + ": expected header frequency_hz,re_z,im_z");
      header_seen = true;
      continue;
    }
    if (fields.size() != 3)
      throw DataError(source + ":" + std::to_string(line_no) + ": expected 3 columns, found " +
                      std::to_string(fields.size()));
    const auto f = parse_double(fields[0]);
    const auto re = parse_double(fields[1]);
    const auto im = parse_double(fields[2]);
    if (!f || !re || !im)
      throw DataError(source + ":" + std::to_string(line_no) + ": non-numeric or non-finite field");
    if (!hz.empty()) {
      if (*f == hz.back())
        throw DataError(source + ":" + std::to_string(line_no) + ": duplicate frequency " + fields[0]);
      if (*f < hz.back())
        throw DataError(source + ":" + std::to_string(line_no) + ": frequency " + fields[0] +
                        " is lower than the previous row");
    }
    if (!(*f > 0.0)) throw DataError(source + ":" + std::to_string(line_no) + ": frequency must be positive");
    hz.push_back(*f);
    values.emplace_back(*re, *im);
  }
  if (hz.size() < 2) throw DataError(source + ": needs at least 2 data rows");
  FrequencyResponse response(FrequencyGrid(std::move(hz)), std::move(values));
  if (band) {
    const auto [lo, hi] = *band;
    if (!(hi > lo)) throw ConfigError("band must satisfy f_lo < f_hi");
    if (hi < response.grid().front() || lo > response.grid().back())
      throw DataError(source + ": band [" + fmt17(lo) + ", " + fmt17(hi) + "] Hz lies outside the measurement");
    response = response.restricted(lo, hi);
  }
  return {std::move(response), std::move(metadata)};
}

Measurement load_measurement(const std::filesystem::path& path, std::optional<std::pair<double, double>> band) {
  return parse_measurement(read_file(path), path.string(), band);
}

std::string format_measurement(const FrequencyResponse& response, const std::map<std::string, std::string>& metadata) {
  std::string out;
  for (const auto& [k, v] : metadata) out += "# " + k + ": " + v + "\n";
  out += "frequency_hz,re_z,im_z\n";
  for (std::size_t i = 0; i < response.size(); ++i)
    out += fmt17(response.grid()[i]) + "," + fmt17(response[i].real()) + "," + fmt17(response[i].imag()) + "\n";
  return out;
}

void save_measurement(const std::filesystem::path& path, const FrequencyResponse& response,
                      const std::map<std::string, std::string>& metadata) {
  write_file(path, format_measurement(response, metadata));
}

std::vector<StabilizationRow> stabilization_rows(const StabilizationResult& result) {
  std::vector<StabilizationRow> rows;
  for (const auto& c : result.clusters)
    for (const auto& m : c.members)
      rows.push_back({m.order, std::abs(m.pole) / kTwoPi, -m.pole.real() / std::abs(m.pole), c.stable});
  std::sort(rows.begin(), rows.end(), [](const StabilizationRow& a, const StabilizationRow& b) {
    return a.order != b.order ? a.order < b.order : a.frequency_hz < b.frequency_hz;
  });
  return rows;
}

std::string format_stabilization_csv(const std::vector<StabilizationRow>& rows) {
  std::string out = "order,frequency_hz,damping,stable\n";
  for (const auto& r : rows)
    out += std::to_string(r.order) + "," + fmt17(r.frequency_hz) + "," + fmt17(r.damping) + "," +
           (r.stable ? "1" : "0") + "\n";
  return out;
}

std::vector<StabilizationRow> parse_stabilization_csv(const std::string& text) {
  std::vector<StabilizationRow> rows;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const auto fields = split(trim(line), ',');
    if (fields.front() == "order") continue;
    if (fields.size() != 4) throw DataError("stabilization CSV line " + std::to_string(line_no) + ": expected 4 columns");
    const auto order = parse_double(fields[0]);
    const auto f = parse_double(fields[1]);
    const auto z = parse_double(fields[2]);
    if (!order || !f || !z || (fields[3] != "0" && fields[3] != "1"))
      throw DataError("stabilization CSV line " + std::to_string(line_no) + ": malformed row");
    rows.push_back({static_cast<int>(*order), *f, *z, fields[3] == "1"});
  }
  return rows;
}

std::string format_windowed_csv(const WindowedMetricSeries& series) {
  std::string out = "center_hz,value,f_lo,f_hi,partial\n";
  for (const auto& e : series.entries)
    out += fmt17(e.center_hz) + "," + (e.value ? fmt17(*e.value) : std::string()) + "," + fmt17(e.f_lo) + "," +
           fmt17(e.f_hi) + "," + (e.partial ? "1" : "0") + "\n";
  return out;
}

WindowedMetricSeries parse_windowed_csv(const std::string& text) {
  WindowedMetricSeries series;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const auto fields = split(trim(line), ',');
    if (fields.front() == "center_hz") continue;
    if (fields.size() != 5) throw DataError("windowed CSV line " + std::to_string(line_no) + ": expected 5 columns");
    WindowEntry e;
    const auto c = parse_double(fields[0]);
    const auto lo = parse_double(fields[2]);
    const auto hi = parse_double(fields[3]);
    if (!c || !lo || !hi || (fields[4] != "0" && fields[4] != "1"))
      throw DataError("windowed CSV line " + std::to_string(line_no) + ": malformed row");
    e.center_hz = *c;
    e.f_lo = *lo;
    e.f_hi = *hi;
    e.partial = fields[4] == "1";
    if (!fields[1].empty()) {
      const auto v = parse_double(fields[1]);
      if (!v) throw DataError("windowed CSV line " + std::to_string(line_no) + ": malformed value");
      e.value = *v;
    } else {
      e.error = "not evaluated";
    }
    series.entries.push_back(std::move(e));
  }
  return series;
}

json to_json(const RationalModel& model) {
  json poles = json::array();
  json residues = json::array();
  for (const auto& p : model.poles) poles.push_back(complex_json(p));
  for (const auto& r : model.residues) residues.push_back(complex_json(r));
  return {{"form", "pole-residue"}, {"pole_units", "rad/s"}, {"poles", poles}, {"residues", residues},
          {"d", model.d},           {"h", model.h},             {"includes_d", model.includes_d},
          {"includes_h", model.includes_h}};
}

RationalModel rational_model_from_json(const json& j) {
  RationalModel m;
  for (const auto& p : j.at("poles")) m.poles.push_back(complex_from(p));
  for (const auto& r : j.at("residues")) m.residues.push_back(complex_from(r));
  m.d = j.at("d").get<double>();
  m.h = j.at("h").get<double>();
  m.includes_d = j.value("includes_d", true);
  m.includes_h = j.value("includes_h", true);
  m.validate();
  return m;
}

json to_json(const PolynomialModel& model) {
  return {{"form", "rational-polynomial"},
          {"numerator", model.numerator},
          {"denominator", model.denominator},
          {"frequency_scale_rad_s", model.frequency_scale}};
}

json to_json(const VfDiagnostics& d) {
  return {{"iterations_run", d.iterations_run},
          {"rms_error_history", d.rms_error_history},
          {"poles_flipped_per_iteration", d.poles_flipped_per_iteration},
          {"final_rms_error", d.final_rms_error},
          {"system_condition_estimate", d.system_condition_estimate},
          {"converged", d.converged},
          {"odd_order", d.odd_order},
          {"restarts", d.restarts},
          {"seed", d.seed}};
}

json to_json(const ModalParameters& modal) {
  json modes = json::array();
  for (const auto& m : modal.modes) modes.push_back(mode_json(m));
  json over = json::array();
  for (const auto& p : modal.overdamped) over.push_back(complex_json(p));
  return {{"modes", modes}, {"overdamped_poles", over}};
}

json to_json(const DamageReport& r) {
  json matches = json::array();
  for (const auto& m : r.matches) {
    json jm;
    jm["baseline"] = m.baseline ? mode_json(*m.baseline) : json(nullptr);
    jm["investigative"] = m.investigative ? mode_json(*m.investigative) : json(nullptr);
    jm["delta_freq_pct"] = m.delta_freq_pct ? json(*m.delta_freq_pct) : json(nullptr);
    jm["delta_damp_pct"] = m.delta_damp_pct ? json(*m.delta_damp_pct) : json(nullptr);
    jm["unmatched_baseline"] = m.baseline && !m.investigative;
    jm["unmatched_investigative"] = m.investigative && !m.baseline;
    matches.push_back(jm);
  }
  json j = {{"matches", matches},
            {"classification", to_string(r.classification)},
            {"mean_delta_freq_pct", r.mean_delta_freq_pct},
            {"mean_delta_damp_pct", r.mean_delta_damp_pct},
            {"direction_hint", to_string(r.direction_hint)},
            {"caveat", r.caveat},
            {"rule", r.rule},
            {"thresholds", {{"freq_pct", r.thresholds.freq_pct}, {"damp_pct", r.thresholds.damp_pct}}},
            {"match_tol_pct", r.match_tol_pct}};
  j["metric_values"] = r.metric_values ? json{{"rmsd", r.metric_values->rmsd}, {"xcorr", r.metric_values->xcorr}}
                                       : json(nullptr);
  j["control_band"] = r.control_band ? json{{"factor", r.control_band->factor},
                                            {"observed_freq_pct", r.control_band->observed_freq_pct},
                                            {"observed_damp_pct", r.control_band->observed_damp_pct}}
                                     : json(nullptr);
  return j;
}

DamageReport damage_report_from_json(const json& j) {
  try {
    DamageReport r;
    for (const auto& jm : j.at("matches")) {
      ModeMatch m;
      if (!jm.at("baseline").is_null()) m.baseline = mode_from(jm.at("baseline"));
      if (!jm.at("investigative").is_null()) m.investigative = mode_from(jm.at("investigative"));
      if (!jm.at("delta_freq_pct").is_null()) m.delta_freq_pct = jm.at("delta_freq_pct").get<double>();
      if (!jm.at("delta_damp_pct").is_null()) m.delta_damp_pct = jm.at("delta_damp_pct").get<double>();
      r.matches.push_back(std::move(m));
    }
    r.classification = j.at("classification").get<std::string>() == "damaged" ? Classification::Damaged
                                                                               : Classification::Undamaged;
    r.mean_delta_freq_pct = j.at("mean_delta_freq_pct").get<double>();
    r.mean_delta_damp_pct = j.at("mean_delta_damp_pct").get<double>();
    const auto hint = j.at("direction_hint").get<std::string>();
    r.direction_hint = hint == "softening"    ? DirectionHint::Softening
                       : hint == "stiffening" ? DirectionHint::Stiffening
                       : hint == "mixed"      ? DirectionHint::Mixed
                                              : DirectionHint::None;
    r.caveat = j.value("caveat", "");
    r.rule = j.value("rule", "");
    r.thresholds = {j.at("thresholds").at("freq_pct").get<double>(), j.at("thresholds").at("damp_pct").get<double>()};
    r.match_tol_pct = j.value("match_tol_pct", kDefaultMatchTolPct);
    if (j.contains("metric_values") && !j.at("metric_values").is_null())
      r.metric_values = MetricValues{j["metric_values"].at("rmsd").get<double>(),
                                     j["metric_values"].at("xcorr").get<double>()};
    if (j.contains("control_band") && !j.at("control_band").is_null())
      r.control_band = ControlBand{j["control_band"].at("factor").get<double>(),
                                   j["control_band"].at("observed_freq_pct").get<double>(),
                                   j["control_band"].at("observed_damp_pct").get<double>()};
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed assessment file: ") + e.what());
  }
}

std::string render_report(const DamageReport& r) {
  std::ostringstream out;
  out << "Damage assessment\n=================\n";
  out << "classification : " << to_string(r.classification) << "\n";
  out << "direction hint : " << to_string(r.direction_hint);
  if (!r.caveat.empty()) out << "  [" << r.caveat << "]";
  out << "\n";
  out << "thresholds     : frequency " << fmt("%.4g", r.thresholds.freq_pct) << " %, damping "
      << fmt("%.4g", r.thresholds.damp_pct) << " %";
  if (r.control_band)
    out << "  (control x" << fmt("%g", r.control_band->factor) << ": observed "
        << fmt("%.4g", r.control_band->observed_freq_pct) << " % / " << fmt("%.4g", r.control_band->observed_damp_pct)
        << " %)";
  out << "\nrule           : " << r.rule << "\n\n";
  out << "  base f [Hz]    base zeta     inv f [Hz]     inv zeta      dF [%]   dzeta [%]\n";
  for (const auto& m : r.matches) {
    auto cell = [](const std::optional<Mode>& md, bool freq) {
      if (!md) return std::string(freq ? "            -" : "          -");
      return freq ? fmt("%13.4f", md->frequency_hz) : fmt("%11.4e", md->damping_ratio);
    };
    out << cell(m.baseline, true) << "  " << cell(m.baseline, false) << "  " << cell(m.investigative, true) << "  "
        << cell(m.investigative, false) << "  "
        << (m.delta_freq_pct ? fmt("%10.4f", *m.delta_freq_pct) : std::string("  unmatched")) << "  "
        << (m.delta_damp_pct ? fmt("%10.4f", *m.delta_damp_pct) : std::string("          ")) << "\n";
  }
  out << "\nmean delta frequency : " << fmt("%.4f", r.mean_delta_freq_pct) << " %\n";
  out << "mean delta damping   : " << fmt("%.4f", r.mean_delta_damp_pct) << " %\n";
  out << "unmatched modes      : " << r.unmatched_count() << "\n";
  if (r.metric_values)
    out << "standard RMSD        : " << fmt("%.6g", r.metric_values->rmsd)
        << "\nstandard XCORR       : " << fmt("%.6g", r.metric_values->xcorr) << "\n";
  return out.str();
}

std::string stabilization_svg(const std::vector<StabilizationRow>& rows, double f_lo, double f_hi) {
  constexpr double w = 800, h = 400, margin = 50;
  int o_min = 0, o_max = 1;
  if (!rows.empty()) {
    o_min = rows.front().order;
    o_max = rows.front().order;
    for (const auto& r : rows) {
      o_min = std::min(o_min, r.order);
      o_max = std::max(o_max, r.order);
    }
  }
  const double o_span = std::max(1, o_max - o_min);
  const double f_span = f_hi > f_lo ? f_hi - f_lo : 1.0;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << margin << "\" y=\"20\" font-size=\"14\">Stabilization diagram (x: frequency "
      << fmt("%g", f_lo) << "-" << fmt("%g", f_hi) << " Hz, y: order " << o_min << "-" << o_max << ")</text>\n";
  for (const auto& r : rows) {
    const double x = margin + (r.frequency_hz - f_lo) / f_span * (w - 2 * margin);
    const double y = h - margin - (r.order - o_min) / o_span * (h - 2 * margin);
    out << "<circle cx=\"" << fmt("%.2f", x) << "\" cy=\"" << fmt("%.2f", y) << "\" r=\"4\" "
        << (r.stable ? "fill=\"black\"" : "fill=\"none\" stroke=\"gray\"") << "/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string windowed_svg(const WindowedMetricSeries& series, const std::string& title) {
  constexpr double w = 800, h = 400, margin = 50;
  double vmax = 0.0;
  for (const auto& e : series.entries)
    if (e.value) vmax = std::max(vmax, *e.value);
  if (vmax == 0.0) vmax = 1.0;
  const double f_lo = series.entries.empty() ? 0.0 : series.entries.front().f_lo;
  const double f_hi = series.entries.empty() ? 1.0 : series.entries.back().f_hi;
  const double f_span = f_hi > f_lo ? f_hi - f_lo : 1.0;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << margin << "\" y=\"20\" font-size=\"14\">" << title << " (max " << fmt("%.4g", vmax)
      << ")</text>\n";
  for (const auto& e : series.entries) {
    if (!e.value) continue;
    const double x0 = margin + (e.f_lo - f_lo) / f_span * (w - 2 * margin);
    const double x1 = margin + (e.f_hi - f_lo) / f_span * (w - 2 * margin);
    const double bh = *e.value / vmax * (h - 2 * margin);
    out << "<rect x=\"" << fmt("%.2f", x0) << "\" y=\"" << fmt("%.2f", h - margin - bh) << "\" width=\""
        << fmt("%.2f", std::max(1.0, x1 - x0 - 1.0)) << "\" height=\"" << fmt("%.2f", bh)
        << "\" fill=\"steelblue\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << contents;
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace vfshm::io
