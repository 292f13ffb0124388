#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "vfshm/core_types.hpp"
#include "vfshm/damage.hpp"
#include "vfshm/lscf.hpp"
#include "vfshm/metrics.hpp"
#include "vfshm/stabilization.hpp"
#include "vfshm/vector_fitting.hpp"

namespace vfshm::io {

/// A measurement CSV: `#`-prefixed metadata lines (`# key: value`), an
/// optional `frequency_hz,re_z,im_z` header, then one sample per row.
struct Measurement {
  FrequencyResponse response;
  std::map<std::string, std::string> metadata;
};

/// Parse a measurement file, optionally restricted to [band.first, band.second].
/// DataError names the offending line for parse failures, duplicate or
/// decreasing frequencies, and an empty band.
Measurement load_measurement(const std::filesystem::path& path,
                             std::optional<std::pair<double, double>> band = std::nullopt);
Measurement parse_measurement(const std::string& text, const std::string& source = "<memory>",
                              std::optional<std::pair<double, double>> band = std::nullopt);

/// 17 significant digits, so load(save(x)) reproduces x bit for bit.
void save_measurement(const std::filesystem::path& path, const FrequencyResponse& response,
                      const std::map<std::string, std::string>& metadata = {});
std::string format_measurement(const FrequencyResponse& response,
                               const std::map<std::string, std::string>& metadata = {});

/// Rows `order,frequency_hz,damping,stable`, one per cluster member.
struct StabilizationRow {
  int order = 0;
  double frequency_hz = 0.0;
  double damping = 0.0;
  bool stable = false;
};
std::vector<StabilizationRow> stabilization_rows(const StabilizationResult& result);
std::string format_stabilization_csv(const std::vector<StabilizationRow>& rows);
std::vector<StabilizationRow> parse_stabilization_csv(const std::string& text);

/// Rows `center_hz,value,f_lo,f_hi,partial`; an unevaluable window has an empty value.
std::string format_windowed_csv(const WindowedMetricSeries& series);
WindowedMetricSeries parse_windowed_csv(const std::string& text);

nlohmann::json to_json(const RationalModel& model);
RationalModel rational_model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PolynomialModel& model);
nlohmann::json to_json(const VfDiagnostics& diag);
nlohmann::json to_json(const ModalParameters& modal);
nlohmann::json to_json(const DamageReport& report);
DamageReport damage_report_from_json(const nlohmann::json& j);

/// Human-readable rendering of an assessment.
std::string render_report(const DamageReport& report);

/// Static SVG: frequency on x, model order on y; stable poles filled.
std::string stabilization_svg(const std::vector<StabilizationRow>& rows, double f_lo, double f_hi);
/// Static SVG bar chart of a windowed metric at the window centers.
std::string windowed_svg(const WindowedMetricSeries& series, const std::string& title);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace vfshm::io
