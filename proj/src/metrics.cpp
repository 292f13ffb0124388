#include "vfshm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vfshm/errors.hpp"

namespace vfshm {
namespace {

void require_same_grid(const FrequencyResponse& a, const FrequencyResponse& b) {
  if (!(a.grid() == b.grid())) throw DataError("metric inputs are on different frequency grids");
}

Complex project(Complex z, SignalPart part) {
  switch (part) {
    case SignalPart::Real:
      return {z.real(), 0.0};
    case SignalPart::Magnitude:
      return {std::abs(z), 0.0};
    case SignalPart::Complex:
      return z;
  }
  return z;
}

double rmsd_range(const FrequencyResponse& inv, const FrequencyResponse& base, std::size_t lo,
                  std::size_t hi, const MetricOptions& opts) {
  double per_point = 0.0;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const Complex zb = project(base[i], opts.part);
    const Complex zk = project(inv[i], opts.part);
    const double b2 = std::norm(zb);
    const double d2 = std::norm(zk - zb);
    if (opts.normalization == RmsdNormalization::PerPoint) {
      if (b2 == 0.0)
        throw DataError("baseline is zero at " + std::to_string(base.grid()[i]) + " Hz (degenerate baseline)");
      per_point += d2 / b2;
    } else {
      num += d2;
      den += b2;
    }
  }
  if (opts.normalization == RmsdNormalization::PerPoint) return std::sqrt(per_point);
  if (den == 0.0) throw DataError("baseline is identically zero (degenerate baseline)");
  return std::sqrt(num / den);
}

double xcorr_range(const FrequencyResponse& inv, const FrequencyResponse& base, std::size_t lo,
                   std::size_t hi, const MetricOptions& opts) {
  if (hi - lo < 2) throw DataError("cross-correlation needs at least 2 samples");
  const auto count = static_cast<double>(hi - lo);
  Complex mean_k{}, mean_b{};
  for (std::size_t i = lo; i < hi; ++i) {
    mean_k += project(inv[i], opts.part);
    mean_b += project(base[i], opts.part);
  }
  mean_k /= count;
  mean_b /= count;
  Complex cross{};
  double var_k = 0.0;
  double var_b = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const Complex dk = project(inv[i], opts.part) - mean_k;
    const Complex db = project(base[i], opts.part) - mean_b;
    cross += dk * std::conj(db);
    var_k += std::norm(dk);
    var_b += std::norm(db);
  }
  if (var_k == 0.0 || var_b == 0.0) throw DataError("cross-correlation of a constant series (degenerate series)");
  const double rho = std::abs(cross) / std::sqrt(var_k * var_b);
  return std::clamp(1.0 - rho, 0.0, 1.0);
}

}  // namespace

double rmsd(const FrequencyResponse& investigative, const FrequencyResponse& baseline,
            const MetricOptions& opts) {
  require_same_grid(investigative, baseline);
  return rmsd_range(investigative, baseline, 0, baseline.size(), opts);
}

double xcorr_metric(const FrequencyResponse& investigative, const FrequencyResponse& baseline,
                    const MetricOptions& opts) {
  require_same_grid(investigative, baseline);
  return xcorr_range(investigative, baseline, 0, baseline.size(), opts);
}

WindowedMetricSeries windowed_metric(const FrequencyResponse& investigative,
                                     const FrequencyResponse& baseline, double window_width_hz,
                                     MetricKind which, const MetricOptions& opts) {
  require_same_grid(investigative, baseline);
  if (!(window_width_hz > 0.0)) throw ConfigError("window width must be positive");
  const auto& grid = baseline.grid();
  const double f_min = grid.front();
  const double f_max = grid.back();
  if (f_max - f_min < window_width_hz)
    throw ConfigError("band is narrower than one window");

  WindowedMetricSeries out;
  std::size_t cursor = 0;
  for (std::size_t w = 0;; ++w) {
    WindowEntry entry;
    entry.f_lo = f_min + static_cast<double>(w) * window_width_hz;
    const double nominal_hi = entry.f_lo + window_width_hz;
    // Tolerate rounding so an exact multiple of the width yields no sliver window.
    const bool last = nominal_hi >= f_max - 1e-9 * window_width_hz;
    entry.f_hi = last ? f_max : nominal_hi;
    entry.partial = last && nominal_hi > f_max + 1e-9 * window_width_hz;
    entry.center_hz = 0.5 * (entry.f_lo + entry.f_hi);

    const std::size_t lo = cursor;
    while (cursor < grid.size() && (last || grid[cursor] < entry.f_hi)) ++cursor;
    try {
      if (cursor == lo) throw DataError("window contains no samples");
      entry.value = which == MetricKind::Rmsd ? rmsd_range(investigative, baseline, lo, cursor, opts)
                                              : xcorr_range(investigative, baseline, lo, cursor, opts);
    } catch (const Error& e) {
      entry.value.reset();
      entry.error = e.what();
    }
    out.entries.push_back(std::move(entry));
    if (last) break;
  }
  return out;
}

}  // namespace vfshm
