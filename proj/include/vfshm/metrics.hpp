#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vfshm/core_types.hpp"

namespace vfshm {

/// Which scalar of each complex sample the metrics compare.
enum class SignalPart { Real, Magnitude, Complex };

/// RMSD normalization: each squared deviation over its own squared baseline
/// value, or the sum of squared deviations over the sum of squared baselines.
enum class RmsdNormalization { PerPoint, SumRatio };

struct MetricOptions {
  SignalPart part = SignalPart::Real;
  RmsdNormalization normalization = RmsdNormalization::PerPoint;
};

/// sqrt( sum_i |z_k,i - z_b,i|^2 / |z_b,i|^2 ) under the default options.
/// Not symmetric: the baseline normalizes.
double rmsd(const FrequencyResponse& investigative, const FrequencyResponse& baseline,
            const MetricOptions& opts = {});

/// 1 - |Pearson correlation| of the two series, in [0, 1].
double xcorr_metric(const FrequencyResponse& investigative, const FrequencyResponse& baseline,
                    const MetricOptions& opts = {});

enum class MetricKind { Rmsd, Xcorr };

struct WindowEntry {
  double center_hz = 0.0;
  double f_lo = 0.0;
  double f_hi = 0.0;
  bool partial = false;            // trailing window narrower than the requested width
  std::optional<double> value;     // empty when the window could not be evaluated
  std::string error;               // reason for an empty value
};

struct WindowedMetricSeries {
  std::vector<WindowEntry> entries;
};

/// Consecutive windows of `window_width_hz` from the first grid frequency; a
/// sample at a shared edge belongs to the later window, the last window is
/// closed at f_max. Per-window failures become flagged entries.
WindowedMetricSeries windowed_metric(const FrequencyResponse& investigative,
                                     const FrequencyResponse& baseline, double window_width_hz,
                                     MetricKind which, const MetricOptions& opts = {});

}  // namespace vfshm
