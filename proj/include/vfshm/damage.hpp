#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vfshm/core_types.hpp"

namespace vfshm {

inline constexpr double kDefaultMatchTolPct = 25.0;

struct ModeMatch {
  std::optional<Mode> baseline;
  std::optional<Mode> investigative;
  /// 100 (f_inv - f_base) / f_base and the same for damping; set only when matched.
  std::optional<double> delta_freq_pct;
  std::optional<double> delta_damp_pct;

  bool matched() const { return baseline.has_value() && investigative.has_value(); }
};

/// Minimum-cost one-to-one pairing by relative frequency distance. Pairs
/// further apart than match_tol_pct are never formed; each unmatched mode
/// costs match_tol_pct / 2, so a pair forms only when it beats leaving both
/// sides unmatched. Output ordered by frequency.
std::vector<ModeMatch> match_modes(const ModalParameters& base, const ModalParameters& inv,
                                   double match_tol_pct = kDefaultMatchTolPct);

struct DamageThresholds {
  double freq_pct = 0.1;
  double damp_pct = 10.0;
};

enum class Classification { Undamaged, Damaged };
enum class DirectionHint { None, Softening, Stiffening, Mixed };

const char* to_string(Classification c);
const char* to_string(DirectionHint d);

struct MetricValues {
  double rmsd = 0.0;
  double xcorr = 0.0;
};

/// Where the thresholds came from when a control measurement set them.
struct ControlBand {
  double factor = 3.0;
  double observed_freq_pct = 0.0;  // max |delta| between baseline and control
  double observed_damp_pct = 0.0;
};

struct DamageReport {
  std::vector<ModeMatch> matches;
  Classification classification = Classification::Undamaged;
  double mean_delta_freq_pct = 0.0;
  double mean_delta_damp_pct = 0.0;
  DirectionHint direction_hint = DirectionHint::None;
  /// Interpretation caveat for the hint (frequency shifts alone cannot separate
  /// mass from stiffness changes). Empty when the hint is None.
  std::string caveat;
  std::string rule;
  DamageThresholds thresholds;
  double match_tol_pct = kDefaultMatchTolPct;
  std::optional<MetricValues> metric_values;
  std::optional<ControlBand> control_band;

  std::size_t unmatched_count() const;
};

DamageReport assess(const ModalParameters& base, const ModalParameters& inv,
                    const DamageThresholds& thresholds,
                    std::optional<MetricValues> metrics = std::nullopt,
                    double match_tol_pct = kDefaultMatchTolPct);

/// Thresholds at `factor` times the largest deltas seen between the baseline
/// and a control measurement of the undamaged structure.
ControlBand control_thresholds(const ModalParameters& base, const ModalParameters& control,
                               double match_tol_pct = kDefaultMatchTolPct, double factor = 3.0);

DamageReport assess_with_control(const ModalParameters& base, const ModalParameters& inv,
                                 const ModalParameters& control,
                                 std::optional<MetricValues> metrics = std::nullopt,
                                 double match_tol_pct = kDefaultMatchTolPct);

}  // namespace vfshm
