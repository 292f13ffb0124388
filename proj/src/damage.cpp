#include "vfshm/damage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vfshm/errors.hpp"

namespace vfshm {
namespace {

double pct_change(double base, double inv) {
  if (base == 0.0) return inv == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return 100.0 * (inv - base) / base;
}

// Square min-cost assignment (Kuhn-Munkres with potentials). Returns, for
// each row, its assigned column.
std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

double mode_frequency(const ModeMatch& m) {
  return m.baseline ? m.baseline->frequency_hz : m.investigative->frequency_hz;
}

}  // namespace

const char* to_string(Classification c) {
  return c == Classification::Damaged ? "damaged" : "undamaged";
}

const char* to_string(DirectionHint d) {
  switch (d) {
    case DirectionHint::Softening:
      return "softening";
    case DirectionHint::Stiffening:
      return "stiffening";
    case DirectionHint::Mixed:
      return "mixed";
    case DirectionHint::None:
      return "none";
  }
  return "none";
}

std::size_t DamageReport::unmatched_count() const {
  return static_cast<std::size_t>(std::count_if(matches.begin(), matches.end(),
                                                [](const ModeMatch& m) { return !m.matched(); }));
}

std::vector<ModeMatch> match_modes(const ModalParameters& base, const ModalParameters& inv,
                                   double match_tol_pct) {
  if (!(match_tol_pct > 0.0)) throw ConfigError("match tolerance must be positive");
  const std::size_t nb = base.modes.size();
  const std::size_t ni = inv.modes.size();
  const std::size_t n = nb + ni;
  std::vector<ModeMatch> out;
  if (n == 0) return out;

  // Rows: baseline modes then one dummy per investigative mode.
  // Cols: investigative modes then one dummy per baseline mode.
  const double forbidden = 1e12;
  const double skip = 0.5 * match_tol_pct;
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const bool real_row = r < nb;
      const bool real_col = c < ni;
      if (real_row && real_col) {
        const double dist = std::abs(pct_change(base.modes[r].frequency_hz, inv.modes[c].frequency_hz));
        cost[r][c] = dist <= match_tol_pct ? dist : forbidden;
      } else if (real_row) {
        cost[r][c] = (c - ni == r) ? skip : forbidden;  // baseline r left unmatched
      } else if (real_col) {
        cost[r][c] = (r - nb == c) ? skip : forbidden;  // investigative c left unmatched
      } else {
        cost[r][c] = 0.0;
      }
    }
  }
  const auto assign = hungarian(cost);

  std::vector<bool> inv_used(ni, false);
  for (std::size_t r = 0; r < nb; ++r) {
    ModeMatch m;
    m.baseline = base.modes[r];
    const std::size_t c = assign[r];
    if (c < ni) {
      inv_used[c] = true;
      m.investigative = inv.modes[c];
      m.delta_freq_pct = pct_change(base.modes[r].frequency_hz, inv.modes[c].frequency_hz);
      m.delta_damp_pct = pct_change(base.modes[r].damping_ratio, inv.modes[c].damping_ratio);
    }
    out.push_back(std::move(m));
  }
  for (std::size_t c = 0; c < ni; ++c) {
    if (inv_used[c]) continue;
    ModeMatch m;
    m.investigative = inv.modes[c];
    out.push_back(std::move(m));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ModeMatch& a, const ModeMatch& b) { return mode_frequency(a) < mode_frequency(b); });
  return out;
}

DamageReport assess(const ModalParameters& base, const ModalParameters& inv, const DamageThresholds& thresholds,
                    std::optional<MetricValues> metrics, double match_tol_pct) {
  if (!(thresholds.freq_pct > 0.0) || !(thresholds.damp_pct > 0.0))
    throw ConfigError("damage thresholds must be positive");

  DamageReport report;
  report.thresholds = thresholds;
  report.match_tol_pct = match_tol_pct;
  report.metric_values = metrics;
  report.matches = match_modes(base, inv, match_tol_pct);
  report.rule = "damaged iff any matched |delta_freq_pct| > freq threshold, any matched |delta_damp_pct| > "
                "damping threshold, or any mode is unmatched";

  bool exceeded = false;
  std::size_t matched = 0;
  std::size_t negative = 0;
  std::size_t positive = 0;
  double sum_f = 0.0;
  double sum_d = 0.0;
  for (const auto& m : report.matches) {
    if (!m.matched()) {
      exceeded = true;
      continue;
    }
    ++matched;
    const double df = *m.delta_freq_pct;
    const double dd = *m.delta_damp_pct;
    sum_f += df;
    sum_d += dd;
    if (std::abs(df) > thresholds.freq_pct || std::abs(dd) > thresholds.damp_pct) exceeded = true;
    if (df < 0.0) ++negative;
    if (df > 0.0) ++positive;
  }
  report.classification = exceeded ? Classification::Damaged : Classification::Undamaged;
  if (matched > 0) {
    report.mean_delta_freq_pct = sum_f / static_cast<double>(matched);
    report.mean_delta_damp_pct = sum_d / static_cast<double>(matched);
  }
  if (matched == 0 || (negative == 0 && positive == 0))
    report.direction_hint = DirectionHint::None;
  else if (negative == matched)
    report.direction_hint = DirectionHint::Softening;
  else if (positive == matched)
    report.direction_hint = DirectionHint::Stiffening;
  else
    report.direction_hint = DirectionHint::Mixed;

  switch (report.direction_hint) {
    case DirectionHint::Softening:
      report.caveat = "frequency_decrease:mass_increase_or_stiffness_loss";
      break;
    case DirectionHint::Stiffening:
      report.caveat = "frequency_increase:stiffening_or_mass_loss";
      break;
    case DirectionHint::Mixed:
      report.caveat = "mixed_shifts:no_single_mechanism";
      break;
    case DirectionHint::None:
      break;
  }
  return report;
}

ControlBand control_thresholds(const ModalParameters& base, const ModalParameters& control,
                               double match_tol_pct, double factor) {
  ControlBand band;
  band.factor = factor;
  for (const auto& m : match_modes(base, control, match_tol_pct)) {
    if (!m.matched()) continue;
    band.observed_freq_pct = std::max(band.observed_freq_pct, std::abs(*m.delta_freq_pct));
    band.observed_damp_pct = std::max(band.observed_damp_pct, std::abs(*m.delta_damp_pct));
  }
  return band;
}

DamageReport assess_with_control(const ModalParameters& base, const ModalParameters& inv,
                                 const ModalParameters& control, std::optional<MetricValues> metrics,
                                 double match_tol_pct) {
  const auto band = control_thresholds(base, control, match_tol_pct);
  // A perfectly repeatable control still needs strictly positive thresholds.
  constexpr double kFloorPct = 1e-9;
  DamageThresholds t{std::max(band.factor * band.observed_freq_pct, kFloorPct),
                     std::max(band.factor * band.observed_damp_pct, kFloorPct)};
  auto report = assess(base, inv, t, metrics, match_tol_pct);
  report.control_band = band;
  return report;
}

}  // namespace vfshm
