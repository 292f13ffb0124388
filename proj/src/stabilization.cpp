#include "vfshm/stabilization.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <tuple>

#include "vfshm/errors.hpp"

namespace vfshm {
namespace {

struct Candidate {
  double freq_hz;
  double damping;
  Complex pole;
};

double rel_gap(double a, double b) {
  const double lo = std::min(std::abs(a), std::abs(b));
  if (lo == 0.0) return a == b ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(a - b) / lo;
}

double freq_of(Complex p) { return std::abs(p) / kTwoPi; }
double damping_of(Complex p) { return -p.real() / std::abs(p); }

// RMS over the grid of c/(s-p) + conj(c)/(s-conj(p)).
double pair_contribution_rms(const FrequencyGrid& grid, Complex pole, Complex residue) {
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Complex s = grid.s(i);
    acc += std::norm(residue / (s - pole) + std::conj(residue) / (s - std::conj(pole)));
  }
  return std::sqrt(acc / static_cast<double>(grid.size()));
}

struct FitOutcome {
  std::optional<VfResult> result;
  std::string error;
};

FitOutcome fit_one(const FrequencyResponse& response, VfOptions opts, int order) {
  opts.order = order;
  try {
    return {vector_fit(response, opts), {}};
  } catch (const Error& e) {
    return {std::nullopt, e.what()};
  }
}

}  // namespace

void SweepConfig::validate() const {
  if (n_min < 2) throw ConfigError("sweep n_min must be >= 2");
  if (n_step < 1) throw ConfigError("sweep n_step must be >= 1");
  if (n_max < n_min) throw ConfigError("sweep n_max must be >= n_min");
  if (!(freq_tol > 0.0) || !(damp_tol > 0.0)) throw ConfigError("sweep tolerances must be positive");
  if (min_persistence < 1) throw ConfigError("sweep min_persistence must be >= 1");
  if (!(min_significance >= 0.0)) throw ConfigError("sweep min_significance must be >= 0");
}

std::vector<int> SweepConfig::orders() const {
  std::vector<int> out;
  for (int n = n_min; n <= n_max; n += n_step) out.push_back(n);
  return out;
}

StabilizationResult order_sweep(const FrequencyResponse& response, const SweepConfig& cfg,
                                const VfOptions& base_opts) {
  cfg.validate();
  StabilizationResult result;
  result.config = cfg;
  const auto orders = cfg.orders();
  if (static_cast<int>(orders.size()) < cfg.min_persistence)
    result.warnings.push_back("sweep has fewer orders than min_persistence; no cluster can become stable");
  else if (cfg.n_max < cfg.n_min + 2 * cfg.min_persistence * cfg.n_step)
    result.warnings.push_back("short sweep: n_max < n_min + 2 * min_persistence * n_step");

  std::vector<FitOutcome> outcomes(orders.size());
  if (cfg.parallel && orders.size() > 1) {
    std::vector<std::future<FitOutcome>> jobs;
    for (int n : orders) jobs.push_back(std::async(std::launch::async, fit_one, std::cref(response), base_opts, n));
    for (std::size_t i = 0; i < jobs.size(); ++i) outcomes[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < orders.size(); ++i) outcomes[i] = fit_one(response, base_opts, orders[i]);
  }

  const double f_lo = response.grid().front();
  const double f_hi = response.grid().back();

  std::vector<std::size_t> open;  // indices into result.clusters extended at the previous order
  int previous_order = 0;
  bool any_success = false;
  for (std::size_t oi = 0; oi < orders.size(); ++oi) {
    const int order = orders[oi];
    auto& outcome = outcomes[oi];
    if (!outcome.result) {
      result.failures.push_back({order, outcome.error});
      open.clear();
      continue;
    }
    any_success = true;
    const auto& fit = *outcome.result;
    result.per_order_models.push_back({order, fit.model, fit.diagnostics.final_rms_error});

    std::vector<Candidate> cands;
    for (std::size_t pi = 0; pi < fit.model.poles.size(); ++pi) {
      const Complex p = fit.model.poles[pi];
      if (!(p.imag() > 0.0)) continue;
      const double f = freq_of(p);
      if (cfg.in_band_only && (f < f_lo || f > f_hi)) continue;
      if (cfg.min_significance > 0.0 &&
          pair_contribution_rms(response.grid(), p, fit.model.residues[pi]) <
              cfg.min_significance * fit.diagnostics.final_rms_error)
        continue;
      cands.push_back({f, damping_of(p), p});
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      return std::tie(a.freq_hz, a.damping) < std::tie(b.freq_hz, b.damping);
    });

    // Admissible (cluster, candidate) links, ranked by frequency then damping gap
    // to the cluster's most recent member.
    std::vector<std::tuple<double, double, std::size_t, std::size_t>> links;
    if (order - previous_order == cfg.n_step || previous_order == 0) {
      for (std::size_t ci : open) {
        const auto& members = result.clusters[ci].members;
        for (std::size_t k = 0; k < cands.size(); ++k) {
          bool ok = true;
          for (const auto& m : members) {
            if (rel_gap(cands[k].freq_hz, freq_of(m.pole)) > cfg.freq_tol ||
                rel_gap(cands[k].damping, damping_of(m.pole)) > cfg.damp_tol) {
              ok = false;
              break;
            }
          }
          if (!ok) continue;
          const auto& last = members.back().pole;
          links.emplace_back(rel_gap(cands[k].freq_hz, freq_of(last)), rel_gap(cands[k].damping, damping_of(last)),
                             ci, k);
        }
      }
    }
    std::sort(links.begin(), links.end());

    std::vector<bool> cluster_taken(result.clusters.size(), false);
    std::vector<bool> cand_taken(cands.size(), false);
    std::vector<std::size_t> next_open;
    for (const auto& [df, dd, ci, k] : links) {
      if (cluster_taken[ci] || cand_taken[k]) continue;
      cluster_taken[ci] = true;
      cand_taken[k] = true;
      result.clusters[ci].members.push_back({order, cands[k].pole});
      next_open.push_back(ci);
    }
    for (std::size_t k = 0; k < cands.size(); ++k) {
      if (cand_taken[k]) continue;
      PoleCluster c;
      c.members.push_back({order, cands[k].pole});
      result.clusters.push_back(std::move(c));
      next_open.push_back(result.clusters.size() - 1);
    }
    std::sort(next_open.begin(), next_open.end());
    open = std::move(next_open);
    previous_order = order;
  }

  if (!any_success) throw NumericError("order sweep failed: every order raised an error");

  for (auto& c : result.clusters) {
    c.representative_pole = c.members.back().pole;
    c.stable = static_cast<int>(c.members.size()) >= cfg.min_persistence;
  }
  std::stable_sort(result.clusters.begin(), result.clusters.end(), [](const PoleCluster& a, const PoleCluster& b) {
    return freq_of(a.representative_pole) < freq_of(b.representative_pole);
  });
  return result;
}

ModalParameters stable_modal_set(const StabilizationResult& result) {
  std::vector<const PoleCluster*> stable;
  for (const auto& c : result.clusters)
    if (c.stable) stable.push_back(&c);
  std::sort(stable.begin(), stable.end(), [](const PoleCluster* a, const PoleCluster* b) {
    return freq_of(a->representative_pole) < freq_of(b->representative_pole);
  });

  // Keep one cluster per frequency neighbourhood: the longest, then the one
  // reaching the highest order.
  std::vector<const PoleCluster*> kept;
  for (const auto* c : stable) {
    if (!kept.empty() &&
        rel_gap(freq_of(c->representative_pole), freq_of(kept.back()->representative_pole)) <= result.config.freq_tol) {
      const auto* k = kept.back();
      const bool better = c->members.size() > k->members.size() ||
                          (c->members.size() == k->members.size() && c->members.back().order > k->members.back().order);
      if (better) kept.back() = c;
      continue;
    }
    kept.push_back(c);
  }
  std::vector<Complex> poles;
  for (const auto* c : kept) poles.push_back(c->representative_pole);
  return poles_to_modal(poles);
}

}  // namespace vfshm
