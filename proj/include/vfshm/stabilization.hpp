#pragma once

#include <string>
#include <vector>

#include "vfshm/core_types.hpp"
#include "vfshm/vector_fitting.hpp"

namespace vfshm {

struct SweepConfig {
  int n_min = 2;
  int n_max = 20;
  int n_step = 2;
  double freq_tol = 0.001;  // relative
  double damp_tol = 0.05;   // relative
  int min_persistence = 3;  // consecutive orders
  /// Cluster only poles whose frequency lies inside the fitted band.
  bool in_band_only = true;
  /// A pair joins the diagram only if the RMS of its own term over the grid is
  /// at least this multiple of that order's RMS fit error. 0 disables.
  double min_significance = 1.0;
  /// Fit the orders on worker threads; results are identical either way.
  bool parallel = true;

  void validate() const;
  std::vector<int> orders() const;
};

struct ClusterMember {
  int order = 0;
  Complex pole;  // rad/s, Im > 0
};

struct PoleCluster {
  Complex representative_pole;  // member from the highest order
  std::vector<ClusterMember> members;
  bool stable = false;
};

struct OrderFit {
  int order = 0;
  RationalModel model;
  double final_rms_error = 0.0;
};

struct OrderFailure {
  int order = 0;
  std::string message;
};

struct StabilizationResult {
  std::vector<PoleCluster> clusters;
  std::vector<OrderFit> per_order_models;
  std::vector<OrderFailure> failures;
  std::vector<std::string> warnings;
  SweepConfig config;
};

/// Fit every order of the sweep and chain oscillatory poles across adjacent
/// orders: nearest relative frequency within freq_tol of every member, then
/// damping within damp_tol. Single-order failures are recorded and skipped;
/// NumericError if every order fails.
StabilizationResult order_sweep(const FrequencyResponse& response, const SweepConfig& cfg,
                                const VfOptions& base_opts);

/// Modes of the stable clusters, ascending, duplicates within freq_tol merged.
ModalParameters stable_modal_set(const StabilizationResult& result);

}  // namespace vfshm
