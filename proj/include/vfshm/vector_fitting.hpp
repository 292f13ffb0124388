#pragma once

#include <cstdint>
#include <vector>

#include "vfshm/core_types.hpp"

namespace vfshm {

struct VfOptions {
  int order = 10;
  int max_iterations = 10;
  /// Relative change of the weighted RMS fit error that ends pole relocation.
  double convergence_tol = 1e-10;
  bool enforce_stability = true;
  bool include_d = true;
  bool include_h = true;
  /// Per-sample least-squares weights; empty means all ones.
  std::vector<double> weights;
  /// Seed for the randomized restart used when sigma collapses.
  std::uint64_t seed = 42;

  /// Throws ConfigError when the options are unusable on `sample_count` points.
  void validate(std::size_t sample_count) const;
};

struct VfDiagnostics {
  int iterations_run = 0;
  std::vector<double> rms_error_history;
  std::vector<int> poles_flipped_per_iteration;
  double final_rms_error = 0.0;
  double system_condition_estimate = 0.0;
  bool converged = false;
  bool odd_order = false;  // a single real starting pole was appended
  int restarts = 0;
  std::uint64_t seed = 42;
};

struct VfResult {
  RationalModel model;
  VfDiagnostics diagnostics;
};

/// Starting poles: order/2 lightly damped pairs (Re = -Im/100) with imaginary
/// parts linearly spaced over the grid's band. A single pair sits at the band
/// midpoint; two or more pairs include both endpoints. Odd orders get one
/// extra real pole at -2 pi f_min.
std::vector<Complex> initial_poles(const FrequencyGrid& grid, int order);

/// Outcome of one pole-relocation step.
struct RelocationStep {
  std::vector<Complex> poles;
  int flipped = 0;
  double condition_estimate = 0.0;
  /// max |sigma| over the band fell below 1e-8 (all relocated poles spurious).
  bool sigma_degenerate = false;
};

/// One Vector Fitting iteration: solve the linearized sigma*H = p problem for
/// the sigma residues, then take the zeros of sigma as the new poles.
RelocationStep relocate_poles_step(const FrequencyResponse& response,
                                   const std::vector<Complex>& poles,
                                   const VfOptions& opts);

std::vector<Complex> relocate_poles(const FrequencyResponse& response,
                                    const std::vector<Complex>& poles,
                                    const VfOptions& opts);

/// Residues, d and h for fixed poles (linear least squares).
RationalModel fit_residues(const FrequencyResponse& response,
                           const std::vector<Complex>& poles,
                           const VfOptions& opts);

/// Weighted RMS of response - model over the response grid.
double weighted_rms_error(const FrequencyResponse& response, const RationalModel& model,
                          const std::vector<double>& weights = {});

/// Full two-stage fit: relocate poles until convergence or max_iterations,
/// then identify residues. Returns the best iterate seen.
VfResult vector_fit(const FrequencyResponse& response, const VfOptions& opts);

}  // namespace vfshm
