#pragma once

#include <vector>

#include "vfshm/core_types.hpp"

namespace vfshm {

/// alpha(x) / beta(x) in the normalized variable x = s / frequency_scale.
/// Coefficients run from x^0 upward; beta's leading coefficient is pinned to 1.
struct PolynomialModel {
  std::vector<double> numerator;
  std::vector<double> denominator;
  double frequency_scale = 1.0;  // rad/s

  Complex evaluate(Complex s) const;
  FrequencyResponse evaluate(const FrequencyGrid& grid) const;
};

struct LscfResult {
  PolynomialModel model;
  /// 2-norm condition number of the stacked real design matrix.
  double condition_estimate = 0.0;
};

/// Linearized rational-polynomial fit: min || H beta - alpha ||^2 over the
/// grid with b_N = 1 and s normalized by 2 pi f_max. No iterative reweighting.
LscfResult lscf_fit(const FrequencyResponse& response, int order);

/// Roots of beta via companion-matrix eigenvalues, in rad/s. No stability
/// enforcement.
std::vector<Complex> polynomial_poles(const PolynomialModel& model);

}  // namespace vfshm
