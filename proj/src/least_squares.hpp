#pragma once

#include <Eigen/Dense>

namespace vfshm::detail {

struct LsSolution {
  Eigen::VectorXd x;
  double condition = 0.0;  // |R_00| / |R_nn| of the pivoted QR
  bool rank_deficient = false;
};

/// Least squares with every column normalized to unit 2-norm first; the
/// returned unknowns are back-scaled. Rank-deficient systems fall back to the
/// minimum-norm solution, which is accepted only if it still reproduces b to
/// relative 1e-8 (exact over-parameterization, e.g. surplus poles on
/// noise-free data). Otherwise IllConditionedError.
LsSolution solve_column_scaled(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                               const char* what, bool scale_columns = true);

}  // namespace vfshm::detail
