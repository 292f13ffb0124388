#include "least_squares.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "vfshm/errors.hpp"

namespace vfshm::detail {

LsSolution solve_column_scaled(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                               const char* what, bool scale_columns) {
  if (!a.allFinite() || !b.allFinite())
    throw NumericError(std::string(what) + ": system contains non-finite entries");

  Eigen::VectorXd norms = scale_columns ? Eigen::VectorXd(a.colwise().norm().transpose())
                                        : Eigen::VectorXd::Ones(a.cols());
  for (Eigen::Index j = 0; j < norms.size(); ++j)
    if (norms(j) == 0.0) norms(j) = 1.0;
  const Eigen::MatrixXd scaled = a * norms.cwiseInverse().asDiagonal();

  LsSolution out;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  const auto diag = qr.matrixR().diagonal().cwiseAbs();
  const double smallest = diag(diag.size() - 1);
  out.condition = smallest > 0.0 ? diag(0) / smallest : std::numeric_limits<double>::infinity();

  if (qr.rank() == scaled.cols()) {
    out.x = qr.solve(b);
  } else {
    out.rank_deficient = true;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(scaled);
    out.x = cod.solve(b);
    const double bnorm = b.norm();
    const double resid = (scaled * out.x - b).norm();
    if (bnorm > 0.0 && resid > 1e-8 * bnorm)
      throw IllConditionedError(std::string(what) + ": rank-deficient least-squares system (condition ~" +
                                    std::to_string(out.condition) + ")",
                                out.condition);
  }
  out.x = out.x.cwiseQuotient(norms);
  if (!out.x.allFinite()) throw NumericError(std::string(what) + ": solution is not finite");
  return out;
}

}  // namespace vfshm::detail
