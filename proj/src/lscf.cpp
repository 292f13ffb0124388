#include "vfshm/lscf.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "least_squares.hpp"
#include "vfshm/errors.hpp"

namespace vfshm {
namespace {

Complex horner(const std::vector<double>& coeffs, Complex x) {
  Complex acc{0.0, 0.0};
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

}  // namespace

Complex PolynomialModel::evaluate(Complex s) const {
  const Complex x = s / frequency_scale;
  return horner(numerator, x) / horner(denominator, x);
}

FrequencyResponse PolynomialModel::evaluate(const FrequencyGrid& grid) const {
  std::vector<Complex> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = evaluate(grid.s(i));
    if (!std::isfinite(values[i].real()) || !std::isfinite(values[i].imag()))
      throw NumericError("polynomial model evaluation overflowed at " + std::to_string(grid[i]) + " Hz");
  }
  return FrequencyResponse(grid, std::move(values));
}

LscfResult lscf_fit(const FrequencyResponse& response, int order) {
  if (order < 1) throw ConfigError("LSCF order must be >= 1");
  const auto m = static_cast<Eigen::Index>(response.size());
  const Eigen::Index n = order;
  // Unknowns: a_0..a_N, b_0..b_{N-1}.
  const Eigen::Index cols = 2 * n + 1;
  if (cols >= 2 * m)
    throw ConfigError("LSCF order " + std::to_string(order) + " is not identifiable from " +
                      std::to_string(m) + " samples");

  const double scale = kTwoPi * response.grid().back();
  Eigen::MatrixXd a(2 * m, cols);
  Eigen::VectorXd rhs(2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const Complex x = response.grid().s(iu) / scale;
    const Complex hval = response[iu];
    Complex xp{1.0, 0.0};
    for (Eigen::Index j = 0; j <= n; ++j) {
      a(i, j) = xp.real();
      a(m + i, j) = xp.imag();
      if (j < n) {
        const Complex g = -hval * xp;
        a(i, n + 1 + j) = g.real();
        a(m + i, n + 1 + j) = g.imag();
      } else {
        const Complex r = hval * xp;  // b_N = 1 moved to the right-hand side
        rhs(i) = r.real();
        rhs(m + i) = r.imag();
      }
      xp *= x;
    }
  }

  LscfResult out;
  {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
    const auto& sv = svd.singularValues();
    const double smallest = sv(sv.size() - 1);
    out.condition_estimate = smallest > 0.0 ? sv(0) / smallest : std::numeric_limits<double>::infinity();
  }
  const auto sol = detail::solve_column_scaled(a, rhs, "LSCF", /*scale_columns=*/false);

  out.model.frequency_scale = scale;
  out.model.numerator.assign(sol.x.data(), sol.x.data() + n + 1);
  out.model.denominator.assign(sol.x.data() + n + 1, sol.x.data() + cols);
  out.model.denominator.push_back(1.0);
  return out;
}

std::vector<Complex> polynomial_poles(const PolynomialModel& model) {
  std::vector<double> beta = model.denominator;
  while (!beta.empty() && beta.back() == 0.0) beta.pop_back();
  if (beta.empty()) throw DataError("denominator polynomial is identically zero");
  const auto deg = static_cast<Eigen::Index>(beta.size()) - 1;
  if (deg == 0) return {};

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  for (Eigen::Index i = 0; i + 1 < deg; ++i) companion(i, i + 1) = 1.0;
  for (Eigen::Index j = 0; j < deg; ++j)
    companion(deg - 1, j) = -beta[static_cast<std::size_t>(j)] / beta.back();

  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  if (es.info() != Eigen::Success) throw NumericError("companion-matrix eigenvalue solve failed");
  std::vector<Complex> poles;
  for (Eigen::Index i = 0; i < deg; ++i) poles.push_back(es.eigenvalues()(i) * model.frequency_scale);
  return poles;
}

}  // namespace vfshm
