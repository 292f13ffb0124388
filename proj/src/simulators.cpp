#include "vfshm/simulators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "vfshm/errors.hpp"

namespace vfshm {
namespace {

Eigen::MatrixXd chain_matrix(const std::vector<double>& element, std::size_t n) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t e = 0; e <= n; ++e) {
    const double v = element[e];
    const auto lo = static_cast<Eigen::Index>(e) - 1;  // mass on the left
    const auto hi = static_cast<Eigen::Index>(e);      // mass on the right
    if (lo >= 0) out(lo, lo) += v;
    if (hi < static_cast<Eigen::Index>(n)) out(hi, hi) += v;
    if (lo >= 0 && hi < static_cast<Eigen::Index>(n)) {
      out(lo, hi) -= v;
      out(hi, lo) -= v;
    }
  }
  return out;
}

// First-order form in dimensionless time t' = omega0 t, so the matrix entries
// are O(1); eigenvalues of `a` times `omega0` are the poles in rad/s.
struct StateSpace {
  Eigen::MatrixXd a;
  double omega0 = 1.0;
};

StateSpace state_space(const MdofSystem& sys) {
  const auto n = static_cast<Eigen::Index>(sys.dofs());
  const Eigen::MatrixXd k = chain_matrix(sys.stiffnesses, sys.dofs());
  const Eigen::MatrixXd c = chain_matrix(sys.damping_coeffs, sys.dofs());
  Eigen::VectorXd minv(n);
  for (Eigen::Index i = 0; i < n; ++i) minv(i) = 1.0 / sys.masses[static_cast<std::size_t>(i)];

  StateSpace ss;
  ss.omega0 = std::sqrt((minv.asDiagonal() * k).diagonal().maxCoeff());
  ss.a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  ss.a.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  ss.a.bottomLeftCorner(n, n) = -(minv.asDiagonal() * k) / (ss.omega0 * ss.omega0);
  ss.a.bottomRightCorner(n, n) = -(minv.asDiagonal() * c) / ss.omega0;
  return ss;
}

Complex tan_over_arg(Complex x) {
  if (std::abs(x) < 1e-4) {
    const Complex x2 = x * x;
    return 1.0 + x2 / 3.0 + 2.0 * x2 * x2 / 15.0;
  }
  return std::tan(x) / x;
}

}  // namespace

void MdofSystem::validate() const {
  const std::size_t n = masses.size();
  if (n == 0) throw ConfigError("MDOF system needs at least one mass");
  if (stiffnesses.size() != n + 1 || damping_coeffs.size() != n + 1)
    throw ConfigError("MDOF chain needs n+1 springs and dampers for n masses");
  for (double m : masses)
    if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("MDOF masses must be positive");
  for (double k : stiffnesses)
    if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("MDOF stiffnesses must be positive");
  for (double c : damping_coeffs)
    if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("MDOF damping must be non-negative");
  if (force_dof >= n || response_dof >= n) throw ConfigError("MDOF force/response DOF out of range");
}

MdofSystem reference_five_dof() {
  MdofSystem sys;
  sys.masses.assign(5, 0.1);
  sys.stiffnesses.assign(6, 200e3);
  sys.damping_coeffs.assign(6, 0.05);
  return sys;
}

MdofSystem apply_damage(const MdofSystem& sys, const std::vector<DamageEdit>& edits) {
  MdofSystem out = sys;
  for (const auto& e : edits) {
    if (e.element >= out.stiffnesses.size())
      throw ConfigError("damage element index " + std::to_string(e.element) + " out of range");
    if (!(e.stiffness_factor > 0.0) || !(e.damping_factor > 0.0))
      throw ConfigError("damage factors must be positive");
    out.stiffnesses[e.element] *= e.stiffness_factor;
    out.damping_coeffs[e.element] *= e.damping_factor;
  }
  return out;
}

MdofSystem reference_five_dof_damaged() {
  return apply_damage(reference_five_dof(), {DamageEdit{1, 0.75, 1.25}});
}

MdofSystem emi_host_chain() {
  MdofSystem s;
  s.masses.assign(5, 1e-3);
  s.stiffnesses.assign(6, 9.87e7);
  s.damping_coeffs.assign(6, 0.6);
  return s;
}

Complex mdof_frf(const MdofSystem& sys, double frequency_hz) {
  const auto n = static_cast<Eigen::Index>(sys.dofs());
  const double w = kTwoPi * frequency_hz;
  Eigen::MatrixXcd dyn = chain_matrix(sys.stiffnesses, sys.dofs()).cast<Complex>() +
                         Complex(0.0, w) * chain_matrix(sys.damping_coeffs, sys.dofs()).cast<Complex>();
  for (Eigen::Index i = 0; i < n; ++i) dyn(i, i) -= w * w * sys.masses[static_cast<std::size_t>(i)];
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(dyn);
  if (!lu.isInvertible())
    throw NumericError("dynamic stiffness is singular at " + std::to_string(frequency_hz) + " Hz");
  Eigen::VectorXcd force = Eigen::VectorXcd::Zero(n);
  force(static_cast<Eigen::Index>(sys.force_dof)) = 1.0;
  const Eigen::VectorXcd x = lu.solve(force);
  return x(static_cast<Eigen::Index>(sys.response_dof));
}

FrequencyResponse mdof_frf(const MdofSystem& sys, const FrequencyGrid& grid) {
  sys.validate();
  std::vector<Complex> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = mdof_frf(sys, grid[i]);
  return FrequencyResponse(grid, std::move(values));
}

std::vector<Complex> mdof_poles(const MdofSystem& sys) {
  sys.validate();
  const auto n = static_cast<Eigen::Index>(sys.dofs());
  std::vector<Complex> upper;
  const bool undamped = std::all_of(sys.damping_coeffs.begin(), sys.damping_coeffs.end(),
                                    [](double c) { return c == 0.0; });
  if (undamped) {
    // M^-1/2 K M^-1/2 is symmetric; its eigenvalues are w^2.
    Eigen::VectorXd msqrt_inv(n);
    for (Eigen::Index i = 0; i < n; ++i) msqrt_inv(i) = 1.0 / std::sqrt(sys.masses[static_cast<std::size_t>(i)]);
    const Eigen::MatrixXd kk = msqrt_inv.asDiagonal() * chain_matrix(sys.stiffnesses, sys.dofs()) *
                               msqrt_inv.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kk);
    if (es.info() != Eigen::Success) throw NumericError("MDOF eigenvalue solve failed");
    for (Eigen::Index i = 0; i < n; ++i) upper.emplace_back(0.0, std::sqrt(es.eigenvalues()(i)));
  } else {
    const auto ss = state_space(sys);
    Eigen::EigenSolver<Eigen::MatrixXd> es(ss.a, false);
    if (es.info() != Eigen::Success) throw NumericError("MDOF eigenvalue solve failed");
    std::vector<Complex> reals;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const Complex p = es.eigenvalues()(i) * ss.omega0;
      if (p.imag() > 0.0) upper.push_back(p);
      if (p.imag() == 0.0) reals.push_back(p);
    }
    std::sort(upper.begin(), upper.end(), [](Complex a, Complex b) { return a.imag() < b.imag(); });
    std::sort(reals.begin(), reals.end(), [](Complex a, Complex b) { return a.real() > b.real(); });
    std::vector<Complex> out;
    for (const auto& p : reals) out.push_back(p);
    for (const auto& p : upper) {
      out.push_back(p);
      out.push_back(std::conj(p));
    }
    return out;
  }
  std::sort(upper.begin(), upper.end(), [](Complex a, Complex b) { return a.imag() < b.imag(); });
  std::vector<Complex> out;
  for (const auto& p : upper) {
    out.push_back(p);
    out.push_back(std::conj(p));
  }
  return out;
}

RationalModel mdof_modal_model(const MdofSystem& sys) {
  sys.validate();
  const auto ss = state_space(sys);
  Eigen::EigenSolver<Eigen::MatrixXd> es(ss.a, true);
  if (es.info() != Eigen::Success) throw NumericError("MDOF eigenvalue solve failed");
  // For symmetric M, C, K the residue of pole p with displacement mode phi is
  // phi_r phi_f / (phi^T (2 p M + C) phi); no eigenvector inverse needed.
  const auto n = static_cast<Eigen::Index>(sys.dofs());
  const Eigen::MatrixXcd damping = chain_matrix(sys.damping_coeffs, sys.dofs()).cast<Complex>();
  auto residue = [&](Eigen::Index i) {
    const Complex p = es.eigenvalues()(i) * ss.omega0;
    const Eigen::VectorXcd phi = es.eigenvectors().col(i).head(n);
    Eigen::MatrixXcd deriv = damping;
    for (Eigen::Index j = 0; j < n; ++j) deriv(j, j) += 2.0 * p * sys.masses[static_cast<std::size_t>(j)];
    const Complex norm = phi.transpose() * deriv * phi;
    return phi(static_cast<Eigen::Index>(sys.response_dof)) * phi(static_cast<Eigen::Index>(sys.force_dof)) / norm;
  };

  RationalModel model;
  model.includes_d = false;
  model.includes_h = false;
  std::vector<std::pair<Complex, Complex>> upper;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const Complex p = es.eigenvalues()(i) * ss.omega0;
    if (!(p.real() < 0.0)) throw DataError("modal model requires a damped system");
    if (p.imag() == 0.0) {
      model.poles.push_back(p);
      model.residues.push_back({residue(i).real(), 0.0});
    } else if (p.imag() > 0.0) {
      upper.emplace_back(p, residue(i));
    }
  }
  std::sort(upper.begin(), upper.end(), [](const auto& a, const auto& b) { return a.first.imag() < b.first.imag(); });
  for (const auto& [p, r] : upper) {
    model.poles.push_back(p);
    model.residues.push_back(r);
    model.poles.push_back(std::conj(p));
    model.residues.push_back(std::conj(r));
  }
  return model;
}

std::function<Complex(double)> mdof_mechanical_impedance(const MdofSystem& sys) {
  sys.validate();
  return [sys](double omega) {
    const Complex receptance = mdof_frf(sys, omega / kTwoPi);
    return 1.0 / (Complex(0.0, omega) * receptance);
  };
}

void PztParams::validate() const {
  if (!(b > 0.0) || !(h > 0.0) || !(l > 0.0)) throw ConfigError("PZT dimensions must be positive");
  if (!(rho > 0.0)) throw ConfigError("PZT density must be positive");
  if (!(s11E.imag() <= 0.0) || !(eps33.imag() <= 0.0))
    throw ConfigError("PZT losses must satisfy Im(s11E) <= 0 and Im(eps33) <= 0");
  if (s11E == Complex{} || eps33 == Complex{}) throw ConfigError("PZT s11E and eps33 must be nonzero");
}

PztParams pzt5h_wafer() {
  constexpr double eps0 = 8.8541878128e-12;
  PztParams p;
  p.b = 12.7e-3;
  p.l = 12.7e-3;
  p.h = 0.2e-3;
  p.d13 = -274e-12;
  p.s11E = Complex(16.5e-12, 0.0) * Complex(1.0, -0.01);
  p.eps33 = Complex(3400.0 * eps0, 0.0) * Complex(1.0, -0.02);
  p.rho = 7500.0;
  return p;
}

EmiResult emi_coupled_impedance(const PztParams& pzt, const std::function<Complex(double)>& z_structure,
                                const FrequencyGrid& grid) {
  pzt.validate();
  std::vector<Complex> values(grid.size());
  std::vector<std::size_t> flagged;
  const Complex i1{0.0, 1.0};
  const Complex coupling = pzt.d13 * pzt.d13 / pzt.s11E;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double w = kTwoPi * grid[i];
    const Complex kl = w * std::sqrt(pzt.rho * pzt.s11E) * pzt.l;  // principal branch, Re >= 0
    const Complex zst = z_structure(w);
    if (!std::isfinite(zst.real()) || !std::isfinite(zst.imag()))
      throw DataError("structural impedance is not finite at " + std::to_string(grid[i]) + " Hz");

    // T Zpzt / (Zpzt + Zst) with Zpzt = c / T, rewritten as c T / (c + T Zst).
    const Complex c = -i1 * pzt.b * pzt.h * pzt.l / (pzt.s11E * w);
    const double half_pi = std::numbers::pi / 2.0;
    const double odd = std::round((kl.real() - half_pi) / std::numbers::pi);
    const bool near_pole = std::abs(kl - Complex(half_pi + odd * std::numbers::pi, 0.0)) < 1e-9;
    Complex ratio;
    if (near_pole) {
      flagged.push_back(i);
      ratio = c / zst;
    } else {
      const Complex t = tan_over_arg(kl);
      ratio = c * t / (c + t * zst);
    }
    const Complex admittance = i1 * w * (pzt.b * pzt.l / pzt.h) * (coupling * (ratio - 1.0) + pzt.eps33);
    values[i] = 1.0 / admittance;
  }
  return EmiResult{FrequencyResponse(grid, std::move(values)), std::move(flagged)};
}

}  // namespace vfshm
