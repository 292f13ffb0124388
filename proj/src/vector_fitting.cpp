#include "vfshm/vector_fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "least_squares.hpp"
#include "vfshm/errors.hpp"

namespace vfshm {
namespace {

// A real pole, or a conjugate pair represented by its Im > 0 member.
struct PoleBlock {
  Complex pole;
  bool pair = false;
  int width() const { return pair ? 2 : 1; }
};

std::vector<PoleBlock> to_blocks(const std::vector<Complex>& poles) {
  std::vector<PoleBlock> blocks;
  std::size_t negatives = 0;
  for (const auto& p : poles) {
    if (p.imag() > 0.0)
      blocks.push_back({p, true});
    else if (p.imag() == 0.0)
      blocks.push_back({p, false});
    else
      ++negatives;
  }
  std::size_t pairs = 0;
  for (const auto& b : blocks) pairs += b.pair ? 1 : 0;
  if (pairs != negatives || !is_conjugate_closed(poles, 1e-9))
    throw DataError("pole set is not closed under conjugation");
  return blocks;
}

std::vector<Complex> from_blocks(std::vector<PoleBlock> blocks) {
  std::sort(blocks.begin(), blocks.end(), [](const PoleBlock& a, const PoleBlock& b) {
    if (a.pole.imag() != b.pole.imag()) return a.pole.imag() < b.pole.imag();
    return a.pole.real() < b.pole.real();
  });
  std::vector<Complex> poles;
  for (const auto& b : blocks) {
    poles.push_back(b.pole);
    if (b.pair) poles.push_back(std::conj(b.pole));
  }
  return poles;
}

std::vector<double> effective_weights(const VfOptions& opts, std::size_t m) {
  if (opts.weights.empty()) return std::vector<double>(m, 1.0);
  return opts.weights;
}

// Real-valued partial-fraction basis at s: one column per real pole, two per
// pair (phi1 = 1/(s-p) + 1/(s-p*), phi2 = i/(s-p) - i/(s-p*)).
void fill_basis(const std::vector<PoleBlock>& blocks, Complex s, std::vector<Complex>& out) {
  out.clear();
  const Complex i1{0.0, 1.0};
  for (const auto& b : blocks) {
    const Complex t = 1.0 / (s - b.pole);
    if (!b.pair) {
      out.push_back(t);
    } else {
      const Complex u = 1.0 / (s - std::conj(b.pole));
      out.push_back(t + u);
      out.push_back(i1 * t - i1 * u);
    }
  }
}

// Map real unknowns back onto per-pole complex residues.
std::vector<Complex> unpack_residues(const std::vector<PoleBlock>& blocks, const Eigen::VectorXd& x,
                                     Eigen::Index offset) {
  std::vector<Complex> residues;
  Eigen::Index k = offset;
  for (const auto& b : blocks) {
    if (!b.pair) {
      residues.push_back({x(k), 0.0});
      k += 1;
    } else {
      residues.push_back({x(k), x(k + 1)});
      residues.push_back({x(k), -x(k + 1)});
      k += 2;
    }
  }
  return residues;
}

std::vector<Complex> flatten_poles(const std::vector<PoleBlock>& blocks) {
  std::vector<Complex> poles;
  for (const auto& b : blocks) {
    poles.push_back(b.pole);
    if (b.pair) poles.push_back(std::conj(b.pole));
  }
  return poles;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Starting poles with real parts drawn from [-2%, -0.5%] of the imaginary part.
std::vector<Complex> randomized_start(const FrequencyGrid& grid, int order, std::uint64_t& state) {
  auto poles = initial_poles(grid, order);
  for (std::size_t i = 0; i < poles.size(); ++i) {
    if (poles[i].imag() <= 0.0) continue;
    const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    const double ratio = 0.005 + 0.015 * u;
    poles[i] = {-ratio * poles[i].imag(), poles[i].imag()};
    poles[i + 1] = std::conj(poles[i]);
  }
  return poles;
}

}  // namespace

void VfOptions::validate(std::size_t sample_count) const {
  if (order < 1) throw ConfigError("VF order must be >= 1");
  if (max_iterations < 1) throw ConfigError("VF max_iterations must be >= 1");
  if (!(convergence_tol >= 0.0)) throw ConfigError("VF convergence_tol must be >= 0");
  if (!weights.empty()) {
    if (weights.size() != sample_count)
      throw ConfigError("VF weights length " + std::to_string(weights.size()) + " does not match " +
                        std::to_string(sample_count) + " samples");
    for (double w : weights)
      if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("VF weights must be positive and finite");
  }
  const std::size_t unknowns =
      static_cast<std::size_t>(2 * order) + (include_d ? 1 : 0) + (include_h ? 1 : 0);
  if (static_cast<std::size_t>(order) >= 2 * sample_count || unknowns > 2 * sample_count)
    throw ConfigError("VF order " + std::to_string(order) + " is not identifiable from " +
                      std::to_string(sample_count) + " samples");
}

std::vector<Complex> initial_poles(const FrequencyGrid& grid, int order) {
  if (order < 1) throw ConfigError("initial_poles: order must be >= 1");
  const int pairs = order / 2;
  const double f_lo = grid.front();
  const double f_hi = grid.back();
  std::vector<Complex> poles;
  for (int n = 0; n < pairs; ++n) {
    const double f = pairs == 1 ? 0.5 * (f_lo + f_hi)
                                : f_lo + (f_hi - f_lo) * static_cast<double>(n) / (pairs - 1);
    const double beta = kTwoPi * f;
    poles.emplace_back(-beta / 100.0, beta);
    poles.emplace_back(-beta / 100.0, -beta);
  }
  if (order % 2 == 1) poles.emplace_back(-kTwoPi * f_lo, 0.0);
  return poles;
}

RelocationStep relocate_poles_step(const FrequencyResponse& response,
                                   const std::vector<Complex>& poles, const VfOptions& opts) {
  const auto blocks = to_blocks(poles);
  for (const auto& b : blocks)
    if (!(b.pole.real() < 0.0)) throw DataError("relocate_poles: starting poles must be stable");

  const auto m = static_cast<Eigen::Index>(response.size());
  const auto n = static_cast<Eigen::Index>(poles.size());
  const Eigen::Index extra = (opts.include_d ? 1 : 0) + (opts.include_h ? 1 : 0);
  const Eigen::Index cols = 2 * n + extra;
  const auto weights = effective_weights(opts, response.size());

  Eigen::MatrixXd a(2 * m, cols);
  Eigen::VectorXd rhs(2 * m);
  std::vector<Complex> phi;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const Complex s = response.grid().s(iu);
    const Complex hval = response[iu];
    const double w = weights[iu];
    fill_basis(blocks, s, phi);
    Eigen::Index c = 0;
    for (const auto& f : phi) {
      a(i, c) = w * f.real();
      a(m + i, c) = w * f.imag();
      ++c;
    }
    if (opts.include_d) {
      a(i, c) = w;
      a(m + i, c) = 0.0;
      ++c;
    }
    if (opts.include_h) {
      a(i, c) = w * s.real();
      a(m + i, c) = w * s.imag();
      ++c;
    }
    for (const auto& f : phi) {
      const Complex g = -hval * f;
      a(i, c) = w * g.real();
      a(m + i, c) = w * g.imag();
      ++c;
    }
    rhs(i) = w * hval.real();
    rhs(m + i) = w * hval.imag();
  }

  const auto sol = detail::solve_column_scaled(a, rhs, "pole relocation");
  const Eigen::VectorXd sigma_res = sol.x.tail(n);

  // Zeros of sigma: eig(A - b c^T) in real block form.
  Eigen::MatrixXd state = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd bvec = Eigen::VectorXd::Zero(n);
  Eigen::Index k = 0;
  for (const auto& b : blocks) {
    if (!b.pair) {
      state(k, k) = b.pole.real();
      bvec(k) = 1.0;
      k += 1;
    } else {
      state(k, k) = b.pole.real();
      state(k, k + 1) = b.pole.imag();
      state(k + 1, k) = -b.pole.imag();
      state(k + 1, k + 1) = b.pole.real();
      bvec(k) = 2.0;
      k += 2;
    }
  }
  const Eigen::MatrixXd sys = state - bvec * sigma_res.transpose();
  Eigen::EigenSolver<Eigen::MatrixXd> es(sys, false);
  if (es.info() != Eigen::Success) throw NumericError("pole relocation: eigenvalue solve failed");
  const Eigen::VectorXcd zeros = es.eigenvalues();

  RelocationStep out;
  out.condition_estimate = sol.condition;

  std::vector<PoleBlock> next;
  for (Eigen::Index j = 0; j < zeros.size(); ++j) {
    Complex z = zeros(j);
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw NumericError("pole relocation produced a non-finite pole");
    if (z.imag() < 0.0) continue;
    if (opts.enforce_stability && z.real() > 0.0) {
      z = {-z.real(), z.imag()};
      out.flipped += z.imag() > 0.0 ? 2 : 1;
    }
    if (z.real() == 0.0) {
      // Marginal pole: nudge into the left half-plane.
      z = {-1e-12 * std::max(std::abs(z), 1.0), z.imag()};
    }
    next.push_back({z, z.imag() > 0.0});
  }
  out.poles = from_blocks(std::move(next));
  if (out.poles.size() != poles.size())
    throw NumericError("pole relocation lost poles (unpaired complex eigenvalue)");

  // Degeneracy guard: sigma ~ 0 across the whole band.
  double sigma_max = 0.0;
  for (std::size_t i = 0; i < response.size(); ++i) {
    fill_basis(blocks, response.grid().s(i), phi);
    Complex sigma{1.0, 0.0};
    for (std::size_t c = 0; c < phi.size(); ++c) sigma += sigma_res(static_cast<Eigen::Index>(c)) * phi[c];
    sigma_max = std::max(sigma_max, std::abs(sigma));
  }
  out.sigma_degenerate = sigma_max < 1e-8;
  return out;
}

std::vector<Complex> relocate_poles(const FrequencyResponse& response,
                                    const std::vector<Complex>& poles, const VfOptions& opts) {
  return relocate_poles_step(response, poles, opts).poles;
}

RationalModel fit_residues(const FrequencyResponse& response, const std::vector<Complex>& poles,
                           const VfOptions& opts) {
  const auto blocks = to_blocks(poles);
  for (const auto& b : blocks)
    if (!(b.pole.real() < 0.0)) throw DataError("fit_residues: poles must be stable");

  const auto m = static_cast<Eigen::Index>(response.size());
  const auto n = static_cast<Eigen::Index>(poles.size());
  const Eigen::Index cols = n + (opts.include_d ? 1 : 0) + (opts.include_h ? 1 : 0);
  const auto weights = effective_weights(opts, response.size());

  Eigen::MatrixXd a(2 * m, cols);
  Eigen::VectorXd rhs(2 * m);
  std::vector<Complex> phi;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const Complex s = response.grid().s(iu);
    const double w = weights[iu];
    fill_basis(blocks, s, phi);
    Eigen::Index c = 0;
    for (const auto& f : phi) {
      a(i, c) = w * f.real();
      a(m + i, c) = w * f.imag();
      ++c;
    }
    if (opts.include_d) {
      a(i, c) = w;
      a(m + i, c) = 0.0;
      ++c;
    }
    if (opts.include_h) {
      a(i, c) = w * s.real();
      a(m + i, c) = w * s.imag();
    }
    rhs(i) = w * response[iu].real();
    rhs(m + i) = w * response[iu].imag();
  }

  const auto sol = detail::solve_column_scaled(a, rhs, "residue identification");

  RationalModel model;
  model.poles = flatten_poles(blocks);
  model.residues = unpack_residues(blocks, sol.x, 0);
  Eigen::Index c = n;
  model.includes_d = opts.include_d;
  model.includes_h = opts.include_h;
  if (opts.include_d) model.d = sol.x(c++);
  if (opts.include_h) model.h = sol.x(c);
  return model;
}

double weighted_rms_error(const FrequencyResponse& response, const RationalModel& model,
                          const std::vector<double>& weights) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < response.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    num += w * w * std::norm(response[i] - evaluate_model(model, response.grid().s(i)));
    den += w * w;
  }
  return std::sqrt(num / den);
}

VfResult vector_fit(const FrequencyResponse& response, const VfOptions& opts) {
  opts.validate(response.size());

  VfResult best;
  best.diagnostics.seed = opts.seed;
  best.diagnostics.odd_order = opts.order % 2 == 1;
  double best_rms = std::numeric_limits<double>::infinity();

  const double data_rms = response.rms();
  std::uint64_t rng_state = opts.seed;
  std::vector<Complex> poles = initial_poles(response.grid(), opts.order);

  constexpr int kMaxRestarts = 3;
  VfDiagnostics diag = best.diagnostics;
  int restarts = 0;
  double prev_rms = std::numeric_limits<double>::quiet_NaN();
  for (int it = 0; it < opts.max_iterations; ++it) {
    const auto step = relocate_poles_step(response, poles, opts);
    if (step.sigma_degenerate && restarts < kMaxRestarts) {
      ++restarts;
      poles = randomized_start(response.grid(), opts.order, rng_state);
      diag = VfDiagnostics{};
      diag.seed = opts.seed;
      diag.odd_order = opts.order % 2 == 1;
      best_rms = std::numeric_limits<double>::infinity();
      prev_rms = std::numeric_limits<double>::quiet_NaN();
      it = -1;
      continue;
    }
    poles = step.poles;
    RationalModel model = fit_residues(response, poles, opts);
    const double rms = weighted_rms_error(response, model, opts.weights);

    diag.iterations_run = it + 1;
    diag.rms_error_history.push_back(rms);
    diag.poles_flipped_per_iteration.push_back(step.flipped);
    diag.system_condition_estimate = step.condition_estimate;

    if (rms < best_rms || diag.rms_error_history.size() == 1) {
      best_rms = rms;
      best.model = std::move(model);
    }
    const bool floor_reached = rms <= 1e-13 * data_rms;
    if (floor_reached ||
        (std::isfinite(prev_rms) && prev_rms > 0.0 && std::abs(prev_rms - rms) / prev_rms < opts.convergence_tol)) {
      diag.converged = true;
      break;
    }
    prev_rms = rms;
  }

  diag.restarts = restarts;
  diag.final_rms_error = best_rms;
  best.diagnostics = std::move(diag);
  best.model.validate();
  return best;
}

}  // namespace vfshm
