#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "vfshm/core_types.hpp"

namespace testsupport {

using vfshm::Complex;

// Random stable, conjugate-closed model: one pair per stratum of the band,
// damping ratios in [zeta_lo, zeta_hi], residues scaled so every resonance
// peak has comparable height.
inline vfshm::RationalModel random_model(std::mt19937_64& rng, int pairs, double f_lo, double f_hi,
                                         double zeta_lo = 0.005, double zeta_hi = 0.03) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  vfshm::RationalModel m;
  const double lo = f_lo * 1.03;
  const double hi = f_hi * 0.97;
  const double width = (hi - lo) / pairs;
  for (int k = 0; k < pairs; ++k) {
    const double f = lo + width * (k + 0.2 + 0.6 * u(rng));
    const double zeta = zeta_lo + (zeta_hi - zeta_lo) * u(rng);
    const double w = vfshm::kTwoPi * f;
    const Complex p(-zeta * w, w * std::sqrt(1.0 - zeta * zeta));
    const double mag = zeta * w * (0.5 + 1.5 * u(rng));
    const Complex c = std::polar(mag, vfshm::kTwoPi * u(rng));
    m.poles.push_back(p);
    m.poles.push_back(std::conj(p));
    m.residues.push_back(c);
    m.residues.push_back(std::conj(c));
  }
  m.d = 2.0 * u(rng) - 1.0;
  m.h = (2.0 * u(rng) - 1.0) * 0.1 / (vfshm::kTwoPi * f_hi);
  return m;
}

inline std::vector<Complex> sorted_poles(std::vector<Complex> p) {
  std::sort(p.begin(), p.end(), [](Complex a, Complex b) {
    return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real();
  });
  return p;
}

// Largest |a_i - b_i| / |b_i| after sorting both sets by imaginary part.
inline double max_pole_rel_error(const std::vector<Complex>& estimate, const std::vector<Complex>& truth) {
  if (estimate.size() != truth.size()) return INFINITY;
  const auto a = sorted_poles(estimate);
  const auto b = sorted_poles(truth);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]) / std::abs(b[i]));
  return worst;
}

inline vfshm::FrequencyResponse with_noise(const vfshm::FrequencyResponse& h, double snr_db, std::uint64_t seed) {
  const double sigma = h.rms() / std::pow(10.0, snr_db / 20.0) / std::sqrt(2.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<Complex> v(h.values().begin(), h.values().end());
  for (auto& z : v) {
    const double re = g(rng);
    const double im = g(rng);
    z += Complex(re, im);
  }
  return vfshm::FrequencyResponse(h.grid(), std::move(v));
}

}  // namespace testsupport
