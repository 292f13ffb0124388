#include "vfshm/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vfshm/errors.hpp"

namespace vfshm {

FrequencyGrid::FrequencyGrid(std::vector<double> hz) : hz_(std::move(hz)) {
  if (hz_.size() < 2) throw DataError("frequency grid needs at least 2 points");
  for (std::size_t i = 0; i < hz_.size(); ++i) {
    if (!std::isfinite(hz_[i]) || hz_[i] <= 0.0)
      throw DataError("frequency grid point " + std::to_string(i) + " is not a positive finite value");
    if (i > 0 && !(hz_[i] > hz_[i - 1]))
      throw DataError("frequency grid is not strictly increasing at point " + std::to_string(i));
  }
}

FrequencyGrid FrequencyGrid::linspace(double f_lo, double f_hi, std::size_t count) {
  if (count < 2 || !(f_hi > f_lo)) throw ConfigError("linspace needs count >= 2 and f_hi > f_lo");
  std::vector<double> hz(count);
  const double step = (f_hi - f_lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) hz[i] = f_lo + step * static_cast<double>(i);
  hz.back() = f_hi;
  return FrequencyGrid(std::move(hz));
}

FrequencyResponse::FrequencyResponse(FrequencyGrid grid, std::vector<Complex> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw DataError("response has " + std::to_string(values_.size()) + " values for " +
                    std::to_string(grid_.size()) + " grid points");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i].real()) || !std::isfinite(values_[i].imag()))
      throw DataError("response value at " + std::to_string(grid_[i]) + " Hz is not finite");
  }
}

FrequencyResponse FrequencyResponse::restricted(double f_lo, double f_hi) const {
  std::vector<double> hz;
  std::vector<Complex> values;
  for (std::size_t i = 0; i < size(); ++i) {
    if (grid_[i] >= f_lo && grid_[i] <= f_hi) {
      hz.push_back(grid_[i]);
      values.push_back(values_[i]);
    }
  }
  if (hz.size() < 2)
    throw DataError("band [" + std::to_string(f_lo) + ", " + std::to_string(f_hi) +
                    "] Hz leaves fewer than 2 samples");
  return FrequencyResponse(FrequencyGrid(std::move(hz)), std::move(values));
}

double FrequencyResponse::rms() const {
  double acc = 0.0;
  for (const auto& v : values_) acc += std::norm(v);
  return std::sqrt(acc / static_cast<double>(values_.size()));
}

void RationalModel::validate() const {
  if (poles.size() != residues.size())
    throw DataError("model has " + std::to_string(poles.size()) + " poles but " +
                    std::to_string(residues.size()) + " residues");
  for (const auto& p : poles) {
    if (!(p.real() < 0.0)) throw DataError("model pole has non-negative real part");
  }
  for (std::size_t i = 0; i < poles.size(); ++i) {
    if (poles[i].imag() == 0.0) {
      if (residues[i].imag() != 0.0) throw DataError("real pole carries a complex residue");
      continue;
    }
    // Locate the conjugate partner and check its residue.
    const double scale = std::abs(poles[i]);
    auto it = std::find_if(poles.begin(), poles.end(), [&](const Complex& q) {
      return std::abs(q - std::conj(poles[i])) <= 1e-9 * scale;
    });
    if (it == poles.end()) throw DataError("model poles are not closed under conjugation");
    const auto j = static_cast<std::size_t>(it - poles.begin());
    const double rscale = std::max(std::abs(residues[i]), 1e-300);
    if (std::abs(residues[j] - std::conj(residues[i])) > 1e-9 * rscale)
      throw DataError("conjugate poles carry non-conjugate residues");
  }
  if (!std::isfinite(d) || !std::isfinite(h)) throw DataError("model d/h not finite");
}

Complex evaluate_model(const RationalModel& model, Complex s) {
  Complex acc{model.d, 0.0};
  acc += s * model.h;
  for (std::size_t n = 0; n < model.poles.size(); ++n) acc += model.residues[n] / (s - model.poles[n]);
  return acc;
}

FrequencyResponse evaluate_model(const RationalModel& model, const FrequencyGrid& grid) {
  std::vector<Complex> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = evaluate_model(model, grid.s(i));
    if (!std::isfinite(values[i].real()) || !std::isfinite(values[i].imag()))
      throw NumericError("model evaluation overflowed at " + std::to_string(grid[i]) + " Hz");
  }
  return FrequencyResponse(grid, std::move(values));
}

ModalParameters poles_to_modal(std::span<const Complex> poles, PoleUnits units) {
  ModalParameters out;
  const double to_hz = units == PoleUnits::RadPerSecond ? 1.0 / kTwoPi : 1.0;
  for (const auto& p : poles) {
    if (!(p.real() < 0.0)) throw DataError("unstable pole (Re >= 0) cannot be converted to a mode");
    const double mag = std::abs(p);
    if (std::abs(p.imag()) <= 1e-12 * mag) {
      out.overdamped.push_back(p);
      continue;
    }
    if (p.imag() < 0.0) continue;
    out.modes.push_back(Mode{mag * to_hz, -p.real() / mag, p});
  }
  std::sort(out.modes.begin(), out.modes.end(),
            [](const Mode& a, const Mode& b) { return a.frequency_hz < b.frequency_hz; });
  return out;
}

bool is_conjugate_closed(std::span<const Complex> poles, double rel_tol) {
  for (const auto& p : poles) {
    if (p.imag() == 0.0) continue;
    const double scale = std::abs(p);
    const bool found = std::any_of(poles.begin(), poles.end(), [&](const Complex& q) {
      return std::abs(q - std::conj(p)) <= rel_tol * scale;
    });
    if (!found) return false;
  }
  return true;
}

}  // namespace vfshm
