#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace vfshm {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Strictly increasing, positive sample frequencies in Hz.
class FrequencyGrid {
 public:
  explicit FrequencyGrid(std::vector<double> hz);

  /// `count` points evenly spaced over [f_lo, f_hi], endpoints included.
  static FrequencyGrid linspace(double f_lo, double f_hi, std::size_t count);

  std::size_t size() const noexcept { return hz_.size(); }
  std::span<const double> hz() const noexcept { return hz_; }
  double operator[](std::size_t i) const { return hz_[i]; }
  double front() const { return hz_.front(); }
  double back() const { return hz_.back(); }

  /// Laplace variable on the imaginary axis, s = i 2 pi f.
  Complex s(std::size_t i) const { return {0.0, kTwoPi * hz_[i]}; }

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  std::vector<double> hz_;
};

/// Complex samples (impedance or FRF) on a FrequencyGrid.
class FrequencyResponse {
 public:
  FrequencyResponse(FrequencyGrid grid, std::vector<Complex> values);

  const FrequencyGrid& grid() const noexcept { return grid_; }
  std::span<const Complex> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  Complex operator[](std::size_t i) const { return values_[i]; }

  /// Samples with f_lo <= f <= f_hi. Throws DataError if fewer than two remain.
  FrequencyResponse restricted(double f_lo, double f_hi) const;

  /// Root-mean-square magnitude of the samples.
  double rms() const;

  friend bool operator==(const FrequencyResponse&, const FrequencyResponse&) = default;

 private:
  FrequencyGrid grid_;
  std::vector<Complex> values_;
};

/// Pole-residue model  sum_n c_n / (s - a_n) + d + s h,  poles in rad/s.
///
/// Poles are strictly stable and closed under conjugation, with conjugate
/// residues on conjugate poles. Pairs are stored adjacently with the
/// positive-imaginary member first; real poles stand alone.
struct RationalModel {
  std::vector<Complex> poles;
  std::vector<Complex> residues;
  double d = 0.0;
  double h = 0.0;
  bool includes_d = true;
  bool includes_h = true;

  /// Throws DataError if any invariant is violated.
  void validate() const;
  std::size_t order() const noexcept { return poles.size(); }
};

FrequencyResponse evaluate_model(const RationalModel& model, const FrequencyGrid& grid);
Complex evaluate_model(const RationalModel& model, Complex s);

struct Mode {
  double frequency_hz = 0.0;
  double damping_ratio = 0.0;
  Complex pole;  // positive-imaginary representative, same units as the input
};

struct ModalParameters {
  std::vector<Mode> modes;             // ascending frequency
  std::vector<Complex> overdamped;     // real poles, excluded from modes
};

enum class PoleUnits {
  RadPerSecond,  // |pole| / 2 pi is the frequency in Hz
  Hz,            // |pole| is the frequency in Hz (Hz-scaled pole convention)
};

/// One mode per conjugate pair: f = |p| (/2 pi), zeta = -Re p / |p|.
/// Throws DataError on a pole with Re >= 0.
ModalParameters poles_to_modal(std::span<const Complex> poles,
                               PoleUnits units = PoleUnits::RadPerSecond);

/// True if every pole has a partner within `rel_tol` of its conjugate.
bool is_conjugate_closed(std::span<const Complex> poles, double rel_tol = 1e-9);

}  // namespace vfshm
