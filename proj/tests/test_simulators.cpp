#include <cmath>
#include <complex>

#include "doctest.h"
#include "support.hpp"
#include "vfshm/errors.hpp"
#include "vfshm/simulators.hpp"
#include "vfshm/vector_fitting.hpp"

using namespace vfshm;

namespace {

const double kTableA1Hz[] = {116.51, 225.08, 318.31, 389.85, 434.82};
const double kTableA1Re[] = {-0.011, -0.040, -0.080, -0.119, -0.148};

double peak_frequency(const MdofSystem& sys, double around) {
  const auto g = FrequencyGrid::linspace(around - 0.5, around + 0.5, 20001);
  const auto h = mdof_frf(sys, g);
  std::size_t best = 0;
  for (std::size_t i = 1; i < h.size(); ++i)
    if (std::abs(h[i]) > std::abs(h[best])) best = i;
  return g[best];
}

}  // namespace

TEST_CASE("system validation") {
  auto s = reference_five_dof();
  CHECK_NOTHROW(s.validate());
  s.stiffnesses.pop_back();
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = reference_five_dof();
  s.masses[2] = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = reference_five_dof();
  s.response_dof = 5;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("single DOF static compliance") {
  const double k = std::pow(kTwoPi * 10.0, 2);
  MdofSystem s{{1.0}, {k / 2.0, k / 2.0}, {0.0, 0.0}, 0, 0};
  const Complex h = mdof_frf(s, 1e-4);
  CHECK(h.real() == doctest::Approx(1.0 / k).epsilon(1e-9));
  CHECK(std::abs(h.imag()) < 1e-15);
  const auto poles = mdof_poles(s);
  REQUIRE(poles.size() == 2);
  CHECK(std::abs(poles[0].imag()) == doctest::Approx(kTwoPi * 10.0));
}

TEST_CASE("reference 5-DoF: resonance peaks at the reference frequencies") {
  const auto sys = reference_five_dof();
  for (double f : kTableA1Hz) {
    CAPTURE(f);
    CHECK(std::abs(peak_frequency(sys, f) - f) <= 0.006);
  }
}

TEST_CASE("reference 5-DoF: poles in the Hz-scaled convention") {
  const auto poles = mdof_poles(reference_five_dof());
  REQUIRE(poles.size() == 10);
  CHECK(is_conjugate_closed(poles));
  std::size_t k = 0;
  for (const auto& p : poles) {
    if (p.imag() <= 0.0) continue;
    const Complex hz = p / kTwoPi;
    CAPTURE(k);
    CHECK(std::abs(hz.imag() - kTableA1Hz[k]) <= 0.005);
    CHECK(std::abs(hz.real() - kTableA1Re[k]) <= 0.0005);
    ++k;
  }
  CHECK(k == 5);
}

TEST_CASE("reciprocity") {
  auto a = reference_five_dof();
  a.force_dof = 0;
  a.response_dof = 4;
  auto b = a;
  b.force_dof = 4;
  b.response_dof = 0;
  const auto g = FrequencyGrid::linspace(100.0, 450.0, 351);
  const auto ha = mdof_frf(a, g);
  const auto hb = mdof_frf(b, g);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(ha[i] - hb[i]) <= 1e-12 * std::abs(ha[i]));
}

TEST_CASE("undamped system has purely imaginary poles") {
  auto s = reference_five_dof();
  s.damping_coeffs.assign(6, 0.0);
  for (const auto& p : mdof_poles(s)) CHECK(p.real() == 0.0);
}

TEST_CASE("apply_damage") {
  const auto sys = reference_five_dof();
  CHECK(apply_damage(sys, {{1, 1.0, 1.0}}) == sys);
  CHECK(apply_damage(sys, {}) == sys);
  const auto damaged = apply_damage(sys, {{1, 0.75, 1.25}});
  CHECK(damaged.stiffnesses[1] == doctest::Approx(150e3));
  CHECK(damaged.damping_coeffs[1] == doctest::Approx(0.0625));
  CHECK(sys.stiffnesses[1] == 200e3);
  CHECK(damaged == reference_five_dof_damaged());
  CHECK_THROWS_AS(apply_damage(sys, {{6, 0.5, 1.0}}), ConfigError);
  CHECK_THROWS_AS(apply_damage(sys, {{0, 0.0, 1.0}}), ConfigError);

  const auto half = apply_damage(sys, {{1, 0.5, 1.0}});
  const auto f_half = std::abs(mdof_poles(half)[0]);
  const auto f_quarter = std::abs(mdof_poles(damaged)[0]);
  CHECK(f_half < f_quarter);
}

TEST_CASE("partial-fraction identity between the FRF and the modal model") {
  for (const auto& sys : {reference_five_dof(), reference_five_dof_damaged()}) {
    const auto model = mdof_modal_model(sys);
    const auto g = FrequencyGrid::linspace(100.0, 450.0, 701);
    const auto direct = mdof_frf(sys, g);
    const auto modal = evaluate_model(model, g);
    for (std::size_t i = 0; i < g.size(); ++i)
      CHECK(std::abs(direct[i] - modal[i]) <= 1e-8 * std::abs(direct[i]));
  }
}

TEST_CASE("vector_fit closes the loop on simulated data") {
  for (const auto& sys : {reference_five_dof(), reference_five_dof_damaged()}) {
    const auto h = mdof_frf(sys, FrequencyGrid::linspace(100.0, 450.0, 3501));
    VfOptions o;
    o.order = 10;
    const auto fit = poles_to_modal(vector_fit(h, o).model.poles, PoleUnits::RadPerSecond);
    const auto truth = poles_to_modal(mdof_poles(sys), PoleUnits::RadPerSecond);
    REQUIRE(fit.modes.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(std::abs(fit.modes[i].frequency_hz / truth.modes[i].frequency_hz - 1.0) <= 1e-4);
      CHECK(std::abs(fit.modes[i].damping_ratio / truth.modes[i].damping_ratio - 1.0) <= 1e-2);
    }
  }
}

namespace {

using LComplex = std::complex<long double>;

// Step-by-step extended-precision evaluation of the coupled impedance,
// written literally from the formula with Zpzt formed explicitly.
LComplex emi_oracle(const PztParams& p, LComplex zst, long double w) {
  const LComplex i1(0.0L, 1.0L);
  const LComplex s11(p.s11E.real(), p.s11E.imag());
  const LComplex eps(p.eps33.real(), p.eps33.imag());
  const long double b = p.b, h = p.h, l = p.l, d = p.d13, rho = p.rho;
  const LComplex k = w * std::sqrt(rho * s11);
  const LComplex kl = k * l;
  const LComplex t = std::tan(kl) / kl;
  const LComplex zpzt = -i1 * b * h * l / (s11 * w * t);
  const LComplex bracket = d * d / s11 * (t * (zpzt / (zpzt + zst)) - 1.0L) + eps;
  return 1.0L / (i1 * w * (b * l / h) * bracket);
}

}  // namespace

TEST_CASE("emi: zero coupling gives the lossy capacitor") {
  auto p = pzt5h_wafer();
  p.d13 = 0.0;
  const auto g = FrequencyGrid::linspace(30e3, 100e3, 701);
  const auto r = emi_coupled_impedance(p, mdof_mechanical_impedance(reference_five_dof()), g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = kTwoPi * g[i];
    const Complex cap = 1.0 / (Complex(0.0, w) * (p.b * p.l / p.h) * p.eps33);
    CHECK(std::abs(r.impedance[i] - cap) <= 1e-12 * std::abs(cap));
  }
}

TEST_CASE("emi: blocked-structure limit") {
  const auto p = pzt5h_wafer();
  const auto g = FrequencyGrid::linspace(30e3, 100e3, 701);
  const auto r = emi_coupled_impedance(p, [](double) { return Complex(1e18, 0.0); }, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = kTwoPi * g[i];
    const Complex blocked = 1.0 / (Complex(0.0, w) * (p.b * p.l / p.h) * (p.eps33 - p.d13 * p.d13 / p.s11E));
    CHECK(std::abs(r.impedance[i] - blocked) <= 1e-9 * std::abs(blocked));
  }
}

TEST_CASE("emi: agrees with an extended-precision step-by-step evaluation") {
  const auto p = pzt5h_wafer();
  const auto zfun = mdof_mechanical_impedance(reference_five_dof());
  for (double f : {1e3, 3.3e4, 7.7e4, 1.2e5, 2.5e5}) {
    const auto g = FrequencyGrid({f, f * 1.001});
    const auto r = emi_coupled_impedance(p, zfun, g);
    const double w = kTwoPi * f;
    const Complex zst = zfun(w);
    const LComplex ref = emi_oracle(p, LComplex(zst.real(), zst.imag()), w);
    const Complex refd(static_cast<double>(ref.real()), static_cast<double>(ref.imag()));
    CAPTURE(f);
    CHECK(std::abs(r.impedance[0] - refd) <= 1e-12 * std::abs(refd));
  }
}

TEST_CASE("emi: capacitive (negative reactance) across the band") {
  MdofSystem host;
  host.masses.assign(5, 1e-3);
  host.stiffnesses.assign(6, 9.87e7);
  host.damping_coeffs.assign(6, 0.6);
  const auto g = FrequencyGrid::linspace(30e3, 100e3, 1401);
  const auto r = emi_coupled_impedance(pzt5h_wafer(), mdof_mechanical_impedance(host), g);
  CHECK(r.flagged.empty());
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(r.impedance[i].imag() < 0.0);
}

TEST_CASE("emi: a point on the tan pole is flagged, not fatal") {
  auto p = pzt5h_wafer();
  p.s11E = Complex(16.5e-12, 0.0);
  // kl = pi/2 exactly
  const double f = (M_PI / 2.0) / (p.l * std::sqrt(p.rho * p.s11E.real())) / kTwoPi;
  const auto g = FrequencyGrid({f * 0.5, f, f * 1.5});
  const auto r = emi_coupled_impedance(p, [](double) { return Complex(10.0, -5.0); }, g);
  REQUIRE(r.flagged.size() == 1);
  CHECK(r.flagged[0] == 1);
  CHECK(std::isfinite(std::abs(r.impedance[1])));
}
