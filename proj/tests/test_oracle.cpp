#include "doctest.h"

#include <cmath>
#include <numbers>

#include "pulsegate/fidelity.hpp"
#include "pulsegate/oracle.hpp"
#include "random_sequences.hpp"

using namespace pulsegate;
using namespace pulsegate::oracle;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

double rel(cplx got, cplx want, double scale) {
  return std::abs(got - want) / std::max(std::abs(want), scale);
}

}  // namespace

TEST_CASE("integrate: polynomial, oscillatory and failure modes") {
  const auto r = integrate<1>([](double x) { return CVec<1>{cplx{x * x * x, 1.0}}; }, 0.0,
                              2.0, 1e-13);
  CHECK(std::abs(r.value[0] - cplx{4.0, 2.0}) < 1e-13);
  const cplx osc = integrate_scalar([](double x) { return std::exp(kI * 40.0 * x); }, 0.0,
                                    1.0, 1e-12);
  CHECK(std::abs(osc - (std::exp(kI * 40.0) - 1.0) / (kI * 40.0)) < 1e-13);
  CHECK(integrate<1>([](double) { return CVec<1>{}; }, 0.0, 1.0, 1e-12).value[0] == cplx{});
  CHECK_THROWS_AS(integrate<1>([](double x) { return CVec<1>{std::sin(1.0 / x)}; }, 1e-9,
                               1.0, 1e-13, 8),
                  QuadratureError);
  CHECK_THROWS_AS(integrate_scalar([](double) { return cplx{}; }, 0.0, 1.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("quad_delta_alpha: trivial values and tolerance contract") {
  PulseSequence s;
  s.pulses.push_back({0.0, 2.0, 0.0, 3.0, 0.0});
  const ForceSpec zero = ForceSpec::from(s, TrapConfig{}, Mode::kCom);
  CHECK(quad_delta_alpha(zero, 0.4, 2.0, 1e-12) == cplx{});
  CHECK(zero.drive(5.0, 0.0) == 0.0);
  CHECK_THROWS_AS(quad_delta_alpha(zero, 0.0, 2.0, 1e-14), std::invalid_argument);
  CHECK_THROWS_AS(quad_delta_alpha(zero, 0.0, 2.0, 1e-5), std::invalid_argument);

  // delta- tau = 2 pi: only the co-rotating exponential survives.
  const double w = 0.5;
  const double tau = kTwoPi / (1.0 - w);
  PulseSequence one;
  one.pulses.push_back({0.0, tau, 0.3, w, 0.0});
  const ForceSpec spec = ForceSpec::from(one, TrapConfig{}, Mode::kCom);
  const double dp = 1.0 + w;
  const cplx expected = 0.3 * (std::exp(kI * dp * tau) - 1.0) / (kI * dp);
  CHECK(std::abs(quad_delta_alpha(spec, 0.0, tau, 1e-12) - expected) < 1e-12);
}

TEST_CASE("quadrature agrees with the closed forms on random sequences") {
  const TrapConfig trap;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const PulseSequence s = testing::random_sequence(seed);
    for (auto mode : kModes) {
      const auto amps = mode_amplitudes(s, trap, mode);
      const OrbitSummary o = accumulate_orbit(s, trap, mode, amps);
      const ForceSpec spec = ForceSpec::from(s, trap, mode);
      const double scale = std::sqrt(total_area(s));
      const PlusMinus q = quad_delta_alpha_pm(spec, spec.t_end(), 1e-13);
      CHECK(rel(o.delta_alpha_plus, q.plus, 1e-3 * scale) < 1e-9);
      CHECK(rel(o.delta_alpha_minus, q.minus, 1e-3 * scale) < 1e-9);

      const OrbitIntegrals I = quad_orbit_integrals(spec, 1e-12);
      const double area_scale = 1e-3 * total_area(s) * total_area(s);
      CHECK(rel(o.I0, I.I0, area_scale) < 1e-9);
      CHECK(rel(o.I_plus, I.I_plus, area_scale) < 1e-9);
      CHECK(rel(o.I_minus, I.I_minus, area_scale) < 1e-9);

      const double phi = 0.37 * static_cast<double>(seed);
      const PhaseComposition c = compose_at_phase(o, phi);
      CHECK(rel(c.delta_alpha, quad_delta_alpha(spec, phi, spec.t_end(), 1e-13),
                1e-3 * scale) < 1e-9);
      const double phase_q = quad_orbit_phase(spec, phi, 1e-12);
      const double phase_a = quad_orbit_phase(spec, phi, 1e-12, AlphaSource::kAnalytic);
      CHECK(std::abs(c.Phi - phase_q) < 1e-8 * std::max(std::abs(phase_q), area_scale));
      CHECK(std::abs(c.Phi - phase_a) < 1e-8 * std::max(std::abs(phase_a), area_scale));
    }
    std::vector<cplx> ls;
    for (const auto& p : s.pulses) ls.emplace_back(p.amplitude);
    CHECK(rel(lightshift_theta_plus(s, ls), quad_theta_plus(s, ls, 1e-13),
              1e-3 * total_area(s)) < 1e-9);
  }
}

TEST_CASE("orbit phase is twice the enclosed area of a counter-clockwise loop") {
  // omega = omega_0 / 3 and tau = 3 pi close both rotating components.
  PulseSequence s;
  s.pulses.push_back({0.0, 3.0 * kPi, 0.4, 1.0 / 3.0, 0.2});
  const ForceSpec spec = ForceSpec::from(s, TrapConfig{}, Mode::kCom);
  CHECK(std::abs(quad_delta_alpha(spec, 0.0, spec.t_end(), 1e-12)) < 1e-12);
  const auto traj = quad_trajectory(spec, 0.0, 1500, 1e-12);
  double shoelace = 0.0;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const cplx a = traj[k].alpha, b = traj[k + 1].alpha;
    shoelace += 0.5 * (a.real() * b.imag() - b.real() * a.imag());
  }
  const double phase = quad_orbit_phase(spec, 0.0, 1e-12);
  CHECK(std::abs(shoelace) > 0.1);
  CHECK(phase == doctest::Approx(2.0 * shoelace).epsilon(1e-5));
}

TEST_CASE("halving the tolerance stays within the previous tolerance") {
  const TrapConfig trap;
  for (std::uint64_t seed = 40; seed < 46; ++seed) {
    const PulseSequence s = testing::random_sequence(seed);
    const ForceSpec spec = ForceSpec::from(s, trap, Mode::kStretch);
    for (double tol : {1e-7, 1e-9, 1e-11}) {
      const cplx a = quad_delta_alpha(spec, 0.8, spec.t_end(), tol);
      const cplx b = quad_delta_alpha(spec, 0.8, spec.t_end(), 0.5 * tol);
      CHECK(std::abs(a - b) <= tol * std::max(1.0, total_area(s)));
    }
  }
}

TEST_CASE("grid average of the infidelity") {
  const TrapConfig trap;
  const CouplingTable c = canonical_coupling();
  PulseSequence zero;
  zero.pulses.push_back({0.0, 1.0, 0.0, 2.0, 0.0});
  CHECK(grid_average_epsilon(zero, trap, c, 16) == doctest::Approx(kPi * kPi / 9.0));
  for (int k = 0; k < 16; ++k) {
    CHECK(gate_metrics(zero, trap, c, kTwoPi * k / 16).epsilon ==
          doctest::Approx(kPi * kPi / 9.0));
  }
  CHECK_THROWS_AS(grid_average_epsilon(zero, trap, c, 8), std::invalid_argument);

  for (std::uint64_t seed = 60; seed < 70; ++seed) {
    const PulseSequence s = testing::random_sequence(seed).scaled(0.3);
    const double closed = averaged_epsilon(s, trap, c);
    const double g256 = grid_average_epsilon(s, trap, c, 256);
    const double g512 = grid_average_epsilon(s, trap, c, 512);
    CHECK(std::abs(g256 - closed) < 1e-8 * std::max(1.0, closed));
    CHECK(std::abs(g512 - g256) < 1e-8 * std::max(1.0, closed));
  }
}
