#include "doctest.h"

#include <cmath>
#include <numbers>

#include "pulsegate/phasespace.hpp"
#include "random_sequences.hpp"

using namespace pulsegate;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("circle function values") {
  CHECK(std::abs(circle_fn(0.0, 2.5) - cplx{0.0, -2.5}) < 1e-15);
  CHECK(std::abs(circle_fn(kTwoPi / 1.3, 1.3)) < 1e-15);
  CHECK(std::abs(circle_fn(kPi, 1.0) - cplx{2.0 / kPi, 0.0}) < 1e-15);
  CHECK_THROWS_AS(circle_fn(1.0, -1.0), std::invalid_argument);
  // Continuity through the series switch and against the naive formula.
  for (double w : {1e-9, 1e-6, 0.99e-4, 1.01e-4, 1e-3, 0.7, 13.0}) {
    const double tau = 1.7;
    const cplx naive = (1.0 - std::exp(kI * w * tau)) / w;
    const double tol = w < 1e-3 ? 1e-8 : 1e-13;
    CHECK(std::abs(circle_fn(w, tau) - naive) < tol);
  }
}

TEST_CASE("series helpers agree with direct formulas away from the removable points") {
  for (double x : {0.3, 0.49, 0.51, 1.0, 4.0, -2.2}) {
    const cplx ix{0.0, x};
    CHECK(std::abs(detail::phase_e1(x) - (std::exp(ix) - 1.0) / ix) < 1e-14);
    CHECK(std::abs(detail::phase_e2(x) - (std::exp(ix) - 1.0 - ix) / (ix * ix)) < 1e-12);
  }
  for (double a : {-9.0, -3.0, 0.0, 2.5, 6.0}) {
    for (double b : {1e-7, 1e-3, 0.049, 0.051, 0.3}) {
      const cplx direct = (detail::phase_e1(a + b) - detail::phase_e1(a)) / b;
      const double tol = b < 1e-2 ? 1e-7 : 1e-12;
      CHECK(std::abs(detail::phase_e1_divided(a, b) - direct) < tol);
    }
    // b = 0 limit: derivative of E1 at a.
    const double h = 1e-5;
    const cplx deriv = (detail::phase_e1(a + h) - detail::phase_e1(a - h)) / (2.0 * h);
    CHECK(std::abs(detail::phase_e1_divided(a, 0.0) - deriv) < 1e-8);
  }
}

TEST_CASE("pulse_A_pm trivial cases") {
  Pulse p{0.3, 2.0, 0.0, 1.5, 0.2};
  const PlusMinus z = pulse_A_pm(p, 1.0, p.t_end());
  CHECK(z.plus == cplx{});
  CHECK(z.minus == cplx{});

  // delta+ (t - t_n) = 2 pi closes the co-rotating arch.
  p.amplitude = 0.7;
  p.omega = 2.0;
  p.duration = kTwoPi / (1.0 + p.omega);
  CHECK(std::abs(pulse_A_pm(p, 1.0, p.t_end()).plus) < 1e-15);
  CHECK(std::abs(pulse_A_pm(p, 1.0, p.t_end()).minus) > 0.1);
}

TEST_CASE("single pulse: area integrals reduce to the per-pulse B terms") {
  PulseSequence s;
  s.pulses.push_back({0.0, 2.2, 0.8, 3.1, 0.5});
  const std::vector<cplx> amps{0.8};
  const OrbitSummary o = accumulate_orbit(s, 1.0, amps);
  CHECK(o.alpha_plus[0] == cplx{});
  CHECK(o.alpha_minus[0] == cplx{});
  CHECK(o.delta_alpha_plus == o.A_plus[0]);
  // The interior of one pulse: the orbit is a cycloid whose area follows
  // from direct integration of alpha* alpha'.
  const double tau = 2.2, w = 3.1, dp = 1.0 + w, dm = 1.0 - w;
  const cplx expected_b0 =
      0.64 * (kI * tau / dp + (1.0 - std::exp(kI * dp * tau)) / (dp * dp) + kI * tau / dm +
              (1.0 - std::exp(kI * dm * tau)) / (dm * dm));
  CHECK(rel(o.I0, expected_b0) < 1e-12);
}

TEST_CASE("displacement additivity and prefix sums") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const PulseSequence s = testing::random_sequence(seed);
    std::vector<cplx> amps;
    for (const auto& p : s.pulses) amps.emplace_back(p.amplitude);
    const OrbitSummary o = accumulate_orbit(s, 1.0, amps);
    cplx sp{}, sm{};
    for (std::size_t k = 0; k < s.size(); ++k) {
      CHECK(std::abs(o.alpha_plus[k] - sp) < 1e-14);
      CHECK(std::abs(o.alpha_minus[k] - sm) < 1e-14);
      sp += o.A_plus[k];
      sm += o.A_minus[k];
    }
    CHECK(std::abs(o.delta_alpha_plus - sp) < 1e-14);
    CHECK(std::abs(o.delta_alpha_minus - sm) < 1e-14);
  }
}

TEST_CASE("phi_o grid identities for displacement and orbit phase") {
  const TrapConfig trap;
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const PulseSequence s = testing::random_sequence(seed);
    for (auto mode : kModes) {
      const OrbitSummary o = accumulate_orbit(s, trap, mode, mode_amplitudes(s, trap, mode));
      const int n = 256;
      double mean_d2 = 0.0, mean_phi = 0.0, mean_phi2 = 0.0, ellipse = 0.0;
      for (int k = 0; k < n; ++k) {
        const double phi = kTwoPi * k / n;
        const PhaseComposition c = compose_at_phase(o, phi);
        mean_d2 += std::norm(c.delta_alpha) / n;
        mean_phi += c.Phi / n;
        mean_phi2 += c.Phi * c.Phi / n;
        // Ellipse decomposition against an independent evaluation from the
        // per-pulse displacements at this phase.
        cplx direct{};
        for (const auto& p : s.pulses) {
          Pulse q = p;
          q.dphi += phi;
          const PlusMinus a = pulse_A_pm(q, trap.frequency(mode), q.t_end(),
                                         p.amplitude * trap.eta(mode) / trap.eta_c);
          direct += a.plus + a.minus;
        }
        ellipse = std::max(ellipse, std::abs(direct - c.delta_alpha));
      }
      const double scale = std::max(1.0, std::norm(o.delta_alpha_plus) +
                                             std::norm(o.delta_alpha_minus));
      CHECK(ellipse < 1e-12 * std::sqrt(scale));
      CHECK(std::abs(mean_d2 - std::norm(o.delta_alpha_plus) -
                     std::norm(o.delta_alpha_minus)) < 1e-10 * scale);
      const double var = mean_phi2 - mean_phi * mean_phi;
      const double expected = 0.5 * std::norm(o.I_plus - std::conj(o.I_minus));
      CHECK(std::abs(mean_phi - o.I0.imag()) < 1e-10 * std::max(1.0, std::abs(o.I0)));
      CHECK(std::abs(var - expected) < 1e-10 * std::max(1.0, expected));
    }
  }
}

TEST_CASE("I+ = conj(I-) makes the orbit phase phase-insensitive and conversely") {
  OrbitSummary o;
  o.I0 = {0.3, 1.2};
  o.I_plus = {0.4, -0.7};
  o.I_minus = std::conj(o.I_plus);
  const double phi0 = compose_at_phase(o, 0.0).Phi;
  for (int k = 0; k < 64; ++k) {
    CHECK(std::abs(compose_at_phase(o, kTwoPi * k / 64).Phi - phi0) < 1e-10);
  }
  o.I_minus += cplx{1e-3, 0.0};
  double spread = 0.0;
  for (int k = 0; k < 64; ++k) {
    spread = std::max(spread, std::abs(compose_at_phase(o, kTwoPi * k / 64).Phi - phi0));
  }
  CHECK(spread > 1e-4);
}

TEST_CASE("closure at every phase iff both components vanish") {
  OrbitSummary o;
  for (int k = 0; k < 32; ++k) {
    CHECK(compose_at_phase(o, kTwoPi * k / 32).delta_alpha == cplx{});
  }
  o.delta_alpha_plus = {1e-6, 0.0};
  bool open_somewhere = false;
  for (int k = 0; k < 32; ++k) {
    open_somewhere |= std::abs(compose_at_phase(o, kTwoPi * k / 32).delta_alpha) > 0.0;
  }
  CHECK(open_somewhere);
  // Equal magnitudes: the ellipse degenerates to a segment but still opens.
  o.delta_alpha_minus = {-1e-6, 0.0};
  CHECK(std::abs(compose_at_phase(o, 0.0).delta_alpha) == doctest::Approx(0.0));
  CHECK(std::abs(compose_at_phase(o, kPi / 2).delta_alpha) > 1e-6);
}

TEST_CASE("time translation covariance") {
  const TrapConfig trap;
  for (std::uint64_t seed = 200; seed < 210; ++seed) {
    const PulseSequence s = testing::random_sequence(seed);
    PulseSequence shifted = s;
    const double dt = 3.7;
    for (auto& p : shifted.pulses) {
      p.t_start += dt;
      p.dphi -= p.omega * dt;
    }
    for (auto mode : kModes) {
      const auto amps = mode_amplitudes(s, trap, mode);
      const OrbitSummary a = accumulate_orbit(s, trap, mode, amps);
      const OrbitSummary b = accumulate_orbit(shifted, trap, mode, amps);
      CHECK(std::abs(a.delta_alpha_plus) ==
            doctest::Approx(std::abs(b.delta_alpha_plus)).epsilon(1e-12));
      CHECK(std::abs(a.delta_alpha_minus) ==
            doctest::Approx(std::abs(b.delta_alpha_minus)).epsilon(1e-12));
      CHECK(std::abs(a.I_plus - std::conj(a.I_minus)) ==
            doctest::Approx(std::abs(b.I_plus - std::conj(b.I_minus))).epsilon(1e-12));
      CHECK(a.I0.imag() == doctest::Approx(b.I0.imag()).epsilon(1e-12));
    }
    std::vector<cplx> ls;
    for (const auto& p : s.pulses) ls.emplace_back(p.amplitude);
    CHECK(std::abs(lightshift_theta_plus(s, ls)) ==
          doctest::Approx(std::abs(lightshift_theta_plus(shifted, ls))).epsilon(1e-12));
  }
}

TEST_CASE("light shift trivial cases") {
  PulseSequence s;
  s.pulses.push_back({0.0, 2.0, 1.0, kTwoPi * 3 / 2.0, 0.0});
  const std::vector<cplx> zero{0.0}, one{1.0};
  CHECK(lightshift_theta_plus(s, zero) == cplx{});
  CHECK(std::abs(lightshift_theta_plus(s, one)) < 1e-15);
  CHECK_THROWS_AS(lightshift_theta_plus(s, std::vector<cplx>{}), std::invalid_argument);
}

TEST_CASE("trajectory: zero drive, endpoint consistency, gaps hold still") {
  const TrapConfig trap;
  PulseSequence zero;
  zero.pulses.push_back({0.0, 1.0, 0.0, 2.0, 0.0});
  for (const auto& pt : orbit_trajectory(zero, trap, Mode::kCom, 0.3, 8)) {
    CHECK(pt.alpha == cplx{});
  }
  CHECK_THROWS_AS(orbit_trajectory(zero, trap, Mode::kCom, 0.0, 1), std::invalid_argument);

  for (std::uint64_t seed = 300; seed < 305; ++seed) {
    const PulseSequence s = testing::random_sequence(seed);
    for (auto mode : kModes) {
      for (double phi : {0.0, 1.1}) {
        const auto traj = orbit_trajectory(s, trap, mode, phi, 9);
        const OrbitSummary o = accumulate_orbit(s, trap, mode, mode_amplitudes(s, trap, mode));
        CHECK(std::abs(traj.back().alpha - compose_at_phase(o, phi).delta_alpha) < 1e-13);
        CHECK(std::abs(traj.front().alpha) < 1e-15);
        for (std::size_t k = 1; k < s.size(); ++k) {
          // Last sample of pulse k-1 equals first sample of pulse k.
          CHECK(std::abs(traj[9 * k].alpha - traj[9 * k - 1].alpha) < 1e-15);
        }
      }
    }
  }
}

TEST_CASE("translation identity: an optical phase shift moves the orbit along itself") {
  // One long pulse on the COM mode; alpha at phase phi equals the phi = 0
  // orbit advanced by t_d = phi / omega, rotated by -omega_0 t_d and
  // re-anchored at the start.
  const double w = 2.7, w0 = 1.0;
  const Pulse p{0.0, 6.0, 0.9, w, 0.35};
  for (double phi : {0.4, 1.9, 3.0}) {
    const double td = phi / w;
    const cplx rot = std::exp(-kI * w0 * td);
    Pulse shifted = p;
    shifted.dphi += phi;
    auto alpha = [&](const Pulse& q, double t) {
      const PlusMinus a = pulse_A_pm(q, w0, t);
      return a.plus + a.minus;
    };
    double worst = 0.0;
    for (int k = 0; k <= 40; ++k) {
      const double t = p.duration * k / 40.0;
      const cplx lhs = alpha(shifted, t);
      const cplx rhs = rot * (alpha(p, t + td) - alpha(p, p.t_start + td));
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("resonant detunings are continuous") {
  // delta- -> 0 when omega_n -> omega_0; compare against a hair off resonance.
  PulseSequence s;
  s.pulses.push_back({0.0, 1.3, 1.0, 1.0, 0.2});
  s.pulses.push_back({1.6, 0.9, -0.6, 1.0, 1.0});
  const std::vector<cplx> amps{1.0, -0.6};
  const OrbitSummary at = accumulate_orbit(s, 1.0, amps);
  for (auto& p : s.pulses) p.omega = 1.0 + 1e-9;
  const OrbitSummary near = accumulate_orbit(s, 1.0, amps);
  CHECK(std::abs(at.I0 - near.I0) < 1e-7);
  CHECK(std::abs(at.I_plus - near.I_plus) < 1e-7);
  CHECK(std::abs(at.I_minus - near.I_minus) < 1e-7);
  CHECK(std::isfinite(at.I0.real()));
  // omega_n = 0 makes delta+ = delta- and the 2 omega tau argument vanish.
  for (auto& p : s.pulses) p.omega = 0.0;
  const OrbitSummary dc = accumulate_orbit(s, 1.0, amps);
  for (auto& p : s.pulses) p.omega = 1e-9;
  const OrbitSummary dc_near = accumulate_orbit(s, 1.0, amps);
  CHECK(std::abs(dc.I_plus - dc_near.I_plus) < 1e-7);
  CHECK(std::abs(dc.I_minus - dc_near.I_minus) < 1e-7);
}
