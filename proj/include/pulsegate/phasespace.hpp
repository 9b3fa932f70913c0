#pragma once

// Closed-form phase-space kinematics of a harmonic mode driven by a train of
// square force pulses: per-pulse displacement components, their prefix sums,
// the orbit-area integrals and the optical-phase dependent light shift.
//
// A pulse of effective amplitude z (complex; |z| is the force amplitude and
// arg z an extra phase offset) drives
//   d alpha / dt = z e^{i dphi} e^{i d+ t} e^{i phi_o} - conj(z) e^{-i dphi} e^{i d- t} e^{-i phi_o}
// with d+- = omega_0 +- omega_n, in the interaction picture of the mode.

#include <span>
#include <vector>

#include "pulsegate/core.hpp"

namespace pulsegate {

/// C(omega) = (1 - exp(i omega tau)) / omega, continuous through omega = 0.
cplx circle_fn(double omega, double tau);

struct PlusMinus {
  cplx plus;
  cplx minus;
};

/// Co- and counter-rotating displacement accumulated by `pulse` between its
/// start and time t. `pulse.amplitude` is taken as the effective amplitude of
/// the mode; the formula continues analytically outside the pulse window.
PlusMinus pulse_A_pm(const Pulse& pulse, double mode_freq, double t);
/// Same with an explicit complex effective amplitude.
PlusMinus pulse_A_pm(const Pulse& pulse, double mode_freq, double t, cplx amplitude);

struct OrbitSummary {
  Mode mode = Mode::kCom;
  std::vector<cplx> A_plus, A_minus;
  /// alpha_n = sum_{j<n} A_j
  std::vector<cplx> alpha_plus, alpha_minus;
  cplx delta_alpha_plus{}, delta_alpha_minus{};
  cplx I0{}, I_plus{}, I_minus{};
};

/// Accumulates the orbit of a mode of angular frequency `mode_freq`. Pulse
/// amplitudes in `seq` are ignored in favour of `amplitudes`.
OrbitSummary accumulate_orbit(const PulseSequence& seq, double mode_freq,
                              std::span<const cplx> amplitudes);

/// Uses the trap frequency of `mode`.
OrbitSummary accumulate_orbit(const PulseSequence& seq, const TrapConfig& trap,
                              Mode mode, std::span<const cplx> amplitudes);

/// theta+ = sum_n (-i z_n / 2) exp(i (omega_n t_n + dphi_n)) C_n(omega_n).
/// The light-shift phase at optical phase phi_o is 2 Re[e^{i phi_o} theta+].
cplx lightshift_theta_plus(const PulseSequence& seq,
                           std::span<const cplx> ls_amplitudes);

struct PhaseComposition {
  cplx delta_alpha;
  double Phi;
};

/// Net displacement and orbit phase Im[I0 + e^{2i phi} I+ + e^{-2i phi} I-].
PhaseComposition compose_at_phase(const OrbitSummary& s, double phi_o);

struct TrajectoryPoint {
  double t;
  cplx alpha;
};

/// alpha(t) at optical phase phi_o, `samples_per_pulse` points per pulse
/// (including both ends), starting from alpha(0) = 0. Gaps hold alpha fixed.
std::vector<TrajectoryPoint> orbit_trajectory(const PulseSequence& seq,
                                              double mode_freq,
                                              std::span<const cplx> amplitudes,
                                              double phi_o, int samples_per_pulse);

/// Trajectory of `mode` for the state that drives it with unit coupling.
std::vector<TrajectoryPoint> orbit_trajectory(const PulseSequence& seq,
                                              const TrapConfig& trap, Mode mode,
                                              double phi_o, int samples_per_pulse);

/// Per-pulse amplitudes scaled by eta_l / eta_c (unit coupling).
std::vector<cplx> mode_amplitudes(const PulseSequence& seq, const TrapConfig& trap,
                                  Mode mode);

namespace detail {
/// (e^{ix} - 1) / (ix)
cplx phase_e1(double x);
/// (e^{ix} - 1 - ix) / (ix)^2
cplx phase_e2(double x);
/// (E1(a + b) - E1(a)) / b, continuous through b = 0
cplx phase_e1_divided(double a, double b);
}  // namespace detail

}  // namespace pulsegate
