#pragma once

// Gate-level bookkeeping for the two-ion phase gate: per-state orbits and
// phases, the conditional phase Psi, single-qubit rotation angles, the
// small-error infidelity and its closed-form average over a uniformly
// distributed optical phase.

#include <array>
#include <vector>

#include "pulsegate/core.hpp"
#include "pulsegate/phasespace.hpp"

namespace pulsegate {

/// Pulse timings plus the per-state drive each pulse applies. A plain
/// sequence and its spin-echo doubling both reduce to this form.
struct DriveProtocol {
  PulseSequence timing;
  /// [state][mode][pulse]
  std::array<std::array<std::vector<cplx>, 2>, 4> force;
  /// [state][pulse]
  std::array<std::vector<cplx>, 4> ls;
};

DriveProtocol make_protocol(const PulseSequence& seq, const TrapConfig& trap,
                            const CouplingTable& coupling);

/// The sequence applied twice: the second pass starts `gap` after the first
/// ends, replays the same waveform (phases referenced to its own start) and
/// sees the drive of the spin-flipped state.
DriveProtocol make_spin_echo_protocol(const PulseSequence& seq, const TrapConfig& trap,
                                      const CouplingTable& coupling, double gap);

/// Optical-phase independent data from which every phi_o-dependent quantity
/// follows in closed form.
struct GateModel {
  TrapConfig trap;
  /// [state][mode]
  std::array<std::array<OrbitSummary, 2>, 4> orbits;
  std::array<cplx, 4> theta_plus{};
  /// States that drive the COM mode, the stretch mode and the light shift
  /// most strongly; residuals are reported for these.
  SpinState ref_com = SpinState::kUpUp;
  SpinState ref_stretch = SpinState::kUpDown;
  SpinState ref_ls = SpinState::kUpUp;

  const OrbitSummary& orbit(SpinState m, Mode l) const {
    return orbits[static_cast<int>(m)][static_cast<int>(l)];
  }
  cplx theta(SpinState m) const { return theta_plus[static_cast<int>(m)]; }
};

GateModel build_gate_model(const DriveProtocol& protocol, const TrapConfig& trap);
GateModel build_gate_model(const PulseSequence& seq, const TrapConfig& trap,
                           const CouplingTable& coupling);

struct GateMetrics {
  double phi_o = 0.0;
  /// [state][mode]
  std::array<std::array<cplx, 2>, 4> delta_alpha{};
  std::array<double, 4> Phi{};
  double Psi = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta1_mean = 0.0;
  double theta2_mean = 0.0;
  double dPsi = 0.0;
  double epsilon = 0.0;
  /// The small-error expansion is only indicative above 0.1.
  bool indicative() const { return epsilon > 0.1; }
};

GateMetrics gate_metrics(const GateModel& model, double phi_o);
GateMetrics gate_metrics(const PulseSequence& seq, const TrapConfig& trap,
                         const CouplingTable& coupling, double phi_o);

/// Moments of the infidelity terms under a uniform phi_o.
struct EpsilonBreakdown {
  double displacement = 0.0;
  double psi_mean = 0.0;
  double psi_variance = 0.0;
  double theta1_variance = 0.0;
  double theta2_variance = 0.0;
  double total = 0.0;
};

EpsilonBreakdown epsilon_breakdown(const GateModel& model);
double averaged_epsilon(const GateModel& model);
double averaged_epsilon(const PulseSequence& seq, const TrapConfig& trap,
                        const CouplingTable& coupling);

/// <eps> after rescaling every amplitude so that <Psi> = pi, computed from
/// the unscaled model. Returns a penalty of 10 + (pi - <Psi>)^2 / 9 when
/// <Psi> <= 0.
double normalized_averaged_epsilon(const GateModel& model);

/// Mean of Psi over phi_o.
double mean_psi(const GateModel& model);

struct ConditionResiduals {
  cplx dac_plus, dac_minus, das_plus, das_minus;
  cplx theta_plus;
  cplx area_c, area_s;

  double max_abs() const;
  /// Largest residual magnitude, leaving out theta+.
  double max_abs_without_theta() const;
};

/// Residuals evaluated for the state that drives each mode (and the light
/// shift) most strongly.
ConditionResiduals condition_residuals(const GateModel& model);
ConditionResiduals condition_residuals(const PulseSequence& seq, const TrapConfig& trap,
                                       const CouplingTable& coupling);

struct NormalizedSequence {
  PulseSequence sequence;
  double scale = 1.0;
  double psi_before = 0.0;
  /// Orbit phases scale by scale^2, light-shift amplitudes by scale.
  double orbit_factor = 1.0;
  double ls_factor = 1.0;
};

/// Rescales amplitudes so that <Psi> = pi. Throws std::domain_error when
/// <Psi> <= 0.
NormalizedSequence normalize_psi(const PulseSequence& seq, const TrapConfig& trap,
                                 const CouplingTable& coupling);

struct SpinEchoResult {
  DriveProtocol protocol;
  GateModel model;
  double total_duration = 0.0;
  double averaged_epsilon = 0.0;
  /// <eps> once the composite protocol is rescaled to <Psi> = pi.
  double normalized_epsilon = 0.0;
  /// theta+ is not a condition for the composite protocol.
  ConditionResiduals residuals;
};

SpinEchoResult spin_echo(const PulseSequence& seq, const TrapConfig& trap,
                         const CouplingTable& coupling, double gap);

}  // namespace pulsegate
