#pragma once

// Domain types for pulsed spin-dependent force sequences acting on a
// two-ion crystal.
//
// Units: the COM mode frequency is fixed to 1, times are in 1/omega_c and
// pulse amplitudes are the effective force amplitude seen by the COM mode
// for the reference spin state |up,up> (the amplitude that enters the
// displacement integrals directly). Other modes and spin states scale this
// amplitude through the CouplingTable and the ratio eta_l / eta_c.

#include <array>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace pulsegate {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Thrown when a sequence violates ordering, overlap or positivity rules.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { kCom = 0, kStretch = 1 };
inline constexpr std::array<Mode, 2> kModes{Mode::kCom, Mode::kStretch};

enum class SpinState { kUpUp = 0, kDownDown = 1, kUpDown = 2, kDownUp = 3 };
inline constexpr std::array<SpinState, 4> kSpinStates{
    SpinState::kUpUp, SpinState::kDownDown, SpinState::kUpDown,
    SpinState::kDownUp};

/// State reached by flipping both spins.
SpinState flipped(SpinState m);

std::string to_string(Mode mode);
std::string to_string(SpinState m);

struct TrapConfig {
  double omega_c = 1.0;
  double omega_s = std::numbers::sqrt3;
  double eta_c = 0.1;
  double eta_s = 0.1 / 1.3160740129524924;  // eta_c / 3^(1/4)
  double nbar_c = 1.0;
  double nbar_s = 1.0;

  /// Two equal-mass ions: omega_s = sqrt(3) omega_c, eta_s = eta_c / 3^(1/4).
  static TrapConfig two_ion(double eta_c = 0.1, double nbar_c = 1.0,
                            double nbar_s = 1.0);

  double frequency(Mode mode) const {
    return mode == Mode::kCom ? omega_c : omega_s;
  }
  double eta(Mode mode) const { return mode == Mode::kCom ? eta_c : eta_s; }
  double nbar(Mode mode) const { return mode == Mode::kCom ? nbar_c : nbar_s; }
};

struct Pulse {
  double t_start = 0.0;
  double duration = 0.0;
  /// Signed; a negative value is a pi phase flip.
  double amplitude = 0.0;
  double omega = 0.0;
  /// Phase offset relative to the optical phase, radians.
  double dphi = 0.0;

  double t_end() const { return t_start + duration; }
  bool operator==(const Pulse&) const = default;
};

enum class Parametrization {
  kGeneral,
  kFixedOmega,
  kSymmetric,
  kShaped,
  kEqualAmplitude,
};

std::string to_string(Parametrization p);
Parametrization parse_parametrization(const std::string& name);

/// Number of free parameters of an N-pulse sequence after the start time,
/// phase origin and overall amplitude scale have been removed.
int parameter_count(Parametrization p, int n_pulses);

struct PulseSequence {
  std::vector<Pulse> pulses;
  Parametrization parametrization = Parametrization::kGeneral;

  std::size_t size() const { return pulses.size(); }
  bool empty() const { return pulses.empty(); }
  /// t_N + tau_N - t_1; zero for an empty sequence.
  double total_duration() const;
  PulseSequence scaled(double amplitude_factor) const;

  bool operator==(const PulseSequence&) const = default;
};

/// Per-state, per-mode force factors and per-state light-shift factors.
///
/// The force on mode l for state m during pulse n has effective amplitude
/// force[m][l] * (eta_l / eta_c) * amplitude_n. The light-shift amplitude is
/// ls[m] * ls_scale * amplitude_n.
struct CouplingTable {
  std::array<std::array<cplx, 2>, 4> force{};
  std::array<cplx, 4> ls{};
  double ls_scale = 1.0;

  cplx force_factor(SpinState m, Mode l) const {
    return force[static_cast<int>(m)][static_cast<int>(l)];
  }
  cplx ls_factor(SpinState m) const { return ls[static_cast<int>(m)]; }
};

/// Equal and opposite single-ion light shifts, balanced intensities and an
/// ion spacing of an integer number of walking-wave periods.
CouplingTable canonical_coupling(double ls_scale = 1.0);

/// Light-shift scale at which the light-shift amplitude equals the bare
/// laser drive rather than the effective COM force (ratio 2 / eta_c).
double bare_drive_ls_scale(const TrapConfig& trap);

/// Time-symmetric sequence description: the first ceil(N/2) pulses and the
/// floor(N/2) gaps that follow them; the remainder is the mirror image.
struct SymmetricParams {
  std::vector<double> durations;
  std::vector<double> gaps;
  /// Amplitudes of the first ceil(N/2) pulses; empty means all equal to 1.
  std::vector<double> amplitudes;
  double omega = 0.0;
};

PulseSequence expand_symmetric(const SymmetricParams& p, int n_pulses);

/// Contiguous segments with a shared frequency and zero phase offsets.
PulseSequence expand_shaped(const std::vector<double>& durations,
                            const std::vector<double>& amplitudes, double omega);

/// Checks ordering, overlap and positive durations; shifts the sequence so it
/// starts at t = 0 (folding the shift into each phase offset) and wraps the
/// phase offsets into [0, 2 pi).
PulseSequence validate(const PulseSequence& seq);

/// Sum of |amplitude| * duration.
double total_area(const PulseSequence& seq);

}  // namespace pulsegate
