#pragma once

// Brute-force reference values obtained by adaptive Gauss-Kronrod quadrature
// of the defining time integrals. Nothing here calls the closed forms in
// phasespace except quad_orbit_phase with AlphaSource::kAnalytic.

#include <array>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pulsegate/core.hpp"
#include "pulsegate/fidelity.hpp"
#include "pulsegate/phasespace.hpp"

namespace pulsegate::oracle {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <std::size_t K>
using CVec = std::array<cplx, K>;

template <std::size_t K>
struct QuadResult {
  CVec<K> value{};
  /// Sum of |Kronrod - Gauss| over panels, largest component.
  double error = 0.0;
  /// Integral of the largest component modulus.
  double l1 = 0.0;
  int panels = 0;
};

/// Globally adaptive G7/K15 quadrature of a vector-valued integrand. Stops
/// when the error estimate is below tol * max(l1, tiny); throws
/// QuadratureError after `max_panels` panels.
template <std::size_t K>
QuadResult<K> integrate(const std::function<CVec<K>(double)>& f, double a, double b,
                        double tol, int max_panels = 20000);

extern template QuadResult<1> integrate<1>(const std::function<CVec<1>(double)>&,
                                           double, double, double, int);
extern template QuadResult<2> integrate<2>(const std::function<CVec<2>(double)>&,
                                           double, double, double, int);
extern template QuadResult<3> integrate<3>(const std::function<CVec<3>(double)>&,
                                           double, double, double, int);

/// Scalar convenience wrapper.
cplx integrate_scalar(const std::function<cplx(double)>& f, double a, double b,
                      double tol);

/// A piecewise-constant force profile acting on one mode.
struct ForceSpec {
  PulseSequence timing;
  /// Effective complex amplitude per pulse.
  std::vector<cplx> amplitudes;
  double omega0 = 1.0;

  static ForceSpec from(const PulseSequence& seq, double omega0,
                        std::span<const cplx> amplitudes);
  /// Drive of `mode` for the unit-coupling state.
  static ForceSpec from(const PulseSequence& seq, const TrapConfig& trap, Mode mode);

  /// f(t) in units where alpha' = 2i e^{i omega0 t} f(t); zero outside pulses.
  double drive(double t, double phi_o) const;
  double t_begin() const;
  double t_end() const;
};

/// alpha(t_end) - alpha(t_begin) at optical phase phi_o from the physical force.
cplx quad_delta_alpha(const ForceSpec& spec, double phi_o, double t_end, double tol);

/// The co- and counter-rotating components +-int z e^{+-i dphi} e^{i d+- t} dt.
PlusMinus quad_delta_alpha_pm(const ForceSpec& spec, double t_end, double tol);

struct OrbitIntegrals {
  cplx I0, I_plus, I_minus;
};

/// I0 and I+- as time integrals of alpha-+*(t) alpha+-'(t), with the prefix
/// displacements themselves obtained by nested quadrature.
OrbitIntegrals quad_orbit_integrals(const ForceSpec& spec, double tol);

enum class AlphaSource { kQuadrature, kAnalytic };

/// Phi = Im int alpha*(t) alpha'(t) dt at optical phase phi_o.
double quad_orbit_phase(const ForceSpec& spec, double phi_o, double tol,
                        AlphaSource source = AlphaSource::kQuadrature);

/// theta+ = -int (z/2) exp(i (omega_n t + dphi_n)) dt.
cplx quad_theta_plus(const PulseSequence& seq, std::span<const cplx> ls_amplitudes,
                     double tol);

/// alpha(t) sampled inside each pulse, every value by quadrature from t_begin.
std::vector<TrajectoryPoint> quad_trajectory(const ForceSpec& spec, double phi_o,
                                             int samples_per_pulse, double tol);

/// Mean of gate_metrics(...).epsilon over phi_o = 2 pi k / n_phi.
double grid_average_epsilon(const PulseSequence& seq, const TrapConfig& trap,
                            const CouplingTable& coupling, int n_phi);
double grid_average_epsilon(const GateModel& model, int n_phi);

}  // namespace pulsegate::oracle
