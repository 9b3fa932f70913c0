#include "pulsegate/phasespace.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace pulsegate {

namespace detail {

namespace {
constexpr cplx kI{0.0, 1.0};
}

cplx phase_e1(double x) {
  if (std::abs(x) < 1e-4) {
    const cplx ix{0.0, x};
    return 1.0 + ix * (1.0 / 2.0 + ix * (1.0 / 6.0 + ix * (1.0 / 24.0 + ix / 120.0)));
  }
  const double s = std::sin(0.5 * x);
  return {std::sin(x) / x, 2.0 * s * s / x};
}

cplx phase_e2(double x) {
  if (std::abs(x) < 0.5) {
    // sum_k (ix)^k / (k+2)!
    const cplx ix{0.0, x};
    cplx term = 0.5;
    cplx sum = term;
    for (int k = 1; k <= 20; ++k) {
      term *= ix / static_cast<double>(k + 2);
      sum += term;
    }
    return sum;
  }
  const double s = std::sin(0.5 * x);
  return cplx{2.0 * s * s, -(std::sin(x) - x)} / (x * x);
}

namespace {

constexpr int kMomentOrder = 12;

// M_k(a) = int_0^1 u^k e^{iau} du for k = 0..kMomentOrder.
std::array<cplx, kMomentOrder + 1> phase_moments(double a) {
  std::array<cplx, kMomentOrder + 1> m{};
  if (std::abs(a) > 4.0) {
    const cplx ia{0.0, a};
    const cplx e = std::exp(ia);
    m[0] = phase_e1(a);
    for (int k = 1; k <= kMomentOrder; ++k) {
      m[k] = (e - static_cast<double>(k) * m[k - 1]) / ia;
    }
    return m;
  }
  const cplx ia{0.0, a};
  for (int k = 0; k <= kMomentOrder; ++k) {
    cplx pw = 1.0;  // (ia)^j / j!
    cplx sum = pw / static_cast<double>(k + 1);
    for (int j = 1; j <= 48; ++j) {
      pw *= ia / static_cast<double>(j);
      sum += pw / static_cast<double>(k + j + 1);
    }
    m[k] = sum;
  }
  return m;
}

}  // namespace

cplx phase_e1_divided(double a, double b) {
  if (std::abs(b) >= 0.05) return (phase_e1(a + b) - phase_e1(a)) / b;
  // E1(a + b) - E1(a) = sum_{k>=1} i^k M_k(a) b^k / k!
  const auto m = phase_moments(a);
  cplx sum = 0.0;
  cplx coef = 1.0;  // i^k b^{k-1} / k!
  for (int k = 1; k <= kMomentOrder; ++k) {
    coef *= kI / static_cast<double>(k);
    if (k > 1) coef *= b;
    sum += coef * m[k];
  }
  return sum;
}

}  // namespace detail

namespace {
constexpr cplx kI{0.0, 1.0};
}

cplx circle_fn(double omega, double tau) {
  if (tau < 0.0) throw std::invalid_argument("circle_fn: negative duration");
  return -kI * tau * detail::phase_e1(omega * tau);
}

PlusMinus pulse_A_pm(const Pulse& pulse, double mode_freq, double t, cplx z) {
  const double s = t - pulse.t_start;
  const double dp = mode_freq + pulse.omega;
  const double dm = mode_freq - pulse.omega;
  const cplx ep = std::exp(kI * (dp * pulse.t_start + pulse.dphi));
  const cplx em = std::exp(kI * (dm * pulse.t_start - pulse.dphi));
  // C(d, s) = -i s E1(d s); i * C = s E1.
  return {z * ep * s * detail::phase_e1(dp * s),
          -std::conj(z) * em * s * detail::phase_e1(dm * s)};
}

PlusMinus pulse_A_pm(const Pulse& pulse, double mode_freq, double t) {
  return pulse_A_pm(pulse, mode_freq, t, cplx{pulse.amplitude});
}

OrbitSummary accumulate_orbit(const PulseSequence& seq, double mode_freq,
                              std::span<const cplx> amplitudes) {
  if (amplitudes.size() != seq.size()) {
    throw std::invalid_argument("accumulate_orbit: one amplitude per pulse required");
  }
  const std::size_t n = seq.size();
  OrbitSummary out;
  out.A_plus.resize(n);
  out.A_minus.resize(n);
  out.alpha_plus.resize(n);
  out.alpha_minus.resize(n);

  cplx ap{}, am{};
  for (std::size_t k = 0; k < n; ++k) {
    const Pulse& p = seq.pulses[k];
    const cplx z = amplitudes[k];
    out.alpha_plus[k] = ap;
    out.alpha_minus[k] = am;
    if (z == cplx{}) continue;

    const double tau = p.duration;
    const double dp = mode_freq + p.omega;
    const double dm = mode_freq - p.omega;
    const PlusMinus a = pulse_A_pm(p, mode_freq, p.t_end(), z);
    out.A_plus[k] = a.plus;
    out.A_minus[k] = a.minus;

    const double phase = p.omega * p.t_start + p.dphi;
    const cplx rot = std::exp(2.0 * kI * phase);
    const double tau2 = tau * tau;
    const cplx b0 = std::norm(z) * tau2 *
                    (detail::phase_e2(dp * tau) + detail::phase_e2(dm * tau));
    const cplx bp = kI * z * z * tau2 * rot *
                    detail::phase_e1_divided(2.0 * p.omega * tau, dm * tau);
    const cplx bm = kI * std::conj(z) * std::conj(z) * tau2 * std::conj(rot) *
                    detail::phase_e1_divided(-2.0 * p.omega * tau, dp * tau);

    out.I0 += std::conj(ap) * a.plus + std::conj(am) * a.minus + b0;
    out.I_plus += std::conj(am) * a.plus + bp;
    out.I_minus += std::conj(ap) * a.minus + bm;
    ap += a.plus;
    am += a.minus;
  }
  out.delta_alpha_plus = ap;
  out.delta_alpha_minus = am;
  return out;
}

OrbitSummary accumulate_orbit(const PulseSequence& seq, const TrapConfig& trap,
                              Mode mode, std::span<const cplx> amplitudes) {
  OrbitSummary s = accumulate_orbit(seq, trap.frequency(mode), amplitudes);
  s.mode = mode;
  return s;
}

cplx lightshift_theta_plus(const PulseSequence& seq,
                           std::span<const cplx> ls_amplitudes) {
  if (ls_amplitudes.size() != seq.size()) {
    throw std::invalid_argument("lightshift_theta_plus: one amplitude per pulse required");
  }
  cplx theta{};
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const Pulse& p = seq.pulses[k];
    if (ls_amplitudes[k] == cplx{}) continue;
    const double phase = p.omega * p.t_start + p.dphi;
    theta += -0.5 * kI * ls_amplitudes[k] * std::exp(kI * phase) *
             circle_fn(p.omega, p.duration);
  }
  return theta;
}

PhaseComposition compose_at_phase(const OrbitSummary& s, double phi_o) {
  const cplx e1 = std::exp(kI * phi_o);
  const cplx e2 = e1 * e1;
  const cplx da = e1 * s.delta_alpha_plus + std::conj(e1) * s.delta_alpha_minus;
  const cplx area = s.I0 + e2 * s.I_plus + std::conj(e2) * s.I_minus;
  return {da, area.imag()};
}

std::vector<TrajectoryPoint> orbit_trajectory(const PulseSequence& seq,
                                              double mode_freq,
                                              std::span<const cplx> amplitudes,
                                              double phi_o, int samples_per_pulse) {
  if (samples_per_pulse < 2) {
    throw std::invalid_argument("orbit_trajectory: need at least 2 samples per pulse");
  }
  if (amplitudes.size() != seq.size()) {
    throw std::invalid_argument("orbit_trajectory: one amplitude per pulse required");
  }
  const cplx e1 = std::exp(kI * phi_o);
  std::vector<TrajectoryPoint> out;
  out.reserve(seq.size() * static_cast<std::size_t>(samples_per_pulse));
  cplx base{};
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const Pulse& p = seq.pulses[k];
    for (int j = 0; j < samples_per_pulse; ++j) {
      const double t = j + 1 == samples_per_pulse
                           ? p.t_end()
                           : p.t_start + p.duration * j / (samples_per_pulse - 1);
      const PlusMinus a = pulse_A_pm(p, mode_freq, t, amplitudes[k]);
      out.push_back({t, base + e1 * a.plus + std::conj(e1) * a.minus});
    }
    base = out.back().alpha;
  }
  return out;
}

std::vector<cplx> mode_amplitudes(const PulseSequence& seq, const TrapConfig& trap,
                                  Mode mode) {
  const double ratio = trap.eta(mode) / trap.eta_c;
  std::vector<cplx> a(seq.size());
  for (std::size_t k = 0; k < seq.size(); ++k) a[k] = ratio * seq.pulses[k].amplitude;
  return a;
}

std::vector<TrajectoryPoint> orbit_trajectory(const PulseSequence& seq,
                                              const TrapConfig& trap, Mode mode,
                                              double phi_o, int samples_per_pulse) {
  const auto amps = mode_amplitudes(seq, trap, mode);
  return orbit_trajectory(seq, trap.frequency(mode), amps, phi_o, samples_per_pulse);
}

}  // namespace pulsegate
