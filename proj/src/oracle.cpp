#include "pulsegate/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

namespace pulsegate::oracle {

namespace {

constexpr cplx kI{0.0, 1.0};

// Kronrod nodes on [0, 1]; odd indices are the Gauss nodes.
constexpr std::array<double, 8> kXgk{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t K>
struct Panel {
  double a, b;
  CVec<K> value;
  double error;
  double l1;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <std::size_t K>
Panel<K> gk15(const std::function<CVec<K>(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  CVec<K> kron{}, gauss{};
  std::array<double, K> abs_sum{};
  auto add = [&](const CVec<K>& v, double wk, double wg) {
    for (std::size_t i = 0; i < K; ++i) {
      kron[i] += wk * v[i];
      gauss[i] += wg * v[i];
      abs_sum[i] += wk * std::abs(v[i]);
    }
  };
  add(f(c), kWgk[7], kWg[3]);
  for (int j = 0; j < 7; ++j) {
    const double wg = (j % 2 == 1) ? kWg[j / 2] : 0.0;
    const double dx = h * kXgk[j];
    add(f(c - dx), kWgk[j], wg);
    add(f(c + dx), kWgk[j], wg);
  }
  Panel<K> p{a, b, {}, 0.0, 0.0};
  for (std::size_t i = 0; i < K; ++i) {
    p.value[i] = h * kron[i];
    p.error = std::max(p.error, std::abs(h * (kron[i] - gauss[i])));
    p.l1 = std::max(p.l1, std::abs(h) * abs_sum[i]);
  }
  return p;
}

void check_tol(double tol) {
  if (!(tol >= 1e-13 && tol <= 1e-6)) {
    throw std::invalid_argument("oracle tolerance must lie in [1e-13, 1e-6]");
  }
}

// Integrates over [a, b] split at every pulse boundary inside it.
template <std::size_t K>
CVec<K> integrate_pulses(const PulseSequence& timing,
                         const std::function<CVec<K>(std::size_t, double)>& f, double a,
                         double b, double tol) {
  CVec<K> total{};
  for (std::size_t n = 0; n < timing.size(); ++n) {
    const Pulse& p = timing.pulses[n];
    const double lo = std::max(a, p.t_start);
    const double hi = std::min(b, p.t_end());
    if (!(hi > lo)) continue;
    auto r = integrate<K>([&](double t) { return f(n, t); }, lo, hi, tol);
    for (std::size_t i = 0; i < K; ++i) total[i] += r.value[i];
  }
  return total;
}

// alpha+-' for pulse n at time t (unit optical phase factors).
CVec<2> rates(const ForceSpec& s, std::size_t n, double t) {
  const Pulse& p = s.timing.pulses[n];
  const cplx z = s.amplitudes[n];
  const double dp = s.omega0 + p.omega;
  const double dm = s.omega0 - p.omega;
  return {z * std::exp(kI * (dp * t + p.dphi)),
          -std::conj(z) * std::exp(kI * (dm * t - p.dphi))};
}

}  // namespace

template <std::size_t K>
QuadResult<K> integrate(const std::function<CVec<K>(double)>& f, double a, double b,
                        double tol, int max_panels) {
  if (!(tol >= 1e-15 && tol < 1.0)) {
    throw std::invalid_argument("integrate: tolerance must lie in [1e-15, 1)");
  }
  QuadResult<K> out;
  if (a == b) return out;
  std::priority_queue<Panel<K>> heap;
  heap.push(gk15<K>(f, a, b));
  double err = heap.top().error;
  double l1 = heap.top().l1;
  int panels = 1;
  constexpr double kTiny = 1e-300;
  while (err > tol * std::max(l1, kTiny)) {
    if (panels >= max_panels) {
      throw QuadratureError("quadrature did not reach tolerance " + std::to_string(tol) +
                            " within " + std::to_string(max_panels) + " panels");
    }
    Panel<K> worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel<K> left = gk15<K>(f, worst.a, mid);
    Panel<K> right = gk15<K>(f, mid, worst.b);
    err += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    heap.push(left);
    heap.push(right);
    ++panels;
    // Accumulated round-off in the running sums can stall convergence; recompute.
    if (panels % 64 == 0) {
      auto copy = heap;
      err = 0.0;
      l1 = 0.0;
      while (!copy.empty()) {
        err += copy.top().error;
        l1 += copy.top().l1;
        copy.pop();
      }
    }
  }
  out.error = 0.0;
  out.l1 = 0.0;
  while (!heap.empty()) {
    const Panel<K>& p = heap.top();
    for (std::size_t i = 0; i < K; ++i) out.value[i] += p.value[i];
    out.error += p.error;
    out.l1 += p.l1;
    heap.pop();
  }
  out.panels = panels;
  return out;
}

template QuadResult<1> integrate<1>(const std::function<CVec<1>(double)>&, double,
                                    double, double, int);
template QuadResult<2> integrate<2>(const std::function<CVec<2>(double)>&, double,
                                    double, double, int);
template QuadResult<3> integrate<3>(const std::function<CVec<3>(double)>&, double,
                                    double, double, int);

cplx integrate_scalar(const std::function<cplx(double)>& f, double a, double b,
                      double tol) {
  return integrate<1>([&](double t) { return CVec<1>{f(t)}; }, a, b, tol).value[0];
}

ForceSpec ForceSpec::from(const PulseSequence& seq, double omega0,
                          std::span<const cplx> amplitudes) {
  if (amplitudes.size() != seq.size()) {
    throw std::invalid_argument("ForceSpec: one amplitude per pulse required");
  }
  return {seq, {amplitudes.begin(), amplitudes.end()}, omega0};
}

ForceSpec ForceSpec::from(const PulseSequence& seq, const TrapConfig& trap, Mode mode) {
  const double ratio = trap.eta(mode) / trap.eta_c;
  std::vector<cplx> a;
  for (const Pulse& p : seq.pulses) a.emplace_back(ratio * p.amplitude);
  return {seq, std::move(a), trap.frequency(mode)};
}

double ForceSpec::drive(double t, double phi_o) const {
  double f = 0.0;
  for (std::size_t n = 0; n < timing.size(); ++n) {
    const Pulse& p = timing.pulses[n];
    if (t < p.t_start || t > p.t_end()) continue;
    f += (amplitudes[n] * std::exp(kI * (p.omega * t + phi_o + p.dphi))).imag();
  }
  return f;
}

double ForceSpec::t_begin() const {
  return timing.empty() ? 0.0 : timing.pulses.front().t_start;
}

double ForceSpec::t_end() const {
  double e = t_begin();
  for (const Pulse& p : timing.pulses) e = std::max(e, p.t_end());
  return e;
}

cplx quad_delta_alpha(const ForceSpec& spec, double phi_o, double t_end, double tol) {
  check_tol(tol);
  // Integrate each pulse's own drive so the integrand stays smooth per panel.
  auto f = [&](std::size_t n, double t) {
    const Pulse& p = spec.timing.pulses[n];
    const double drive =
        (spec.amplitudes[n] * std::exp(kI * (p.omega * t + phi_o + p.dphi))).imag();
    return CVec<1>{2.0 * kI * std::exp(kI * spec.omega0 * t) * drive};
  };
  return integrate_pulses<1>(spec.timing, f, spec.t_begin(), t_end, tol)[0];
}

PlusMinus quad_delta_alpha_pm(const ForceSpec& spec, double t_end, double tol) {
  check_tol(tol);
  auto f = [&](std::size_t n, double t) { return rates(spec, n, t); };
  const auto v = integrate_pulses<2>(spec.timing, f, spec.t_begin(), t_end, tol);
  return {v[0], v[1]};
}

OrbitIntegrals quad_orbit_integrals(const ForceSpec& spec, double tol) {
  check_tol(tol);
  const double inner_tol = 0.1 * tol;
  OrbitIntegrals out;
  CVec<2> before{};  // alpha+- at the start of the current pulse
  for (std::size_t n = 0; n < spec.timing.size(); ++n) {
    const Pulse& p = spec.timing.pulses[n];
    auto outer = [&](double t) {
      const auto partial = integrate<2>([&](double s) { return rates(spec, n, s); },
                                        p.t_start, t, inner_tol);
      const cplx ap = before[0] + partial.value[0];
      const cplx am = before[1] + partial.value[1];
      const CVec<2> d = rates(spec, n, t);
      return CVec<3>{std::conj(ap) * d[0] + std::conj(am) * d[1], std::conj(am) * d[0],
                     std::conj(ap) * d[1]};
    };
    const auto r = integrate<3>(outer, p.t_start, p.t_end(), tol);
    out.I0 += r.value[0];
    out.I_plus += r.value[1];
    out.I_minus += r.value[2];
    const auto full = integrate<2>([&](double s) { return rates(spec, n, s); }, p.t_start,
                                   p.t_end(), inner_tol);
    before[0] += full.value[0];
    before[1] += full.value[1];
  }
  return out;
}

double quad_orbit_phase(const ForceSpec& spec, double phi_o, double tol,
                        AlphaSource source) {
  check_tol(tol);
  const double inner_tol = 0.1 * tol;
  const cplx e1 = std::exp(kI * phi_o);
  double phase = 0.0;
  cplx before{};
  for (std::size_t n = 0; n < spec.timing.size(); ++n) {
    const Pulse& p = spec.timing.pulses[n];
    auto velocity = [&](double t) {
      const CVec<2> d = rates(spec, n, t);
      return e1 * d[0] + std::conj(e1) * d[1];
    };
    auto alpha_at = [&](double t) -> cplx {
      if (source == AlphaSource::kAnalytic) {
        const PlusMinus a = pulse_A_pm(p, spec.omega0, t, spec.amplitudes[n]);
        return before + e1 * a.plus + std::conj(e1) * a.minus;
      }
      return before + integrate_scalar(velocity, p.t_start, t, inner_tol);
    };
    const cplx r = integrate_scalar(
        [&](double t) { return std::conj(alpha_at(t)) * velocity(t); }, p.t_start,
        p.t_end(), tol);
    phase += r.imag();
    before = alpha_at(p.t_end());
  }
  return phase;
}

cplx quad_theta_plus(const PulseSequence& seq, std::span<const cplx> ls_amplitudes,
                     double tol) {
  if (ls_amplitudes.size() != seq.size()) {
    throw std::invalid_argument("quad_theta_plus: one amplitude per pulse required");
  }
  check_tol(tol);
  auto f = [&](std::size_t n, double t) {
    const Pulse& p = seq.pulses[n];
    return CVec<1>{-0.5 * ls_amplitudes[n] * std::exp(kI * (p.omega * t + p.dphi))};
  };
  const double a = seq.empty() ? 0.0 : seq.pulses.front().t_start;
  double b = a;
  for (const Pulse& p : seq.pulses) b = std::max(b, p.t_end());
  return integrate_pulses<1>(seq, f, a, b, tol)[0];
}

std::vector<TrajectoryPoint> quad_trajectory(const ForceSpec& spec, double phi_o,
                                             int samples_per_pulse, double tol) {
  if (samples_per_pulse < 2) {
    throw std::invalid_argument("quad_trajectory: need at least 2 samples per pulse");
  }
  std::vector<TrajectoryPoint> out;
  for (const Pulse& p : spec.timing.pulses) {
    for (int j = 0; j < samples_per_pulse; ++j) {
      const double t = j + 1 == samples_per_pulse
                           ? p.t_end()
                           : p.t_start + p.duration * j / (samples_per_pulse - 1);
      out.push_back({t, quad_delta_alpha(spec, phi_o, t, tol)});
    }
  }
  return out;
}

double grid_average_epsilon(const GateModel& model, int n_phi) {
  if (n_phi < 16) throw std::invalid_argument("grid_average_epsilon: n_phi must be >= 16");
  double sum = 0.0;
  for (int k = 0; k < n_phi; ++k) {
    sum += gate_metrics(model, kTwoPi * k / n_phi).epsilon;
  }
  return sum / n_phi;
}

double grid_average_epsilon(const PulseSequence& seq, const TrapConfig& trap,
                            const CouplingTable& coupling, int n_phi) {
  return grid_average_epsilon(build_gate_model(seq, trap, coupling), n_phi);
}

}  // namespace pulsegate::oracle
