#include "pulsegate/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pulsegate {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kPi = std::numbers::pi;

constexpr std::array<double, 4> kPsiWeights{1.0, 1.0, -1.0, -1.0};
constexpr std::array<double, 4> kTheta1Weights{0.5, -0.5, 0.5, -0.5};
constexpr std::array<double, 4> kTheta2Weights{0.5, -0.5, -0.5, 0.5};

int idx(SpinState m) { return static_cast<int>(m); }
int idx(Mode l) { return static_cast<int>(l); }

// phi_o-dependent part of Phi_m is Im[e^{2i phi} K_m] + 2 Re[e^{i phi} L_m].
struct PhaseMoments {
  std::array<double, 4> mean{};
  std::array<cplx, 4> K{};
  std::array<cplx, 4> L{};
};

PhaseMoments phase_moments(const GateModel& model) {
  PhaseMoments pm;
  for (auto m : kSpinStates) {
    for (auto l : kModes) {
      const OrbitSummary& o = model.orbit(m, l);
      pm.mean[idx(m)] += o.I0.imag();
      pm.K[idx(m)] += o.I_plus - std::conj(o.I_minus);
    }
    pm.L[idx(m)] = model.theta(m);
  }
  return pm;
}

struct Combination {
  double mean = 0.0;
  cplx K{};
  cplx L{};
  // Variance after scaling all amplitudes by sqrt(q).
  double variance(double q = 1.0) const {
    return 0.5 * std::norm(K) * q * q + 2.0 * std::norm(L) * q;
  }
};

Combination combine(const PhaseMoments& pm, const std::array<double, 4>& w) {
  Combination c;
  for (int m = 0; m < 4; ++m) {
    c.mean += w[m] * pm.mean[m];
    c.K += w[m] * pm.K[m];
    c.L += w[m] * pm.L[m];
  }
  return c;
}

double displacement_term(const GateModel& model) {
  double d = 0.0;
  for (auto m : kSpinStates) {
    for (auto l : kModes) {
      const OrbitSummary& o = model.orbit(m, l);
      d += (1.0 + 2.0 * model.trap.nbar(l)) / 4.0 *
           (std::norm(o.delta_alpha_plus) + std::norm(o.delta_alpha_minus));
    }
  }
  return d;
}

double sum_abs(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::abs(z);
  return s;
}

}  // namespace

DriveProtocol make_protocol(const PulseSequence& seq, const TrapConfig& trap,
                            const CouplingTable& coupling) {
  DriveProtocol p;
  p.timing = seq;
  for (auto m : kSpinStates) {
    for (auto l : kModes) {
      auto& v = p.force[idx(m)][idx(l)];
      const cplx g = coupling.force_factor(m, l) * (trap.eta(l) / trap.eta_c);
      v.resize(seq.size());
      for (std::size_t n = 0; n < seq.size(); ++n) v[n] = g * seq.pulses[n].amplitude;
    }
    auto& ls = p.ls[idx(m)];
    const cplx g = coupling.ls_factor(m) * coupling.ls_scale;
    ls.resize(seq.size());
    for (std::size_t n = 0; n < seq.size(); ++n) ls[n] = g * seq.pulses[n].amplitude;
  }
  return p;
}

DriveProtocol make_spin_echo_protocol(const PulseSequence& seq, const TrapConfig& trap,
                                      const CouplingTable& coupling, double gap) {
  if (!(gap >= 0.0)) throw std::invalid_argument("spin echo gap must be non-negative");
  const DriveProtocol single = make_protocol(seq, trap, coupling);
  const double shift = seq.empty() ? 0.0 : seq.pulses.back().t_end() + gap -
                                               seq.pulses.front().t_start;

  DriveProtocol p;
  p.timing.parametrization = seq.parametrization;
  p.timing.pulses = seq.pulses;
  for (const Pulse& q : seq.pulses) {
    Pulse r = q;
    r.t_start += shift;
    r.dphi -= q.omega * shift;
    p.timing.pulses.push_back(r);
  }
  for (auto m : kSpinStates) {
    const SpinState f = flipped(m);
    for (auto l : kModes) {
      auto& v = p.force[idx(m)][idx(l)];
      v = single.force[idx(m)][idx(l)];
      const auto& second = single.force[idx(f)][idx(l)];
      v.insert(v.end(), second.begin(), second.end());
    }
    auto& ls = p.ls[idx(m)];
    ls = single.ls[idx(m)];
    ls.insert(ls.end(), single.ls[idx(f)].begin(), single.ls[idx(f)].end());
  }
  return p;
}

GateModel build_gate_model(const DriveProtocol& protocol, const TrapConfig& trap) {
  GateModel model;
  model.trap = trap;
  std::array<double, 4> com{}, stretch{}, ls{};
  for (auto m : kSpinStates) {
    for (auto l : kModes) {
      model.orbits[idx(m)][idx(l)] =
          accumulate_orbit(protocol.timing, trap, l, protocol.force[idx(m)][idx(l)]);
    }
    model.theta_plus[idx(m)] = lightshift_theta_plus(protocol.timing, protocol.ls[idx(m)]);
    com[idx(m)] = sum_abs(protocol.force[idx(m)][0]);
    stretch[idx(m)] = sum_abs(protocol.force[idx(m)][1]);
    ls[idx(m)] = sum_abs(protocol.ls[idx(m)]);
  }
  auto argmax = [](const std::array<double, 4>& v) {
    return static_cast<SpinState>(std::max_element(v.begin(), v.end()) - v.begin());
  };
  model.ref_com = argmax(com);
  model.ref_stretch = argmax(stretch);
  model.ref_ls = argmax(ls);
  return model;
}

GateModel build_gate_model(const PulseSequence& seq, const TrapConfig& trap,
                           const CouplingTable& coupling) {
  return build_gate_model(make_protocol(seq, trap, coupling), trap);
}

GateMetrics gate_metrics(const GateModel& model, double phi_o) {
  GateMetrics g;
  g.phi_o = phi_o;
  const cplx e1 = std::exp(kI * phi_o);
  double disp = 0.0;
  for (auto m : kSpinStates) {
    double phi = 0.0;
    for (auto l : kModes) {
      const PhaseComposition c = compose_at_phase(model.orbit(m, l), phi_o);
      g.delta_alpha[idx(m)][idx(l)] = c.delta_alpha;
      phi += c.Phi;
      disp += (1.0 + 2.0 * model.trap.nbar(l)) / 4.0 * std::norm(c.delta_alpha);
    }
    phi += 2.0 * (e1 * model.theta(m)).real();
    g.Phi[idx(m)] = phi;
  }
  const auto& P = g.Phi;
  g.Psi = P[0] + P[1] - P[2] - P[3];
  g.theta1 = ((P[0] - P[1]) + (P[2] - P[3])) / 2.0;
  g.theta2 = ((P[0] - P[1]) - (P[2] - P[3])) / 2.0;

  const PhaseMoments pm = phase_moments(model);
  g.theta1_mean = combine(pm, kTheta1Weights).mean;
  g.theta2_mean = combine(pm, kTheta2Weights).mean;
  g.dPsi = g.Psi - kPi;
  const double d1 = g.theta1 - g.theta1_mean;
  const double d2 = g.theta2 - g.theta2_mean;
  g.epsilon = disp + g.dPsi * g.dPsi / 9.0 + (d1 * d1 + d2 * d2) / 5.0;
  return g;
}

GateMetrics gate_metrics(const PulseSequence& seq, const TrapConfig& trap,
                         const CouplingTable& coupling, double phi_o) {
  return gate_metrics(build_gate_model(seq, trap, coupling), phi_o);
}

EpsilonBreakdown epsilon_breakdown(const GateModel& model) {
  const PhaseMoments pm = phase_moments(model);
  const Combination psi = combine(pm, kPsiWeights);
  EpsilonBreakdown b;
  b.displacement = displacement_term(model);
  b.psi_mean = psi.mean;
  b.psi_variance = psi.variance();
  b.theta1_variance = combine(pm, kTheta1Weights).variance();
  b.theta2_variance = combine(pm, kTheta2Weights).variance();
  const double dpsi = psi.mean - kPi;
  b.total = b.displacement + (dpsi * dpsi + b.psi_variance) / 9.0 +
            (b.theta1_variance + b.theta2_variance) / 5.0;
  return b;
}

double averaged_epsilon(const GateModel& model) { return epsilon_breakdown(model).total; }

double averaged_epsilon(const PulseSequence& seq, const TrapConfig& trap,
                        const CouplingTable& coupling) {
  return averaged_epsilon(build_gate_model(seq, trap, coupling));
}

double mean_psi(const GateModel& model) {
  return combine(phase_moments(model), kPsiWeights).mean;
}

double normalized_averaged_epsilon(const GateModel& model) {
  const PhaseMoments pm = phase_moments(model);
  const Combination psi = combine(pm, kPsiWeights);
  if (!(psi.mean > 0.0)) {
    const double d = kPi - psi.mean;
    return 10.0 + d * d / 9.0;
  }
  // Amplitudes scale by sqrt(q): orbit quantities by q, light shifts by sqrt(q).
  const double q = kPi / psi.mean;
  return displacement_term(model) * q + psi.variance(q) / 9.0 +
         (combine(pm, kTheta1Weights).variance(q) +
          combine(pm, kTheta2Weights).variance(q)) /
             5.0;
}

double ConditionResiduals::max_abs() const {
  return std::max(max_abs_without_theta(), std::abs(theta_plus));
}

double ConditionResiduals::max_abs_without_theta() const {
  return std::max({std::abs(dac_plus), std::abs(dac_minus), std::abs(das_plus),
                   std::abs(das_minus), std::abs(area_c), std::abs(area_s)});
}

ConditionResiduals condition_residuals(const GateModel& model) {
  const OrbitSummary& c = model.orbit(model.ref_com, Mode::kCom);
  const OrbitSummary& s = model.orbit(model.ref_stretch, Mode::kStretch);
  ConditionResiduals r;
  r.dac_plus = c.delta_alpha_plus;
  r.dac_minus = c.delta_alpha_minus;
  r.das_plus = s.delta_alpha_plus;
  r.das_minus = s.delta_alpha_minus;
  r.theta_plus = model.theta(model.ref_ls);
  r.area_c = c.I_plus - std::conj(c.I_minus);
  r.area_s = s.I_plus - std::conj(s.I_minus);
  return r;
}

ConditionResiduals condition_residuals(const PulseSequence& seq, const TrapConfig& trap,
                                       const CouplingTable& coupling) {
  return condition_residuals(build_gate_model(seq, trap, coupling));
}

NormalizedSequence normalize_psi(const PulseSequence& seq, const TrapConfig& trap,
                                 const CouplingTable& coupling) {
  const double psi = mean_psi(build_gate_model(seq, trap, coupling));
  if (!(psi > 0.0)) {
    throw std::domain_error("mean Psi is not positive; cannot reach pi by a positive scale");
  }
  NormalizedSequence out;
  out.psi_before = psi;
  out.scale = std::sqrt(kPi / psi);
  out.sequence = seq.scaled(out.scale);
  out.orbit_factor = out.scale * out.scale;
  out.ls_factor = out.scale;
  return out;
}

SpinEchoResult spin_echo(const PulseSequence& seq, const TrapConfig& trap,
                         const CouplingTable& coupling, double gap) {
  SpinEchoResult r;
  r.protocol = make_spin_echo_protocol(seq, trap, coupling, gap);
  r.model = build_gate_model(r.protocol, trap);
  r.total_duration = r.protocol.timing.total_duration();
  r.averaged_epsilon = averaged_epsilon(r.model);
  r.normalized_epsilon = normalized_averaged_epsilon(r.model);
  r.residuals = condition_residuals(r.model);
  r.residuals.theta_plus = 0.0;
  return r;
}

}  // namespace pulsegate
