#include "pulsegate/core.hpp"

#include <cmath>
#include <sstream>

namespace pulsegate {

SpinState flipped(SpinState m) {
  switch (m) {
    case SpinState::kUpUp: return SpinState::kDownDown;
    case SpinState::kDownDown: return SpinState::kUpUp;
    case SpinState::kUpDown: return SpinState::kDownUp;
    case SpinState::kDownUp: return SpinState::kUpDown;
  }
  return m;
}

std::string to_string(Mode mode) {
  return mode == Mode::kCom ? "c" : "s";
}

std::string to_string(SpinState m) {
  switch (m) {
    case SpinState::kUpUp: return "uu";
    case SpinState::kDownDown: return "dd";
    case SpinState::kUpDown: return "ud";
    case SpinState::kDownUp: return "du";
  }
  return "?";
}

TrapConfig TrapConfig::two_ion(double eta_c, double nbar_c, double nbar_s) {
  if (!(eta_c > 0.0)) throw std::invalid_argument("eta_c must be positive");
  if (!(nbar_c >= 0.0) || !(nbar_s >= 0.0)) {
    throw std::invalid_argument("thermal occupancies must be non-negative");
  }
  TrapConfig t;
  t.omega_c = 1.0;
  t.omega_s = std::sqrt(3.0);
  t.eta_c = eta_c;
  t.eta_s = eta_c / std::pow(3.0, 0.25);
  t.nbar_c = nbar_c;
  t.nbar_s = nbar_s;
  return t;
}

std::string to_string(Parametrization p) {
  switch (p) {
    case Parametrization::kGeneral: return "general";
    case Parametrization::kFixedOmega: return "fixed-omega";
    case Parametrization::kSymmetric: return "symmetric";
    case Parametrization::kShaped: return "shaped";
    case Parametrization::kEqualAmplitude: return "equal-amplitude";
  }
  return "general";
}

Parametrization parse_parametrization(const std::string& name) {
  for (auto p : {Parametrization::kGeneral, Parametrization::kFixedOmega,
                 Parametrization::kSymmetric, Parametrization::kShaped,
                 Parametrization::kEqualAmplitude}) {
    if (to_string(p) == name) return p;
  }
  throw std::invalid_argument("unknown parametrization: " + name);
}

int parameter_count(Parametrization p, int n) {
  if (n < 1) throw std::invalid_argument("need at least one pulse");
  switch (p) {
    // per pulse: omega, dphi, duration, gap, amplitude; minus start time,
    // phase origin and amplitude scale
    case Parametrization::kGeneral: return 5 * n - 3;
    // shared omega, durations, gaps, amplitudes up to scale
    case Parametrization::kFixedOmega: return 3 * n - 1;
    case Parametrization::kSymmetric: return (3 * n + 1) / 2;
    case Parametrization::kShaped: return 2 * n;
    // shared omega, ceil(N/2) durations, floor(N/2) gaps
    case Parametrization::kEqualAmplitude: return n + 1;
  }
  return 0;
}

double PulseSequence::total_duration() const {
  if (pulses.empty()) return 0.0;
  double end = pulses.front().t_end();
  for (const auto& p : pulses) end = std::max(end, p.t_end());
  return end - pulses.front().t_start;
}

PulseSequence PulseSequence::scaled(double factor) const {
  PulseSequence out = *this;
  for (auto& p : out.pulses) p.amplitude *= factor;
  return out;
}

CouplingTable canonical_coupling(double ls_scale) {
  CouplingTable t;
  auto idx = [](SpinState m) { return static_cast<int>(m); };
  t.force[idx(SpinState::kUpUp)] = {cplx{1.0}, cplx{0.0}};
  t.force[idx(SpinState::kDownDown)] = {cplx{-1.0}, cplx{0.0}};
  t.force[idx(SpinState::kUpDown)] = {cplx{0.0}, cplx{1.0}};
  t.force[idx(SpinState::kDownUp)] = {cplx{0.0}, cplx{-1.0}};
  t.ls[idx(SpinState::kUpUp)] = 1.0;
  t.ls[idx(SpinState::kDownDown)] = -1.0;
  t.ls[idx(SpinState::kUpDown)] = 0.0;
  t.ls[idx(SpinState::kDownUp)] = 0.0;
  t.ls_scale = ls_scale;
  return t;
}

double bare_drive_ls_scale(const TrapConfig& trap) { return 2.0 / trap.eta_c; }

PulseSequence expand_symmetric(const SymmetricParams& p, int n_pulses) {
  if (n_pulses < 1) throw std::invalid_argument("n_pulses must be >= 1");
  const auto n_dur = static_cast<std::size_t>((n_pulses + 1) / 2);
  const auto n_gap = static_cast<std::size_t>(n_pulses / 2);
  if (p.durations.size() != n_dur || p.gaps.size() != n_gap) {
    std::ostringstream os;
    os << "symmetric N=" << n_pulses << " needs " << n_dur << " durations and "
       << n_gap << " gaps, got " << p.durations.size() << " and "
       << p.gaps.size();
    throw std::invalid_argument(os.str());
  }
  if (!p.amplitudes.empty() && p.amplitudes.size() != n_dur) {
    throw std::invalid_argument("symmetric amplitudes must have ceil(N/2) entries");
  }
  for (double d : p.durations) {
    if (!(d > 0.0)) throw std::invalid_argument("pulse durations must be positive");
  }
  for (double g : p.gaps) {
    if (!(g >= 0.0)) throw std::invalid_argument("gaps must be non-negative");
  }

  // Index of the mirrored half-sequence element for pulse n.
  auto half_index = [n_pulses](int n) {
    return static_cast<std::size_t>(std::min(n, n_pulses - 1 - n));
  };
  // Gap following pulse n (n < N-1): first-half gaps, then mirrored.
  auto gap_after = [&](int n) {
    return p.gaps[static_cast<std::size_t>(std::min(n, n_pulses - 2 - n))];
  };

  PulseSequence seq;
  seq.parametrization = Parametrization::kSymmetric;
  double t = 0.0;
  for (int n = 0; n < n_pulses; ++n) {
    const auto h = half_index(n);
    Pulse pulse;
    pulse.t_start = t;
    pulse.duration = p.durations[h];
    pulse.amplitude = p.amplitudes.empty() ? 1.0 : p.amplitudes[h];
    pulse.omega = p.omega;
    pulse.dphi = 0.0;
    seq.pulses.push_back(pulse);
    t += pulse.duration;
    if (n + 1 < n_pulses) t += gap_after(n);
  }
  return seq;
}

PulseSequence expand_shaped(const std::vector<double>& durations,
                            const std::vector<double>& amplitudes, double omega) {
  if (durations.empty()) throw std::invalid_argument("shaped pulse needs segments");
  if (amplitudes.size() != durations.size()) {
    throw std::invalid_argument("one amplitude per segment required");
  }
  PulseSequence seq;
  seq.parametrization = Parametrization::kShaped;
  double t = 0.0;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    if (!(durations[i] > 0.0)) {
      throw std::invalid_argument("segment durations must be positive");
    }
    seq.pulses.push_back(Pulse{t, durations[i], amplitudes[i], omega, 0.0});
    t += durations[i];
  }
  return seq;
}

namespace {

double wrap_phase(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w -= kTwoPi;
  return w;
}

}  // namespace

PulseSequence validate(const PulseSequence& seq) {
  PulseSequence out = seq;
  for (std::size_t i = 0; i < out.pulses.size(); ++i) {
    const Pulse& p = out.pulses[i];
    if (!std::isfinite(p.t_start) || !std::isfinite(p.duration) ||
        !std::isfinite(p.amplitude) || !std::isfinite(p.omega) ||
        !std::isfinite(p.dphi)) {
      throw ValidationError("pulse " + std::to_string(i + 1) + " has a non-finite field");
    }
    if (!(p.duration > 0.0)) {
      throw ValidationError("pulse " + std::to_string(i + 1) +
                            " has non-positive duration");
    }
    if (i > 0) {
      const Pulse& prev = out.pulses[i - 1];
      const double slack = 1e-12 * std::max(1.0, std::abs(prev.t_end()));
      if (p.t_start < prev.t_end() - slack) {
        throw ValidationError("pulses " + std::to_string(i) + " and " +
                              std::to_string(i + 1) + " overlap");
      }
    }
  }
  if (out.pulses.empty()) return out;

  // Moving the time origin by t0 is absorbed by the phase offsets:
  // sin(w (t' + t0) + phi) = sin(w t' + (phi + w t0)).
  const double t0 = out.pulses.front().t_start;
  for (auto& p : out.pulses) {
    if (t0 != 0.0) {
      p.t_start -= t0;
      p.dphi += p.omega * t0;
    }
    p.dphi = wrap_phase(p.dphi);
  }
  out.pulses.front().t_start = 0.0;
  return out;
}

double total_area(const PulseSequence& seq) {
  double a = 0.0;
  for (const auto& p : seq.pulses) a += std::abs(p.amplitude) * p.duration;
  return a;
}

}  // namespace pulsegate
