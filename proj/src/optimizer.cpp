#include "pulsegate/optimizer.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <thread>

#include "pulsegate/phasespace.hpp"

namespace pulsegate {

namespace {

constexpr cplx kI{0.0, 1.0};
// Decades of log10 area charged per decade of <eps> above the limit.
constexpr double kAreaPenalty = 10.0;

// State with the largest coupling to `mode` (or to the light shift).
SpinState strongest_force(const CouplingTable& c, Mode mode) {
  SpinState best = SpinState::kUpUp;
  for (auto m : kSpinStates) {
    if (std::abs(c.force_factor(m, mode)) > std::abs(c.force_factor(best, mode))) best = m;
  }
  return best;
}

SpinState strongest_ls(const CouplingTable& c) {
  SpinState best = SpinState::kUpUp;
  for (auto m : kSpinStates) {
    if (std::abs(c.ls_factor(m)) > std::abs(c.ls_factor(best))) best = m;
  }
  return best;
}

// Contribution of pulse p at unit amplitude to one complex condition, and
// the frequency whose midpoint rotation makes it real for symmetric profiles.
struct Column {
  cplx value;
  double rotation_freq;
};

Column unit_contribution(const Pulse& p, ConstraintKind kind, const TrapConfig& trap,
                         const CouplingTable& c) {
  Pulse unit = p;
  unit.amplitude = 1.0;
  switch (kind) {
    case ConstraintKind::kDacPlus:
    case ConstraintKind::kDacMinus: {
      const cplx g = c.force_factor(strongest_force(c, Mode::kCom), Mode::kCom);
      const PlusMinus a = pulse_A_pm(unit, trap.omega_c, unit.t_end(), g);
      return kind == ConstraintKind::kDacPlus ? Column{a.plus, trap.omega_c + p.omega}
                                              : Column{a.minus, trap.omega_c - p.omega};
    }
    case ConstraintKind::kDasPlus:
    case ConstraintKind::kDasMinus: {
      const cplx g = c.force_factor(strongest_force(c, Mode::kStretch), Mode::kStretch) *
                     (trap.eta_s / trap.eta_c);
      const PlusMinus a = pulse_A_pm(unit, trap.omega_s, unit.t_end(), g);
      return kind == ConstraintKind::kDasPlus ? Column{a.plus, trap.omega_s + p.omega}
                                              : Column{a.minus, trap.omega_s - p.omega};
    }
    case ConstraintKind::kThetaPlus: {
      const cplx z = c.ls_factor(strongest_ls(c)) * c.ls_scale;
      const cplx v = -0.5 * kI * z * std::exp(kI * (p.omega * p.t_start + p.dphi)) *
                     circle_fn(p.omega, p.duration);
      return {v, p.omega};
    }
  }
  return {cplx{}, 0.0};
}

bool in_bounds(const std::vector<double>& x, const std::vector<double>& lo,
               const std::vector<double>& hi, double* excess) {
  double e = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      *excess = std::numeric_limits<double>::infinity();
      return false;
    }
    e += std::max(0.0, lo[i] - x[i]) + std::max(0.0, x[i] - hi[i]);
  }
  *excess = e;
  return e == 0.0;
}

}  // namespace

std::string to_string(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::kDacPlus: return "dac+";
    case ConstraintKind::kDacMinus: return "dac-";
    case ConstraintKind::kDasPlus: return "das+";
    case ConstraintKind::kDasMinus: return "das-";
    case ConstraintKind::kThetaPlus: return "theta+";
  }
  return "?";
}

ConstraintKind parse_constraint_kind(const std::string& name) {
  for (auto k : {ConstraintKind::kDacPlus, ConstraintKind::kDacMinus, ConstraintKind::kDasPlus,
                 ConstraintKind::kDasMinus, ConstraintKind::kThetaPlus}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown constraint: " + name);
}

std::vector<ConstraintRow> default_constraint_rows() {
  return {{ConstraintKind::kDacPlus, false},  {ConstraintKind::kDacPlus, true},
          {ConstraintKind::kDacMinus, false}, {ConstraintKind::kDacMinus, true},
          {ConstraintKind::kThetaPlus, false}, {ConstraintKind::kThetaPlus, true}};
}

AmplitudeSolve solve_amplitudes(const PulseSequence& timing, const TrapConfig& trap,
                                const CouplingTable& coupling,
                                const std::vector<ConstraintRow>& rows, bool mirrored,
                                double reference) {
  const int n = static_cast<int>(timing.size());
  if (n < 2) throw std::invalid_argument("solve_amplitudes: need at least two pulses");
  const int groups = mirrored ? (n + 1) / 2 : n;
  auto group_of = [&](int k) { return mirrored ? std::min(k, n - 1 - k) : k; };

  // Real rows; in mirrored mode each condition contributes its rotated real part once.
  std::vector<ConstraintRow> used;
  for (const ConstraintRow& r : rows) {
    ConstraintRow row = r;
    if (mirrored) {
      row.imaginary = false;
      if (std::find(used.begin(), used.end(), row) != used.end()) continue;
    }
    used.push_back(row);
  }
  const int unknowns = groups - 1;
  if (static_cast<int>(used.size()) > unknowns) used.resize(static_cast<std::size_t>(unknowns));

  const double mid = 0.5 * (timing.pulses.front().t_start + timing.pulses.back().t_end());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(used.size()), groups);
  for (std::size_t r = 0; r < used.size(); ++r) {
    for (int k = 0; k < n; ++k) {
      const Column col = unit_contribution(timing.pulses[k], used[r].kind, trap, coupling);
      cplx v = col.value;
      if (mirrored) v *= std::exp(-kI * col.rotation_freq * mid);
      M(static_cast<Eigen::Index>(r), group_of(k)) += used[r].imaginary ? v.imag() : v.real();
    }
  }

  AmplitudeSolve out;
  out.unknowns = unknowns;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(unknowns);
  if (unknowns > 0 && M.rows() > 0) {
    const Eigen::MatrixXd A = M.rightCols(unknowns);
    const Eigen::VectorXd b = -reference * M.col(0);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    cod.setThreshold(1e-12);
    out.rank = static_cast<int>(cod.rank());
    if (out.rank > 0) x = cod.solve(b);
    out.residual = (A * x - b).norm();
  }
  out.degenerate = out.rank < unknowns;

  std::vector<double> group_amp(static_cast<std::size_t>(groups));
  group_amp[0] = reference;
  for (int g = 1; g < groups; ++g) group_amp[g] = x(g - 1);
  out.amplitudes.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out.amplitudes[k] = group_amp[group_of(k)];
  return out;
}

SimplexResult nelder_mead(const Objective& f, std::vector<double> x0,
                          const SimplexOptions& opts) {
  const std::size_t n = x0.size();
  SimplexResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  const double f0 = eval(x0);
  if (!std::isfinite(f0)) throw std::invalid_argument("nelder_mead: f(x0) is not finite");

  std::vector<std::vector<double>> v(n + 1, x0);
  std::vector<double> fv(n + 1, f0);
  for (std::size_t i = 0; i < n; ++i) {
    const double step = x0[i] != 0.0 ? opts.initial_step * std::abs(x0[i]) : opts.initial_step;
    v[i + 1][i] += step;
    fv[i + 1] = eval(v[i + 1]);
  }
  std::vector<std::size_t> order(n + 1);

  auto combine = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + t * (b[i] - a[i]);
    return out;
  };

  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    res.best_history.push_back(fv[best]);

    double diameter = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        diameter = std::max(diameter, std::abs(v[j][i] - v[best][i]) /
                                          std::max(1.0, std::abs(v[best][i])));
      }
    }
    if (fv[worst] - fv[best] <= opts.ftol && diameter <= opts.xtol) break;
    if (n == 0) break;
    if (res.iterations >= opts.max_iterations) {
      res.exhausted = true;
      break;
    }
    ++res.iterations;

    std::vector<double> c(n, 0.0);
    for (std::size_t j = 0; j <= n; ++j) {
      if (j == worst) continue;
      for (std::size_t i = 0; i < n; ++i) c[i] += v[j][i] / static_cast<double>(n);
    }
    const std::vector<double> xr = combine(c, v[worst], -1.0);
    const double fr = eval(xr);
    if (fr < fv[best]) {
      const std::vector<double> xe = combine(c, v[worst], -2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        v[worst] = xe;
        fv[worst] = fe;
      } else {
        v[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      v[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    bool shrink = false;
    if (fr < fv[worst]) {
      const std::vector<double> xc = combine(c, xr, 0.5);
      const double fc = eval(xc);
      if (fc <= fr) {
        v[worst] = xc;
        fv[worst] = fc;
      } else {
        shrink = true;
      }
    } else {
      const std::vector<double> xc = combine(c, v[worst], 0.5);
      const double fc = eval(xc);
      if (fc < fv[worst]) {
        v[worst] = xc;
        fv[worst] = fc;
      } else {
        shrink = true;
      }
    }
    if (shrink) {
      for (std::size_t j = 0; j <= n; ++j) {
        if (j == best) continue;
        v[j] = combine(v[best], v[j], 0.5);
        fv[j] = eval(v[j]);
      }
    }
  }
  const std::size_t best = order.front();
  res.x = v[best];
  res.f = fv[best];
  return res;
}

double SearchConfig::effective_threshold() const {
  if (threshold > 0.0) return threshold;
  return parameter_count(parametrization, n_pulses) < 7 ? 3e-5 : 1e-8;
}

SearchSpace::SearchSpace(const SearchConfig& cfg, const TrapConfig& trap,
                         const CouplingTable& coupling)
    : cfg_(cfg), trap_(trap), coupling_(coupling) {
  const int n = cfg.n_pulses;
  if (n < 1) throw std::invalid_argument("search needs at least one pulse");
  switch (cfg.parametrization) {
    case Parametrization::kSymmetric:
    case Parametrization::kEqualAmplitude:
      n_dur_ = (n + 1) / 2;
      n_gap_ = n / 2;
      break;
    case Parametrization::kShaped:
      n_dur_ = n;
      n_gap_ = 0;
      break;
    case Parametrization::kFixedOmega:
      n_dur_ = n;
      n_gap_ = n - 1;
      break;
    case Parametrization::kGeneral:
      n_omega_ = n;
      n_dur_ = n;
      n_gap_ = n - 1;
      break;
  }
  auto push = [&](Bounds b, int count) {
    for (int i = 0; i < count; ++i) {
      lower_.push_back(b.lo);
      upper_.push_back(b.hi);
    }
  };
  push(cfg.omega, n_omega_);
  push(cfg.duration, n_dur_);
  push(cfg.gap, n_gap_);
  if (cfg.parametrization == Parametrization::kGeneral) push({0.0, kTwoPi}, n - 1);
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!(lower_[i] <= upper_[i])) empty_ = true;
  }
  if (!(cfg.omega.lo > 0.0 || cfg.omega.hi > 0.0) || !(cfg.duration.hi > 0.0) ||
      !(cfg.max_tau_over_period > 0.0)) {
    empty_ = true;
  }
}

PulseSequence SearchSpace::decode(const std::vector<double>& x,
                                  const std::vector<double>& dphis) const {
  const int n = cfg_.n_pulses;
  const double* om = x.data();
  const double* dur = om + n_omega_;
  const double* gap = dur + n_dur_;
  PulseSequence seq;
  seq.parametrization = cfg_.parametrization;

  if (cfg_.parametrization == Parametrization::kSymmetric ||
      cfg_.parametrization == Parametrization::kEqualAmplitude) {
    SymmetricParams p;
    p.durations.assign(dur, dur + n_dur_);
    p.gaps.assign(gap, gap + n_gap_);
    p.omega = om[0];
    seq = expand_symmetric(p, n);
    seq.parametrization = cfg_.parametrization;
  } else {
    double t = 0.0;
    for (int k = 0; k < n; ++k) {
      Pulse p;
      p.t_start = t;
      p.duration = dur[k];
      p.amplitude = 1.0;
      p.omega = om[n_omega_ == 1 ? 0 : k];
      p.dphi = dphis.empty() ? 0.0 : dphis[static_cast<std::size_t>(k)];
      if (cfg_.parametrization == Parametrization::kGeneral && k > 0) {
        p.dphi = gap[n_gap_ + k - 1];
      }
      t = p.t_end() + (k < n_gap_ ? gap[k] : 0.0);
      seq.pulses.push_back(p);
    }
  }
  if (n >= 2 && cfg_.parametrization != Parametrization::kEqualAmplitude) {
    const bool mirrored = cfg_.parametrization == Parametrization::kSymmetric;
    const AmplitudeSolve s = solve_amplitudes(seq, trap_, coupling_, cfg_.constraints, mirrored);
    for (int k = 0; k < n; ++k) seq.pulses[k].amplitude = s.amplitudes[k];
  }
  return seq;
}

std::vector<double> SearchSpace::encode(const PulseSequence& seq) const {
  const int n = cfg_.n_pulses;
  if (static_cast<int>(seq.size()) != n) {
    throw std::invalid_argument("encode: sequence has the wrong number of pulses");
  }
  std::vector<double> x;
  for (int k = 0; k < n_omega_; ++k) x.push_back(seq.pulses[k].omega);
  for (int k = 0; k < n_dur_; ++k) x.push_back(seq.pulses[k].duration);
  for (int k = 0; k < n_gap_; ++k) {
    x.push_back(seq.pulses[k + 1].t_start - seq.pulses[k].t_end());
  }
  if (cfg_.parametrization == Parametrization::kGeneral) {
    for (int k = 1; k < n; ++k) x.push_back(seq.pulses[k].dphi);
  }
  return x;
}

std::vector<double> SearchSpace::time_scaled(std::vector<double> x, double k) const {
  for (int i = 0; i < n_omega_; ++i) x[i] /= k;
  for (int i = n_omega_; i < n_omega_ + n_dur_ + n_gap_; ++i) x[i] *= k;
  return x;
}

double SearchSpace::objective(const std::vector<double>& x,
                              const std::vector<double>& dphis) const {
  double excess = 0.0;
  if (!in_bounds(x, lower_, upper_, &excess)) return 100.0 + excess;
  const PulseSequence seq = decode(x, dphis);
  const double tau = seq.total_duration();
  const double tau_max = cfg_.max_tau_over_period * kTwoPi;
  if (tau > tau_max) return 50.0 + (tau - tau_max);
  for (const Pulse& p : seq.pulses) {
    if (!std::isfinite(p.amplitude)) return 100.0;
  }
  const double eps = normalized_averaged_epsilon(build_gate_model(seq, trap_, coupling_));
  return std::log10(std::max(eps, 1e-300));
}

double SearchSpace::area_objective(const std::vector<double>& x,
                                   const std::vector<double>& dphis,
                                   double log_eps_limit) const {
  double excess = 0.0;
  if (!in_bounds(x, lower_, upper_, &excess)) return 100.0 + excess;
  const PulseSequence seq = decode(x, dphis);
  const double tau = seq.total_duration();
  const double tau_max = cfg_.max_tau_over_period * kTwoPi;
  if (tau > tau_max) return 50.0 + (tau - tau_max);
  for (const Pulse& p : seq.pulses) {
    if (!std::isfinite(p.amplitude)) return 100.0;
  }
  const GateModel model = build_gate_model(seq, trap_, coupling_);
  const double psi = mean_psi(model);
  if (!(psi > 0.0)) return 100.0;
  const double area = std::sqrt(std::numbers::pi / psi) * total_area(seq);
  const double log_eps = std::log10(std::max(normalized_averaged_epsilon(model), 1e-300));
  return std::log10(area) + kAreaPenalty * std::max(0.0, log_eps - log_eps_limit);
}

Solution make_solution(const PulseSequence& seq, const TrapConfig& trap,
                       const CouplingTable& coupling, Provenance provenance) {
  Solution s;
  const NormalizedSequence n = normalize_psi(validate(seq), trap, coupling);
  s.sequence = n.sequence;
  s.sequence.parametrization = seq.parametrization;
  const GateModel model = build_gate_model(s.sequence, trap, coupling);
  s.epsilon = averaged_epsilon(model);
  s.residuals = condition_residuals(model);
  s.tau = s.sequence.total_duration();
  s.area = total_area(s.sequence);
  s.parametrization = seq.parametrization;
  s.provenance = provenance;
  return s;
}

namespace {

struct RestartOutcome {
  std::optional<Solution> solution;
};

struct AnnealOutcome {
  std::vector<double> x;
  double f = 0.0;
  int steps = 0;
  long evaluations = 0;
};

// Simplex refinement, then Metropolis steps between refinements, then a
// final polish. Stops early once the best value drops below `stop`.
AnnealOutcome anneal_stage(const Objective& f, const std::vector<double>& x0,
                           const AnnealSchedule& sched, const SimplexOptions& simplex,
                           double stop, const std::vector<double>& lo,
                           const std::vector<double>& hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  AnnealOutcome out;
  SimplexResult r = nelder_mead(f, x0, simplex);
  out.evaluations += r.evaluations;
  std::vector<double> cur = r.x;
  double fcur = r.f;
  out.x = r.x;
  out.f = r.f;

  double temperature = sched.t0;
  for (; out.steps < sched.steps && out.f > stop; ++out.steps) {
    const double scale = sched.step_scale * temperature / sched.t0;
    std::vector<double> y = cur;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double width = std::max(std::abs(y[i]), 0.05 * (hi[i] - lo[i]));
      y[i] = std::clamp(y[i] + scale * width * gauss(rng), lo[i], hi[i]);
    }
    const double u = unit(rng);
    temperature *= sched.cooling;
    if (!std::isfinite(f(y))) continue;
    const SimplexResult t = nelder_mead(f, y, simplex);
    out.evaluations += t.evaluations;
    if (t.f < fcur || u < std::exp(-(t.f - fcur) / (temperature / sched.cooling))) {
      cur = t.x;
      fcur = t.f;
    }
    if (t.f < out.f) {
      out.x = t.x;
      out.f = t.f;
    }
  }

  const SimplexResult polish = nelder_mead(f, out.x, simplex);
  out.evaluations += polish.evaluations;
  if (polish.f < out.f) {
    out.x = polish.x;
    out.f = polish.f;
  }
  return out;
}

RestartOutcome run_restart(const SearchSpace& space, int restart) {
  const SearchConfig& cfg = space.config();
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed & 0xffffffffu),
                    static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(restart)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int dim = space.dimension();
  const auto& lo = space.lower();
  const auto& hi = space.upper();

  std::vector<double> dphis(static_cast<std::size_t>(cfg.n_pulses), 0.0);
  if (cfg.parametrization == Parametrization::kFixedOmega && !cfg.dphi_grid.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, cfg.dphi_grid.size() - 1);
    for (auto& d : dphis) d = cfg.dphi_grid[pick(rng)];
  }
  auto f = [&](const std::vector<double>& x) { return space.objective(x, dphis); };

  // Start inside the box with the total duration under the cap.
  std::vector<double> x(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
  for (int attempt = 0; attempt < 60 && f(x) >= 50.0; ++attempt) {
    const double shrink = 0.5 + 0.5 * unit(rng);
    const int first = cfg.parametrization == Parametrization::kGeneral ? cfg.n_pulses : 1;
    const int last = dim - (cfg.parametrization == Parametrization::kGeneral ? cfg.n_pulses - 1 : 0);
    for (int i = first; i < last; ++i) x[i] = std::max(lo[i], x[i] * shrink);
  }

  const double log_threshold = std::log10(cfg.effective_threshold());
  AnnealOutcome stage = anneal_stage(f, x, cfg.anneal, cfg.simplex,
                                     log_threshold + std::log10(cfg.stop_factor), lo, hi, rng);
  long evaluations = stage.evaluations;
  int steps = stage.steps;

  if (cfg.minimize_area && stage.f < log_threshold) {
    const double margin = log_threshold + std::log10(cfg.area_margin);
    auto g = [&](const std::vector<double>& y) { return space.area_objective(y, dphis, margin); };
    const AnnealOutcome area = anneal_stage(g, stage.x, cfg.area_anneal, cfg.simplex,
                                            -std::numeric_limits<double>::infinity(), lo, hi, rng);
    evaluations += area.evaluations;
    steps += area.steps;
    if (f(area.x) < log_threshold) stage.x = area.x;
    stage.f = std::min(stage.f, f(stage.x));
  }

  RestartOutcome out;
  if (stage.f < log_threshold) {
    out.solution = Solution{};
    out.solution->sequence = space.decode(stage.x, dphis);
    out.solution->provenance = {cfg.seed, restart, steps, evaluations};
  }
  return out;
}

}  // namespace

std::vector<Solution> anneal_search(const SearchConfig& config, const TrapConfig& trap,
                                    const CouplingTable& coupling) {
  const SearchSpace space(config, trap, coupling);
  if (space.empty() || config.restarts <= 0) return {};

  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(config.restarts));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < config.restarts; r = next++) outcomes[r] = run_restart(space, r);
  };
  const int threads = std::max(
      1, std::min(config.restarts, config.threads > 0
                                       ? config.threads
                                       : static_cast<int>(std::thread::hardware_concurrency())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<Solution> found;
  for (const auto& o : outcomes) {
    if (!o.solution) continue;
    Solution s = make_solution(o.solution->sequence, trap, coupling, o.solution->provenance);
    if (s.epsilon < config.effective_threshold()) found.push_back(std::move(s));
  }
  std::stable_sort(found.begin(), found.end(), [](const Solution& a, const Solution& b) {
    if (a.area != b.area) return a.area < b.area;
    if (a.tau != b.tau) return a.tau < b.tau;
    return a.provenance.restart < b.provenance.restart;
  });
  std::vector<Solution> unique;
  for (auto& s : found) {
    const bool dup = std::any_of(unique.begin(), unique.end(), [&](const Solution& u) {
      return std::abs(u.tau - s.tau) <= 1e-6 * u.tau && std::abs(u.area - s.area) <= 1e-6 * u.area;
    });
    if (!dup) unique.push_back(std::move(s));
  }
  return unique;
}

namespace {

PulseSequence with_omega(const PulseSequence& seq, double w) {
  PulseSequence out = seq;
  for (auto& p : out.pulses) p.omega = w;
  return out;
}

cplx reference_theta(const PulseSequence& seq, const CouplingTable& coupling) {
  const cplx z = coupling.ls_factor(strongest_ls(coupling)) * coupling.ls_scale;
  std::vector<cplx> amps;
  for (const auto& p : seq.pulses) amps.push_back(z * p.amplitude);
  return lightshift_theta_plus(seq, amps);
}

}  // namespace

RetuneResult retune_frequency(const PulseSequence& seq, const TrapConfig& /*trap*/,
                              const CouplingTable& coupling, Bounds window) {
  if (seq.empty()) throw std::invalid_argument("retune_frequency: empty sequence");
  const double w0 = seq.pulses.front().omega;
  for (const auto& p : seq.pulses) {
    if (p.omega != w0) throw std::invalid_argument("retune_frequency: needs a shared omega");
  }
  if (!(window.lo <= w0 && w0 <= window.hi && window.lo < window.hi)) {
    throw std::invalid_argument("retune_frequency: window must bracket the current omega");
  }
  // |theta+| has the same minimizer as |theta+|^2 but is not flat at a zero,
  // so the bracket keeps shrinking to full precision.
  auto f = [&](double w) { return std::abs(reference_theta(with_omega(seq, w), coupling)); };

  RetuneResult out;
  out.omega_before = w0;
  out.theta_before = reference_theta(seq, coupling);
  if (std::abs(out.theta_before) == 0.0) {
    out.omega = w0;
    out.theta = out.theta_before;
    out.sequence = seq;
    return out;
  }

  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = window.lo, b = window.hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  const double w = 0.5 * (a + b);
  const double edge = 1e-9 * (window.hi - window.lo);
  if (w - window.lo < edge || window.hi - w < edge) {
    throw NoInteriorMinimum("retune_frequency: |theta+| has no interior minimum in the window");
  }
  out.omega = w;
  out.sequence = with_omega(seq, w);
  out.theta = reference_theta(out.sequence, coupling);
  if (std::abs(out.theta) >= std::abs(out.theta_before)) {
    out.omega = w0;
    out.sequence = seq;
    out.theta = out.theta_before;
  }
  return out;
}

std::string to_string(SensitivityParam p) {
  switch (p) {
    case SensitivityParam::kDuration: return "duration";
    case SensitivityParam::kAmplitude: return "amplitude";
    case SensitivityParam::kGap: return "gap";
    case SensitivityParam::kOmega: return "omega";
  }
  return "?";
}

SensitivityParam parse_sensitivity_param(const std::string& name) {
  for (auto p : {SensitivityParam::kDuration, SensitivityParam::kAmplitude,
                 SensitivityParam::kGap, SensitivityParam::kOmega}) {
    if (to_string(p) == name) return p;
  }
  throw std::invalid_argument("unknown sensitivity parameter: " + name);
}

PulseSequence perturb(const PulseSequence& seq, SensitivityParam param, double sigma) {
  PulseSequence out = seq;
  const double k = 1.0 + sigma;
  switch (param) {
    case SensitivityParam::kAmplitude:
      return seq.scaled(k);
    case SensitivityParam::kOmega:
      for (auto& p : out.pulses) p.omega *= k;
      return out;
    case SensitivityParam::kDuration:
    case SensitivityParam::kGap: {
      if (seq.empty()) return out;
      double t = seq.pulses.front().t_start;
      for (std::size_t i = 0; i < seq.size(); ++i) {
        const Pulse& p = seq.pulses[i];
        out.pulses[i].t_start = t;
        out.pulses[i].duration = param == SensitivityParam::kDuration ? p.duration * k : p.duration;
        double gap = 0.0;
        if (i + 1 < seq.size()) gap = seq.pulses[i + 1].t_start - p.t_end();
        if (param == SensitivityParam::kGap) gap *= k;
        t = out.pulses[i].t_end() + gap;
      }
      return out;
    }
  }
  return out;
}

SensitivityResult sensitivity_scan(const PulseSequence& seq, const TrapConfig& trap,
                                   const CouplingTable& coupling, SensitivityParam param,
                                   const std::vector<double>& sigmas) {
  SensitivityResult r;
  r.param = param;
  r.baseline = averaged_epsilon(seq, trap, coupling);
  double num = 0.0, den = 0.0;
  for (double s : sigmas) {
    const double e = averaged_epsilon(perturb(seq, param, s), trap, coupling);
    r.points.push_back({s, e});
    num += s * s * (e - r.baseline);
    den += s * s * s * s;
  }
  r.c = den > 0.0 ? num / den : 0.0;
  double mean = 0.0;
  for (const auto& p : r.points) mean += (p.epsilon - r.baseline) / r.points.size();
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& p : r.points) {
    const double y = p.epsilon - r.baseline;
    ss_res += (y - r.c * p.sigma * p.sigma) * (y - r.c * p.sigma * p.sigma);
    ss_tot += (y - mean) * (y - mean);
  }
  r.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  r.non_quadratic = r.r_squared < 0.99;
  return r;
}

}  // namespace pulsegate
