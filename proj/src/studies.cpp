#include "pulsegate/studies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pulsegate {

std::string to_string(ScanVariant v) {
  return v == ScanVariant::kSingle ? "single" : "spin-echo";
}

std::vector<ScanRow> ScanResult::variant_rows(ScanVariant v) const {
  std::vector<ScanRow> out;
  for (const auto& r : rows) {
    if (r.variant == v) out.push_back(r);
  }
  return out;
}

namespace {

PulseSequence one_pulse(double tau, double omega) {
  PulseSequence s;
  s.pulses.push_back({0.0, tau, 1.0, omega, 0.0});
  return s;
}

double scan_objective(ScanVariant v, double tau, double omega, const TrapConfig& trap,
                      const CouplingTable& coupling) {
  if (v == ScanVariant::kSingle) {
    return normalized_averaged_epsilon(build_gate_model(one_pulse(tau, omega), trap, coupling));
  }
  return spin_echo(one_pulse(0.5 * tau, omega), trap, coupling, 0.0).normalized_epsilon;
}

ScanRow scan_row(ScanVariant v, double tau, double omega, const TrapConfig& trap,
                 const CouplingTable& coupling) {
  ScanRow row;
  row.tau_over_period = tau / kTwoPi;
  row.omega_opt = omega;
  row.variant = v;
  if (v == ScanVariant::kSingle) {
    const GateModel m = build_gate_model(one_pulse(tau, omega), trap, coupling);
    row.eps_avg = normalized_averaged_epsilon(m);
    const double psi = mean_psi(m);
    if (psi > 0.0) {
      const PulseSequence n = one_pulse(tau, omega).scaled(std::sqrt(std::numbers::pi / psi));
      row.eps_phi0 = gate_metrics(n, trap, coupling, 0.0).epsilon;
    } else {
      row.eps_phi0 = row.eps_avg;
    }
    return row;
  }
  const SpinEchoResult e = spin_echo(one_pulse(0.5 * tau, omega), trap, coupling, 0.0);
  row.eps_avg = e.normalized_epsilon;
  const double psi = mean_psi(e.model);
  if (psi > 0.0) {
    const PulseSequence n =
        one_pulse(0.5 * tau, omega).scaled(std::sqrt(std::numbers::pi / psi));
    row.eps_phi0 = gate_metrics(spin_echo(n, trap, coupling, 0.0).model, 0.0).epsilon;
  } else {
    row.eps_phi0 = row.eps_avg;
  }
  return row;
}

template <class F>
double golden_min(F f, double a, double b, double* fmin) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80 && (b - a) > 1e-13 * b; ++it) {
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
  const double x = fc <= fd ? c : d;
  *fmin = std::min(fc, fd);
  return x;
}

}  // namespace

ScanResult single_pulse_scan(const std::vector<double>& tau_over_period,
                             const TrapConfig& trap, const CouplingTable& coupling,
                             const std::vector<ScanVariant>& variants, double omega_max) {
  for (std::size_t i = 0; i < tau_over_period.size(); ++i) {
    if (!(tau_over_period[i] > 0.0) || (i > 0 && tau_over_period[i] <= tau_over_period[i - 1])) {
      throw std::invalid_argument("single_pulse_scan: tau grid must be positive and increasing");
    }
  }
  if (!(omega_max > 0.0)) throw std::invalid_argument("single_pulse_scan: omega_max <= 0");

  ScanResult out;
  for (ScanVariant v : variants) {
    for (double top : tau_over_period) {
      const double tau = top * kTwoPi;
      const double h = (kTwoPi / tau) / 16.0;
      const int cells = std::max(2, static_cast<int>(std::ceil(omega_max / h)));
      std::vector<double> w(static_cast<std::size_t>(cells)), e(w.size());
      for (int i = 0; i < cells; ++i) {
        w[i] = h * (i + 1);
        e[i] = scan_objective(v, tau, w[i], trap, coupling);
      }
      std::vector<int> order(w.size());
      for (int i = 0; i < cells; ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return e[a] < e[b]; });

      double best_w = w[order[0]], best_e = e[order[0]];
      for (int k = 0; k < std::min(3, cells); ++k) {
        const int i = order[k];
        const double lo = i > 0 ? w[i - 1] : 0.5 * w[i];
        const double hi = i + 1 < cells ? w[i + 1] : w[i];
        double fmin = 0.0;
        const double x = golden_min(
            [&](double om) { return scan_objective(v, tau, om, trap, coupling); }, lo, hi, &fmin);
        if (fmin < best_e) {
          best_e = fmin;
          best_w = x;
        }
      }
      out.rows.push_back(scan_row(v, tau, best_w, trap, coupling));
    }
  }
  return out;
}

std::vector<ScanRow> local_minima(const ScanResult& scan, ScanVariant v) {
  const std::vector<ScanRow> r = scan.variant_rows(v);
  std::vector<ScanRow> out;
  for (std::size_t i = 1; i + 1 < r.size(); ++i) {
    if (r[i].eps_avg < r[i - 1].eps_avg && r[i].eps_avg <= r[i + 1].eps_avg) out.push_back(r[i]);
  }
  return out;
}

std::vector<std::string> example_names() {
  return {"n4-equal", "n5-fast", "n6-low-area", "shaped-3", "shaped-5"};
}

PulseSequence example_sequence(const std::string& name) {
  if (name == "n4-equal") {
    SymmetricParams p;
    p.durations = {0.524696, 1.02264};
    p.gaps = {2.60288, 2.60407};
    p.omega = 4.0376;
    PulseSequence s = expand_symmetric(p, 4);
    s.parametrization = Parametrization::kEqualAmplitude;
    return s;
  }
  if (name == "n5-fast") {
    SymmetricParams p;
    p.durations = {0.0953071, 0.288972, 0.269998};
    p.gaps = {0.0305622, 0.272151};
    p.amplitudes = {1.0, 2.91057, 3.59685};
    p.omega = 20.4761;
    return expand_symmetric(p, 5);
  }
  if (name == "n6-low-area") {
    // Timing list read as tau_1, gap, tau_2, gap, tau_3, central gap.
    SymmetricParams p;
    p.durations = {0.984464, 1.04219, 1.0990};
    p.gaps = {1.6124, 0.00031, 1.7475};
    p.amplitudes = {0.6786, -0.4002, -0.5528};
    p.omega = 1.36603;
    return expand_symmetric(p, 6);
  }
  if (name == "shaped-3") {
    return expand_shaped({1.0168, 2.3997, 1.5416}, {0.5415, 0.9561, 1.1280}, 2.60258);
  }
  if (name == "shaped-5") {
    return expand_shaped({1.0168, 2.3997, 1.5416, 2.3997, 1.0168},
                         {0.5415, 0.9561, 1.1280, 0.9561, 0.5415}, 2.60258);
  }
  throw std::invalid_argument("unknown example case: " + name);
}

std::vector<ExampleCase> evaluate_examples(const TrapConfig& trap,
                                              const CouplingTable& coupling,
                                              int samples_per_pulse) {
  const std::vector<std::pair<std::string, std::string>> info{
      {"n4-equal", "symmetric N=4, equal amplitudes"},
      {"n5-fast", "symmetric N=5, fixed omega"},
      {"n6-low-area", "symmetric N=6, small area"},
      {"shaped-3", "shaped pulse, three segments as given"},
      {"shaped-5", "shaped pulse, segments mirrored to five"}};
  std::vector<ExampleCase> out;
  for (const auto& [name, description] : info) {
    ExampleCase c;
    c.name = name;
    c.description = description;
    c.sequence = normalize_psi(example_sequence(name), trap, coupling).sequence;
    const GateModel model = build_gate_model(c.sequence, trap, coupling);
    c.epsilon = averaged_epsilon(model);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int k = 0; k < 64; ++k) {
      const double e = gate_metrics(model, kTwoPi * k / 64).epsilon;
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    c.eps_spread = hi - lo;
    c.residuals = condition_residuals(model);
    // Of the two shaped-pulse readings, the one that reaches 1e-4 is headline.
    c.headline = name == "n4-equal" || name == "n5-fast" ||
                 (name.rfind("shaped-", 0) == 0 && c.epsilon < 1e-4);
    c.tau_over_period = c.sequence.total_duration() / kTwoPi;
    c.area = total_area(c.sequence);
    for (Mode mode : kModes) {
      for (double phi : {0.0, 0.5 * std::numbers::pi}) {
        OrbitClosure o;
        o.mode = mode;
        o.phi_o = phi;
        o.trajectory = orbit_trajectory(c.sequence, trap, mode, phi, samples_per_pulse);
        double excursion = 0.0;
        for (const auto& p : o.trajectory) excursion = std::max(excursion, std::abs(p.alpha));
        o.closure_ratio =
            excursion > 0.0 ? std::abs(o.trajectory.back().alpha) / excursion : 0.0;
        c.orbits.push_back(std::move(o));
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

ParetoResult pareto_area_vs_tau(const std::vector<Solution>& solutions, double fast_limit) {
  std::vector<ParetoRow> rows;
  for (const auto& s : solutions) {
    rows.push_back({static_cast<int>(s.sequence.size()), s.tau / kTwoPi, s.area, s.epsilon,
                    s.parametrization});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ParetoRow& a, const ParetoRow& b) {
    if (a.tau_over_period != b.tau_over_period) return a.tau_over_period < b.tau_over_period;
    return a.area < b.area;
  });
  ParetoResult out;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    if (r.area < best) {
      out.envelope.push_back(r);
      best = r.area;
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& r : out.envelope) {
    if (!(r.tau_over_period < fast_limit)) continue;
    const double x = std::log(r.tau_over_period), y = std::log(r.area);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 5) {
    throw InsufficientPoints("pareto_area_vs_tau: fewer than five envelope points in range");
  }
  out.fit_points = n;
  out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  out.intercept = (sy - out.slope * sx) / n;
  return out;
}

std::vector<double> default_pareto_grid() {
  std::vector<double> g;
  for (int i = 0; i < 16; ++i) g.push_back(0.25 * std::pow(8.0, i / 15.0));
  return g;
}

std::vector<Solution> pareto_search(const ParetoSearchConfig& config, const TrapConfig& trap,
                                    const CouplingTable& coupling) {
  std::vector<Solution> pool;
  for (double cap : config.seed_caps) {
    SearchConfig cfg = config.base;
    cfg.max_tau_over_period = cap;
    for (auto& s : anneal_search(cfg, trap, coupling)) pool.push_back(std::move(s));
  }

  const std::vector<double> grid =
      config.tau_grid.empty() ? default_pareto_grid() : config.tau_grid;
  const double thr = config.base.effective_threshold();
  const double log_thr = std::log10(thr);
  const std::vector<double> dphis(static_cast<std::size_t>(config.base.n_pulses), 0.0);
  const int g = static_cast<int>(grid.size());

  for (int pass = 0; pass < config.passes; ++pass) {
    for (int j = 0; j < g; ++j) {
      const double cap = grid[pass % 2 == 0 ? j : g - 1 - j];
      SearchConfig cfg = config.base;
      cfg.max_tau_over_period = cap;
      const SearchSpace space(cfg, trap, coupling);
      auto f = [&](const std::vector<double>& y) { return space.objective(y, dphis); };
      auto area = [&](const std::vector<double>& y) {
        return space.area_objective(y, dphis, log_thr + std::log10(cfg.area_margin));
      };

      std::optional<Solution> best;
      const std::size_t n_pool = pool.size();
      for (std::size_t i = 0; i < n_pool; ++i) {
        const double k = 0.999 * cap * kTwoPi / pool[i].tau;
        const std::vector<double> x = space.time_scaled(space.encode(pool[i].sequence), k);
        if (!(f(x) < 40.0)) continue;
        const SimplexResult feasible = nelder_mead(f, x, cfg.simplex);
        if (!(feasible.f < log_thr + 0.5)) continue;
        SimplexResult a = nelder_mead(area, feasible.x, cfg.simplex);
        a = nelder_mead(area, a.x, cfg.simplex);
        if (!(f(a.x) < log_thr)) continue;
        Solution s = make_solution(space.decode(a.x, dphis), trap, coupling,
                                   {cfg.seed, -1 - j, pass, a.evaluations});
        if (s.epsilon < thr && (!best || s.area < best->area)) best = std::move(s);
      }
      if (best) pool.push_back(std::move(*best));
    }
  }
  std::stable_sort(pool.begin(), pool.end(),
                   [](const Solution& a, const Solution& b) { return a.tau < b.tau; });
  return pool;
}

}  // namespace pulsegate
