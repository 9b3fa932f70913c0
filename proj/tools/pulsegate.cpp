// Command-line front end.
//
// Exit codes: 0 success (evaluate: <eps> below threshold), 1 evaluate above
// threshold, 2 parse or flag error, 3 invalid sequence, 4 no solution found.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "pulsegate/core.hpp"
#include "pulsegate/fidelity.hpp"
#include "pulsegate/io.hpp"
#include "pulsegate/optimizer.hpp"
#include "pulsegate/phasespace.hpp"
#include "pulsegate/studies.hpp"

namespace fs = std::filesystem;
using namespace pulsegate;

namespace {

constexpr int kExitAbove = 1;
constexpr int kExitParse = 2;
constexpr int kExitInvalid = 3;
constexpr int kExitNoSolution = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const std::string& path, const std::function<void(std::ostream&)>& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write(out);
}

std::string fmt(double x) { return io::format_double(x); }

void print_residuals(const ConditionResiduals& r) {
  std::cout << "residual dac+ " << fmt(std::abs(r.dac_plus)) << "\n"
            << "residual dac- " << fmt(std::abs(r.dac_minus)) << "\n"
            << "residual das+ " << fmt(std::abs(r.das_plus)) << "\n"
            << "residual das- " << fmt(std::abs(r.das_minus)) << "\n"
            << "residual theta+ " << fmt(std::abs(r.theta_plus)) << "\n"
            << "residual area_c " << fmt(std::abs(r.area_c)) << "\n"
            << "residual area_s " << fmt(std::abs(r.area_s)) << "\n";
}

struct Common {
  std::uint64_t seed = 1;
  std::string out;
  double ls_scale = 1.0;
  bool bare_drive = false;

  CouplingTable coupling(const TrapConfig& trap) const {
    return canonical_coupling(bare_drive ? bare_drive_ls_scale(trap) : ls_scale);
  }
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out", c.out, "Output file or directory ('-' for stdout)");
  sub->add_option("--seed", c.seed, "Random seed");
  sub->add_option("--ls-scale", c.ls_scale, "Light-shift amplitude per unit force amplitude");
  sub->add_flag("--bare-drive", c.bare_drive,
                "Light shift in units of the bare laser drive (scale 2 / eta_c)");
}

// Reads and validates a sequence file; parse failures and invalid sequences
// propagate as io::ParseError and ValidationError.
io::SequenceFile load(const std::string& path) {
  io::SequenceFile f = io::read_sequence_file(path);
  f.sequence = validate(f.sequence);
  return f;
}

int cmd_evaluate(const std::string& file, const Common& common, int phi_grid,
                 std::optional<double> echo_gap, double threshold, bool normalize) {
  io::SequenceFile f = load(file);
  const CouplingTable coupling = common.coupling(f.trap);
  if (normalize) f.sequence = normalize_psi(f.sequence, f.trap, coupling).sequence;

  GateModel model;
  double tau = f.sequence.total_duration();
  if (echo_gap) {
    const SpinEchoResult e = spin_echo(f.sequence, f.trap, coupling, *echo_gap);
    model = e.model;
    tau = e.total_duration;
  } else {
    model = build_gate_model(f.sequence, f.trap, coupling);
  }
  const double eps = averaged_epsilon(model);
  std::cout << "eps_avg " << fmt(eps) << "\n"
            << "psi_mean " << fmt(mean_psi(model)) << "\n"
            << "tau " << fmt(tau) << "\n"
            << "tau_over_period " << fmt(tau / kTwoPi) << "\n"
            << "area " << fmt((echo_gap ? 2.0 : 1.0) * total_area(f.sequence)) << "\n";
  print_residuals(condition_residuals(model));

  if (phi_grid > 0) {
    emit(common.out, [&](std::ostream& os) {
      io::CsvWriter csv(os, {"phi_o", "eps"}, common.seed, "evaluate");
      for (int k = 0; k < phi_grid; ++k) {
        const double phi = kTwoPi * k / phi_grid;
        csv.cell(phi).cell(gate_metrics(model, phi).epsilon).end_row();
      }
    });
  }
  std::cout << (eps < threshold ? "PASS" : "FAIL") << " threshold " << fmt(threshold) << "\n";
  return eps < threshold ? 0 : kExitAbove;
}

int cmd_optimize(const std::string& config_path, const Common& common, bool seed_set,
                 std::optional<double> threshold) {
  SearchConfig cfg = io::parse_search_config(io::read_text(config_path));
  if (seed_set) cfg.seed = common.seed;
  if (threshold) cfg.threshold = *threshold;
  const TrapConfig trap;
  const CouplingTable coupling = common.coupling(trap);
  const std::vector<Solution> sols = anneal_search(cfg, trap, coupling);

  const fs::path dir = common.out.empty() ? fs::path("optimize_out") : fs::path(common.out);
  fs::create_directories(dir);
  std::ofstream summary(dir / "summary.csv", std::ios::binary);
  io::CsvWriter csv(summary,
                    {"file", "n_pulses", "parametrization", "tau_over_period", "area", "eps",
                     "restart"},
                    cfg.seed, "optimize");
  for (std::size_t i = 0; i < sols.size(); ++i) {
    const Solution& s = sols[i];
    char name[32];
    std::snprintf(name, sizeof name, "solution_%03zu.json", i);
    io::SequenceFile f;
    f.trap = trap;
    f.sequence = s.sequence;
    io::write_sequence_file(dir / name, f);
    csv.cell(std::string(name))
        .cell(static_cast<int>(s.sequence.size()))
        .cell(to_string(s.parametrization))
        .cell(s.tau / kTwoPi)
        .cell(s.area)
        .cell(s.epsilon)
        .cell(s.provenance.restart)
        .end_row();
  }
  if (sols.empty()) {
    std::cout << "no solutions\n";
    return kExitNoSolution;
  }
  std::cout << sols.size() << " solutions written to " << dir.string() << "\n";
  return 0;
}

int cmd_scan(const Common& common, double tau_min, double tau_max, double tau_step,
             double omega_max, const std::string& variant) {
  if (!(tau_step > 0.0)) throw UsageError("--tau-step must be positive");
  std::vector<ScanVariant> variants;
  if (variant == "single" || variant == "both") variants.push_back(ScanVariant::kSingle);
  if (variant == "spin-echo" || variant == "both") variants.push_back(ScanVariant::kSpinEcho);
  if (variants.empty()) throw UsageError("--variant must be single, spin-echo or both");
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double t = tau_min + i * tau_step;
    if (t > tau_max + 1e-12 * std::abs(tau_max)) break;
    if (t > 0.0) grid.push_back(t);
  }
  const TrapConfig trap;
  const ScanResult scan = single_pulse_scan(grid, trap, common.coupling(trap), variants, omega_max);
  emit(common.out, [&](std::ostream& os) {
    io::CsvWriter csv(os, {"tau_over_period", "omega_opt", "eps_avg", "eps_phi0", "variant"},
                      common.seed, "scan");
    for (const auto& r : scan.rows) {
      csv.cell(r.tau_over_period).cell(r.omega_opt).cell(r.eps_avg).cell(r.eps_phi0)
          .cell(to_string(r.variant)).end_row();
    }
  });
  return 0;
}

int cmd_pareto(const Common& common, int n_pulses, int restarts, int passes, bool all) {
  ParetoSearchConfig cfg;
  cfg.base.n_pulses = n_pulses;
  cfg.base.seed = common.seed;
  cfg.base.restarts = restarts;
  cfg.passes = passes;
  const TrapConfig trap;
  const std::vector<Solution> sols = pareto_search(cfg, trap, common.coupling(trap));
  std::vector<ParetoRow> rows;
  std::optional<ParetoResult> fit;
  try {
    fit = pareto_area_vs_tau(sols);
  } catch (const InsufficientPoints& e) {
    std::cerr << e.what() << "\n";
  }
  if (all || !fit) {
    for (const auto& s : sols) {
      rows.push_back({static_cast<int>(s.sequence.size()), s.tau / kTwoPi, s.area, s.epsilon,
                      s.parametrization});
    }
  } else {
    rows = fit->envelope;
  }
  emit(common.out, [&](std::ostream& os) {
    io::CsvWriter csv(os, {"n_pulses", "tau_over_period", "area", "eps"}, common.seed, "pareto");
    for (const auto& r : rows) {
      csv.cell(r.n_pulses).cell(r.tau_over_period).cell(r.area).cell(r.eps).end_row();
    }
  });
  if (!fit) return kExitNoSolution;
  std::cerr << "slope " << fmt(fit->slope) << " over " << fit->fit_points << " envelope points\n";
  return 0;
}

int cmd_orbit(const std::string& file, const Common& common, std::vector<double> phis,
              int samples) {
  const io::SequenceFile f = load(file);
  if (phis.empty()) phis = {0.0, 0.5 * std::numbers::pi};
  if (samples < 2) throw UsageError("--samples must be at least 2");
  emit(common.out, [&](std::ostream& os) {
    io::CsvWriter csv(os, {"t", "mode", "phi_o", "re_alpha", "im_alpha"}, common.seed, "orbit");
    for (Mode mode : kModes) {
      for (double phi : phis) {
        for (const auto& p : orbit_trajectory(f.sequence, f.trap, mode, phi, samples)) {
          csv.cell(p.t).cell(to_string(mode)).cell(phi).cell(p.alpha.real())
              .cell(p.alpha.imag()).end_row();
        }
      }
    }
  });
  return 0;
}

int cmd_sensitivity(const std::string& file, const Common& common,
                    const std::vector<std::string>& params, std::vector<double> sigmas) {
  const io::SequenceFile f = load(file);
  if (sigmas.empty()) sigmas = {1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2};
  std::vector<SensitivityParam> ps;
  for (const auto& name : params) {
    try {
      ps.push_back(parse_sensitivity_param(name));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  const CouplingTable coupling = common.coupling(f.trap);
  emit(common.out, [&](std::ostream& os) {
    io::CsvWriter csv(os, {"param", "sigma", "eps", "c_fit"}, common.seed, "sensitivity");
    for (SensitivityParam p : ps) {
      const SensitivityResult r = sensitivity_scan(f.sequence, f.trap, coupling, p, sigmas);
      for (const auto& pt : r.points) {
        csv.cell(to_string(p)).cell(pt.sigma).cell(pt.epsilon).cell(r.c).end_row();
      }
      std::cerr << to_string(p) << " c " << fmt(r.c) << " r_squared " << fmt(r.r_squared)
                << (r.non_quadratic ? " non-quadratic" : "") << "\n";
    }
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulse sequences for fast two-ion phase gates"};
  app.require_subcommand(1);

  Common common;
  std::string file;

  auto* evaluate = app.add_subcommand("evaluate", "Infidelity and residuals of a sequence file");
  evaluate->add_option("file", file, "Sequence file")->required();
  add_common(evaluate, common);
  int phi_grid = 0;
  std::optional<double> echo_gap;
  double threshold = 1e-4;
  bool normalize = false;
  evaluate->add_option("--phi-grid", phi_grid, "Also write eps on this many optical phases");
  evaluate->add_option("--spin-echo", echo_gap, "Apply the sequence twice with this gap");
  evaluate->add_option("--threshold", threshold, "Pass threshold on <eps>");
  evaluate->add_flag("--normalize", normalize, "Rescale amplitudes to <Psi> = pi first");

  auto* optimize = app.add_subcommand("optimize", "Search for sequences");
  std::string config;
  std::optional<double> opt_threshold;
  optimize->add_option("config", config, "Search configuration (JSON)")->required();
  add_common(optimize, common);
  optimize->add_option("--threshold", opt_threshold, "Override the solution threshold");

  auto* scan = app.add_subcommand("scan", "Single-pulse duration scan");
  add_common(scan, common);
  double tau_min = 1.0, tau_max = 20.0, tau_step = 0.05, omega_max = 3.0;
  std::string variant = "both";
  scan->add_option("--tau-min", tau_min, "First duration, units of 2 pi / omega_c");
  scan->add_option("--tau-max", tau_max, "Last duration");
  scan->add_option("--tau-step", tau_step, "Duration step");
  scan->add_option("--omega-max", omega_max, "Largest drive frequency tried");
  scan->add_option("--variant", variant, "single, spin-echo or both");

  auto* pareto = app.add_subcommand("pareto", "Minimal pulse area versus duration");
  add_common(pareto, common);
  int n_pulses = 5, restarts = 6, passes = 3;
  bool all = false;
  pareto->add_option("--n-pulses", n_pulses, "Pulses per sequence");
  pareto->add_option("--restarts", restarts, "Restarts per seed search");
  pareto->add_option("--passes", passes, "Continuation sweeps");
  pareto->add_flag("--all", all, "Write every solution instead of the envelope");

  auto* orbit = app.add_subcommand("orbit", "Phase-space trajectories");
  orbit->add_option("file", file, "Sequence file")->required();
  add_common(orbit, common);
  std::vector<double> phis;
  int samples = 200;
  orbit->add_option("--phi", phis, "Optical phases (default 0 and pi/2)");
  orbit->add_option("--samples", samples, "Samples per pulse");

  auto* sensitivity = app.add_subcommand("sensitivity", "Quadratic sensitivity to parameter errors");
  sensitivity->add_option("file", file, "Sequence file")->required();
  add_common(sensitivity, common);
  std::vector<std::string> params{"duration", "amplitude"};
  std::vector<double> sigmas;
  sensitivity->add_option("--param", params, "duration, amplitude, gap or omega");
  sensitivity->add_option("--sigma", sigmas, "Fractional perturbations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  try {
    if (*evaluate) return cmd_evaluate(file, common, phi_grid, echo_gap, threshold, normalize);
    if (*optimize) {
      return cmd_optimize(config, common, optimize->count("--seed") > 0, opt_threshold);
    }
    if (*scan) return cmd_scan(common, tau_min, tau_max, tau_step, omega_max, variant);
    if (*pareto) return cmd_pareto(common, n_pulses, restarts, passes, all);
    if (*orbit) return cmd_orbit(file, common, phis, samples);
    if (*sensitivity) return cmd_sensitivity(file, common, params, sigmas);
  } catch (const io::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitParse;
  } catch (const ValidationError& e) {
    std::cerr << "invalid sequence: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return 0;
}
