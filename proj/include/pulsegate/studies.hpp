#pragma once

// Reproduction harnesses: the single-pulse duration scan, evaluation of the
// reference example sequences, and the minimal-area versus duration study.

#include <stdexcept>
#include <string>
#include <vector>

#include "pulsegate/core.hpp"
#include "pulsegate/fidelity.hpp"
#include "pulsegate/optimizer.hpp"
#include "pulsegate/phasespace.hpp"

namespace pulsegate {

enum class ScanVariant { kSingle, kSpinEcho };

std::string to_string(ScanVariant v);

struct ScanRow {
  double tau_over_period = 0.0;
  double omega_opt = 0.0;
  /// Psi-normalized <eps> at omega_opt.
  double eps_avg = 0.0;
  /// Infidelity of the same normalized drive at phi_o = 0.
  double eps_phi0 = 0.0;
  ScanVariant variant = ScanVariant::kSingle;
};

struct ScanResult {
  /// Grouped by variant, each group in increasing tau.
  std::vector<ScanRow> rows;

  std::vector<ScanRow> variant_rows(ScanVariant v) const;
};

/// For every total duration (in units of 2 pi / omega_c) minimizes <eps>
/// over the drive frequency of one square pulse, or of two tau/2 pulses with
/// a spin flip between them. The frequency search covers (0, omega_max] on a
/// grid of spacing (2 pi / tau) / 16 and refines the best cells by golden
/// section. Throws std::invalid_argument for a non-increasing or
/// non-positive grid.
ScanResult single_pulse_scan(const std::vector<double>& tau_over_period,
                             const TrapConfig& trap, const CouplingTable& coupling,
                             const std::vector<ScanVariant>& variants = {ScanVariant::kSingle,
                                                                         ScanVariant::kSpinEcho},
                             double omega_max = 3.0);

/// Interior local minima of eps_avg along tau for one variant.
std::vector<ScanRow> local_minima(const ScanResult& scan, ScanVariant v);

struct OrbitClosure {
  Mode mode = Mode::kCom;
  double phi_o = 0.0;
  std::vector<TrajectoryPoint> trajectory;
  /// |alpha(end)| over the largest |alpha| along the orbit.
  double closure_ratio = 0.0;
};

struct ExampleCase {
  std::string name;
  std::string description;
  /// Psi-normalized.
  PulseSequence sequence;
  double epsilon = 0.0;
  /// max - min of eps(phi_o) over a 64-point grid.
  double eps_spread = 0.0;
  ConditionResiduals residuals;
  double tau_over_period = 0.0;
  double area = 0.0;
  /// COM and stretch orbits at phi_o = 0 and pi / 2.
  std::vector<OrbitClosure> orbits;
  /// The case is a quantitative target rather than a qualitative comparison.
  bool headline = false;
};

/// The reference example sequences from their stated parameters: n4-equal,
/// n5-fast, n6-low-area, shaped-3 (segments as given) and shaped-5 (mirrored).
std::vector<ExampleCase> evaluate_examples(const TrapConfig& trap,
                                              const CouplingTable& coupling,
                                              int samples_per_pulse = 200);

/// Reference sequences before normalization, by case name.
PulseSequence example_sequence(const std::string& name);
std::vector<std::string> example_names();

class InsufficientPoints : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParetoRow {
  int n_pulses = 0;
  double tau_over_period = 0.0;
  double area = 0.0;
  double eps = 0.0;
  Parametrization parametrization = Parametrization::kSymmetric;
};

struct ParetoResult {
  /// Lower envelope in increasing tau: each row has a smaller area than every
  /// solution of equal or shorter duration.
  std::vector<ParetoRow> envelope;
  /// Least-squares fit of log(area) = intercept + slope log(tau) over the
  /// envelope rows with tau_over_period < fast_limit.
  double slope = 0.0;
  double intercept = 0.0;
  int fit_points = 0;
};

/// Throws InsufficientPoints when fewer than five envelope rows fall below
/// fast_limit.
ParetoResult pareto_area_vs_tau(const std::vector<Solution>& solutions,
                                double fast_limit = 2.0);

struct ParetoSearchConfig {
  /// Parametrization, bounds, thresholds and annealing for the seed searches.
  SearchConfig base = [] {
    SearchConfig c;
    c.restarts = 6;
    c.anneal.steps = 30;
    return c;
  }();
  /// Duration caps (units of 2 pi / omega_c) for the seed searches.
  std::vector<double> seed_caps{0.3, 0.45, 0.6, 0.8, 1.0, 1.25, 1.5, 2.0};
  /// Duration caps at which the minimal area is sought.
  std::vector<double> tau_grid;
  /// Sweeps over tau_grid, alternately upward and downward.
  int passes = 3;
};

/// Seed solutions from anneal_search at every seed cap, then continuation:
/// at each grid cap every pooled solution is stretched to the cap, brought
/// back below threshold and its area minimized; the best joins the pool.
/// Returns every solution found (seeds and grid minima), sorted by tau.
/// Continuation results record restart = -1 - grid index and the pass number
/// in anneal_steps.
std::vector<Solution> pareto_search(const ParetoSearchConfig& config, const TrapConfig& trap,
                                    const CouplingTable& coupling);

/// 16 caps spaced geometrically over [0.25, 2].
std::vector<double> default_pareto_grid();

}  // namespace pulsegate
