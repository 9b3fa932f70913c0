#pragma once

// Sequence search: an inner linear solve for the amplitudes, Nelder-Mead
// refinement of the timings and frequency, Metropolis annealing between
// refinements, plus frequency retuning and parameter-sensitivity scans.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pulsegate/core.hpp"
#include "pulsegate/fidelity.hpp"

namespace pulsegate {

enum class ConstraintKind { kDacPlus, kDacMinus, kDasPlus, kDasMinus, kThetaPlus };

std::string to_string(ConstraintKind k);
ConstraintKind parse_constraint_kind(const std::string& name);

/// One real row of the amplitude system: the real or imaginary part of a
/// complex condition.
struct ConstraintRow {
  ConstraintKind kind = ConstraintKind::kDacPlus;
  bool imaginary = false;
  bool operator==(const ConstraintRow&) const = default;
};

/// {Re, Im} of dac+, dac-, theta+ in that order.
std::vector<ConstraintRow> default_constraint_rows();

struct AmplitudeSolve {
  /// Amplitude of every pulse; the first equals the reference scale.
  std::vector<double> amplitudes;
  int rank = 0;
  int unknowns = 0;
  /// Rank below the number of unknowns, or an all-zero system.
  bool degenerate = false;
  /// Norm of the residual of the selected rows.
  double residual = 0.0;
};

/// Solves the selected linear conditions for the amplitudes of pulses 2..N
/// with pulse 1 held at `reference`, using the timings, frequencies and phase
/// offsets of `timing` (its amplitudes are ignored). At most N - 1 rows are
/// used. Least squares when overdetermined, minimum norm when rank deficient.
///
/// With `mirrored` set the amplitudes are constrained to the time-symmetric
/// profile of expand_symmetric, leaving ceil(N/2) - 1 unknowns; each condition
/// is then rotated to the sequence midpoint where it is real, and only real
/// rows are used.
AmplitudeSolve solve_amplitudes(const PulseSequence& timing, const TrapConfig& trap,
                                const CouplingTable& coupling,
                                const std::vector<ConstraintRow>& rows,
                                bool mirrored = false, double reference = 1.0);

struct SimplexOptions {
  int max_iterations = 2000;
  /// Initial simplex edge, relative to |x_i| (absolute where x_i = 0).
  double initial_step = 0.05;
  /// Stop when the spread of simplex values falls below this.
  double ftol = 1e-12;
  /// ... and the simplex diameter below this.
  double xtol = 1e-12;
};

struct SimplexResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  /// Iteration budget ran out before the tolerances were met.
  bool exhausted = false;
  /// Best value after each iteration.
  std::vector<double> best_history;
};

using Objective = std::function<double(const std::vector<double>&)>;

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink
/// 1/2). Ties are broken by vertex index so runs are reproducible. Throws
/// std::invalid_argument when f(x0) is not finite.
SimplexResult nelder_mead(const Objective& f, std::vector<double> x0,
                          const SimplexOptions& opts = {});

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
};

struct AnnealSchedule {
  /// Initial temperature in decades of <eps>.
  double t0 = 1.0;
  double cooling = 0.95;
  int steps = 200;
  /// Relative size of a perturbation at temperature t0.
  double step_scale = 0.1;
};

struct SearchConfig {
  int n_pulses = 5;
  Parametrization parametrization = Parametrization::kSymmetric;
  Bounds omega{1.0, 25.0};
  Bounds duration{0.01, 3.0};
  Bounds gap{0.0, 3.0};
  /// Upper bound on the total duration in units of 2 pi / omega_c.
  double max_tau_over_period = 1.0;
  /// Allowed phase offsets; each restart draws one per pulse.
  std::vector<double> dphi_grid{0.0};
  /// 0 selects the default: 1e-8, or 3e-5 below seven free parameters.
  double threshold = 0.0;
  std::uint64_t seed = 1;
  int restarts = 16;
  AnnealSchedule anneal;
  SimplexOptions simplex{600, 0.05, 1e-14, 1e-13};
  std::vector<ConstraintRow> constraints = default_constraint_rows();
  /// Worker threads; 0 uses the hardware concurrency.
  int threads = 0;
  /// Stop a restart once it is this far below the threshold.
  double stop_factor = 1e-2;
  /// After a restart reaches the threshold, minimize the Psi-normalized pulse
  /// area while keeping <eps> below threshold * area_margin.
  bool minimize_area = false;
  double area_margin = 0.1;
  AnnealSchedule area_anneal{0.1, 0.95, 60, 0.05};

  double effective_threshold() const;
};

struct Provenance {
  std::uint64_t seed = 0;
  int restart = 0;
  int anneal_steps = 0;
  long evaluations = 0;
};

struct Solution {
  /// Normalized so that <Psi> = pi; starts at t = 0.
  PulseSequence sequence;
  double epsilon = 0.0;
  ConditionResiduals residuals;
  double tau = 0.0;
  double area = 0.0;
  Parametrization parametrization = Parametrization::kSymmetric;
  Provenance provenance;
};

/// Decision-vector layout and decoding for a SearchConfig.
class SearchSpace {
 public:
  SearchSpace(const SearchConfig& cfg, const TrapConfig& trap, const CouplingTable& coupling);

  int dimension() const { return static_cast<int>(lower_.size()); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  bool empty() const { return empty_; }

  /// Sequence for decision vector x with amplitudes from the inner solve, not
  /// yet normalized. `dphis` has one entry per pulse.
  PulseSequence decode(const std::vector<double>& x, const std::vector<double>& dphis) const;

  /// log10 of the Psi-normalized <eps>, with penalties outside the bounds.
  double objective(const std::vector<double>& x, const std::vector<double>& dphis) const;

  /// Inverse of decode for the timing and frequency part (amplitudes are
  /// recomputed on decode). Throws std::invalid_argument on a size mismatch.
  std::vector<double> encode(const PulseSequence& seq) const;

  /// Stretches every duration and gap by k and divides the frequencies by k.
  std::vector<double> time_scaled(std::vector<double> x, double k) const;

  /// log10 of the Psi-normalized pulse area, plus a steep penalty once
  /// log10 <eps> exceeds `log_eps_limit`.
  double area_objective(const std::vector<double>& x, const std::vector<double>& dphis,
                        double log_eps_limit) const;

  const SearchConfig& config() const { return cfg_; }

 private:
  SearchConfig cfg_;
  TrapConfig trap_;
  CouplingTable coupling_;
  std::vector<double> lower_, upper_;
  bool empty_ = false;
  int n_dur_ = 0, n_gap_ = 0, n_omega_ = 1;
};

/// Random restarts of simplex refinement and annealing. Returns the
/// deduplicated solutions below threshold sorted by area, then duration.
std::vector<Solution> anneal_search(const SearchConfig& config, const TrapConfig& trap,
                                    const CouplingTable& coupling);

/// Turns a sequence into a Solution record (normalizing Psi).
Solution make_solution(const PulseSequence& seq, const TrapConfig& trap,
                       const CouplingTable& coupling, Provenance provenance = {});

class NoInteriorMinimum : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RetuneResult {
  double omega_before = 0.0;
  double omega = 0.0;
  cplx theta_before{};
  cplx theta{};
  PulseSequence sequence;
};

/// Minimizes |theta+|^2 over the shared drive frequency inside `window` by
/// golden-section search, other parameters fixed. Throws NoInteriorMinimum
/// when the minimum sits on the window edge, std::invalid_argument when the
/// window does not bracket the current frequency.
RetuneResult retune_frequency(const PulseSequence& seq, const TrapConfig& trap,
                              const CouplingTable& coupling, Bounds window);

enum class SensitivityParam { kDuration, kAmplitude, kGap, kOmega };

std::string to_string(SensitivityParam p);
SensitivityParam parse_sensitivity_param(const std::string& name);

/// Perturbs every pulse's parameter by a factor (1 + sigma). Durations grow
/// with the gaps held fixed, so later pulses move.
PulseSequence perturb(const PulseSequence& seq, SensitivityParam param, double sigma);

struct SensitivityPoint {
  double sigma = 0.0;
  double epsilon = 0.0;
};

struct SensitivityResult {
  SensitivityParam param = SensitivityParam::kDuration;
  double baseline = 0.0;
  std::vector<SensitivityPoint> points;
  /// Least-squares c in eps - baseline = c sigma^2.
  double c = 0.0;
  double r_squared = 0.0;
  /// R^2 below 0.99.
  bool non_quadratic = false;
};

SensitivityResult sensitivity_scan(const PulseSequence& seq, const TrapConfig& trap,
                                   const CouplingTable& coupling, SensitivityParam param,
                                   const std::vector<double>& sigmas);

}  // namespace pulsegate
