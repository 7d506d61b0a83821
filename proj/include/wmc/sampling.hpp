#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "wmc/counting.hpp"
#include "wmc/formula.hpp"
#include "wmc/random.hpp"
#include "wmc/satengine.hpp"

namespace wmc {

/// Smallest tolerance for which kappa in [0,1) exists; kappa = 0 itself is rejected
/// because the pivot diverges there.
inline constexpr double kMinSamplerEpsilon = 1.87;

struct KappaPivot {
  double kappa = 0.0;
  std::uint64_t pivot = 0;

  double hi_thresh() const { return 1.0 + (1.0 + kappa) * static_cast<double>(pivot); }
  double lo_thresh() const { return static_cast<double>(pivot) / (1.0 + kappa); }
};

/// (1+kappa)(2.36 + 0.51/(1-kappa)^2) - 1; strictly increasing on [0,1).
double sampler_tolerance(double kappa);

/// Solves sampler_tolerance(kappa) = epsilon by bisection (to 1e-15) and derives the pivot.
KappaPivot compute_kappa_pivot(double epsilon);

/// Approximate count and derived quantities frozen for repeated sampling.
struct SamplerState {
  double epsilon = 0.0;
  double tilt = 0.0;
  std::uint64_t fingerprint = 0;
  KappaPivot kp;
  double log_count = 0.0;  // ln C
  double log_wmax = 0.0;
  int q = 0;
  std::uint64_t counting_solver_calls = 0;
};

struct SampleOutcome {
  std::optional<Assignment> witness;
  bool perfect_path = false;
  bool used_cache = false;
  unsigned hash_rows = 0;
  double cell_weight = 0.0;  // scaled weight W of the final cell
  std::uint64_t solver_calls = 0;

  bool ok() const { return witness.has_value(); }
};

struct SamplerOptions {
  Budget budget;
  unsigned retry_cap = 3;
  /// Parameters of the embedded count (epsilon and delta are fixed at 0.8 / 0.2).
  unsigned chains = 1;
  unsigned jobs = 1;
  double timeout_seconds = 0.0;  // for the embedded count; zero means none
};

// Repeated weighted-uniform witness generation for one (formula, weights, epsilon, r).
class WeightGenerator {
 public:
  WeightGenerator(const CnfFormula& formula, const WeightModel& weights, double epsilon, double tilt,
                  SamplerOptions options = {});

  const KappaPivot& kappa_pivot() const { return kp_; }
  double hi_thresh() const { return hi_; }
  double lo_thresh() const { return lo_; }

  /// Runs the one-time approximate count. Errors if every counting core fails.
  SamplerState make_state(std::uint64_t seed) const;

  /// One sample. Without a state the count is recomputed whenever the hashed path is needed.
  SampleOutcome sample(Rng& rng, const SamplerState* state = nullptr);

  const SolverStats& solver_stats() const { return solver_.stats(); }

 private:
  std::uint64_t fingerprint() const;

  CnfFormula formula_;
  WeightModel weights_;
  double epsilon_;
  double tilt_;
  SamplerOptions options_;
  KappaPivot kp_;
  double hi_ = 0.0, lo_ = 0.0;
  SolverInstance solver_;
};

SamplerState make_sampler_state(const CnfFormula& formula, const WeightModel& weights, double epsilon,
                                double tilt, std::uint64_t seed);

SampleOutcome weightgen(const CnfFormula& formula, const WeightModel& weights, double epsilon, double tilt,
                        Rng& rng, const SamplerState* cached = nullptr);

/// Index drawn with probability proportional to exp(log_weights[i]) (inverse CDF).
std::size_t draw_weighted(std::span<const double> log_weights, Rng& rng);

}  // namespace wmc
