#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wmc/formula.hpp"
#include "wmc/numeric.hpp"
#include "wmc/random.hpp"
#include "wmc/satengine.hpp"
#include "wmc/xorhash.hpp"

namespace wmc {

/// Output of one bounded enumeration: witnesses with distinct support projections, their
/// total weight, and the updated w_max estimate (smallest weight seen, seeded with wmax/r,
/// times r). All weights are natural logs.
struct BoundedEnumeration {
  std::vector<Assignment> solutions;
  std::vector<double> log_weights;
  double log_total = kNegInf;
  double log_new_wmax = 0.0;
  bool saturated = false;
  bool budget_exceeded = false;
  std::uint64_t solver_calls = 0;

  double total() const { return std::exp(log_total); }
  double new_wmax() const { return std::exp(log_new_wmax); }
  /// w(Y) / new_wmax.
  double scaled_total() const { return std::exp(log_total - log_new_wmax); }
};

/// Enumerates solutions of the solver's formula (conjoined with `hash` when given) until
/// the scaled total weight w_total / (w_min * r) exceeds `pivot` or the cell is exhausted.
/// Blocking clauses and hash rows are popped before returning.
BoundedEnumeration bounded_weight_sat(SolverInstance& solver, const HashConstraintSet* hash, double pivot,
                                      double r, double log_wmax, const Budget& budget = {});

struct CoreOptions {
  Budget budget;
  unsigned retry_cap = 3;
};

/// One round of hashing-based estimation. `log_value` is the natural log of the scaled
/// estimate c = w(Y) * 2^i / wmax (so c * wmax estimates the weighted count); empty on failure.
struct CountEstimate {
  std::optional<double> log_value;
  double log_wmax = 0.0;
  unsigned hash_rows = 0;
  unsigned rounds = 0;
  unsigned retries = 0;
  bool fast_path = false;
  std::uint64_t solver_calls = 0;

  bool failed() const { return !log_value.has_value(); }
  double value() const { return log_value ? std::exp(*log_value) : std::nan(""); }
};

CountEstimate weightmc_core(SolverInstance& solver, double pivot, double r, double log_wmax, Rng& rng,
                            const CoreOptions& options = {});

struct CountParams {
  double epsilon = 0.8;
  double delta = 0.2;
  double tilt = 3.0;
  std::uint64_t seed = 0;
  Budget solver_budget;
  double timeout_seconds = 0.0;  // whole run; zero means none
  unsigned retry_cap = 3;
  /// Core iterations are split into this many chains; wmax is threaded within a chain.
  /// Results depend on `chains` but never on `jobs`.
  unsigned chains = 1;
  unsigned jobs = 1;

  void validate() const;
};

/// 2 * ceil(e^{3/2} (1 + 1/epsilon)^2).
std::uint64_t counting_pivot(double epsilon);
/// ceil(35 log2(3/delta)).
std::uint64_t counting_iterations(double delta);

struct CountResult {
  bool ok = false;          // false when every core failed or the run timed out
  bool timed_out = false;
  double log_value = kNegInf;
  double log_wmax = 0.0;    // smallest threaded wmax over chains
  std::uint64_t pivot = 0;
  std::uint64_t iterations = 0;
  std::uint64_t successes = 0;
  std::uint64_t solver_calls = 0;
  double seconds = 0.0;
  std::vector<std::optional<double>> core_log_estimates;  // ln(c * wmax) per iteration

  double value() const { return std::exp(log_value); }
  double log2_value() const { return log2_of_ln(log_value); }
  double wmax() const { return std::exp(log_wmax); }
};

/// Median of t core estimates; pass a window to count only solutions inside it.
CountResult weightmc(const CnfFormula& formula, const WeightModel& weights, const CountParams& params,
                     const std::optional<WeightWindow>& window = std::nullopt);

/// ceil(log2(H/L)) + 1.
unsigned partition_count(double low, double high);
/// Window m (1-based): (H/2^m, H/2^{m-1}].
WeightWindow partition_window(double high, unsigned m);

struct WindowReport {
  unsigned index = 0;
  WeightWindow window;
  CountResult result;
};

struct PartitionedResult {
  bool ok = false;
  double log_value = kNegInf;
  unsigned windows = 0;
  double delta_prime = 0.0;
  std::uint64_t solver_calls = 0;
  double seconds = 0.0;
  std::vector<WindowReport> reports;

  double value() const { return std::exp(log_value); }
  double log2_value() const { return log2_of_ln(log_value); }
};

/// Sums per-window counts over the dyadic partition of (L, H]; each window runs with tilt 2
/// and confidence delta / N. `params.tilt` and `params.delta` are overridden.
PartitionedResult partitioned_weightmc(const CnfFormula& formula, const WeightModel& weights, double low,
                                       double high, const CountParams& params);

/// Lower median (natural logs in, natural log out); nullopt for an empty list.
std::optional<double> lower_median(std::vector<double> values);

}  // namespace wmc
