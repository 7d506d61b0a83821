#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wmc/formula.hpp"
#include "wmc/numeric.hpp"
#include "wmc/random.hpp"
#include "wmc/satengine.hpp"

namespace wmc {

struct OracleOptions {
  /// Maximum solver calls (one per solution plus the final UNSAT).
  std::uint64_t max_steps = std::uint64_t{1} << 22;
  /// Solutions are kept in the result only up to this many.
  std::size_t max_listed = std::size_t{1} << 20;
};

struct WeightedSolution {
  Assignment assignment;
  std::string key;  // projection on the independent support
  double log_weight = 0.0;
};

struct ExactResult {
  double log_count = kNegInf;
  double linear_count = 0.0;  // compensated linear-space sum; 0 when it underflows
  double log_wmin = kNegInf;
  double log_wmax = kNegInf;
  std::uint64_t num_solutions = 0;
  bool listed = true;
  std::vector<WeightedSolution> solutions;  // in enumeration order, when listed

  double count() const {
    return linear_count >= std::numeric_limits<double>::min() ? linear_count : std::exp(log_count);
  }
  double log2_count() const { return log2_of_ln(log_count); }
  double wmin() const { return std::exp(log_wmin); }
  double wmax() const { return std::exp(log_wmax); }
  /// wmax / wmin; 1 for an unsatisfiable formula.
  double tilt() const { return num_solutions ? std::exp(log_wmax - log_wmin) : 1.0; }
};

/// Exact weighted count by enumeration with blocking clauses. With a proper independent
/// support the support property itself is checked (ParamError when two solutions share a
/// projection). Throws OracleLimitError past `max_steps`.
ExactResult exact_count(const CnfFormula& formula, const WeightModel& weights, const OracleOptions& options = {},
                        const std::optional<WeightWindow>& window = std::nullopt);

/// Exact solution probabilities keyed by support projection.
using ExactDistribution = std::map<std::string, double>;

ExactDistribution exact_distribution(const ExactResult& exact);

struct EmpiricalDistribution {
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t total = 0;

  void add(const std::string& key, std::uint64_t n = 1) {
    counts[key] += n;
    total += n;
  }
  double frequency(const std::string& key) const;
};

/// N independent exact draws with Pr[y] = w(y) / w(R_F). Throws ParamError when unsatisfiable.
EmpiricalDistribution ideal_sample(const CnfFormula& formula, const WeightModel& weights, Rng& rng,
                                   std::uint64_t n, const OracleOptions& options = {});

double l1_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b);
double l1_distance(const EmpiricalDistribution& a, const ExactDistribution& b);
double l1_distance(const ExactDistribution& a, const ExactDistribution& b);

/// "key count" per line, keys sorted.
std::string to_text(const EmpiricalDistribution& dist);
EmpiricalDistribution parse_distribution(std::string_view text);

struct TestStatistic {
  double statistic = 0.0;
  double p_value = 1.0;
  double dof = 0.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
TestStatistic ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Pearson goodness of fit of observed counts against exact probabilities.
TestStatistic chi_square_gof(const EmpiricalDistribution& observed, const ExactDistribution& expected);

}  // namespace wmc
