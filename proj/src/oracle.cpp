#include "wmc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "wmc/error.hpp"

namespace wmc {

ExactResult exact_count(const CnfFormula& formula, const WeightModel& weights, const OracleOptions& options,
                        const std::optional<WeightWindow>& window) {
  std::vector<Var> all(formula.num_vars());
  std::iota(all.begin(), all.end(), Var{1});
  SolverInstance solver(formula.with_support(all), weights);
  if (window) solver.set_window(*window);
  const auto& support = formula.independent_support();

  ExactResult out;
  LogAccumulator total;
  std::set<std::string> seen;
  std::uint64_t steps = 0;
  double sum = 0.0, comp = 0.0;
  for (;;) {
    if (++steps > options.max_steps)
      throw OracleLimitError("formula too large for oracle: more than " + std::to_string(options.max_steps) +
                             " enumeration steps");
    auto res = solver.solve();
    if (res.status == SolveStatus::unsat) break;
    if (res.status != SolveStatus::sat) throw OracleLimitError("oracle solve call did not finish");
    const double lw = weights.log_weight(res.witness);
    solver.add_blocking_clause(project(res.witness, all));
    auto key = project(res.witness, support).key();
    if (!formula.full_support() && !seen.insert(key).second)
      throw ParamError("independent support violated: two solutions share the projection " + key);
    total.add_log(lw);
    const double x = std::exp(lw);
    const double t = sum + x;
    comp += std::abs(sum) >= x ? (sum - t) + x : (x - t) + sum;
    sum = t;
    out.log_wmin = out.num_solutions ? std::min(out.log_wmin, lw) : lw;
    out.log_wmax = out.num_solutions ? std::max(out.log_wmax, lw) : lw;
    ++out.num_solutions;
    if (out.listed && out.solutions.size() < options.max_listed) {
      out.solutions.push_back({std::move(res.witness), std::move(key), lw});
    } else {
      out.listed = false;
      out.solutions.clear();
    }
  }
  out.log_count = total.log_value();
  out.linear_count = sum + comp;
  return out;
}

ExactDistribution exact_distribution(const ExactResult& exact) {
  if (!exact.listed) throw ParamError("exact distribution needs the listed solutions");
  ExactDistribution dist;
  for (const auto& s : exact.solutions) dist[s.key] += std::exp(s.log_weight - exact.log_count);
  return dist;
}

double EmpiricalDistribution::frequency(const std::string& key) const {
  if (total == 0) return 0.0;
  const auto it = counts.find(key);
  return it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
}

EmpiricalDistribution ideal_sample(const CnfFormula& formula, const WeightModel& weights, Rng& rng,
                                   std::uint64_t n, const OracleOptions& options) {
  const auto exact = exact_count(formula, weights, options);
  if (exact.num_solutions == 0) throw ParamError("ideal sampler: formula is unsatisfiable");
  if (!exact.listed) throw OracleLimitError("ideal sampler: too many solutions to list");
  std::vector<double> cdf;
  double acc = 0.0;
  for (const auto& s : exact.solutions) {
    acc += std::exp(s.log_weight - exact.log_wmax);
    cdf.push_back(acc);
  }
  EmpiricalDistribution dist;
  for (std::uint64_t k = 0; k < n; ++k) {
    const double u = rng.uniform01() * acc;
    auto idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    dist.add(exact.solutions[std::min(idx, cdf.size() - 1)].key);
  }
  return dist;
}

namespace {

template <class A, class B>
double l1_generic(const A& a, const B& b, auto pa, auto pb) {
  std::set<std::string> keys;
  for (const auto& [k, v] : a) keys.insert(k);
  for (const auto& [k, v] : b) keys.insert(k);
  double sum = 0.0;
  for (const auto& k : keys) sum += std::abs(pa(k) - pb(k));
  return sum;
}

double lookup(const ExactDistribution& d, const std::string& k) {
  const auto it = d.find(k);
  return it == d.end() ? 0.0 : it->second;
}

}  // namespace

double l1_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  return l1_generic(
      a.counts, b.counts, [&](const std::string& k) { return a.frequency(k); },
      [&](const std::string& k) { return b.frequency(k); });
}

double l1_distance(const EmpiricalDistribution& a, const ExactDistribution& b) {
  return l1_generic(
      a.counts, b, [&](const std::string& k) { return a.frequency(k); },
      [&](const std::string& k) { return lookup(b, k); });
}

double l1_distance(const ExactDistribution& a, const ExactDistribution& b) {
  return l1_generic(
      a, b, [&](const std::string& k) { return lookup(a, k); }, [&](const std::string& k) { return lookup(b, k); });
}

std::string to_text(const EmpiricalDistribution& dist) {
  std::string out;
  for (const auto& [k, c] : dist.counts) out += (k.empty() ? "-" : k) + ' ' + std::to_string(c) + '\n';
  return out;
}

EmpiricalDistribution parse_distribution(std::string_view text) {
  std::istringstream in{std::string(text)};
  EmpiricalDistribution dist;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    std::uint64_t count = 0;
    if (!(ls >> key >> count)) throw ParseError(lineno, "expected '<key> <count>'");
    dist.add(key == "-" ? std::string() : key, count);
  }
  return dist;
}

TestStatistic ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ParamError("KS test needs two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  const double lambda = (ne + 0.12 + 0.11 / ne) * d;
  // Kolmogorov tail series.
  double p = 0.0, sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
    p += term;
    if (std::abs(term) < 1e-12) break;
    sign = -sign;
  }
  if (lambda < 1e-3) p = 1.0;
  return {d, std::clamp(p, 0.0, 1.0), 0.0};
}

TestStatistic chi_square_gof(const EmpiricalDistribution& observed, const ExactDistribution& expected) {
  if (expected.size() < 2) throw ParamError("chi-square test needs at least two categories");
  TestStatistic out;
  const double n = static_cast<double>(observed.total);
  for (const auto& [k, c] : observed.counts)
    if (c > 0 && lookup(expected, k) == 0.0) return {INFINITY, 0.0, static_cast<double>(expected.size() - 1)};
  for (const auto& [k, p] : expected) {
    const double e = n * p;
    const auto it = observed.counts.find(k);
    const double o = it == observed.counts.end() ? 0.0 : static_cast<double>(it->second);
    out.statistic += (o - e) * (o - e) / e;
  }
  out.dof = static_cast<double>(expected.size() - 1);
  out.p_value = boost::math::gamma_q(out.dof / 2.0, out.statistic / 2.0);
  return out;
}

}  // namespace wmc
