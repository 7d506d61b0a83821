#include "wmc/counting.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "wmc/error.hpp"

namespace wmc {

namespace {

const double kLn2 = std::log(2.0);

using Clock = std::chrono::steady_clock;

}  // namespace

BoundedEnumeration bounded_weight_sat(SolverInstance& solver, const HashConstraintSet* hash, double pivot,
                                      double r, double log_wmax, const Budget& budget) {
  if (!(pivot > 0.0)) throw ParamError("pivot must be positive");
  if (!(r >= 1.0)) throw ParamError("tilt bound r must be >= 1");
  if (!(log_wmax <= 0.0) || !std::isfinite(log_wmax)) throw ParamError("wmax must lie in (0,1]");

  BoundedEnumeration out;
  const double log_r = std::log(r);
  const double log_pivot = std::log(pivot);
  double log_wmin = log_wmax - log_r;
  LogAccumulator total;

  const auto cp = solver.push();
  if (hash) solver.add_hash(*hash);
  for (;;) {
    auto res = solver.solve(budget);
    ++out.solver_calls;
    if (res.status == SolveStatus::budget_exceeded) {
      out.budget_exceeded = true;
      break;
    }
    if (res.status == SolveStatus::unsat) break;
    const double lw = solver.weights().log_weight(res.witness);
    solver.add_blocking_clause(project(res.witness, solver.support()));
    out.solutions.push_back(std::move(res.witness));
    out.log_weights.push_back(lw);
    total.add_log(lw);
    log_wmin = std::min(log_wmin, lw);
    if (total.log_value() - log_wmin - log_r > log_pivot) {
      out.saturated = true;
      break;
    }
  }
  solver.pop_to(cp);
  out.log_total = total.log_value();
  out.log_new_wmax = log_wmin + log_r;
  return out;
}

CountEstimate weightmc_core(SolverInstance& solver, double pivot, double r, double log_wmax, Rng& rng,
                            const CoreOptions& options) {
  CountEstimate est;
  est.log_wmax = log_wmax;
  const double log_pivot = std::log(pivot);

  // Enumerate one cell, retrying the same hash depth with a fresh hash when the solver
  // runs out of budget.
  auto enumerate = [&](unsigned rows, BoundedEnumeration& y) {
    unsigned attempts = 0;
    for (;;) {
      if (rows == 0) {
        y = bounded_weight_sat(solver, nullptr, pivot, r, est.log_wmax, options.budget);
      } else {
        const auto hs = sample_hash(solver.support(), rows, rng);
        y = bounded_weight_sat(solver, &hs, pivot, r, est.log_wmax, options.budget);
      }
      est.solver_calls += y.solver_calls;
      if (!y.budget_exceeded) break;
      ++est.retries;
      if (++attempts > options.retry_cap) return false;
    }
    est.log_wmax = y.log_new_wmax;
    return true;
  };

  BoundedEnumeration y;
  est.rounds = 1;
  if (!enumerate(0, y)) return est;
  if (y.log_total - est.log_wmax <= log_pivot) {
    est.fast_path = true;
    est.log_value = y.log_total - est.log_wmax;
    return est;
  }

  const auto max_rows = static_cast<unsigned>(solver.support().size());
  unsigned i = 0;
  double scaled = 0.0;
  do {
    ++i;
    ++est.rounds;
    if (!enumerate(i, y)) {
      est.hash_rows = i;
      return est;
    }
    scaled = y.log_total - est.log_wmax;
  } while (!((y.log_total > kNegInf && scaled <= log_pivot) || i >= max_rows));
  est.hash_rows = i;
  if (scaled > log_pivot || y.log_total == kNegInf) return est;
  // The cell holds about a 2^-i fraction of the scaled weight.
  est.log_value = scaled + i * kLn2;
  return est;
}

void CountParams::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParamError("epsilon must be in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ParamError("delta must be in (0,1)");
  if (!(tilt >= 1.0) || !std::isfinite(tilt)) throw ParamError("tilt bound r must be a finite value >= 1");
  if (chains == 0) throw ParamError("chains must be >= 1");
  if (jobs == 0) throw ParamError("jobs must be >= 1");
  if (timeout_seconds < 0.0) throw ParamError("timeout must be non-negative");
}

std::uint64_t counting_pivot(double epsilon) {
  const double base = std::exp(1.5) * (1.0 + 1.0 / epsilon) * (1.0 + 1.0 / epsilon);
  return 2 * static_cast<std::uint64_t>(std::ceil(base));
}

std::uint64_t counting_iterations(double delta) {
  return static_cast<std::uint64_t>(std::ceil(35.0 * std::log2(3.0 / delta)));
}

std::optional<double> lower_median(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  const std::size_t k = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

CountResult weightmc(const CnfFormula& formula, const WeightModel& weights, const CountParams& params,
                     const std::optional<WeightWindow>& window) {
  params.validate();
  const auto start = Clock::now();
  CountResult out;
  out.pivot = counting_pivot(params.epsilon);
  out.iterations = counting_iterations(params.delta);
  const auto t = out.iterations;

  SolverInstance base(formula, weights);
  if (window) base.set_window(*window);

  const auto chains = static_cast<unsigned>(std::min<std::uint64_t>(params.chains, t));
  unsigned jobs = std::min(params.jobs, chains);
  if (!weights.thread_safe()) jobs = 1;

  std::vector<std::optional<double>> estimates(t);
  std::vector<double> chain_wmax(chains, 0.0);
  std::vector<std::uint64_t> chain_calls(chains, 0);
  std::atomic<bool> timed_out{false};
  const auto deadline = params.timeout_seconds > 0.0
                            ? start + std::chrono::duration_cast<Clock::duration>(
                                          std::chrono::duration<double>(params.timeout_seconds))
                            : Clock::time_point::max();
  CoreOptions core_options{params.solver_budget, params.retry_cap};

  auto run_chain = [&](unsigned c) {
    SolverInstance solver = base;
    double log_wmax = 0.0;
    for (std::uint64_t k = c; k < t; k += chains) {
      if (Clock::now() > deadline) {
        timed_out = true;
        break;
      }
      Rng rng = Rng::derive(params.seed, k);
      solver.reseed(rng.split());
      const auto est = weightmc_core(solver, static_cast<double>(out.pivot), params.tilt, log_wmax, rng,
                                     core_options);
      log_wmax = est.log_wmax;
      chain_calls[c] += est.solver_calls;
      if (!est.failed()) estimates[k] = *est.log_value + log_wmax;
    }
    chain_wmax[c] = log_wmax;
  };

  if (jobs <= 1) {
    for (unsigned c = 0; c < chains; ++c) run_chain(c);
  } else {
    std::atomic<unsigned> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    for (unsigned j = 0; j < jobs; ++j)
      workers.emplace_back([&] {
        for (unsigned c = next++; c < chains; c = next++) {
          try {
            run_chain(c);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
  }

  std::vector<double> finished;
  for (const auto& e : estimates)
    if (e) finished.push_back(*e);
  out.successes = finished.size();
  out.core_log_estimates = std::move(estimates);
  out.log_wmax = *std::min_element(chain_wmax.begin(), chain_wmax.end());
  for (auto c : chain_calls) out.solver_calls += c;
  out.timed_out = timed_out;
  if (auto med = lower_median(std::move(finished))) out.log_value = *med;
  out.ok = out.successes > 0 && !out.timed_out;
  out.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

unsigned partition_count(double low, double high) {
  if (!(low > 0.0) || !(low < high)) throw ParamError("partition bounds require 0 < L < H");
  return static_cast<unsigned>(std::ceil(std::log2(high / low))) + 1;
}

WeightWindow partition_window(double high, unsigned m) {
  return WeightWindow{std::ldexp(high, -static_cast<int>(m)), std::ldexp(high, -static_cast<int>(m) + 1)};
}

PartitionedResult partitioned_weightmc(const CnfFormula& formula, const WeightModel& weights, double low,
                                       double high, const CountParams& params) {
  if (!weights.white_box())
    throw ParamError("partitioned counting needs white-box weights (a poly-time weight function), "
                     "not a black-box oracle");
  const auto start = Clock::now();
  PartitionedResult out;
  out.windows = partition_count(low, high);
  out.delta_prime = params.delta / out.windows;

  LogAccumulator total;
  out.ok = true;
  for (unsigned m = 1; m <= out.windows; ++m) {
    CountParams p = params;
    p.delta = out.delta_prime;
    p.tilt = 2.0;
    p.seed = Rng::derive(params.seed, m).next();
    if (params.timeout_seconds > 0.0) {
      const double spent = std::chrono::duration<double>(Clock::now() - start).count();
      p.timeout_seconds = std::max(1e-9, params.timeout_seconds - spent);
    }
    WindowReport report{m, partition_window(high, m), {}};
    report.result = weightmc(formula, weights, p, report.window);
    out.solver_calls += report.result.solver_calls;
    const bool ok = report.result.ok;
    total.add_log(report.result.log_value);
    out.reports.push_back(std::move(report));
    if (!ok) {
      out.ok = false;
      break;
    }
  }
  out.log_value = out.ok ? total.log_value() : kNegInf;
  out.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

}  // namespace wmc
