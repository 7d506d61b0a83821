#include "wmc/sampling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "wmc/error.hpp"

namespace wmc {

double sampler_tolerance(double kappa) {
  return (1.0 + kappa) * (2.36 + 0.51 / ((1.0 - kappa) * (1.0 - kappa))) - 1.0;
}

KappaPivot compute_kappa_pivot(double epsilon) {
  if (!(epsilon > kMinSamplerEpsilon) || !std::isfinite(epsilon))
    throw ParamError("sampler tolerance epsilon must exceed " + std::to_string(kMinSamplerEpsilon) +
                     " (the value at kappa = 0)");
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sampler_tolerance(mid) < epsilon)
      lo = mid;
    else
      hi = mid;
  }
  KappaPivot kp;
  kp.kappa = 0.5 * (lo + hi);
  const double pivot = std::ceil(std::exp(1.5) * (1.0 + 1.0 / kp.kappa) * (1.0 + 1.0 / kp.kappa));
  if (!(pivot < 0x1.0p53)) throw ParamError("epsilon too close to its minimum: pivot overflows");
  kp.pivot = static_cast<std::uint64_t>(pivot);
  return kp;
}

std::size_t draw_weighted(std::span<const double> log_weights, Rng& rng) {
  if (log_weights.empty()) throw ParamError("cannot draw from an empty set");
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  std::vector<double> cdf(log_weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    acc += std::exp(log_weights[i] - top);
    cdf[i] = acc;
  }
  const double u = rng.uniform01() * acc;
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

WeightGenerator::WeightGenerator(const CnfFormula& formula, const WeightModel& weights, double epsilon,
                                 double tilt, SamplerOptions options)
    : formula_(formula),
      weights_(weights),
      epsilon_(epsilon),
      tilt_(TiltBound(tilt).value),
      options_(options),
      kp_(compute_kappa_pivot(epsilon)),
      solver_(formula, weights) {
  hi_ = kp_.hi_thresh();
  lo_ = kp_.lo_thresh();
}

std::uint64_t WeightGenerator::fingerprint() const {
  // FNV-1a over the serialized instance and the sampling parameters.
  std::string text = weights_.white_box() ? serialize_weighted_dimacs(formula_, weights_)
                                          : "blackbox\n" + serialize_weighted_dimacs(formula_, WeightModel::uniform());
  text += "c ind";
  for (Var v : formula_.independent_support()) text += ' ' + std::to_string(v);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::uint64_t byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  for (unsigned char c : text) mix(c);
  for (double x : {epsilon_, tilt_}) {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    for (int k = 0; k < 8; ++k) mix((bits >> (8 * k)) & 0xffU);
  }
  return h;
}

SamplerState WeightGenerator::make_state(std::uint64_t seed) const {
  CountParams p;
  p.epsilon = 0.8;
  p.delta = 0.2;
  p.tilt = tilt_;
  p.seed = seed;
  p.solver_budget = options_.budget;
  p.retry_cap = options_.retry_cap;
  p.chains = options_.chains;
  p.jobs = options_.jobs;
  p.timeout_seconds = options_.timeout_seconds;
  const auto count = weightmc(formula_, weights_, p);
  if (!count.ok) throw CountingError("approximate count for the sampler failed");

  SamplerState st;
  st.epsilon = epsilon_;
  st.tilt = tilt_;
  st.fingerprint = fingerprint();
  st.kp = kp_;
  st.log_count = count.log_value;
  st.log_wmax = count.log_wmax;
  st.counting_solver_calls = count.solver_calls;
  const double q = std::ceil((count.log_value - count.log_wmax) / std::log(2.0) + std::log2(1.8) -
                             std::log2(static_cast<double>(kp_.pivot)));
  st.q = std::isfinite(q) ? static_cast<int>(q) : 0;
  return st;
}

SampleOutcome WeightGenerator::sample(Rng& rng, const SamplerState* state) {
  if (state && (state->fingerprint != fingerprint() || state->epsilon != epsilon_ || state->tilt != tilt_))
    throw ParamError("sampler state was built for a different formula, epsilon, tilt or support");

  SampleOutcome out;
  solver_.reseed(rng.split());
  const double log_hi = std::log(hi_);
  const double log_lo = std::log(lo_);
  double log_wmax = 0.0;

  auto enumerate = [&](unsigned rows, BoundedEnumeration& y) {
    unsigned attempts = 0;
    for (;;) {
      if (rows == 0) {
        y = bounded_weight_sat(solver_, nullptr, hi_, tilt_, log_wmax, options_.budget);
      } else {
        const auto hs = sample_hash(solver_.support(), rows, rng);
        y = bounded_weight_sat(solver_, &hs, hi_, tilt_, log_wmax, options_.budget);
      }
      out.solver_calls += y.solver_calls;
      if (!y.budget_exceeded) break;
      if (++attempts > options_.retry_cap) return false;
    }
    log_wmax = y.log_new_wmax;
    return true;
  };

  BoundedEnumeration y;
  if (!enumerate(0, y)) return out;
  if (y.log_total - log_wmax <= log_hi) {
    out.perfect_path = true;
    out.cell_weight = std::exp(y.log_total - log_wmax);
    if (!y.solutions.empty()) out.witness = y.solutions[draw_weighted(y.log_weights, rng)];
    return out;
  }

  SamplerState fresh;
  if (state) {
    out.used_cache = true;
  } else {
    fresh = make_state(rng.next());
    out.solver_calls += fresh.counting_solver_calls;
    state = &fresh;
  }
  log_wmax = state->log_wmax;
  const int q = state->q;
  int i = std::max(q - 4, 0);
  double log_cell = kNegInf;
  do {
    ++i;
    if (!enumerate(static_cast<unsigned>(i), y)) {
      out.hash_rows = static_cast<unsigned>(i);
      return out;
    }
    log_cell = y.log_total - log_wmax;
  } while (!(log_cell >= log_lo && log_cell <= log_hi) && i < q);
  out.hash_rows = static_cast<unsigned>(i);
  out.cell_weight = std::exp(log_cell);
  if (log_cell > log_hi || log_cell < log_lo) return out;
  out.witness = y.solutions[draw_weighted(y.log_weights, rng)];
  return out;
}

SamplerState make_sampler_state(const CnfFormula& formula, const WeightModel& weights, double epsilon,
                                double tilt, std::uint64_t seed) {
  return WeightGenerator(formula, weights, epsilon, tilt).make_state(seed);
}

SampleOutcome weightgen(const CnfFormula& formula, const WeightModel& weights, double epsilon, double tilt,
                        Rng& rng, const SamplerState* cached) {
  WeightGenerator gen(formula, weights, epsilon, tilt);
  return gen.sample(rng, cached);
}

}  // namespace wmc
