#include <doctest.h>

#include <cmath>
#include <map>

#include "support/brute.hpp"
#include "support/constants.hpp"
#include "wmc/benchgen.hpp"
#include "wmc/error.hpp"
#include "wmc/oracle.hpp"
#include "wmc/sampling.hpp"

using namespace wmc;

namespace {

const CnfFormula kOr(2, {{{{1, false}, {2, false}}}});
const WeightModel kWeights = WeightModel::literal_product({{0.6, 0.4}, {0.5, 0.5}});

}  // namespace

TEST_CASE("kappa and pivot against 50-digit bisection") {
  const auto kp = compute_kappa_pivot(5.0);
  const auto k = hp::kappa(5);
  CHECK(std::abs(kp.kappa - k.convert_to<double>()) < 1e-9);
  CHECK(kp.pivot == 46);
  CHECK(kp.pivot == hp::sampler_pivot(k));
  CHECK(kp.hi_thresh() == doctest::Approx((1 + (1 + k) * 46).convert_to<double>()).epsilon(1e-12));
  CHECK(kp.lo_thresh() == doctest::Approx((46 / (1 + k)).convert_to<double>()).epsilon(1e-12));
  CHECK(std::abs(sampler_tolerance(kp.kappa) - 5.0) < 1e-9);
  for (double eps : {2.0, 3.0, 10.0, 50.0}) {
    const auto a = compute_kappa_pivot(eps);
    const auto b = hp::kappa(hp::Real(eps));
    CHECK(std::abs(a.kappa - b.convert_to<double>()) < 1e-9);
    CHECK(a.pivot == hp::sampler_pivot(b));
  }
}

TEST_CASE("tolerance is increasing and infeasible values are rejected") {
  CHECK(sampler_tolerance(0.0) == doctest::Approx(1.87));
  double prev = sampler_tolerance(0.0);
  for (int i = 1; i < 1000; ++i) {
    const double x = sampler_tolerance(i / 1000.0);
    CHECK(x > prev);
    prev = x;
  }
  CHECK_THROWS_AS(compute_kappa_pivot(1.0), ParamError);
  CHECK_THROWS_AS(compute_kappa_pivot(1.87), ParamError);
  CHECK_THROWS_AS(compute_kappa_pivot(1.75), ParamError);
  try {
    compute_kappa_pivot(1.5);
  } catch (const ParamError& e) {
    CHECK(std::string(e.what()).find("1.87") != std::string::npos);
  }
  CHECK(compute_kappa_pivot(1.9).kappa > 0.0);
}

TEST_CASE("perfect path reproduces the exact distribution") {
  WeightGenerator gen(kOr, kWeights, 5.0, 3.0);
  EmpiricalDistribution d;
  const std::uint64_t n = 100000;
  for (std::uint64_t k = 0; k < n; ++k) {
    Rng rng = Rng::derive(1, k);
    const auto out = gen.sample(rng);
    REQUIRE(out.ok());
    CHECK(out.perfect_path);
    d.add(project(*out.witness, kOr.independent_support()).key());
  }
  const ExactDistribution exact{{"11", 0.375}, {"10", 0.375}, {"01", 0.25}};
  for (const auto& [key, p] : exact) {
    const double sigma = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(d.frequency(key) - p) <= 0.01);
    CHECK(std::abs(d.frequency(key) - p) <= 4 * sigma);
  }
  CHECK(chi_square_gof(d, exact).p_value > 0.01);
}

TEST_CASE("unsatisfiable formula gives no sample") {
  WeightGenerator gen(CnfFormula(1, {{{{1, false}}}, {{{1, true}}}}), WeightModel::uniform(), 5.0, 1.0);
  Rng rng(0);
  const auto out = gen.sample(rng);
  CHECK_FALSE(out.ok());
  CHECK(out.perfect_path);
}

TEST_CASE("single-solution formula always returns it") {
  const CnfFormula f(3, {{{{1, false}}}, {{{2, true}}}, {{{3, false}}}});
  Rng rng(4);
  for (int k = 0; k < 20; ++k) {
    const auto out = weightgen(f, WeightModel::uniform(), 5.0, 3.0, rng);
    REQUIRE(out.ok());
    CHECK(out.witness->to_dimacs() == "1 -2 3");
  }
}

TEST_CASE("hashed-path success rate on 2^12 uniform solutions") {
  const auto f = brute::below_count(14, 4096);
  WeightGenerator gen(f, WeightModel::uniform(), 5.0, 1.0);
  const auto state = gen.make_state(3);
  int ok = 0;
  const int trials = 1000;
  for (int k = 0; k < trials; ++k) {
    Rng rng = Rng::derive(11, k);
    const auto out = gen.sample(rng, &state);
    CHECK_FALSE(out.perfect_path);
    if (out.ok()) {
      ++ok;
      CHECK(evaluate(f, *out.witness));
      CHECK(out.cell_weight >= gen.lo_thresh());
      CHECK(out.cell_weight <= gen.hi_thresh());
    }
  }
  const double sigma = std::sqrt(trials * 0.62 * 0.38);
  CHECK(ok >= 0.62 * trials - 3 * sigma);
}

TEST_CASE("state reuse skips the count") {
  Rng g(5);
  const auto f = random_kcnf(16, 30, 3, g);
  const auto w = genbench(f, 3.0, g).weights;
  WeightGenerator gen(f, w, 5.0, 3.0);
  const auto state = gen.make_state(1);
  CHECK(state.counting_solver_calls > 0);
  Rng a(1), b(2);
  const auto first = gen.sample(a, &state);
  const auto second = gen.sample(b, &state);
  CHECK(first.used_cache);
  CHECK(second.used_cache);
  CHECK(second.solver_calls < state.counting_solver_calls);
  Rng c(2);
  const auto fresh = gen.sample(c);
  CHECK_FALSE(fresh.used_cache);
  CHECK(fresh.solver_calls > state.counting_solver_calls);
}

TEST_CASE("state from another configuration is rejected") {
  Rng g(6);
  const auto f = random_kcnf(16, 30, 3, g);
  const auto w = genbench(f, 3.0, g).weights;
  const auto state = make_sampler_state(f, w, 5.0, 3.0, 1);
  Rng rng(0);
  CHECK_THROWS_AS(weightgen(f, w, 3.0, 3.0, rng, &state), ParamError);
  CHECK_THROWS_AS(weightgen(f, w, 5.0, 4.0, rng, &state), ParamError);
  CHECK_THROWS_AS(weightgen(f.with_support({1, 2, 3, 4, 5, 6, 7, 8}), w, 5.0, 3.0, rng, &state), ParamError);
  CHECK_THROWS_AS(weightgen(f, WeightModel::uniform(), 5.0, 3.0, rng, &state), ParamError);
  CHECK_NOTHROW(weightgen(f, w, 5.0, 3.0, rng, &state));
}

TEST_CASE("perfect path never consults the state") {
  const auto state = make_sampler_state(kOr, kWeights, 5.0, 3.0, 1);
  WeightGenerator gen(kOr, kWeights, 5.0, 3.0);
  Rng rng(0);
  const auto out = gen.sample(rng, &state);
  CHECK(out.perfect_path);
  CHECK_FALSE(out.used_cache);
}

TEST_CASE("q band holds for most counts") {
  const auto f = brute::below_count(12, 1500);
  const double exact = 1500.0;
  WeightGenerator gen(f, WeightModel::uniform(), 5.0, 1.0);
  const double pivot = static_cast<double>(gen.kappa_pivot().pivot);
  int in_band = 0;
  const int trials = 200;
  for (int k = 0; k < trials; ++k) {
    const auto st = gen.make_state(static_cast<std::uint64_t>(k));
    const double m = std::log2(exact / std::exp(st.log_wmax) - 1) - std::log2(pivot);
    in_band += (st.q - 3 <= m && m <= st.q);
  }
  CHECK(in_band >= 0.8 * trials);
}

TEST_CASE("sampling is deterministic per seed and witnesses satisfy the formula") {
  Rng g(8);
  const auto f = random_kcnf(15, 28, 3, g);
  const auto w = genbench(f, 3.0, g).weights;
  WeightGenerator gen(f, w, 5.0, 3.0);
  const auto state = gen.make_state(2);
  WeightGenerator other(f, w, 5.0, 3.0);
  for (std::uint64_t k = 0; k < 50; ++k) {
    Rng a = Rng::derive(4, k), b = Rng::derive(4, k);
    const auto x = gen.sample(a, &state);
    const auto y = other.sample(b, &state);
    CHECK(x.witness == y.witness);
    CHECK(x.hash_rows == y.hash_rows);
    if (x.ok()) CHECK(evaluate(f, *x.witness));
  }
}

TEST_CASE("hashed sampler stays close to the exact distribution") {
  Rng g(12);
  const auto f = random_kcnf(12, 22, 3, g);
  const auto w = genbench(f, 3.0, g).weights;
  const auto ex = exact_count(f, w);
  REQUIRE(ex.num_solutions > 150);
  REQUIRE(ex.num_solutions < 600);
  WeightGenerator gen(f, w, 5.0, 3.0);
  const auto state = gen.make_state(1);
  EmpiricalDistribution d;
  for (std::uint64_t k = 0; k < 20000; ++k) {
    Rng rng = Rng::derive(21, k);
    const auto out = gen.sample(rng, &state);
    CHECK_FALSE(out.perfect_path);
    if (out.ok()) d.add(project(*out.witness, f.independent_support()).key());
  }
  REQUIRE(d.total > 15000);
  // Sampling noise alone gives about 0.8 * sqrt(K / N) here.
  const double noise = 0.8 * std::sqrt(static_cast<double>(ex.num_solutions) / d.total);
  CHECK(l1_distance(d, exact_distribution(ex)) <= noise + 0.05);
}

TEST_CASE("weighted draw") {
  Rng rng(1);
  std::vector<double> lw{std::log(0.1), std::log(0.6), std::log(0.3)};
  std::array<int, 3> counts{};
  for (int k = 0; k < 30000; ++k) counts[draw_weighted(lw, rng)]++;
  CHECK(std::abs(counts[0] / 30000.0 - 0.1) < 0.01);
  CHECK(std::abs(counts[1] / 30000.0 - 0.6) < 0.015);
  std::vector<double> tiny{-2000.0, -2000.0 + std::log(3.0)};
  int second = 0;
  for (int k = 0; k < 10000; ++k) second += draw_weighted(tiny, rng) == 1;
  CHECK(std::abs(second / 10000.0 - 0.75) < 0.02);
  CHECK_THROWS_AS(draw_weighted({}, rng), ParamError);
}

TEST_CASE("black-box weights can be sampled") {
  const auto bb = WeightModel::black_box([](const Assignment& a) { return kWeights.weight(a); });
  Rng rng(2);
  const auto out = weightgen(kOr, bb, 5.0, 3.0, rng);
  CHECK(out.ok());
}
