#include <doctest.h>

#include <cmath>

#include "support/brute.hpp"
#include "wmc/benchgen.hpp"
#include "wmc/error.hpp"
#include "wmc/oracle.hpp"

using namespace wmc;

namespace {

const CnfFormula kOr(2, {{{{1, false}, {2, false}}}});
const WeightModel kWeights = WeightModel::literal_product({{0.6, 0.4}, {0.5, 0.5}});

}  // namespace

TEST_CASE("exact count of the three-solution example") {
  const auto ex = exact_count(kOr, kWeights);
  CHECK(ex.num_solutions == 3);
  CHECK(ex.count() == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(ex.wmin() == doctest::Approx(0.2));
  CHECK(ex.wmax() == doctest::Approx(0.3));
  CHECK(ex.tilt() == doctest::Approx(1.5));
  CHECK(ex.listed);
  CHECK(ex.solutions.size() == 3);
  CHECK(ex.log2_count() == doctest::Approx(std::log2(0.8)));
}

TEST_CASE("unsatisfiable formula counts zero") {
  const auto ex = exact_count(CnfFormula(1, {{{{1, false}}}, {{{1, true}}}}), WeightModel::uniform());
  CHECK(ex.count() == 0.0);
  CHECK(ex.num_solutions == 0);
  CHECK(ex.solutions.empty());
  CHECK(ex.tilt() == 1.0);
}

TEST_CASE("exact count agrees with 2^n enumeration") {
  Rng rng(101);
  for (int it = 0; it < 500; ++it) {
    const Var n = 1 + static_cast<Var>(rng.below(12));
    const auto f = brute::random_cnf(rng, n, rng.below(2 * n + 1));
    const bool uniform = rng.bit();
    const auto w = uniform ? WeightModel::uniform() : brute::random_weights(rng, n);
    const auto ex = exact_count(f, w);
    const auto ref = brute::exact(f, w);
    CHECK(ex.num_solutions == ref.n);
    if (ref.n == 0) continue;
    CHECK(ex.count() == doctest::Approx(static_cast<double>(ref.count)).epsilon(1e-12));
    CHECK(ex.wmin() == doctest::Approx(static_cast<double>(ref.wmin)).epsilon(1e-12));
    CHECK(ex.wmax() == doctest::Approx(static_cast<double>(ref.wmax)).epsilon(1e-12));
    if (uniform) CHECK(ex.count() == static_cast<double>(ref.n));
  }
}

TEST_CASE("windowed exact count") {
  const auto ex = exact_count(kOr, kWeights, {}, WeightWindow{0.25, 0.35});
  CHECK(ex.num_solutions == 2);
  CHECK(ex.count() == doctest::Approx(0.6));
}

TEST_CASE("oracle and solver enumeration return the same projections") {
  Rng rng(7);
  for (int it = 0; it < 100; ++it) {
    const auto f = random_with_dependents(6, 4, 6, 3, rng);
    const auto ex = exact_count(f, WeightModel::uniform());
    const auto ref = brute::solutions({f, WeightModel::uniform(), {}, {}});
    std::set<std::string> keys;
    for (const auto& s : ex.solutions) keys.insert(s.key);
    CHECK(keys == brute::projections(ref, f.independent_support()));
    CHECK(keys.size() == ref.size());
  }
}

TEST_CASE("independent support violations are detected") {
  CHECK_THROWS_AS(exact_count(kOr.with_support({1}), WeightModel::uniform()), ParamError);
  // x2 <-> x1: {1} is a valid support.
  const CnfFormula eq(2, {{{{1, true}, {2, false}}}, {{{1, false}, {2, true}}}}, {1});
  CHECK(exact_count(eq, WeightModel::uniform()).num_solutions == 2);
}

TEST_CASE("enumeration cap") {
  OracleOptions opts;
  opts.max_steps = 10;
  CHECK_THROWS_AS(exact_count(CnfFormula(5, {}), WeightModel::uniform(), opts), OracleLimitError);
  opts.max_steps = 33;
  CHECK(exact_count(CnfFormula(5, {}), WeightModel::uniform(), opts).num_solutions == 32);
  opts.max_listed = 4;
  const auto ex = exact_count(CnfFormula(5, {}), WeightModel::uniform(), opts);
  CHECK_FALSE(ex.listed);
  CHECK(ex.solutions.empty());
  CHECK(ex.count() == doctest::Approx(32));
  CHECK_THROWS_AS(exact_distribution(ex), ParamError);
}

TEST_CASE("ideal sampler on the three-solution example") {
  Rng rng(3);
  const std::uint64_t n = 100000;
  const auto d = ideal_sample(kOr, kWeights, rng, n);
  CHECK(d.total == n);
  for (auto [key, p] : std::map<std::string, double>{{"11", 0.375}, {"10", 0.375}, {"01", 0.25}})
    CHECK(std::abs(d.frequency(key) - p) <= 4 * std::sqrt(p * (1 - p) / n));
  CHECK(chi_square_gof(d, exact_distribution(exact_count(kOr, kWeights))).p_value > 0.01);
}

TEST_CASE("ideal sampler edge cases") {
  Rng rng(4);
  const CnfFormula one(2, {{{{1, false}}}, {{{2, true}}}});
  const auto d = ideal_sample(one, WeightModel::uniform(), rng, 1000);
  CHECK(d.counts.size() == 1);
  CHECK(d.counts.at("10") == 1000);

  const CnfFormula two(2, {{{{1, false}}}});
  const auto e = ideal_sample(two, WeightModel::uniform(), rng, 10000);
  const double sigma = std::sqrt(10000 * 0.25);
  CHECK(std::abs(static_cast<double>(e.counts.at("10")) - 5000) <= 4 * sigma);

  CHECK_THROWS_AS(ideal_sample(CnfFormula(1, {{{{1, false}}}, {{{1, true}}}}), WeightModel::uniform(), rng, 5),
                  ParamError);
}

TEST_CASE("l1 distance") {
  EmpiricalDistribution a, b, c;
  a.add("00", 3);
  a.add("01", 1);
  b.add("00", 6);
  b.add("01", 2);
  c.add("11", 5);
  CHECK(l1_distance(a, b) == 0.0);
  CHECK(l1_distance(a, c) == 2.0);
  CHECK(l1_distance(a, ExactDistribution{{"00", 0.75}, {"01", 0.25}}) == 0.0);
  CHECK(l1_distance(ExactDistribution{{"00", 1.0}}, ExactDistribution{{"01", 1.0}}) == 2.0);

  Rng rng(5);
  const auto d = ideal_sample(kOr, kWeights, rng, 600000);
  CHECK(l1_distance(d, exact_distribution(exact_count(kOr, kWeights))) <= 0.01);
}

TEST_CASE("ideal sampler converges on a few hundred solutions") {
  Rng rng(6);
  const auto f = random_kcnf(10, 14, 3, rng);
  const auto w = genbench(f, 3.0, rng).weights;
  const auto ex = exact_count(f, w);
  REQUIRE(ex.num_solutions <= 256);
  REQUIRE(ex.num_solutions > 50);
  const auto d = ideal_sample(f, w, rng, 100000);
  CHECK(l1_distance(d, exact_distribution(ex)) <= 0.05);
}

TEST_CASE("distribution text round trip") {
  EmpiricalDistribution a;
  a.add("0101", 7);
  a.add("1111", 2);
  const auto text = to_text(a);
  CHECK(text == "0101 7\n1111 2\n");
  const auto b = parse_distribution(text);
  CHECK(b.counts == a.counts);
  CHECK(b.total == 9);
  CHECK_THROWS_AS(parse_distribution("0101 x\n"), ParseError);
}

TEST_CASE("two-sample KS") {
  Rng rng(8);
  std::vector<double> a, b, c;
  for (int i = 0; i < 500; ++i) {
    a.push_back(rng.uniform01());
    b.push_back(rng.uniform01());
    c.push_back(rng.uniform01() * 0.8);
  }
  const auto same = ks_two_sample(a, b);
  CHECK(same.p_value > 0.01);
  const auto diff = ks_two_sample(a, c);
  CHECK(diff.p_value < 0.01);
  CHECK(ks_two_sample({1, 2, 3}, {1, 2, 3}).statistic == 0.0);
  CHECK(ks_two_sample({1, 2, 3}, {1, 2, 3}).p_value == 1.0);
  CHECK(ks_two_sample({1, 2}, {5, 6}).statistic == 1.0);
  CHECK_THROWS_AS(ks_two_sample({}, {1.0}), ParamError);
}

TEST_CASE("chi-square goodness of fit") {
  EmpiricalDistribution d;
  d.add("a", 500);
  d.add("b", 500);
  const auto fair = chi_square_gof(d, {{"a", 0.5}, {"b", 0.5}});
  CHECK(fair.statistic == 0.0);
  CHECK(fair.p_value == doctest::Approx(1.0));
  CHECK(fair.dof == 1.0);
  const auto skew = chi_square_gof(d, {{"a", 0.3}, {"b", 0.7}});
  CHECK(skew.p_value < 1e-6);
  d.add("c", 1);
  CHECK(chi_square_gof(d, {{"a", 0.5}, {"b", 0.5}}).p_value == 0.0);
}
