#include <doctest.h>

#include <cmath>
#include <numeric>

#include "wmc/error.hpp"
#include "wmc/xorhash.hpp"

using namespace wmc;

namespace {

// |observed - expected| within k binomial standard deviations.
bool within_sigma(std::uint64_t hits, std::uint64_t trials, double p, double k) {
  const double sigma = std::sqrt(trials * p * (1 - p));
  return std::abs(static_cast<double>(hits) - trials * p) <= k * sigma;
}

std::vector<Var> range(Var n) {
  std::vector<Var> s(n);
  std::iota(s.begin(), s.end(), Var{1});
  return s;
}

}  // namespace

TEST_CASE("single row over one variable hits half the time") {
  Rng rng(1);
  const std::vector<Var> s{1};
  const auto y = Assignment::from_bits(1, 1);
  std::uint64_t hits = 0;
  const std::uint64_t trials = 100000;
  for (std::uint64_t k = 0; k < trials; ++k) hits += cell_membership(sample_hash(s, 1, rng), y);
  CHECK(std::abs(static_cast<double>(hits) / trials - 0.5) <= 0.01);
}

TEST_CASE("pairwise: two distinct points share a cell with probability 2^-2m") {
  Rng rng(2);
  const auto s = range(3);
  const auto y1 = Assignment::from_bits(3, 0b011), y2 = Assignment::from_bits(3, 0b110);
  std::uint64_t hits = 0;
  const std::uint64_t trials = 100000;
  for (std::uint64_t k = 0; k < trials; ++k) {
    const auto hs = sample_hash(s, 2, rng);
    hits += cell_membership(hs, y1) && cell_membership(hs, y2);
  }
  CHECK(within_sigma(hits, trials, 1.0 / 16, 3));
}

TEST_CASE("expected row size is half the support") {
  Rng rng(3);
  const std::vector<Var> s2{1, 2};
  std::uint64_t total = 0;
  const std::uint64_t rows = 100000;
  for (std::uint64_t k = 0; k < rows; ++k) total += sample_hash(s2, 1, rng).rows[0].vars.size();
  CHECK(std::abs(static_cast<double>(total) / rows - 1.0) <= 0.02);

  const auto s = range(200);
  total = 0;
  for (int k = 0; k < 2000; ++k) total += sample_hash(s, 1, rng).rows[0].vars.size();
  CHECK(std::abs(static_cast<double>(total) / 2000 / 100.0 - 1.0) <= 0.02);
}

TEST_CASE("uniformity for every m up to 10") {
  Rng rng(4);
  const auto s = range(8);
  const auto y = Assignment::from_bits(8, 0b10110101);
  const std::uint64_t trials = 100000;
  for (unsigned m : {1U, 2U, 4U, 7U, 10U}) {
    std::uint64_t hits = 0;
    for (std::uint64_t k = 0; k < trials; ++k) hits += cell_membership(sample_hash(s, m, rng), y);
    CHECK_MESSAGE(within_sigma(hits, trials, std::ldexp(1.0, -static_cast<int>(m)), 4), "m = " << m);
  }
}

TEST_CASE("three-wise independence") {
  Rng rng(5);
  const auto s = range(8);
  const Assignment ys[3] = {Assignment::from_bits(8, 0x00), Assignment::from_bits(8, 0x5a),
                            Assignment::from_bits(8, 0xc3)};
  const std::uint64_t trials = 100000;
  for (unsigned m : {1U, 2U}) {
    std::uint64_t hits = 0;
    for (std::uint64_t k = 0; k < trials; ++k) {
      const auto hs = sample_hash(s, m, rng);
      hits += cell_membership(hs, ys[0]) && cell_membership(hs, ys[1]) && cell_membership(hs, ys[2]);
    }
    CHECK_MESSAGE(within_sigma(hits, trials, std::ldexp(1.0, -3 * static_cast<int>(m)), 4), "m = " << m);
  }
}

TEST_CASE("determinism and restriction to the support") {
  const std::vector<Var> s{2, 5, 7, 11};
  Rng a(99), b(99);
  for (int k = 0; k < 100; ++k) {
    const auto h1 = sample_hash(s, 3, a), h2 = sample_hash(s, 3, b);
    CHECK(h1.rows == h2.rows);
    CHECK(h1.m() == 3);
    for (const auto& r : h1.rows) {
      CHECK(std::is_sorted(r.vars.begin(), r.vars.end()));
      for (Var v : r.vars) CHECK(std::find(s.begin(), s.end(), v) != s.end());
    }
  }
}

TEST_CASE("argument checks") {
  Rng rng(0);
  const std::vector<Var> empty, s{1};
  CHECK_THROWS_AS(sample_hash(s, 0, rng), ParamError);
  CHECK_THROWS_AS(sample_hash(empty, 1, rng), ParamError);
}

TEST_CASE("cell membership examples") {
  const auto y = Assignment::from_bits(2, 0b01);
  CHECK(cell_membership(HashConstraintSet{}, y));
  CHECK(cell_membership(HashConstraintSet{{XorConstraint{{1, 2}, true}}}, y));
  CHECK_FALSE(cell_membership(HashConstraintSet{{XorConstraint{{}, true}}}, y));
  CHECK(cell_membership(HashConstraintSet{{XorConstraint{{}, false}}}, y));
  CHECK_FALSE(row_satisfied(XorConstraint{{1}, false}, y));
}

TEST_CASE("xor line serialization") {
  CHECK(to_xor_line(XorConstraint{{1, 2}, true}) == "x 1 2 0");
  CHECK(to_xor_line(XorConstraint{{1, 2}, false}) == "x -1 2 0");
  CHECK(to_xor_line(XorConstraint{{}, true}) == "0");
  CHECK(to_xor_line(XorConstraint{{}, false}) == "c empty xor");
  CHECK(to_xor_lines(HashConstraintSet{{XorConstraint{{3}, true}, XorConstraint{{4}, false}}}) ==
        "x 3 0\nx -4 0\n");
}
