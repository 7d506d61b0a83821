#include "wmc/benchgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wmc/error.hpp"

namespace wmc {

unsigned genbench_var_count(Var num_vars) {
  const auto hundredth = static_cast<unsigned>((num_vars + 99) / 100);
  return std::min<unsigned>(num_vars, std::max(15U, hundredth));
}

double genbench_probability(double r, unsigned m) {
  if (!(r >= 1.0) || !std::isfinite(r)) throw ParamError("tilt bound r must be a finite value >= 1");
  if (m == 0) throw ParamError("need at least one weighted variable");
  const double root = std::pow(r, 1.0 / m);
  return root / (1.0 + root);
}

namespace {

// First k entries of a Fisher-Yates shuffle of 1..n.
std::vector<Var> pick_distinct(Var n, unsigned k, Rng& rng) {
  std::vector<Var> vars(n);
  std::iota(vars.begin(), vars.end(), Var{1});
  for (unsigned i = 0; i < k; ++i) std::swap(vars[i], vars[i + rng.below(n - i)]);
  vars.resize(k);
  return vars;
}

Literal random_sign(Var v, Rng& rng) { return Literal{v, rng.bit()}; }

}  // namespace

Genbench genbench(const CnfFormula& base, double r, Rng& rng) {
  const Var n = base.num_vars();
  if (n < 1) throw ParamError("genbench needs at least one variable");
  const unsigned m = genbench_var_count(n);
  Genbench out;
  out.p = genbench_probability(r, m);
  out.chosen = pick_distinct(n, m, rng);
  std::sort(out.chosen.begin(), out.chosen.end());
  std::vector<LiteralWeights> lw(n);
  for (Var v : out.chosen) lw[v - 1] = {out.p, 1.0 - out.p};
  out.weights = WeightModel::literal_product(std::move(lw));
  return out;
}

CnfFormula random_kcnf(Var num_vars, std::size_t num_clauses, unsigned k, Rng& rng) {
  if (k == 0 || k > num_vars) throw ParamError("clause width must be in [1, n]");
  std::vector<Clause> clauses;
  clauses.reserve(num_clauses);
  for (std::size_t c = 0; c < num_clauses; ++c) {
    Clause cl;
    for (Var v : pick_distinct(num_vars, k, rng)) cl.literals.push_back(random_sign(v, rng));
    clauses.push_back(std::move(cl));
  }
  return CnfFormula(num_vars, std::move(clauses));
}

CnfFormula random_with_dependents(Var base_vars, Var dependent_vars, std::size_t num_clauses, unsigned k,
                                  Rng& rng) {
  const Var n = base_vars + dependent_vars;
  auto base = random_kcnf(base_vars, num_clauses, k, rng);
  std::vector<Clause> clauses = base.clauses();
  for (Var d = base_vars + 1; d <= n; ++d) {
    const auto ab = pick_distinct(d - 1, 2, rng);
    const Literal a = random_sign(ab[0], rng), b = random_sign(ab[1], rng);
    const Literal x{d, false};
    if (rng.bit()) {
      // d <-> (a xor b)
      clauses.push_back({{~x, a, b}});
      clauses.push_back({{~x, ~a, ~b}});
      clauses.push_back({{x, ~a, b}});
      clauses.push_back({{x, a, ~b}});
    } else {
      // d <-> (a and b)
      clauses.push_back({{~x, a}});
      clauses.push_back({{~x, b}});
      clauses.push_back({{x, ~a, ~b}});
    }
  }
  std::vector<Var> support(base_vars);
  std::iota(support.begin(), support.end(), Var{1});
  return CnfFormula(n, std::move(clauses), std::move(support));
}

}  // namespace wmc
