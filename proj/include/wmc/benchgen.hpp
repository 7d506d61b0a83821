#pragma once

#include <cstddef>
#include <vector>

#include "wmc/formula.hpp"
#include "wmc/random.hpp"

namespace wmc {

/// Number of weighted variables: max(15, ceil(n/100)), capped at n.
unsigned genbench_var_count(Var num_vars);

/// p with (p / (1-p))^m = r.
double genbench_probability(double r, unsigned m);

struct Genbench {
  WeightModel weights;
  std::vector<Var> chosen;  // sorted
  double p = 0.5;
};

/// Weights a base formula so the tilt over its solutions is at most r.
Genbench genbench(const CnfFormula& base, double r, Rng& rng);

/// Uniform random k-CNF: k distinct variables per clause, random signs.
CnfFormula random_kcnf(Var num_vars, std::size_t num_clauses, unsigned k, Rng& rng);

/// Random k-CNF over `base_vars` variables followed by `dependent_vars` variables, each
/// defined from two earlier variables (XOR or AND) by equivalence clauses. The returned
/// independent support is {1..base_vars}.
CnfFormula random_with_dependents(Var base_vars, Var dependent_vars, std::size_t num_clauses, unsigned k,
                                  Rng& rng);

}  // namespace wmc
