#pragma once

#include <span>
#include <string>
#include <vector>

#include "wmc/formula.hpp"
#include "wmc/random.hpp"

namespace wmc {

/// XOR of `vars` must equal `parity`. An empty row is satisfiable iff parity is false.
struct XorConstraint {
  std::vector<Var> vars;  // sorted, distinct
  bool parity = false;

  bool operator==(const XorConstraint&) const = default;
};

/// m parity rows: a random h from H_xor(|S|, m, 3) conjoined with a random cell selector alpha.
/// alpha and the constant term of h are folded into each row's parity.
struct HashConstraintSet {
  std::vector<XorConstraint> rows;

  std::size_t m() const { return rows.size(); }
};

/// Each row includes each variable of `support` with probability 1/2; parity is the XOR of
/// two fair bits (the constant coefficient and the cell selector).
HashConstraintSet sample_hash(std::span<const Var> support, std::size_t m, Rng& rng);

bool row_satisfied(const XorConstraint& row, const Assignment& sigma);
bool cell_membership(const HashConstraintSet& hs, const Assignment& sigma);

/// `x` lines of the XOR-extended DIMACS dialect; a negated first literal marks parity 0.
std::string to_xor_lines(const HashConstraintSet& hs);
std::string to_xor_line(const XorConstraint& row);

}  // namespace wmc
