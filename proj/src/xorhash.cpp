#include "wmc/xorhash.hpp"

#include "wmc/error.hpp"

namespace wmc {

HashConstraintSet sample_hash(std::span<const Var> support, std::size_t m, Rng& rng) {
  if (m == 0) throw ParamError("hash must have at least one row");
  if (support.empty()) throw ParamError("hash support is empty");
  HashConstraintSet hs;
  hs.rows.resize(m);
  for (auto& row : hs.rows) {
    row.vars.reserve(support.size() / 2 + 1);
    for (Var v : support)
      if (rng.bit()) row.vars.push_back(v);
    const bool constant = rng.bit();
    const bool alpha = rng.bit();
    row.parity = constant != alpha;
  }
  return hs;
}

bool row_satisfied(const XorConstraint& row, const Assignment& sigma) {
  bool x = false;
  for (Var v : row.vars) x ^= sigma[v];
  return x == row.parity;
}

bool cell_membership(const HashConstraintSet& hs, const Assignment& sigma) {
  for (const auto& row : hs.rows)
    if (!row_satisfied(row, sigma)) return false;
  return true;
}

std::string to_xor_line(const XorConstraint& row) {
  // CryptoMiniSat convention: "x 1 2 0" means x1^x2 = 1; negating one literal flips the parity.
  std::string out = "x";
  // Empty rows: parity 1 is the empty clause, parity 0 is vacuous.
  if (row.vars.empty()) return row.parity ? "0" : "c empty xor";
  for (std::size_t i = 0; i < row.vars.size(); ++i) {
    out += ' ';
    if (i == 0 && !row.parity) out += '-';
    out += std::to_string(row.vars[i]);
  }
  return out + " 0";
}

std::string to_xor_lines(const HashConstraintSet& hs) {
  std::string out;
  for (const auto& row : hs.rows) out += to_xor_line(row) + '\n';
  return out;
}

}  // namespace wmc
