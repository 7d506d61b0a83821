#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wmc {

/// 1-based variable index, as in DIMACS.
using Var = std::uint32_t;

struct Literal {
  Var var = 0;
  bool negated = false;

  static Literal from_dimacs(long long lit) {
    return Literal{static_cast<Var>(lit < 0 ? -lit : lit), lit < 0};
  }
  long long to_dimacs() const { return negated ? -static_cast<long long>(var) : var; }
  Literal operator~() const { return Literal{var, !negated}; }

  auto operator<=>(const Literal&) const = default;
};

struct Clause {
  std::vector<Literal> literals;

  bool operator==(const Clause&) const = default;
};

/// Total truth assignment over variables 1..n.
class Assignment {
 public:
  Assignment() = default;
  explicit Assignment(Var num_vars) : values_(num_vars, 0) {}

  /// Bit (v-1) of `bits` gives the value of variable v; n <= 64.
  static Assignment from_bits(Var num_vars, std::uint64_t bits);

  Var num_vars() const { return static_cast<Var>(values_.size()); }
  bool operator[](Var v) const { return values_[v - 1] != 0; }
  void set(Var v, bool value) { values_[v - 1] = value ? 1 : 0; }
  bool satisfies(Literal l) const { return (*this)[l.var] != l.negated; }

  /// DIMACS model line body: "1 -2 3".
  std::string to_dimacs() const;

  auto operator<=>(const Assignment&) const = default;

 private:
  std::vector<std::uint8_t> values_;
};

/// Restriction of an assignment to a variable subset (sorted by variable).
struct PartialAssignment {
  std::vector<Var> vars;
  std::vector<std::uint8_t> values;

  /// '0'/'1' string in variable order; used as a solution key.
  std::string key() const;

  auto operator<=>(const PartialAssignment&) const = default;
};

struct FormulaDiagnostics {
  std::size_t tautologies_dropped = 0;
  std::size_t duplicate_literals_removed = 0;
};

class CnfFormula {
 public:
  CnfFormula() = default;

  /// Normalizes clauses (dedup, tautology removal) and validates indices.
  /// An empty `independent_support` means the full support {1..n}.
  CnfFormula(Var num_vars, std::vector<Clause> clauses, std::vector<Var> independent_support = {});

  Var num_vars() const { return num_vars_; }
  const std::vector<Clause>& clauses() const { return clauses_; }
  /// Sorted, non-empty.
  const std::vector<Var>& independent_support() const { return support_; }
  bool full_support() const { return support_.size() == num_vars_; }
  const FormulaDiagnostics& diagnostics() const { return diagnostics_; }

  /// Same clauses, different independent support (empty = full).
  CnfFormula with_support(std::vector<Var> support) const;

  bool operator==(const CnfFormula& o) const {
    return num_vars_ == o.num_vars_ && clauses_ == o.clauses_ && support_ == o.support_;
  }

 private:
  Var num_vars_ = 0;
  std::vector<Clause> clauses_;
  std::vector<Var> support_;
  FormulaDiagnostics diagnostics_;
};

struct LiteralWeights {
  double pos = 1.0;
  double neg = 1.0;

  bool operator==(const LiteralWeights&) const = default;
};

/// Assignment-weight oracle with values in (0,1].
class WeightModel {
 public:
  enum class Kind { uniform, literal_product, black_box };
  using Callback = std::function<double(const Assignment&)>;

  WeightModel() = default;

  static WeightModel uniform() { return WeightModel(); }
  /// per_var[v-1] holds the weights of variable v; missing trailing entries are (1,1).
  static WeightModel literal_product(std::vector<LiteralWeights> per_var);
  /// The callback must be safe to call concurrently iff `thread_safe`.
  static WeightModel black_box(Callback fn, bool thread_safe = false);

  Kind kind() const { return kind_; }
  /// Weight is a product of per-literal factors (uniform counts as white-box).
  bool white_box() const { return kind_ != Kind::black_box; }
  bool thread_safe() const { return kind_ != Kind::black_box || thread_safe_; }

  double weight(const Assignment& sigma) const;
  /// Natural log of weight(); for white-box models this is the sum of per-variable
  /// log factors taken in variable order, the one canonical evaluation order.
  double log_weight(const Assignment& sigma) const;

  LiteralWeights literal(Var v) const;
  double log_factor(Var v, bool value) const;
  const std::vector<LiteralWeights>& literal_weights() const { return per_var_; }

  /// Product over variables 1..n of max/min literal weight; an a-priori tilt bound.
  double tilt_upper_bound(Var num_vars) const;

  bool operator==(const WeightModel& o) const {
    return kind_ == o.kind_ && kind_ != Kind::black_box && per_var_ == o.per_var_;
  }

 private:
  Kind kind_ = Kind::uniform;
  std::vector<LiteralWeights> per_var_;
  std::vector<double> log_pos_, log_neg_;
  Callback callback_;
  bool thread_safe_ = false;
};

/// Upper bound r >= 1 on w_max / w_min over the solutions.
struct TiltBound {
  explicit TiltBound(double r);
  double value;
};

struct WeightedCnf {
  CnfFormula formula;
  WeightModel weights;
  std::vector<std::string> warnings;
};

/// DIMACS CNF with optional `w <var> <p>`, `w -<var> <q>` and `c ind ... 0` lines.
WeightedCnf parse_weighted_dimacs(std::istream& in);
WeightedCnf parse_weighted_dimacs(std::string_view text);

/// Emits `p cnf`, `c ind`, `w` lines and clauses, in that order.
std::string serialize_weighted_dimacs(const CnfFormula& formula, const WeightModel& weights);

bool evaluate(const CnfFormula& formula, const Assignment& sigma);
/// Index of the first clause sigma falsifies, or -1.
long long first_violated_clause(const CnfFormula& formula, const Assignment& sigma);

double weight(const WeightModel& model, const Assignment& sigma);

PartialAssignment project(const Assignment& sigma, std::span<const Var> support);

}  // namespace wmc
