#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wmc/formula.hpp"
#include "wmc/random.hpp"
#include "wmc/xorhash.hpp"

namespace wmc {

/// Half-open weight interval (low, high]; only meaningful for white-box weights.
struct WeightWindow {
  double low = 0.0;
  double high = 1.0;

  /// Throws ParamError unless 0 <= low < high.
  void validate() const;
  /// Membership of a solution with natural-log weight `log_weight`. Adjacent windows that
  /// share a boundary value partition exactly: the boundary belongs to the lower window.
  bool contains_log(double log_weight) const;
};

/// Per-call solve limit; zero means unlimited.
struct Budget {
  std::uint64_t max_propagations = 0;
  double max_seconds = 0.0;
};

enum class SolveStatus { sat, unsat, budget_exceeded };

struct SolveOutcome {
  SolveStatus status = SolveStatus::unsat;
  Assignment witness;  // set iff status == sat
};

struct SolverStats {
  std::uint64_t solve_calls = 0;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t conflicts = 0;
  std::uint64_t rebuilds = 0;
};

/// Returned by push(); valid until popped.
struct Checkpoint {
  std::uint64_t instance = 0;
  std::uint64_t serial = 0;
};

// Decides CNF /\ XOR rows /\ optional weight window.
//
// Search is DPLL with chronological backtracking: watched-literal propagation on clauses,
// two-watch propagation on the Gauss-Jordan-reduced XOR matrix, and branch-and-bound on the
// log-weight of the partial assignment when a window is set. Support variables are branched
// on first (lowest index, random polarity), which lets a blocking clause over the support
// resume the search right where the last witness was found instead of restarting.
class SolverInstance {
 public:
  /// Blocking support defaults to the formula's independent support.
  SolverInstance(const CnfFormula& formula, WeightModel weights = WeightModel::uniform(),
                 std::uint64_t seed = 0);

  Var num_vars() const { return num_vars_; }
  const std::vector<Var>& support() const { return support_; }
  const WeightModel& weights() const { return weights_; }

  /// Replaces the variable set blocking clauses range over (and that is branched first).
  void set_support(std::vector<Var> support);

  void add_clause(std::span<const Literal> literals);
  void add_xor(const XorConstraint& row);
  void add_hash(const HashConstraintSet& hs);
  /// Requires white-box weights.
  void set_window(const WeightWindow& window);
  const std::optional<WeightWindow>& window() const { return window_; }

  Checkpoint push();
  /// push() followed by add_hash(hs).
  Checkpoint push_constraints(const HashConstraintSet& hs);
  /// Restores the state from before `cp` was pushed (and drops any layers above it).
  void pop_to(Checkpoint cp);
  std::size_t depth() const { return layers_.size(); }

  /// Adds the clause excluding the support projection `sigma_support`.
  void add_blocking_clause(const PartialAssignment& sigma_support);

  SolveOutcome solve(const Budget& budget = {});

  void reseed(std::uint64_t seed) { rng_ = Rng(seed); }
  const SolverStats& stats() const { return stats_; }

  std::size_t num_clauses() const { return clauses_.size(); }
  std::size_t num_xor_rows() const { return xor_source_.size(); }

  /// DIMACS with `x` lines; the window (if any) is recorded as a comment.
  std::string to_dimacs() const;

  /// Current reduced XOR matrix (after the last solve), for inspection in tests. An
  /// inconsistent system shows up as an empty row with parity 1.
  std::vector<XorConstraint> reduced_xor_rows() const;

 private:
  using Lit = std::uint32_t;  // 2*(var-1) + negated
  static constexpr std::int8_t kUndef = -1;

  enum class State { dirty, searching, found, exhausted };

  struct Layer {
    std::uint64_t serial;
    std::size_t clauses;
    std::size_t xors;
    std::optional<WeightWindow> window;
  };

  struct LevelSnapshot {
    double assigned;
    double lo_rest;
    double hi_rest;
    std::size_t cursor;
  };

  std::int8_t lit_value(Lit l) const {
    const std::int8_t v = value_[l >> 1];
    return v == kUndef ? kUndef : static_cast<std::int8_t>(v ^ static_cast<std::int8_t>(l & 1U));
  }
  std::uint32_t decision_level() const { return static_cast<std::uint32_t>(level_start_.size()); }

  void rebuild();
  void reduce_xors();
  void assign(Lit l);
  void new_level();
  void cancel_until(std::uint32_t level);
  bool propagate();  // false on conflict
  bool propagate_clauses(Lit false_lit);
  bool propagate_xors(std::uint32_t var);
  bool window_feasible() const;
  bool backtrack();  // flips the deepest unflipped decision; false when exhausted
  Assignment current_assignment() const;

  // Copies get a fresh identity so checkpoints never cross instances.
  struct InstanceId {
    InstanceId() : value(next()) {}
    InstanceId(const InstanceId&) : value(next()) {}
    InstanceId& operator=(const InstanceId&) {
      value = next();
      return *this;
    }
    InstanceId(InstanceId&&) noexcept = default;
    InstanceId& operator=(InstanceId&&) noexcept = default;
    static std::uint64_t next();
    std::uint64_t value;
  };

  // Problem.
  Var num_vars_ = 0;
  WeightModel weights_;
  std::vector<Var> support_;
  std::vector<std::vector<Lit>> clauses_;
  std::vector<XorConstraint> xor_source_;
  std::optional<WeightWindow> window_;
  std::vector<Layer> layers_;
  InstanceId id_;
  std::uint64_t next_serial_ = 1;

  // Search state.
  State state_ = State::dirty;
  std::vector<std::int8_t> value_;
  std::vector<std::uint32_t> level_;
  std::vector<Lit> trail_;
  std::size_t qhead_ = 0;
  std::vector<std::size_t> level_start_;
  std::vector<std::uint8_t> flipped_;
  std::vector<std::vector<std::uint32_t>> watches_;
  std::vector<Var> branch_order_;
  std::size_t cursor_ = 0;
  std::uint32_t resume_level_ = 0;
  bool resume_pending_ = false;

  // Reduced XOR matrix as packed rows.
  std::size_t words_ = 0;
  std::vector<std::uint64_t> xbits_;
  std::vector<std::uint8_t> xparity_;
  std::vector<std::uint32_t> xwatch_;  // two watched vars (0-based) per row
  std::vector<std::vector<std::uint32_t>> xwatch_lists_;
  std::vector<std::uint64_t> assigned_bits_, true_bits_;
  std::vector<Lit> xor_units_;
  bool xor_inconsistent_ = false;

  // Window branch-and-bound (natural-log space).
  std::vector<double> log_pos_, log_neg_, log_lo_, log_hi_;
  double assigned_log_ = 0.0, lo_rest_ = 0.0, hi_rest_ = 0.0, window_margin_ = 0.0;
  std::vector<LevelSnapshot> snapshots_;

  Rng rng_;
  SolverStats stats_;
};

}  // namespace wmc
