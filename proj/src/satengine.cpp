#include "wmc/satengine.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <sstream>

#include "wmc/error.hpp"

namespace wmc {

void WeightWindow::validate() const {
  if (!(low >= 0.0) || !(low < high) || !std::isfinite(high))
    throw ParamError("weight window requires 0 <= low < high");
}

bool WeightWindow::contains_log(double log_weight) const {
  return log_weight > std::log(low) && log_weight <= std::log(high);
}

std::uint64_t SolverInstance::InstanceId::next() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

SolverInstance::SolverInstance(const CnfFormula& formula, WeightModel weights, std::uint64_t seed)
    : num_vars_(formula.num_vars()), weights_(std::move(weights)), rng_(seed) {
  clauses_.reserve(formula.clauses().size());
  for (const auto& c : formula.clauses()) {
    std::vector<Lit> lits;
    lits.reserve(c.literals.size());
    for (const auto& l : c.literals) lits.push_back(2 * (l.var - 1) + (l.negated ? 1U : 0U));
    clauses_.push_back(std::move(lits));
  }
  log_pos_.resize(num_vars_);
  log_neg_.resize(num_vars_);
  log_lo_.resize(num_vars_);
  log_hi_.resize(num_vars_);
  if (weights_.white_box()) {
    for (Var v = 1; v <= num_vars_; ++v) {
      log_pos_[v - 1] = weights_.log_factor(v, true);
      log_neg_[v - 1] = weights_.log_factor(v, false);
      log_lo_[v - 1] = std::min(log_pos_[v - 1], log_neg_[v - 1]);
      log_hi_[v - 1] = std::max(log_pos_[v - 1], log_neg_[v - 1]);
    }
  }
  set_support(formula.independent_support());
}

void SolverInstance::set_support(std::vector<Var> support) {
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  for (Var v : support)
    if (v < 1 || v > num_vars_) throw SolverError("support variable out of range");
  if (support.empty()) throw SolverError("empty support");
  support_ = std::move(support);
  std::vector<std::uint8_t> in_support(num_vars_, 0);
  branch_order_.clear();
  for (Var v : support_) {
    in_support[v - 1] = 1;
    branch_order_.push_back(v - 1);
  }
  for (Var v = 0; v < num_vars_; ++v)
    if (!in_support[v]) branch_order_.push_back(v);
  state_ = State::dirty;
}

void SolverInstance::add_clause(std::span<const Literal> literals) {
  std::vector<Lit> lits;
  for (const auto& l : literals) {
    if (l.var < 1 || l.var > num_vars_) throw SolverError("clause literal out of range");
    lits.push_back(2 * (l.var - 1) + (l.negated ? 1U : 0U));
  }
  std::sort(lits.begin(), lits.end());
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  clauses_.push_back(std::move(lits));
  if (state_ != State::exhausted) state_ = State::dirty;
}

void SolverInstance::add_xor(const XorConstraint& row) {
  for (Var v : row.vars)
    if (v < 1 || v > num_vars_) throw SolverError("xor variable out of range");
  xor_source_.push_back(row);
  if (state_ != State::exhausted) state_ = State::dirty;
}

void SolverInstance::add_hash(const HashConstraintSet& hs) {
  for (const auto& row : hs.rows) add_xor(row);
}

void SolverInstance::set_window(const WeightWindow& window) {
  window.validate();
  if (!weights_.white_box()) throw ParamError("weight windows require white-box (literal-product) weights");
  window_ = window;
  state_ = State::dirty;
}

Checkpoint SolverInstance::push() {
  const std::uint64_t serial = next_serial_++;
  layers_.push_back(Layer{serial, clauses_.size(), xor_source_.size(), window_});
  return Checkpoint{id_.value, serial};
}

Checkpoint SolverInstance::push_constraints(const HashConstraintSet& hs) {
  const auto cp = push();
  add_hash(hs);
  return cp;
}

void SolverInstance::pop_to(Checkpoint cp) {
  if (cp.instance != id_.value) throw SolverError("checkpoint belongs to another solver instance");
  auto it = std::find_if(layers_.begin(), layers_.end(), [&](const Layer& l) { return l.serial == cp.serial; });
  if (it == layers_.end()) throw SolverError("stale checkpoint");
  clauses_.resize(it->clauses);
  xor_source_.resize(it->xors);
  window_ = it->window;
  layers_.erase(it, layers_.end());
  state_ = State::dirty;
}

void SolverInstance::add_blocking_clause(const PartialAssignment& sigma_support) {
  if (sigma_support.vars != support_ || sigma_support.values.size() != support_.size())
    throw SolverError("blocking assignment must cover exactly the support variables");
  std::vector<Lit> lits;
  lits.reserve(support_.size());
  for (std::size_t i = 0; i < support_.size(); ++i)
    lits.push_back(2 * (support_[i] - 1) + (sigma_support.values[i] ? 1U : 0U));

  bool matches_witness = state_ == State::found && lits.size() >= 2;
  if (matches_witness)
    for (Lit l : lits)
      if (lit_value(l) != 0) {
        matches_witness = false;
        break;
      }
  if (!matches_witness) {
    clauses_.push_back(std::move(lits));
    if (state_ != State::exhausted) state_ = State::dirty;
    return;
  }

  // Every literal is false on the current trail. Watch the two deepest ones so the 2WL
  // invariant survives backtracking, then resume from the deepest level they involve.
  std::partial_sort(lits.begin(), lits.begin() + 2, lits.end(),
                    [&](Lit a, Lit b) { return level_[a >> 1] > level_[b >> 1]; });
  const auto cid = static_cast<std::uint32_t>(clauses_.size());
  watches_[lits[0]].push_back(cid);
  watches_[lits[1]].push_back(cid);
  resume_level_ = level_[lits[0] >> 1];
  resume_pending_ = true;
  clauses_.push_back(std::move(lits));
}

void SolverInstance::reduce_xors() {
  const std::size_t n = num_vars_;
  words_ = (n + 63) / 64;
  const std::size_t m = xor_source_.size();
  std::vector<std::uint64_t> mat(m * words_, 0);
  std::vector<std::uint8_t> par(m, 0);
  for (std::size_t r = 0; r < m; ++r) {
    for (Var v : xor_source_[r].vars) mat[r * words_ + (v - 1) / 64] ^= 1ULL << ((v - 1) % 64);
    par[r] = xor_source_[r].parity ? 1 : 0;
  }

  // Gauss-Jordan to reduced row echelon form.
  std::size_t rank = 0;
  for (std::size_t col = 0; col < n && rank < m; ++col) {
    const std::size_t w = col / 64;
    const std::uint64_t bit = 1ULL << (col % 64);
    std::size_t piv = rank;
    while (piv < m && !(mat[piv * words_ + w] & bit)) ++piv;
    if (piv == m) continue;
    if (piv != rank) {
      std::swap_ranges(mat.begin() + piv * words_, mat.begin() + (piv + 1) * words_, mat.begin() + rank * words_);
      std::swap(par[piv], par[rank]);
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (r == rank || !(mat[r * words_ + w] & bit)) continue;
      for (std::size_t k = 0; k < words_; ++k) mat[r * words_ + k] ^= mat[rank * words_ + k];
      par[r] ^= par[rank];
    }
    ++rank;
  }
  xor_inconsistent_ = false;
  for (std::size_t r = rank; r < m; ++r)
    if (par[r]) xor_inconsistent_ = true;

  xbits_.clear();
  xparity_.clear();
  xwatch_.clear();
  xor_units_.clear();
  xwatch_lists_.assign(m > 0 ? n : 0, {});
  for (std::size_t r = 0; r < rank; ++r) {
    const std::uint64_t* row = &mat[r * words_];
    std::uint32_t first = UINT32_MAX, second = UINT32_MAX;
    for (std::size_t k = 0; k < words_ && second == UINT32_MAX; ++k) {
      std::uint64_t bits = row[k];
      while (bits && second == UINT32_MAX) {
        const auto v = static_cast<std::uint32_t>(k * 64 + std::countr_zero(bits));
        bits &= bits - 1;
        (first == UINT32_MAX ? first : second) = v;
      }
    }
    if (second == UINT32_MAX) {
      xor_units_.push_back(2 * first + (par[r] ? 0U : 1U));
      continue;
    }
    const auto idx = static_cast<std::uint32_t>(xparity_.size());
    xbits_.insert(xbits_.end(), row, row + words_);
    xparity_.push_back(par[r]);
    xwatch_.push_back(first);
    xwatch_.push_back(second);
    xwatch_lists_[first].push_back(idx);
    xwatch_lists_[second].push_back(idx);
  }
}

void SolverInstance::rebuild() {
  ++stats_.rebuilds;
  const std::size_t n = num_vars_;
  value_.assign(n, kUndef);
  level_.assign(n, 0);
  trail_.clear();
  qhead_ = 0;
  level_start_.clear();
  flipped_.clear();
  snapshots_.clear();
  cursor_ = 0;
  resume_pending_ = false;

  watches_.resize(2 * n);
  for (auto& w : watches_) w.clear();
  bool unsat = false;
  std::vector<Lit> units;
  for (std::size_t i = 0; i < clauses_.size(); ++i) {
    const auto& c = clauses_[i];
    if (c.empty()) {
      unsat = true;
    } else if (c.size() == 1) {
      units.push_back(c[0]);
    } else {
      watches_[c[0]].push_back(static_cast<std::uint32_t>(i));
      watches_[c[1]].push_back(static_cast<std::uint32_t>(i));
    }
  }
  reduce_xors();
  unsat = unsat || xor_inconsistent_;
  assigned_bits_.assign(words_, 0);
  true_bits_.assign(words_, 0);

  assigned_log_ = 0.0;
  lo_rest_ = hi_rest_ = 0.0;
  double magnitude = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    lo_rest_ += log_lo_[v];
    hi_rest_ += log_hi_[v];
    magnitude += std::max(std::abs(log_lo_[v]), std::abs(log_hi_[v]));
  }
  window_margin_ = 1e-12 * std::max(1.0, magnitude);

  if (unsat) {
    state_ = State::exhausted;
    return;
  }
  units.insert(units.end(), xor_units_.begin(), xor_units_.end());
  for (Lit u : units) {
    const auto val = lit_value(u);
    if (val == 0) {
      state_ = State::exhausted;
      return;
    }
    if (val == kUndef) assign(u);
  }
  state_ = propagate() ? State::searching : State::exhausted;
}

void SolverInstance::assign(Lit l) {
  const std::uint32_t v = l >> 1;
  const bool value = !(l & 1U);
  value_[v] = value ? 1 : 0;
  level_[v] = decision_level();
  trail_.push_back(l);
  if (words_ > 0) {
    assigned_bits_[v / 64] |= 1ULL << (v % 64);
    if (value) true_bits_[v / 64] |= 1ULL << (v % 64);
  }
  if (window_) {
    assigned_log_ += value ? log_pos_[v] : log_neg_[v];
    lo_rest_ -= log_lo_[v];
    hi_rest_ -= log_hi_[v];
  }
}

void SolverInstance::new_level() {
  snapshots_.push_back(LevelSnapshot{assigned_log_, lo_rest_, hi_rest_, cursor_});
  level_start_.push_back(trail_.size());
  flipped_.push_back(0);
}

void SolverInstance::cancel_until(std::uint32_t level) {
  if (decision_level() <= level) return;
  const std::size_t keep = level_start_[level];
  for (std::size_t i = trail_.size(); i-- > keep;) {
    const std::uint32_t v = trail_[i] >> 1;
    value_[v] = kUndef;
    if (words_ > 0) {
      assigned_bits_[v / 64] &= ~(1ULL << (v % 64));
      true_bits_[v / 64] &= ~(1ULL << (v % 64));
    }
  }
  trail_.resize(keep);
  qhead_ = keep;
  const auto& snap = snapshots_[level];
  assigned_log_ = snap.assigned;
  lo_rest_ = snap.lo_rest;
  hi_rest_ = snap.hi_rest;
  cursor_ = snap.cursor;
  level_start_.resize(level);
  flipped_.resize(level);
  snapshots_.resize(level);
}

bool SolverInstance::propagate_clauses(Lit false_lit) {
  auto& ws = watches_[false_lit];
  std::size_t i = 0, j = 0;
  const std::size_t end = ws.size();
  while (i < end) {
    const std::uint32_t cid = ws[i++];
    auto& c = clauses_[cid];
    if (c[0] == false_lit) std::swap(c[0], c[1]);
    if (lit_value(c[0]) == 1) {
      ws[j++] = cid;
      continue;
    }
    bool moved = false;
    for (std::size_t k = 2; k < c.size(); ++k) {
      if (lit_value(c[k]) != 0) {
        std::swap(c[1], c[k]);
        watches_[c[1]].push_back(cid);
        moved = true;
        break;
      }
    }
    if (moved) continue;
    ws[j++] = cid;
    if (lit_value(c[0]) == 0) {
      while (i < end) ws[j++] = ws[i++];
      ws.resize(j);
      return false;
    }
    assign(c[0]);
  }
  ws.resize(j);
  return true;
}

bool SolverInstance::propagate_xors(std::uint32_t var) {
  auto& ws = xwatch_lists_[var];
  std::size_t i = 0, j = 0;
  const std::size_t end = ws.size();
  while (i < end) {
    const std::uint32_t r = ws[i++];
    std::uint32_t* w = &xwatch_[2 * r];
    if (w[0] == var) std::swap(w[0], w[1]);
    const std::uint32_t other = w[0];
    const std::uint64_t* row = &xbits_[r * words_];

    bool moved = false;
    for (std::size_t k = 0; k < words_; ++k) {
      std::uint64_t free_bits = row[k] & ~assigned_bits_[k];
      if (k == other / 64) free_bits &= ~(1ULL << (other % 64));
      if (free_bits) {
        const auto u = static_cast<std::uint32_t>(k * 64 + std::countr_zero(free_bits));
        w[1] = u;
        xwatch_lists_[u].push_back(r);
        moved = true;
        break;
      }
    }
    if (moved) continue;
    ws[j++] = r;

    unsigned acc = xparity_[r];
    for (std::size_t k = 0; k < words_; ++k) acc ^= std::popcount(row[k] & true_bits_[k]) & 1U;
    if (value_[other] == kUndef) {
      assign(2 * other + (acc ? 0U : 1U));
    } else if (acc) {
      while (i < end) ws[j++] = ws[i++];
      ws.resize(j);
      return false;
    }
  }
  ws.resize(j);
  return true;
}

bool SolverInstance::window_feasible() const {
  const double best = assigned_log_ + hi_rest_;
  const double worst = assigned_log_ + lo_rest_;
  if (best + window_margin_ <= std::log(window_->low)) return false;
  if (worst - window_margin_ > std::log(window_->high)) return false;
  return true;
}

bool SolverInstance::propagate() {
  while (qhead_ < trail_.size()) {
    const Lit p = trail_[qhead_++];
    ++stats_.propagations;
    if (!propagate_clauses(p ^ 1U)) return false;
    if (!xwatch_lists_.empty() && !propagate_xors(p >> 1)) return false;
  }
  if (window_ && !window_feasible()) return false;
  return true;
}

bool SolverInstance::backtrack() {
  while (decision_level() > 0) {
    const std::uint32_t top = decision_level() - 1;
    if (!flipped_[top]) {
      const Lit decision = trail_[level_start_[top]];
      cancel_until(top);
      new_level();
      flipped_.back() = 1;
      assign(decision ^ 1U);
      return true;
    }
    cancel_until(top);
  }
  return false;
}

Assignment SolverInstance::current_assignment() const {
  Assignment a(num_vars_);
  for (Var v = 0; v < num_vars_; ++v) a.set(v + 1, value_[v] == 1);
  return a;
}

SolveOutcome SolverInstance::solve(const Budget& budget) {
  ++stats_.solve_calls;
  if (state_ == State::dirty) rebuild();
  if (state_ == State::exhausted) return {SolveStatus::unsat, {}};
  if (state_ == State::found) {
    if (!resume_pending_) return {SolveStatus::sat, current_assignment()};
    resume_pending_ = false;
    cancel_until(resume_level_);
    if (!backtrack()) {
      state_ = State::exhausted;
      return {SolveStatus::unsat, {}};
    }
    state_ = State::searching;
  }

  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t start_props = stats_.propagations;
  std::uint64_t iterations = 0;
  for (;;) {
    if (budget.max_propagations && stats_.propagations - start_props > budget.max_propagations) {
      state_ = State::dirty;
      return {SolveStatus::budget_exceeded, {}};
    }
    if (budget.max_seconds > 0.0 && (++iterations & 1023U) == 0) {
      const std::chrono::duration<double> spent = std::chrono::steady_clock::now() - start;
      if (spent.count() > budget.max_seconds) {
        state_ = State::dirty;
        return {SolveStatus::budget_exceeded, {}};
      }
    }
    if (!propagate()) {
      ++stats_.conflicts;
      if (!backtrack()) {
        state_ = State::exhausted;
        return {SolveStatus::unsat, {}};
      }
      continue;
    }

    while (cursor_ < branch_order_.size() && value_[branch_order_[cursor_]] != kUndef) ++cursor_;
    if (cursor_ == branch_order_.size()) {
      if (window_) {
        // Exact membership with the canonical summation order; pruning above is only a bound.
        double lw = 0.0;
        for (Var v = 0; v < num_vars_; ++v) lw += value_[v] ? log_pos_[v] : log_neg_[v];
        if (!window_->contains_log(lw)) {
          ++stats_.conflicts;
          if (!backtrack()) {
            state_ = State::exhausted;
            return {SolveStatus::unsat, {}};
          }
          continue;
        }
      }
      state_ = State::found;
      return {SolveStatus::sat, current_assignment()};
    }
    ++stats_.decisions;
    new_level();
    const std::uint32_t v = branch_order_[cursor_];
    assign(2 * v + (rng_.bit() ? 0U : 1U));
  }
}

std::string SolverInstance::to_dimacs() const {
  std::ostringstream out;
  out << "p cnf " << num_vars_ << ' ' << clauses_.size() << '\n';
  if (window_) out << "c window " << window_->low << ' ' << window_->high << '\n';
  for (const auto& c : clauses_) {
    // Watch maintenance permutes literals; print them in canonical order.
    std::vector<Lit> sorted(c.begin(), c.end());
    std::sort(sorted.begin(), sorted.end());
    for (Lit l : sorted) out << ((l & 1U) ? "-" : "") << (l >> 1) + 1 << ' ';
    out << "0\n";
  }
  for (const auto& row : xor_source_) out << to_xor_line(row) << '\n';
  return out.str();
}

std::vector<XorConstraint> SolverInstance::reduced_xor_rows() const {
  std::vector<XorConstraint> rows;
  if (xor_inconsistent_) rows.push_back(XorConstraint{{}, true});
  for (Lit u : xor_units_) rows.push_back(XorConstraint{{(u >> 1) + 1}, !(u & 1U)});
  for (std::size_t r = 0; r < xparity_.size(); ++r) {
    XorConstraint row;
    row.parity = xparity_[r] != 0;
    for (std::size_t k = 0; k < words_; ++k) {
      std::uint64_t bits = xbits_[r * words_ + k];
      while (bits) {
        row.vars.push_back(static_cast<Var>(k * 64 + std::countr_zero(bits)) + 1);
        bits &= bits - 1;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace wmc
