#include "wmc/formula.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "wmc/error.hpp"

namespace wmc {

Assignment Assignment::from_bits(Var num_vars, std::uint64_t bits) {
  Assignment a(num_vars);
  for (Var v = 1; v <= num_vars; ++v) a.set(v, (bits >> (v - 1)) & 1U);
  return a;
}

std::string Assignment::to_dimacs() const {
  std::string out;
  for (Var v = 1; v <= num_vars(); ++v) {
    if (v > 1) out += ' ';
    if (!(*this)[v]) out += '-';
    out += std::to_string(v);
  }
  return out;
}

std::string PartialAssignment::key() const {
  std::string k(values.size(), '0');
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i]) k[i] = '1';
  return k;
}

CnfFormula::CnfFormula(Var num_vars, std::vector<Clause> clauses, std::vector<Var> independent_support)
    : num_vars_(num_vars) {
  clauses_.reserve(clauses.size());
  for (auto& c : clauses) {
    auto lits = std::move(c.literals);
    if (lits.empty()) throw ParamError("empty clause");
    for (const auto& l : lits)
      if (l.var < 1 || l.var > num_vars_)
        throw ParamError("literal " + std::to_string(l.to_dimacs()) + " out of range 1.." +
                         std::to_string(num_vars_));
    const std::size_t before = lits.size();
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    diagnostics_.duplicate_literals_removed += before - lits.size();
    // After sorting, complementary literals are adjacent (same var, negated false then true).
    bool tautology = false;
    for (std::size_t i = 1; i < lits.size(); ++i)
      if (lits[i].var == lits[i - 1].var) tautology = true;
    if (tautology) {
      ++diagnostics_.tautologies_dropped;
      continue;
    }
    clauses_.push_back(Clause{std::move(lits)});
  }

  if (independent_support.empty()) {
    support_.resize(num_vars_);
    for (Var v = 1; v <= num_vars_; ++v) support_[v - 1] = v;
  } else {
    std::sort(independent_support.begin(), independent_support.end());
    independent_support.erase(std::unique(independent_support.begin(), independent_support.end()),
                              independent_support.end());
    for (Var v : independent_support)
      if (v < 1 || v > num_vars_)
        throw ParamError("independent support variable " + std::to_string(v) + " out of range");
    support_ = std::move(independent_support);
  }
  if (support_.empty()) throw ParamError("formula has no variables");
}

CnfFormula CnfFormula::with_support(std::vector<Var> support) const {
  CnfFormula copy = *this;
  if (support.empty()) {
    copy.support_.resize(num_vars_);
    for (Var v = 1; v <= num_vars_; ++v) copy.support_[v - 1] = v;
    return copy;
  }
  return CnfFormula(num_vars_, clauses_, std::move(support));
}

WeightModel WeightModel::literal_product(std::vector<LiteralWeights> per_var) {
  WeightModel m;
  m.kind_ = Kind::literal_product;
  for (std::size_t i = 0; i < per_var.size(); ++i) {
    const auto& w = per_var[i];
    for (double x : {w.pos, w.neg})
      if (!(x > 0.0 && x <= 1.0))
        throw WeightError("literal weight of variable " + std::to_string(i + 1) + " outside (0,1]");
  }
  m.per_var_ = std::move(per_var);
  m.log_pos_.reserve(m.per_var_.size());
  m.log_neg_.reserve(m.per_var_.size());
  for (const auto& w : m.per_var_) {
    m.log_pos_.push_back(std::log(w.pos));
    m.log_neg_.push_back(std::log(w.neg));
  }
  return m;
}

WeightModel WeightModel::black_box(Callback fn, bool thread_safe) {
  WeightModel m;
  m.kind_ = Kind::black_box;
  m.callback_ = std::move(fn);
  m.thread_safe_ = thread_safe;
  return m;
}

LiteralWeights WeightModel::literal(Var v) const {
  if (kind_ == Kind::literal_product && v - 1 < per_var_.size()) return per_var_[v - 1];
  return {};
}

double WeightModel::log_factor(Var v, bool value) const {
  if (kind_ != Kind::literal_product || v - 1 >= per_var_.size()) return 0.0;
  return value ? log_pos_[v - 1] : log_neg_[v - 1];
}

double WeightModel::weight(const Assignment& sigma) const {
  switch (kind_) {
    case Kind::uniform:
      return 1.0;
    case Kind::literal_product: {
      double w = 1.0;
      const Var n = std::min<Var>(sigma.num_vars(), static_cast<Var>(per_var_.size()));
      for (Var v = 1; v <= n; ++v) w *= sigma[v] ? per_var_[v - 1].pos : per_var_[v - 1].neg;
      if (w > 0.0) return w;
      // Underflow in linear space; the log form still carries the value.
      return std::exp(log_weight(sigma));
    }
    case Kind::black_box: {
      const double w = callback_(sigma);
      if (!std::isfinite(w) || w <= 0.0 || w > 1.0)
        throw WeightError("black-box weight " + std::to_string(w) + " outside (0,1]");
      return w;
    }
  }
  return 1.0;
}

double WeightModel::log_weight(const Assignment& sigma) const {
  switch (kind_) {
    case Kind::uniform:
      return 0.0;
    case Kind::literal_product: {
      double s = 0.0;
      const Var n = std::min<Var>(sigma.num_vars(), static_cast<Var>(per_var_.size()));
      for (Var v = 1; v <= n; ++v) s += sigma[v] ? log_pos_[v - 1] : log_neg_[v - 1];
      return s;
    }
    case Kind::black_box:
      return std::log(weight(sigma));
  }
  return 0.0;
}

double WeightModel::tilt_upper_bound(Var num_vars) const {
  if (kind_ == Kind::uniform) return 1.0;
  if (kind_ == Kind::black_box) return INFINITY;
  double log_r = 0.0;
  for (Var v = 1; v <= num_vars; ++v) log_r += std::abs(log_factor(v, true) - log_factor(v, false));
  return std::exp(log_r);
}

TiltBound::TiltBound(double r) : value(r) {
  if (!(r >= 1.0) || !std::isfinite(r)) throw ParamError("tilt bound r must be a finite value >= 1");
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

long long to_int(std::string_view tok, std::size_t lineno) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(lineno, "expected integer, got '" + std::string(tok) + "'");
  return v;
}

double to_real(std::string_view tok, std::size_t lineno) {
  // from_chars for double is missing on older libstdc++; strtod on a copy is portable.
  std::string s(tok);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty())
    throw ParseError(lineno, "expected number, got '" + s + "'");
  return v;
}

}  // namespace

WeightedCnf parse_weighted_dimacs(std::istream& in) {
  std::optional<Var> num_vars;
  long long declared_clauses = 0;
  std::vector<Clause> clauses;
  std::vector<Literal> current;
  std::set<Var> ind;
  std::map<Var, double> pos_w, neg_w;
  std::vector<std::string> warnings;

  auto check_var = [&](long long v, std::size_t lineno) {
    if (v == 0 || static_cast<unsigned long long>(v < 0 ? -v : v) > *num_vars)
      throw ParseError(lineno, "variable " + std::to_string(v) + " out of range 1.." +
                                   std::to_string(*num_vars));
  };

  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto toks = split_ws(raw);
    if (toks.empty()) continue;
    const auto head = toks[0];
    if (head == "c") {
      if (toks.size() >= 2 && toks[1] == "ind") {
        if (!num_vars) throw ParseError(lineno, "'c ind' before header");
        for (std::size_t i = 2; i < toks.size(); ++i) {
          const long long v = to_int(toks[i], lineno);
          if (v == 0) break;
          if (v < 0) throw ParseError(lineno, "negative variable in 'c ind'");
          check_var(v, lineno);
          ind.insert(static_cast<Var>(v));
        }
      }
      continue;
    }
    if (head[0] == 'c') continue;
    if (head == "p") {
      if (num_vars) throw ParseError(lineno, "duplicate header");
      if (toks.size() != 4 || toks[1] != "cnf") throw ParseError(lineno, "malformed header");
      const long long n = to_int(toks[2], lineno);
      declared_clauses = to_int(toks[3], lineno);
      if (n < 0 || declared_clauses < 0 || n > UINT32_MAX / 2)
        throw ParseError(lineno, "malformed header");
      num_vars = static_cast<Var>(n);
      continue;
    }
    if (!num_vars) throw ParseError(lineno, "data before 'p cnf' header");
    if (head == "w") {
      if (toks.size() < 3 || toks.size() > 4 || (toks.size() == 4 && toks[3] != "0"))
        throw ParseError(lineno, "malformed weight line");
      const long long lit = to_int(toks[1], lineno);
      check_var(lit, lineno);
      const double p = to_real(toks[2], lineno);
      const Var v = static_cast<Var>(lit < 0 ? -lit : lit);
      if (lit > 0) {
        if (!(p > 0.0 && p < 1.0)) throw ParseError(lineno, "weight outside (0,1)");
        if (!pos_w.emplace(v, p).second) throw ParseError(lineno, "duplicate weight for variable " + std::to_string(v));
      } else {
        if (!(p > 0.0 && p <= 1.0)) throw ParseError(lineno, "negative-literal weight outside (0,1]");
        if (!neg_w.emplace(v, p).second)
          throw ParseError(lineno, "duplicate weight for literal -" + std::to_string(v));
      }
      continue;
    }
    if (head == "x") throw ParseError(lineno, "XOR clauses are not accepted in input formulas");
    if (head == "%") break;  // SATLIB trailer
    for (auto tok : toks) {
      const long long lit = to_int(tok, lineno);
      if (lit == 0) {
        if (current.empty()) throw ParseError(lineno, "empty clause");
        clauses.push_back(Clause{std::move(current)});
        current.clear();
      } else {
        check_var(lit, lineno);
        current.push_back(Literal::from_dimacs(lit));
      }
    }
  }
  if (!num_vars) throw ParseError(lineno, "missing 'p cnf' header");
  if (!current.empty()) {
    warnings.push_back("last clause not terminated by 0");
    clauses.push_back(Clause{std::move(current)});
  }
  if (static_cast<long long>(clauses.size()) != declared_clauses)
    warnings.push_back("header declares " + std::to_string(declared_clauses) + " clauses, found " +
                       std::to_string(clauses.size()));

  WeightedCnf out;
  out.formula = CnfFormula(*num_vars, std::move(clauses), std::vector<Var>(ind.begin(), ind.end()));
  if (out.formula.diagnostics().tautologies_dropped > 0)
    warnings.push_back("dropped " + std::to_string(out.formula.diagnostics().tautologies_dropped) +
                       " tautological clause(s)");
  if (!pos_w.empty() || !neg_w.empty()) {
    std::vector<LiteralWeights> per_var(*num_vars);
    for (Var v = 1; v <= *num_vars; ++v) {
      auto p = pos_w.find(v);
      auto q = neg_w.find(v);
      if (p != pos_w.end()) per_var[v - 1] = {p->second, 1.0 - p->second};
      if (q != neg_w.end()) per_var[v - 1].neg = q->second;
    }
    out.weights = WeightModel::literal_product(std::move(per_var));
  }
  out.warnings = std::move(warnings);
  return out;
}

WeightedCnf parse_weighted_dimacs(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_weighted_dimacs(in);
}

namespace {

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string serialize_weighted_dimacs(const CnfFormula& formula, const WeightModel& weights) {
  if (!weights.white_box()) throw ParamError("black-box weights cannot be serialized");
  std::ostringstream out;
  out << "p cnf " << formula.num_vars() << ' ' << formula.clauses().size() << '\n';
  if (!formula.full_support()) {
    out << "c ind";
    for (Var v : formula.independent_support()) out << ' ' << v;
    out << " 0\n";
  }
  if (weights.kind() == WeightModel::Kind::literal_product) {
    for (Var v = 1; v <= formula.num_vars(); ++v) {
      const auto w = weights.literal(v);
      if (w.pos < 1.0) {
        out << "w " << v << ' ' << format_real(w.pos) << '\n';
        if (w.neg != 1.0 - w.pos) out << "w -" << v << ' ' << format_real(w.neg) << '\n';
      } else if (w.neg != 1.0) {
        out << "w -" << v << ' ' << format_real(w.neg) << '\n';
      }
    }
  }
  for (const auto& c : formula.clauses()) {
    for (const auto& l : c.literals) out << l.to_dimacs() << ' ';
    out << "0\n";
  }
  return out.str();
}

bool evaluate(const CnfFormula& formula, const Assignment& sigma) {
  return first_violated_clause(formula, sigma) < 0;
}

long long first_violated_clause(const CnfFormula& formula, const Assignment& sigma) {
  const auto& cs = formula.clauses();
  for (std::size_t i = 0; i < cs.size(); ++i) {
    bool sat = false;
    for (const auto& l : cs[i].literals)
      if (sigma.satisfies(l)) {
        sat = true;
        break;
      }
    if (!sat) return static_cast<long long>(i);
  }
  return -1;
}

double weight(const WeightModel& model, const Assignment& sigma) { return model.weight(sigma); }

PartialAssignment project(const Assignment& sigma, std::span<const Var> support) {
  PartialAssignment p;
  p.vars.assign(support.begin(), support.end());
  p.values.reserve(support.size());
  for (Var v : support) p.values.push_back(sigma[v] ? 1 : 0);
  return p;
}

}  // namespace wmc
