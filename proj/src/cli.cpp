#include "wmc/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "wmc/benchgen.hpp"
#include "wmc/counting.hpp"
#include "wmc/error.hpp"
#include "wmc/oracle.hpp"
#include "wmc/sampling.hpp"

namespace wmc {

namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest round-trip text, the same digits the JSON writer produces.
std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Json jnum(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::string scalar_text(const Json& v) {
  if (v.is_null()) return "none";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return num(v.get<double>());
  return v.dump();
}

/// Top-level scalars as "key value" lines; nested values are printed by the caller.
void print_human(std::ostream& out, const Json& report) {
  for (const auto& [k, v] : report.items())
    if (!v.is_structured()) out << k << ' ' << scalar_text(v) << '\n';
}

std::string read_file(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<Var> parse_support_file(const std::string& text) {
  std::istringstream in(text);
  std::vector<Var> vars;
  std::string tok;
  while (in >> tok) {
    if (tok == "c" || tok == "ind" || tok == "0") continue;
    long long v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size() || v <= 0)
      throw ParseError(0, "support file: bad variable '" + tok + "'");
    vars.push_back(static_cast<Var>(v));
  }
  if (vars.empty()) throw ParseError(0, "support file lists no variables");
  return vars;
}

struct Common {
  std::string input;
  std::uint64_t seed = 0;
  std::uint64_t budget = 0;
  double call_timeout = 0.0;
  double timeout = 0.0;
  unsigned jobs = 1;
  unsigned chains = 1;
  unsigned retry_cap = 3;
  std::string ind;
  bool json = false;

  Budget solver_budget() const { return Budget{budget, call_timeout}; }
};

void add_common(CLI::App* cmd, Common& c, bool with_input = true) {
  if (with_input) cmd->add_option("input", c.input, "Weighted DIMACS file ('-' for stdin)")->required();
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--budget", c.budget, "Propagation budget per solver call (0 = unlimited)");
  cmd->add_option("--call-timeout", c.call_timeout, "Seconds per solver call (0 = unlimited)");
  cmd->add_option("--timeout", c.timeout, "Overall seconds (0 = unlimited)");
  cmd->add_option("--jobs", c.jobs, "Worker threads; never changes results");
  cmd->add_option("--chains", c.chains, "Independent w_max chains over the core iterations");
  cmd->add_option("--retries", c.retry_cap, "Same-depth retries after a solver budget overrun");
  cmd->add_option("--ind", c.ind, "File listing the independent support (overrides c ind)");
  cmd->add_flag("--json", c.json, "Emit one JSON object");
}

WeightedCnf load(const Common& c, std::ostream& err) {
  auto wc = parse_weighted_dimacs(read_file(c.input));
  for (const auto& w : wc.warnings) err << "c warning: " << w << '\n';
  if (!c.ind.empty()) wc.formula = wc.formula.with_support(parse_support_file(read_file(c.ind)));
  return wc;
}

std::string status_text(bool ok, bool timed_out) { return timed_out ? "timeout" : ok ? "ok" : "failed"; }

int status_code(bool ok, bool timed_out) { return timed_out ? kExitTimeout : ok ? kExitOk : kExitFailure; }

void emit(std::ostream& out, const Json& report, bool json) {
  if (json)
    out << report.dump() << '\n';
  else
    print_human(out, report);
}

void report_time(std::ostream& err, Clock::time_point start) {
  err << "c time " << num(std::chrono::duration<double>(Clock::now() - start).count()) << " s\n";
}

// ---- count ----

struct CountArgs {
  Common c;
  double epsilon = 0.8, delta = 0.2, r = 3.0;
};

int cmd_count(const CountArgs& a, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  const auto wc = load(a.c, err);
  CountParams p;
  p.epsilon = a.epsilon;
  p.delta = a.delta;
  p.tilt = a.r;
  p.seed = a.c.seed;
  p.solver_budget = a.c.solver_budget();
  p.timeout_seconds = a.c.timeout;
  p.retry_cap = a.c.retry_cap;
  p.chains = a.c.chains;
  p.jobs = a.c.jobs;
  const auto res = weightmc(wc.formula, wc.weights, p);

  Json j;
  j["command"] = "count";
  j["status"] = status_text(res.ok, res.timed_out);
  j["estimate"] = jnum(res.value());
  j["log2_estimate"] = jnum(res.log2_value());
  j["wmax"] = jnum(res.wmax());
  j["log2_wmax"] = jnum(log2_of_ln(res.log_wmax));
  j["epsilon"] = a.epsilon;
  j["delta"] = a.delta;
  j["tilt_bound"] = a.r;
  j["seed"] = a.c.seed;
  j["pivot"] = res.pivot;
  j["iterations"] = res.iterations;
  j["successes"] = res.successes;
  j["solver_calls"] = res.solver_calls;
  j["support_size"] = wc.formula.independent_support().size();
  emit(out, j, a.c.json);
  report_time(err, start);
  return status_code(res.ok, res.timed_out);
}

// ---- pcount ----

struct PcountArgs {
  Common c;
  double epsilon = 0.8, delta = 0.2, low = 0.0, high = 1.0;
};

int cmd_pcount(const PcountArgs& a, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  const auto wc = load(a.c, err);
  CountParams p;
  p.epsilon = a.epsilon;
  p.delta = a.delta;
  p.seed = a.c.seed;
  p.solver_budget = a.c.solver_budget();
  p.timeout_seconds = a.c.timeout;
  p.retry_cap = a.c.retry_cap;
  p.chains = a.c.chains;
  p.jobs = a.c.jobs;
  const auto res = partitioned_weightmc(wc.formula, wc.weights, a.low, a.high, p);
  const bool timed_out =
      std::any_of(res.reports.begin(), res.reports.end(), [](const auto& w) { return w.result.timed_out; });

  Json j;
  j["command"] = "pcount";
  j["status"] = status_text(res.ok, timed_out);
  j["estimate"] = jnum(res.value());
  j["log2_estimate"] = jnum(res.log2_value());
  j["epsilon"] = a.epsilon;
  j["delta"] = a.delta;
  j["delta_prime"] = res.delta_prime;
  j["low"] = a.low;
  j["high"] = a.high;
  j["seed"] = a.c.seed;
  j["num_windows"] = res.windows;
  j["solver_calls"] = res.solver_calls;
  Json windows = Json::array();
  for (const auto& w : res.reports) {
    Json wj;
    wj["index"] = w.index;
    wj["low"] = w.window.low;
    wj["high"] = w.window.high;
    wj["status"] = status_text(w.result.ok, w.result.timed_out);
    wj["estimate"] = jnum(w.result.value());
    wj["log2_estimate"] = jnum(w.result.log2_value());
    wj["successes"] = w.result.successes;
    wj["solver_calls"] = w.result.solver_calls;
    windows.push_back(std::move(wj));
  }
  j["windows"] = windows;
  emit(out, j, a.c.json);
  if (!a.c.json)
    for (const auto& wj : j["windows"]) {
      out << "window";
      for (const auto& [k, v] : wj.items()) out << ' ' << k << '=' << scalar_text(v);
      out << '\n';
    }
  report_time(err, start);
  return status_code(res.ok, timed_out);
}

// ---- sample ----

struct SampleArgs {
  Common c;
  double epsilon = 5.0, r = 3.0;
  std::uint64_t samples = 1;
};

Json literals_json(const Assignment& a) {
  Json arr = Json::array();
  for (Var v = 1; v <= a.num_vars(); ++v) arr.push_back(a[v] ? static_cast<long long>(v) : -static_cast<long long>(v));
  return arr;
}

int cmd_sample(const SampleArgs& a, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  if (a.samples == 0) throw ParamError("--samples must be at least 1");
  if (a.c.jobs == 0) throw ParamError("jobs must be >= 1");
  const auto wc = load(a.c, err);
  SamplerOptions opts;
  opts.budget = a.c.solver_budget();
  opts.retry_cap = a.c.retry_cap;
  opts.chains = a.c.chains;
  opts.jobs = a.c.jobs;
  opts.timeout_seconds = a.c.timeout;
  const WeightGenerator proto(wc.formula, wc.weights, a.epsilon, a.r, opts);
  const auto deadline = a.c.timeout > 0.0 ? start + std::chrono::duration_cast<Clock::duration>(
                                                        std::chrono::duration<double>(a.c.timeout))
                                          : Clock::time_point::max();

  SamplerState state;
  try {
    state = proto.make_state(mix_seed(a.c.seed));
  } catch (const CountingError&) {
    if (Clock::now() > deadline) {
      err << "c timeout during the approximate count\n";
      return kExitTimeout;
    }
    throw;
  }

  const auto n = a.samples;
  std::vector<std::optional<SampleOutcome>> results(n);
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> timed_out{false};
  const std::uint64_t stream = mix_seed(a.c.seed ^ 0x73616d706c657273ULL);
  auto worker = [&] {
    WeightGenerator gen = proto;
    for (std::uint64_t k = next++; k < n; k = next++) {
      if (Clock::now() > deadline) {
        timed_out = true;
        return;
      }
      Rng rng = Rng::derive(stream, k);
      results[k] = gen.sample(rng, &state);
    }
  };
  const unsigned jobs = wc.weights.thread_safe() ? static_cast<unsigned>(std::min<std::uint64_t>(a.c.jobs, n)) : 1;
  if (jobs <= 1) {
    worker();
  } else {
    std::exception_ptr error;
    std::mutex m;
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < jobs; ++t)
      threads.emplace_back([&] {
        try {
          worker();
        } catch (...) {
          std::lock_guard lock(m);
          if (!error) error = std::current_exception();
        }
      });
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
  }

  std::uint64_t successes = 0, failures = 0, solver_calls = state.counting_solver_calls;
  for (const auto& r : results) {
    if (!r) continue;
    solver_calls += r->solver_calls;
    (r->ok() ? successes : failures)++;
  }

  Json j;
  j["command"] = "sample";
  j["status"] = status_text(successes > 0, timed_out);
  j["epsilon"] = a.epsilon;
  j["tilt_bound"] = a.r;
  j["seed"] = a.c.seed;
  j["kappa"] = state.kp.kappa;
  j["pivot"] = state.kp.pivot;
  j["hi_thresh"] = state.kp.hi_thresh();
  j["lo_thresh"] = state.kp.lo_thresh();
  j["q"] = state.q;
  j["log2_count"] = jnum(log2_of_ln(state.log_count));
  j["log2_wmax"] = jnum(log2_of_ln(state.log_wmax));
  j["requested"] = n;
  j["successes"] = successes;
  j["failures"] = failures;
  j["solver_calls"] = solver_calls;
  if (a.c.json) {
    Json arr = Json::array();
    for (const auto& r : results) arr.push_back(r && r->ok() ? literals_json(*r->witness) : Json(nullptr));
    j["samples"] = std::move(arr);
    out << j.dump() << '\n';
  } else {
    for (const auto& [k, v] : j.items()) out << "c " << k << ' ' << scalar_text(v) << '\n';
    for (std::uint64_t k = 0; k < n; ++k) {
      const auto& r = results[k];
      if (!r)
        out << "c sample " << k << " skipped\n";
      else if (r->ok())
        out << "v " << r->witness->to_dimacs() << " 0\n";
      else
        out << "c sample " << k << " failed\n";
    }
  }
  report_time(err, start);
  return status_code(successes > 0, timed_out);
}

// ---- genbench ----

struct GenbenchArgs {
  std::string input;
  double r = 3.0;
  std::uint64_t seed = 0;
  Var random_vars = 0;
  std::size_t random_clauses = 0;
  unsigned k = 3;
  bool json = false;
};

int cmd_genbench(const GenbenchArgs& a, std::ostream& out, std::ostream& err) {
  Rng rng(a.seed);
  CnfFormula base;
  if (!a.input.empty()) {
    auto wc = parse_weighted_dimacs(read_file(a.input));
    for (const auto& w : wc.warnings) err << "c warning: " << w << '\n';
    if (wc.weights.kind() != WeightModel::Kind::uniform) err << "c warning: input weights replaced\n";
    base = std::move(wc.formula);
  } else if (a.random_vars > 0) {
    base = random_kcnf(a.random_vars, a.random_clauses, a.k, rng);
  } else {
    throw ParamError("genbench needs an input file or --random-vars");
  }
  const auto g = genbench(base, a.r, rng);
  const auto text = serialize_weighted_dimacs(base, g.weights);
  if (a.json) {
    Json j;
    j["command"] = "genbench";
    j["tilt_bound"] = a.r;
    j["seed"] = a.seed;
    j["weighted_vars"] = g.chosen.size();
    j["p"] = g.p;
    j["chosen"] = g.chosen;
    j["dimacs"] = text;
    out << j.dump() << '\n';
  } else {
    out << "c genbench r " << num(a.r) << " m " << g.chosen.size() << " p " << num(g.p) << '\n' << text;
  }
  return kExitOk;
}

// ---- exact ----

struct ExactArgs {
  Common c;
  bool dump = false;
  std::string verify;
  std::uint64_t max_steps = std::uint64_t{1} << 22;
};

int verify_models(const CnfFormula& f, const std::string& text, std::ostream& out, std::ostream& err, bool json) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0, models = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok == "c" || tok == "s") continue;
    if (tok != "v") ls.seekg(0);
    Assignment sigma(f.num_vars());
    std::vector<bool> seen(f.num_vars() + 1, false);
    long long lit = 0;
    while (ls >> lit && lit != 0) {
      const auto l = Literal::from_dimacs(lit);
      if (l.var > f.num_vars() || seen[l.var]) throw ParseError(lineno, "bad or repeated literal " + std::to_string(lit));
      seen[l.var] = true;
      sigma.set(l.var, !l.negated);
    }
    if (!ls.eof() && ls.fail()) throw ParseError(lineno, "expected integers");
    for (Var v = 1; v <= f.num_vars(); ++v)
      if (!seen[v]) throw ParseError(lineno, "model does not assign variable " + std::to_string(v));
    ++models;
    const auto bad = first_violated_clause(f, sigma);
    if (bad >= 0) {
      std::string clause;
      for (const auto& l : f.clauses()[static_cast<std::size_t>(bad)].literals)
        clause += std::to_string(l.to_dimacs()) + ' ';
      err << "c model on line " << lineno << " violates clause " << bad + 1 << ": " << clause << "0\n";
      if (json) out << Json{{"command", "exact"}, {"status", "failed"}, {"violated_line", lineno},
                            {"violated_clause", bad + 1}}.dump() << '\n';
      return kExitFailure;
    }
  }
  if (json)
    out << Json{{"command", "exact"}, {"status", "ok"}, {"verified", models}}.dump() << '\n';
  else
    out << "verified " << models << '\n';
  return kExitOk;
}

int cmd_exact(const ExactArgs& a, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  const auto wc = load(a.c, err);
  if (!a.verify.empty()) return verify_models(wc.formula, read_file(a.verify), out, err, a.c.json);
  OracleOptions opts;
  opts.max_steps = a.max_steps;
  const auto ex = exact_count(wc.formula, wc.weights, opts);
  Json j;
  j["command"] = "exact";
  j["status"] = "ok";
  j["count"] = jnum(ex.count());
  j["log2_count"] = jnum(ex.log2_count());
  j["solutions"] = ex.num_solutions;
  j["wmin"] = jnum(ex.wmin());
  j["wmax"] = jnum(ex.wmax());
  j["tilt"] = ex.tilt();
  if (a.dump) {
    if (!ex.listed) throw OracleLimitError("too many solutions to dump");
    Json arr = Json::array();
    for (const auto& s : ex.solutions) arr.push_back(Json{{"literals", literals_json(s.assignment)},
                                                          {"weight", std::exp(s.log_weight)}});
    j["models"] = std::move(arr);
  }
  emit(out, j, a.c.json);
  if (a.dump && !a.c.json)
    for (const auto& s : ex.solutions) out << "v " << s.assignment.to_dimacs() << " 0\n";
  report_time(err, start);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Approximate weighted model counting and weighted sampling"};
  app.name("wmc");
  app.require_subcommand(1);

  CountArgs count;
  auto* c_count = app.add_subcommand("count", "Approximate weighted model count");
  add_common(c_count, count.c);
  c_count->add_option("--epsilon", count.epsilon, "Tolerance, in (0,1)");
  c_count->add_option("--delta", count.delta, "Confidence, in (0,1)");
  c_count->add_option("-r,--tilt", count.r, "Upper bound on w_max / w_min");

  SampleArgs sample;
  auto* c_sample = app.add_subcommand("sample", "Approximately weighted-uniform witnesses");
  add_common(c_sample, sample.c);
  c_sample->add_option("--epsilon", sample.epsilon, "Tolerance, above 1.87");
  c_sample->add_option("-r,--tilt", sample.r, "Upper bound on w_max / w_min");
  c_sample->add_option("--samples", sample.samples, "Number of draws");

  PcountArgs pcount;
  auto* c_pcount = app.add_subcommand("pcount", "Weighted count over a dyadic partition of (L, H]");
  add_common(c_pcount, pcount.c);
  c_pcount->add_option("--epsilon", pcount.epsilon, "Tolerance, in (0,1)");
  c_pcount->add_option("--delta", pcount.delta, "Confidence, in (0,1)");
  c_pcount->add_option("-L,--low", pcount.low, "Lower bound on solution weights")->required();
  c_pcount->add_option("-H,--high", pcount.high, "Upper bound on solution weights")->required();

  GenbenchArgs gen;
  auto* c_gen = app.add_subcommand("genbench", "Benchmark weights with tilt at most r");
  c_gen->add_option("input", gen.input, "Base CNF file");
  c_gen->add_option("-r,--tilt", gen.r, "Tilt bound r >= 1");
  c_gen->add_option("--seed", gen.seed, "Random seed");
  c_gen->add_option("--random-vars", gen.random_vars, "Generate a random k-CNF base with this many variables");
  c_gen->add_option("--random-clauses", gen.random_clauses, "Clauses of the random base");
  c_gen->add_option("-k", gen.k, "Clause width of the random base");
  c_gen->add_flag("--json", gen.json, "Emit one JSON object");

  ExactArgs exact;
  auto* c_exact = app.add_subcommand("exact", "Exact weighted count by enumeration");
  add_common(c_exact, exact.c);
  c_exact->add_flag("--dump", exact.dump, "List every solution");
  c_exact->add_option("--verify", exact.verify, "Check each model line of a file against the formula");
  c_exact->add_option("--max-steps", exact.max_steps, "Enumeration step cap");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitParams;
  }

  try {
    if (c_count->parsed()) return cmd_count(count, out, err);
    if (c_sample->parsed()) return cmd_sample(sample, out, err);
    if (c_pcount->parsed()) return cmd_pcount(pcount, out, err);
    if (c_gen->parsed()) return cmd_genbench(gen, out, err);
    if (c_exact->parsed()) return cmd_exact(exact, out, err);
  } catch (const ParseError& e) {
    err << "error: parse: " << e.what() << '\n';
    return kExitParse;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const ParamError& e) {
    err << "error: parameter: " << e.what() << '\n';
    return kExitParams;
  } catch (const WeightError& e) {
    err << "error: weight: " << e.what() << '\n';
    return kExitParams;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitParams;
}

}  // namespace wmc
