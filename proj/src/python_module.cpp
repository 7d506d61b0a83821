#include <memory>
#include <optional>
#include <sstream>

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wmc/benchgen.hpp"
#include "wmc/cli.hpp"
#include "wmc/counting.hpp"
#include "wmc/error.hpp"
#include "wmc/oracle.hpp"
#include "wmc/sampling.hpp"

namespace py = pybind11;
using namespace wmc;

namespace {

using Model = std::vector<long long>;

Model to_model(const Assignment& a) {
  Model m;
  m.reserve(a.num_vars());
  for (Var v = 1; v <= a.num_vars(); ++v) m.push_back(a[v] ? static_cast<long long>(v) : -static_cast<long long>(v));
  return m;
}

Assignment from_model(Var n, const Model& lits) {
  Assignment a(n);
  std::vector<bool> seen(n + 1, false);
  for (long long l : lits) {
    const auto v = static_cast<Var>(l < 0 ? -l : l);
    if (l == 0 || v > n) throw ParamError("literal " + std::to_string(l) + " out of range");
    a.set(v, l > 0);
    seen[v] = true;
  }
  for (Var v = 1; v <= n; ++v)
    if (!seen[v]) throw ParamError("model does not assign variable " + std::to_string(v));
  return a;
}

CnfFormula make_formula(Var n, const std::vector<Model>& clauses, std::optional<std::vector<Var>> support) {
  std::vector<Clause> cs;
  cs.reserve(clauses.size());
  for (const auto& c : clauses) {
    Clause cl;
    for (long long l : c) {
      if (l == 0) throw ParamError("literal 0 inside a clause");
      cl.literals.push_back(Literal::from_dimacs(l));
    }
    cs.push_back(std::move(cl));
  }
  return CnfFormula(n, std::move(cs), support.value_or(std::vector<Var>{}));
}

std::vector<Model> clauses_of(const CnfFormula& f) {
  std::vector<Model> out;
  for (const auto& c : f.clauses()) {
    Model m;
    for (const auto& l : c.literals) m.push_back(l.to_dimacs());
    out.push_back(std::move(m));
  }
  return out;
}

// Python callable as a black-box weight. The GIL is taken for every call and for the final release.
WeightModel callback_weights(py::function fn) {
  auto holder = std::shared_ptr<py::function>(new py::function(std::move(fn)), [](py::function* p) {
    py::gil_scoped_acquire gil;
    delete p;
  });
  return WeightModel::black_box([holder](const Assignment& a) -> double {
    py::gil_scoped_acquire gil;
    try {
      return (*holder)(to_model(a)).cast<double>();
    } catch (py::error_already_set& e) {
      throw WeightError(std::string("weight callback raised: ") + e.what());
    }
  });
}

py::object finite_or_none(double x) { return std::isfinite(x) ? py::object(py::float_(x)) : py::object(py::none()); }

py::dict count_dict(const CountResult& r) {
  py::dict d;
  d["ok"] = r.ok;
  d["timed_out"] = r.timed_out;
  d["estimate"] = finite_or_none(r.value());
  d["log2_estimate"] = finite_or_none(r.log2_value());
  d["wmax"] = r.wmax();
  d["pivot"] = r.pivot;
  d["iterations"] = r.iterations;
  d["successes"] = r.successes;
  d["solver_calls"] = r.solver_calls;
  return d;
}

CountParams params(double epsilon, double delta, double tilt, std::uint64_t seed, unsigned chains, unsigned jobs,
                   double timeout, unsigned retries, std::uint64_t budget) {
  CountParams p;
  p.epsilon = epsilon;
  p.delta = delta;
  p.tilt = tilt;
  p.seed = seed;
  p.chains = chains;
  p.jobs = jobs;
  p.timeout_seconds = timeout;
  p.retry_cap = retries;
  if (budget) p.solver_budget.max_propagations = budget;
  return p;
}

// Sampler with an optional frozen count.
class PySampler {
 public:
  PySampler(const CnfFormula& f, const WeightModel& w, double epsilon, double tilt)
      : formula_(f), gen_(f, w, epsilon, tilt) {}

  void prepare(std::uint64_t seed) {
    py::gil_scoped_release release;
    state_ = gen_.make_state(seed);
  }

  std::optional<Model> sample(std::uint64_t seed) {
    SampleOutcome out;
    {
      py::gil_scoped_release release;
      Rng rng(seed);
      out = gen_.sample(rng, state_ ? &*state_ : nullptr);
    }
    if (!out.ok()) return std::nullopt;
    return to_model(*out.witness);
  }

  std::vector<std::optional<Model>> sample_many(std::uint64_t n, std::uint64_t seed) {
    std::vector<std::optional<SampleOutcome>> outs(n);
    {
      py::gil_scoped_release release;
      for (std::uint64_t k = 0; k < n; ++k) {
        Rng rng = Rng::derive(seed, k);
        outs[k] = gen_.sample(rng, state_ ? &*state_ : nullptr);
      }
    }
    std::vector<std::optional<Model>> models;
    for (const auto& o : outs) models.push_back(o->ok() ? std::optional<Model>(to_model(*o->witness)) : std::nullopt);
    return models;
  }

  const WeightGenerator& gen() const { return gen_; }
  bool prepared() const { return state_.has_value(); }
  std::optional<int> q() const { return state_ ? std::optional<int>(state_->q) : std::nullopt; }

 private:
  CnfFormula formula_;
  WeightGenerator gen_;
  std::optional<SamplerState> state_;
};

}  // namespace

PYBIND11_MODULE(_wmc, m) {
  m.doc() = "Approximate weighted model counting and weighted sampling with XOR hashing.";

  auto value_error = py::register_exception<ParamError>(m, "ParamError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<WeightError>(m, "WeightError", PyExc_ValueError);
  py::register_exception<CountingError>(m, "CountingError", PyExc_RuntimeError);
  py::register_exception<OracleLimitError>(m, "OracleLimitError", PyExc_RuntimeError);
  (void)value_error;

  py::class_<CnfFormula>(m, "Formula")
      .def(py::init(&make_formula), py::arg("num_vars"), py::arg("clauses"), py::arg("support") = py::none(),
           "CNF over variables 1..num_vars; clauses are lists of nonzero DIMACS literals.")
      .def_property_readonly("num_vars", &CnfFormula::num_vars)
      .def_property_readonly("clauses", &clauses_of)
      .def_property_readonly("support", &CnfFormula::independent_support)
      .def("with_support", &CnfFormula::with_support, py::arg("support"))
      .def(
          "evaluate", [](const CnfFormula& f, const Model& model) { return evaluate(f, from_model(f.num_vars(), model)); },
          py::arg("model"))
      .def("__repr__", [](const CnfFormula& f) {
        return "<Formula vars=" + std::to_string(f.num_vars()) + " clauses=" + std::to_string(f.clauses().size()) +
               ">";
      });

  py::class_<WeightModel>(m, "Weights")
      .def_static("uniform", &WeightModel::uniform)
      .def_static(
          "literal",
          [](const std::vector<std::pair<double, double>>& pairs) {
            std::vector<LiteralWeights> lw;
            for (const auto& [p, q] : pairs) lw.push_back({p, q});
            return WeightModel::literal_product(std::move(lw));
          },
          py::arg("pairs"), "Per-variable (positive, negative) literal weights in (0,1].")
      .def_static("callback", &callback_weights, py::arg("fn"),
                  "Black-box weight: fn(model) -> float in (0,1], model given as DIMACS literals.")
      .def_property_readonly("white_box", &WeightModel::white_box)
      .def(
          "weight",
          [](const WeightModel& w, const Model& model) {
            return w.weight(from_model(static_cast<Var>(model.size()), model));
          },
          py::arg("model"));

  m.def(
      "parse",
      [](const std::string& text) {
        auto wc = parse_weighted_dimacs(std::string_view(text));
        return py::make_tuple(wc.formula, wc.weights, wc.warnings);
      },
      py::arg("text"), "Weighted DIMACS text -> (Formula, Weights, warnings).");
  m.def("serialize", &serialize_weighted_dimacs, py::arg("formula"), py::arg("weights"));

  m.def(
      "count",
      [](const CnfFormula& f, const WeightModel& w, double epsilon, double delta, double tilt, std::uint64_t seed,
         unsigned chains, unsigned jobs, double timeout, unsigned retries, std::uint64_t budget) {
        const auto p = params(epsilon, delta, tilt, seed, chains, jobs, timeout, retries, budget);
        CountResult r;
        {
          py::gil_scoped_release release;
          r = weightmc(f, w, p);
        }
        return count_dict(r);
      },
      py::arg("formula"), py::arg("weights"), py::arg("epsilon") = 0.8, py::arg("delta") = 0.2, py::arg("tilt") = 3.0,
      py::arg("seed") = 0, py::arg("chains") = 1, py::arg("jobs") = 1, py::arg("timeout") = 0.0,
      py::arg("retries") = 3, py::arg("budget") = 0);

  m.def(
      "partitioned_count",
      [](const CnfFormula& f, const WeightModel& w, double low, double high, double epsilon, double delta,
         std::uint64_t seed, unsigned chains, unsigned jobs) {
        const auto p = params(epsilon, delta, 2.0, seed, chains, jobs, 0.0, 3, 0);
        PartitionedResult r;
        {
          py::gil_scoped_release release;
          r = partitioned_weightmc(f, w, low, high, p);
        }
        py::dict d;
        d["ok"] = r.ok;
        d["estimate"] = finite_or_none(r.value());
        d["log2_estimate"] = finite_or_none(r.log2_value());
        d["num_windows"] = r.windows;
        d["delta_prime"] = r.delta_prime;
        d["solver_calls"] = r.solver_calls;
        py::list windows;
        for (const auto& rep : r.reports) {
          auto wd = count_dict(rep.result);
          wd["index"] = rep.index;
          wd["low"] = rep.window.low;
          wd["high"] = rep.window.high;
          windows.append(wd);
        }
        d["windows"] = windows;
        return d;
      },
      py::arg("formula"), py::arg("weights"), py::arg("low"), py::arg("high"), py::arg("epsilon") = 0.8,
      py::arg("delta") = 0.2, py::arg("seed") = 0, py::arg("chains") = 1, py::arg("jobs") = 1);

  py::class_<PySampler>(m, "Sampler")
      .def(py::init<const CnfFormula&, const WeightModel&, double, double>(), py::arg("formula"), py::arg("weights"),
           py::arg("epsilon") = 5.0, py::arg("tilt") = 3.0)
      .def("prepare", &PySampler::prepare, py::arg("seed") = 0, "Run and keep the one-time approximate count.")
      .def("sample", &PySampler::sample, py::arg("seed"), "One witness as DIMACS literals, or None.")
      .def("sample_many", &PySampler::sample_many, py::arg("n"), py::arg("seed") = 0)
      .def_property_readonly("prepared", &PySampler::prepared)
      .def_property_readonly("q", &PySampler::q)
      .def_property_readonly("kappa", [](const PySampler& s) { return s.gen().kappa_pivot().kappa; })
      .def_property_readonly("pivot", [](const PySampler& s) { return s.gen().kappa_pivot().pivot; })
      .def_property_readonly("hi_thresh", [](const PySampler& s) { return s.gen().hi_thresh(); })
      .def_property_readonly("lo_thresh", [](const PySampler& s) { return s.gen().lo_thresh(); });

  m.def(
      "exact",
      [](const CnfFormula& f, const WeightModel& w, bool list_solutions, std::uint64_t max_steps) {
        OracleOptions opts;
        opts.max_steps = max_steps;
        ExactResult r;
        {
          py::gil_scoped_release release;
          r = exact_count(f, w, opts);
        }
        py::dict d;
        d["count"] = r.count();
        d["log2_count"] = finite_or_none(r.log2_count());
        d["solutions"] = r.num_solutions;
        d["wmin"] = r.wmin();
        d["wmax"] = r.wmax();
        d["tilt"] = r.tilt();
        if (list_solutions) {
          py::list models;
          for (const auto& s : r.solutions) models.append(py::make_tuple(to_model(s.assignment), std::exp(s.log_weight)));
          d["models"] = models;
        }
        return d;
      },
      py::arg("formula"), py::arg("weights"), py::arg("list_solutions") = false,
      py::arg("max_steps") = std::uint64_t{1} << 22, "Exact weighted count by exhaustive enumeration.");

  m.def(
      "genbench",
      [](const CnfFormula& f, double r, std::uint64_t seed) {
        Rng rng(seed);
        auto g = genbench(f, r, rng);
        return py::make_tuple(g.weights, g.p, g.chosen);
      },
      py::arg("formula"), py::arg("r"), py::arg("seed") = 0, "-> (Weights, p, chosen variables).");

  m.def(
      "random_kcnf",
      [](Var n, std::size_t clauses, unsigned k, std::uint64_t seed) {
        Rng rng(seed);
        return random_kcnf(n, clauses, k, rng);
      },
      py::arg("num_vars"), py::arg("num_clauses"), py::arg("k") = 3, py::arg("seed") = 0);

  m.def(
      "kappa_pivot",
      [](double epsilon) {
        const auto kp = compute_kappa_pivot(epsilon);
        py::dict d;
        d["kappa"] = kp.kappa;
        d["pivot"] = kp.pivot;
        d["hi_thresh"] = kp.hi_thresh();
        d["lo_thresh"] = kp.lo_thresh();
        return d;
      },
      py::arg("epsilon"));
  m.def("counting_pivot", &counting_pivot, py::arg("epsilon"));
  m.def("counting_iterations", &counting_iterations, py::arg("delta"));
  m.def("partition_count", &partition_count, py::arg("low"), py::arg("high"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line tool in-process -> (exit code, stdout, stderr).");
}
