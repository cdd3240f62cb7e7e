#pragma once

// Depth-first derivation over states. A state with an empty work list is a
// leaf: its aggregate sets are sealed, the store is labeled (or optimised) and
// each answer is checked against the oracle before it is reported.

#include <chrono>

#include "idlogic/engine/denial.hpp"

namespace idlogic {

struct SolveOptions {
  std::optional<fd::Clock::time_point> deadline;
  std::size_t max_answers = 1;
  bool validate = true;
  std::function<void(fd::Value)> on_incumbent;
  /// rule, selected literal, work-list size, abduced-set size
  std::function<void(const std::string&, const std::string&, std::size_t, std::size_t)> trace_derivation;
  std::function<void(const fd::TraceEvent&)> trace_propagation;
};

enum class Outcome { Answers, Failure, Floundering, Unsupported, Timeout };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Answers: return "answers";
    case Outcome::Failure: return "failure";
    case Outcome::Floundering: return "floundering";
    case Outcome::Unsupported: return "unsupported";
    case Outcome::Timeout: return "timeout";
  }
  return "?";
}

struct Answer {
  std::vector<Formula> delta;
  std::vector<std::pair<std::string, Term>> theta;
  std::map<std::string, fd::Value> bindings;
  std::optional<fd::Value> objective;
  std::string status = "found";
};

struct SolveResult {
  Outcome outcome = Outcome::Failure;
  std::vector<Answer> answers;
  std::vector<Diagnostic> diagnostics;
  double reduction_seconds = 0;
  double search_seconds = 0;
  std::uint64_t steps = 0;
  std::uint64_t nodes = 0;
  std::uint64_t leaves = 0;
  std::vector<fd::Value> incumbents;
  std::string aggregates;  // unfolded sets at the last leaf

  bool has_diagnostic(const std::string& kind) const {
    for (const auto& d : diagnostics)
      if (d.kind == kind) return true;
    return false;
  }
};

inline std::string to_string(const Answer& a) {
  std::string s = "{";
  for (std::size_t i = 0; i < a.delta.size(); ++i) s += (i ? ", " : "") + to_string(a.delta[i]);
  s += "}";
  for (const auto& [v, t] : a.theta) s += " " + v + "=" + to_string(t);
  return s;
}

namespace engine {

/// Value of t under the labeling; unconstrained variables stay variables.
inline Term ground_with(const State& s, const fd::Solution& sol, const Term& t) {
  if (t.is_var()) {
    Term d = deref(s, t);
    if (!d.is_var()) return ground_with(s, sol, d);
    auto it = s.fd.find(d.name());
    if (it != s.fd.end()) return Term::integer(sol[it->second]);
    return d;
  }
  if (!t.is_arith()) return t;
  std::vector<Term> args;
  for (const auto& a : t.args()) args.push_back(ground_with(s, sol, a));
  Term r = Term::arith(t.op(), std::move(args));
  if (is_ground(r)) return detail::eval_term(r, {});
  return r;
}

class Solver {
 public:
  Solver(Theory t, SolveOptions opt) : opt_(std::move(opt)) {
    ctx_.theory = std::move(t);
    ctx_.trace = opt_.trace_derivation;
  }

  SolveResult run(const Query& q) {
    auto t0 = fd::Clock::now();
    try {
      ctx_.comp = Completion(ctx_.theory);
      for (const auto& [p, r] : ctx_.theory.domains)
        if (ctx_.comp.is_defined(p))
          throw UnsupportedError("Unsupported", "predicate " + p.str() + " is declared open and also defined");
      derive(q);
    } catch (const FlounderingError& e) {
      result_.outcome = Outcome::Floundering;
      ctx_.diagnose("Floundering", e.what());
    } catch (const RecursionUnsupported& e) {
      result_.outcome = Outcome::Unsupported;
      ctx_.diagnose("RecursionUnsupported", e.what());
    } catch (const UnsupportedError& e) {
      result_.outcome = Outcome::Unsupported;
      ctx_.diagnose(e.kind(), e.what());
    } catch (const NonFunctional& e) {
      result_.outcome = Outcome::Unsupported;
      ctx_.diagnose("NonFunctional", e.what());
    } catch (const NotArithmetic& e) {
      result_.outcome = Outcome::Unsupported;
      ctx_.diagnose("TypeError", e.what());
    }
    result_.diagnostics = ctx_.diagnostics;
    const double total = std::chrono::duration<double>(fd::Clock::now() - t0).count();
    result_.reduction_seconds = std::max(0.0, total - result_.search_seconds);
    return result_;
  }

 private:
  bool expired() const { return opt_.deadline && fd::Clock::now() >= *opt_.deadline; }

  void derive(const Query& q) {
    State init;
    if (opt_.trace_propagation) init.cs.set_trace(opt_.trace_propagation);
    auto names = free_vars(q.goal);
    if (q.objective) names.insert(q.objective->var);
    Binding ren;
    for (const auto& v : names) {
      std::string n = init.fresh();
      ren[v] = Term::var(n);
      init.query_vars.push_back({v, n});
    }
    for (const auto& ax : ctx_.theory.axioms) init.theta.push_back(ax);
    init.theta.push_back(substitute(q.goal, ren));
    query_ = q;
    if (q.objective) objective_ = ren.at(q.objective->var).name();

    std::vector<State> stack;
    stack.push_back(std::move(init));
    while (!stack.empty()) {
      State s = std::move(stack.back());
      stack.pop_back();
      for (;;) {
        if (expired()) {
          timed_out_ = true;
          break;
        }
        if (s.theta.empty()) {
          leaf(std::move(s));
          break;
        }
        Alts alts;
        ++result_.steps;
        ctx_.current = &s;
        if (ctx_.trace) std::visit([&](const auto& g) { ctx_.note("select", to_string(g)); }, s.theta.front());
        const bool ok = steps::step(ctx_, s, alts) && s.cs.propagate();
        for (auto it = alts.rbegin(); it != alts.rend(); ++it) stack.push_back(std::move(*it));
        if (!ok) break;
      }
      if (timed_out_ || done()) break;
    }
    if (best_) {
      best_->status = timed_out_ ? "best-so-far" : "optimal";
      result_.answers.push_back(*best_);
    }
    if (!result_.answers.empty()) result_.outcome = Outcome::Answers;
    else result_.outcome = timed_out_ ? Outcome::Timeout : Outcome::Failure;
  }

  bool done() const { return !objective_ && result_.answers.size() >= opt_.max_answers; }

  void leaf(State s) {
    ++result_.leaves;
    ctx_.current = &s;
    ctx_.note("leaf", std::to_string(s.delta.size()) + " abduced atoms");
    for (std::size_t i = 0; i < s.sets.size(); ++i) reducer::reopen(ctx_, s, i);
    for (std::size_t i = 0; i < s.sets.size(); ++i) {
      std::optional<State> before;
      if (!s.sets[i].watchers.empty()) before = s;
      reducer::seal(s, i);
      if (!s.cs.propagate()) {
        if (before) {
          // Only report when more members could have satisfied the aggregate.
          reducer::seal(*before, i, true);
          if (before->cs.propagate()) unsupported_aggregate(before->sets[i]);
        }
        return;
      }
    }
    result_.aggregates = reducer::dump(s);
    std::vector<fd::Var> prio;
    auto add_var = [&](const Term& t) {
      Term d = deref(s, t);
      if (d.is_var() && s.fd.count(d.name())) prio.push_back(s.fd.at(d.name()));
    };
    for (const auto& a : s.delta)
      for (const auto& t : a.args()) add_var(t);
    for (const auto& [src, eng] : s.query_vars) add_var(Term::var(eng));

    auto t0 = fd::Clock::now();
    fd::SearchOptions so;
    so.deadline = opt_.deadline;
    if (objective_) {
      const fd::Var obj = var_of(s, Term::var(*objective_));
      const bool maximize = query_.objective->sense == Sense::Maximize;
      if (best_ && !(maximize ? s.cs.set_min(obj, *best_->objective + 1) : s.cs.set_max(obj, *best_->objective - 1))) {
        result_.search_seconds += std::chrono::duration<double>(fd::Clock::now() - t0).count();
        return;
      }
      so.on_incumbent = [&](fd::Value v, const fd::Solution& sol) {
        Answer a = extract(s, sol);
        a.objective = v;
        best_ = a;
        result_.incumbents.push_back(v);
        if (opt_.on_incumbent) opt_.on_incumbent(v);
      };
      auto r = fd::branch_and_bound(s.cs, obj, maximize ? fd::Direction::Maximize : fd::Direction::Minimize, prio, so);
      result_.nodes += r.nodes;
      if (r.status == fd::SearchStatus::BestSoFar || r.status == fd::SearchStatus::TimedOut) timed_out_ = true;
    } else {
      fd::Solution last;
      auto n = fd::for_each_solution(
          s.cs, prio,
          [&](const fd::Solution& sol) {
            Answer a = extract(s, sol);
            const std::string key = to_string(a);
            if (seen_.insert(key).second) result_.answers.push_back(std::move(a));
            return !done() && !expired();
          },
          so);
      result_.nodes += n;
      if (expired()) timed_out_ = true;
    }
    result_.search_seconds += std::chrono::duration<double>(fd::Clock::now() - t0).count();
  }

  void unsupported_aggregate(const UnfoldedSet& set) {
    std::set<std::string> preds;
    for (const auto& w : set.watchers) preds.insert(key_of(w.pattern).str());
    std::string ps;
    for (const auto& p : preds) ps += (ps.empty() ? "" : ", ") + p;
    ctx_.diagnose("UnsupportedAggregateAbduction",
                  set.origin + " can only hold by abducing atoms of " + ps + " for its set; aggregates do not abduce");
  }

  Answer extract(const State& s, const fd::Solution& sol) {
    Answer a;
    std::set<std::string> keys;
    for (const auto& d : s.delta) {
      std::vector<Term> args;
      for (const auto& t : d.args()) {
        Term v = deref(s, t);
        if (v.is_var() && s.fd.count(v.name())) a.bindings[v.name()] = sol[s.fd.at(v.name())];
        args.push_back(ground_with(s, sol, t));
      }
      Formula g = Formula::atom(d.pred(), args);
      if (keys.insert(to_string(g)).second) a.delta.push_back(g);
    }
    std::sort(a.delta.begin(), a.delta.end(), [](const Formula& x, const Formula& y) {
      if (x.pred() != y.pred()) return x.pred() < y.pred();
      return x.args() < y.args();
    });
    for (const auto& [src, eng] : s.query_vars) a.theta.push_back({src, ground_with(s, sol, Term::var(eng))});
    if (opt_.validate) validate(a);
    return a;
  }

  void validate(const Answer& a) {
    try {
      Interpretation i;
      for (const auto& d : a.delta) i.insert(d);
      if (!is_model(ctx_.theory, ctx_.comp, i))
        throw InternalSoundnessError("answer " + to_string(a) + " is not a model of the theory");
      Binding b;
      std::vector<std::string> open;
      for (const auto& [v, t] : a.theta) {
        if (is_ground(t)) b[v] = t;
        else open.push_back(v);
      }
      Formula g = substitute(query_.goal, b);
      if (!open.empty()) g = Formula::exists(open, g);
      if (!Evaluator(ctx_.comp, i).holds(g))
        throw InternalSoundnessError("answer " + to_string(a) + " does not satisfy the query");
    } catch (const OracleError& e) {
      ctx_.diagnose("ValidationSkipped", e.what());
    }
  }

  Context ctx_;
  SolveOptions opt_;
  SolveResult result_;
  Query query_;
  std::optional<std::string> objective_;
  std::optional<Answer> best_;
  std::set<std::string> seen_;
  bool timed_out_ = false;
};

}  // namespace engine

/// Solves `query` against `theory`.
inline SolveResult solve(const Theory& theory, const Query& query, const SolveOptions& opt = {}) {
  return engine::Solver(theory, opt).run(query);
}

}  // namespace idlogic
