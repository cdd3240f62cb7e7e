#pragma once

// Brute-force reference semantics. Open predicates are given as finite
// relations; defined predicates are evaluated top-down through their
// completion; aggregates are computed by materializing the set.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "idlogic/ast.hpp"
#include "idlogic/completion.hpp"

namespace idlogic {

class OracleError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class DomainTooLarge : public OracleError {
  using OracleError::OracleError;
};
class NonFunctional : public OracleError {
  using OracleError::OracleError;
};
/// A formula could not be evaluated: unbound variable, type mismatch, overflow.
class EvaluationError : public OracleError {
  using OracleError::OracleError;
};

using Tuple = std::vector<Term>;

struct Interpretation {
  std::map<PredKey, std::set<Tuple>> relations;

  bool contains(const PredKey& p, const Tuple& args) const {
    auto it = relations.find(p);
    return it != relations.end() && it->second.count(args);
  }
  void insert(const Formula& ground_atom) { relations[key_of(ground_atom)].insert(ground_atom.args()); }
  const std::set<Tuple>& of(const PredKey& p) const {
    static const std::set<Tuple> none;
    auto it = relations.find(p);
    return it == relations.end() ? none : it->second;
  }
  std::vector<Formula> atoms() const {
    std::vector<Formula> out;
    for (const auto& [p, rel] : relations)
      for (const auto& t : rel) out.push_back(Formula::atom(p.name, t));
    return out;
  }
  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [p, rel] : relations) n += rel.size();
    return n;
  }
  bool operator==(const Interpretation& o) const { return atoms_nonempty() == o.atoms_nonempty(); }

  std::string str() const {
    std::string s = "{";
    bool first = true;
    for (const auto& a : atoms()) {
      if (!first) s += ", ";
      s += to_string(a);
      first = false;
    }
    return s + "}";
  }

 private:
  std::map<PredKey, std::set<Tuple>> atoms_nonempty() const {
    std::map<PredKey, std::set<Tuple>> m;
    for (const auto& [p, rel] : relations)
      if (!rel.empty()) m[p] = rel;
    return m;
  }
};

namespace detail {

inline bool bound_in(const Term& t, const Binding& env) {
  if (t.is_var()) return env.count(t.name()) != 0;
  for (const auto& a : t.args())
    if (!bound_in(a, env)) return false;
  return true;
}

inline Term eval_term(const Term& t, const Binding& env) {
  switch (t.kind()) {
    case Term::Kind::Var: {
      auto it = env.find(t.name());
      if (it == env.end()) throw EvaluationError("unbound variable " + t.name());
      return it->second;
    }
    case Term::Kind::Sym:
    case Term::Kind::Int: return t;
    case Term::Kind::Arith: {
      std::vector<__int128> v;
      for (const auto& a : t.args()) {
        Term x = eval_term(a, env);
        if (!x.is_int()) throw EvaluationError("arithmetic on non-integer " + to_string(x));
        v.push_back(x.value());
      }
      __int128 r = 0;
      switch (t.op()) {
        case ArithOp::Add: r = v[0] + v[1]; break;
        case ArithOp::Sub: r = v[0] - v[1]; break;
        case ArithOp::Mul: r = v[0] * v[1]; break;
        case ArithOp::Abs: r = v[0] < 0 ? -v[0] : v[0]; break;
      }
      if (r > INT64_MAX || r < INT64_MIN) throw EvaluationError("integer overflow in " + to_string(t));
      return Term::integer(static_cast<std::int64_t>(r));
    }
  }
  return t;
}

inline std::int64_t as_int(const Term& t, const char* what) {
  if (!t.is_int()) throw EvaluationError(std::string(what) + " expects an integer, got " + to_string(t));
  return t.value();
}

inline bool compare_values(CmpOp op, const Term& a, const Term& b) {
  switch (op) {
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return a != b;
    default: break;
  }
  const auto x = as_int(a, "comparison"), y = as_int(b, "comparison");
  switch (op) {
    case CmpOp::Lt: return x < y;
    case CmpOp::Le: return x <= y;
    case CmpOp::Gt: return x > y;
    case CmpOp::Ge: return x >= y;
    default: return false;
  }
}

}  // namespace detail

/// not F with the negation pushed one connective down where that exposes a
/// generator (used for forall, which is evaluated as "no counterexample").
inline Formula push_negation(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::True: return Formula::falsity();
    case K::False: return Formula::truth();
    case K::Not: return f.kid();
    case K::Implies: return Formula::conj(f.kid(0), push_negation(f.kid(1)));
    case K::Or: {
      std::vector<Formula> ks;
      for (const auto& k : f.kids()) ks.push_back(push_negation(k));
      return Formula::conj(std::move(ks));
    }
    case K::And: {
      std::vector<Formula> ks;
      for (const auto& k : f.kids()) ks.push_back(push_negation(k));
      return Formula::disj(std::move(ks));
    }
    case K::Forall: return Formula::exists(f.vars(), push_negation(f.kid()));
    case K::Exists: return Formula::forall(f.vars(), push_negation(f.kid()));
    default: return Formula::negation(f);
  }
}

/// Truth of ground atoms of defined predicates that do not depend on any open
/// predicate. Such atoms have the same value in every interpretation, so one
/// table can be shared by the evaluators of many candidates.
class FixedAtoms {
 public:
  explicit FixedAtoms(const Completion& c) {
    std::set<PredKey> open;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [p, cd] : c.all()) {
        if (open.count(p)) continue;
        bool dyn = false;
        for_each_atom(cd.body, [&](const Formula& a) {
          const PredKey k = key_of(a);
          dyn = dyn || !c.is_defined(k) || open.count(k);
        });
        if (dyn) changed = open.insert(p).second || changed;
      }
    }
    for (const auto& [p, cd] : c.all())
      if (!open.count(p)) fixed_.insert(p);
  }
  bool covers(const PredKey& p) const { return fixed_.count(p) != 0; }
  std::map<std::pair<PredKey, Tuple>, bool> memo;

 private:
  std::set<PredKey> fixed_;
};

class Evaluator {
 public:
  /// Return false to stop the enumeration.
  using Visit = std::function<bool(const Binding&)>;

  Evaluator(const Completion& c, const Interpretation& i, FixedAtoms* fixed = nullptr)
      : comp_(c), interp_(i), fixed_(fixed) {}

  /// Enumerates extensions of env under which f is true. Returns false if
  /// the visitor stopped early.
  bool solutions(const Formula& f, const Binding& env, const Visit& visit) {
    using K = Formula::Kind;
    switch (f.kind()) {
      case K::True: return visit(env);
      case K::False: return true;
      case K::Atom: return atom(f, env, visit);
      case K::Compare: return compare(f, env, visit);
      case K::Not:
        require_bound(f, env);
        return holds(f.kid(), env) ? true : visit(env);
      case K::And: {
        std::vector<Formula> rest(f.kids().begin(), f.kids().end());
        return conj(rest, env, visit);
      }
      case K::Or: {
        const auto& fv = vars_of(f);
        for (const auto& k : f.kids()) {
          const bool go = solutions(k, env, [&](const Binding& b) {
            for (const auto& v : fv)
              if (!b.count(v)) throw EvaluationError("variable " + v + " not bound by every disjunct of " + to_string(f));
            return visit(b);
          });
          if (!go) return false;
        }
        return true;
      }
      case K::Exists: {
        Binding inner = env;
        for (const auto& v : f.vars()) inner.erase(v);
        return solutions(f.kid(), inner, [&](const Binding& b) {
          Binding out = b;
          for (const auto& v : f.vars()) {
            out.erase(v);
            auto it = env.find(v);
            if (it != env.end()) out[v] = it->second;
          }
          return visit(out);
        });
      }
      case K::Forall: {
        require_bound(f, env);
        Binding inner = env;
        for (const auto& v : f.vars()) inner.erase(v);
        bool counterexample = false;
        solutions(push_negation(f.kid()), inner, [&](const Binding&) {
          counterexample = true;
          return false;
        });
        return counterexample ? true : visit(env);
      }
      case K::Implies:
        require_bound(f, env);
        return (!holds(f.kid(0), env) || holds(f.kid(1), env)) ? visit(env) : true;
      case K::Aggregate: return aggregate(f, env, visit);
    }
    return true;
  }

  bool holds(const Formula& f, const Binding& env = {}) {
    bool found = false;
    solutions(f, env, [&](const Binding&) {
      found = true;
      return false;
    });
    return found;
  }

  /// Members of the set, as distinct tuples.
  std::set<Tuple> materialize(const SetExpr& s, const Binding& env) {
    std::set<Tuple> out;
    Binding inner = env;
    for (const auto& p : s.params) inner.erase(p);
    solutions(s.body, inner, [&](const Binding& b) {
      Tuple t;
      for (const auto& p : s.params) {
        auto it = b.find(p);
        if (it == b.end()) throw EvaluationError("set parameter " + p + " is not bound by the set body");
        t.push_back(it->second);
      }
      out.insert(std::move(t));
      return true;
    });
    return out;
  }

  /// The single value of a lambda on one member.
  std::int64_t function_value(const FuncExpr& fe, const Tuple& member, const Binding& env) {
    Binding b = env;
    for (std::size_t i = 0; i < fe.params.size(); ++i) b[fe.params[i]] = member[i];
    if (fe.term) return detail::as_int(detail::eval_term(*fe.term, b), "lambda value");
    b.erase(*fe.result);
    std::set<std::int64_t> vals;
    solutions(fe.body, b, [&](const Binding& r) {
      auto it = r.find(*fe.result);
      if (it == r.end()) throw EvaluationError("lambda result " + *fe.result + " is not bound by its body");
      vals.insert(detail::as_int(it->second, "lambda value"));
      return vals.size() < 2;
    });
    if (vals.size() != 1) {
      std::string m;
      for (const auto& t : member) m += (m.empty() ? "" : ",") + to_string(t);
      throw NonFunctional("lambda has " + std::string(vals.empty() ? "no value" : "several values") + " for member (" + m + ")");
    }
    return *vals.begin();
  }

  /// Value of the aggregate; nullopt for minimum/maximum of an empty set.
  std::optional<std::int64_t> aggregate_value(const Aggregate& a, const Binding& env) {
    const auto members = materialize(a.set, env);
    __int128 acc = 0;
    switch (a.kind) {
      case AggKind::Card: return static_cast<std::int64_t>(members.size());
      case AggKind::Sum:
        for (const auto& m : members) acc += function_value(*a.func, m, env);
        break;
      case AggKind::Product:
        acc = 1;
        for (const auto& m : members) {
          acc *= function_value(*a.func, m, env);
          if (acc > INT64_MAX || acc < INT64_MIN) throw EvaluationError("product overflow");
        }
        break;
      case AggKind::Minimum:
      case AggKind::Maximum: {
        if (members.empty()) return std::nullopt;
        if (a.set.params.size() != 1) throw EvaluationError("minimum/maximum need a single set parameter");
        std::int64_t best = detail::as_int((*members.begin())[0], "minimum/maximum");
        for (const auto& m : members) {
          const auto v = detail::as_int(m[0], "minimum/maximum");
          best = a.kind == AggKind::Minimum ? std::min(best, v) : std::max(best, v);
        }
        return best;
      }
    }
    if (acc > INT64_MAX || acc < INT64_MIN) throw EvaluationError("sum overflow");
    return static_cast<std::int64_t>(acc);
  }

 private:
  // Free variables and instantiations are cached per node; the cache keeps the
  // node alive so its address is not reused.
  const std::set<std::string>& vars_of(const Formula& f) {
    auto it = fv_.find(f.id());
    if (it == fv_.end()) it = fv_.emplace(f.id(), std::make_pair(f, free_vars(f))).first;
    return it->second.second;
  }

  const Formula& body_of(const Formula& atom) {
    auto it = inst_.find(atom.id());
    if (it == inst_.end()) it = inst_.emplace(atom.id(), std::make_pair(atom, comp_.instantiate(atom))).first;
    return it->second.second;
  }

  void require_bound(const Formula& f, const Binding& env) {
    for (const auto& v : vars_of(f))
      if (!env.count(v)) throw EvaluationError("cannot evaluate " + to_string(f) + ": variable " + v + " is unbound");
  }

  static bool args_ready(const Formula& f, const Binding& env) {
    for (const auto& t : f.args())
      if (!t.is_var() && !detail::bound_in(t, env)) return false;
    return true;
  }

  // 0: a test, 1: a cheap generator, 2: a nested generator, 99: not yet.
  int tier(const Formula& f, const Binding& env) {
    using K = Formula::Kind;
    bool all = true;
    for (const auto& v : vars_of(f)) all = all && env.count(v);
    if (all) return 0;
    switch (f.kind()) {
      case K::Atom:
        if (!args_ready(f, env)) return 99;
        return comp_.is_defined(key_of(f)) ? 2 : 1;
      case K::Compare:
        if (f.cmp() == CmpOp::In)
          return f.lhs().is_var() && detail::bound_in(f.lo(), env) && detail::bound_in(f.hi(), env) ? 1 : 99;
        if (f.cmp() != CmpOp::Eq) return 99;
        if (f.lhs().is_var() && !env.count(f.lhs().name()) && detail::bound_in(f.rhs(), env)) return 1;
        if (f.rhs().is_var() && !env.count(f.rhs().name()) && detail::bound_in(f.lhs(), env)) return 1;
        return 99;
      case K::Aggregate: {
        const auto& a = f.agg();
        for (const auto& v : free_vars(a.set))
          if (!env.count(v)) return 99;
        if (a.func)
          for (const auto& v : free_vars(*a.func))
            if (!env.count(v)) return 99;
        return a.result.is_var() ? 1 : 99;
      }
      case K::Exists:
      case K::Or:
      case K::And: return 2;
      default: return 99;
    }
  }

  bool conj(std::vector<Formula>& rest, const Binding& env, const Visit& visit) {
    if (rest.empty()) return visit(env);
    std::size_t pick = rest.size();
    int best = 99;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      const int t = tier(rest[i], env);
      if (t < best) {
        best = t;
        pick = i;
      }
    }
    if (pick == rest.size()) {
      std::string vs;
      for (const auto& k : rest) vs += " " + to_string(k);
      throw EvaluationError("no evaluable conjunct among:" + vs);
    }
    const Formula chosen = rest[pick];
    std::vector<Formula> others = rest;
    others.erase(others.begin() + static_cast<std::ptrdiff_t>(pick));
    return solutions(chosen, env, [&](const Binding& b) { return conj(others, b, visit); });
  }

  bool atom(const Formula& f, const Binding& env, const Visit& visit) {
    const PredKey key = key_of(f);
    if (comp_.is_defined(key)) {
      bool ground = true;
      for (const auto& t : f.args()) ground = ground && detail::bound_in(t, env);
      if (!ground) return solutions(body_of(f), env, visit);
      Tuple vals;
      for (const auto& t : f.args()) vals.push_back(detail::eval_term(t, env));
      auto& memo = fixed_ && fixed_->covers(key) ? fixed_->memo : memo_;
      auto k = std::make_pair(key, std::move(vals));
      auto it = memo.find(k);
      if (it == memo.end()) {
        const bool truth = holds(comp_.instantiate(Formula::atom(f.pred(), k.second)), {});
        it = memo.emplace(std::move(k), truth).first;
      }
      return it->second ? visit(env) : true;
    }
    if (!args_ready(f, env)) throw EvaluationError("cannot evaluate " + to_string(f) + ": non-variable argument is unbound");
    std::vector<std::optional<Term>> want;
    for (const auto& t : f.args()) {
      if (detail::bound_in(t, env)) want.push_back(detail::eval_term(t, env));
      else want.push_back(std::nullopt);
    }
    for (const auto& tup : interp_.of(key)) {
      Binding b = env;
      bool ok = true;
      for (std::size_t i = 0; ok && i < tup.size(); ++i) {
        if (want[i]) {
          ok = *want[i] == tup[i];
          continue;
        }
        const std::string& v = f.args()[i].name();
        auto it = b.find(v);
        if (it == b.end()) b[v] = tup[i];
        else ok = it->second == tup[i];
      }
      if (ok && !visit(b)) return false;
    }
    return true;
  }

  bool compare(const Formula& f, const Binding& env, const Visit& visit) {
    if (f.cmp() == CmpOp::In) {
      const auto lo = detail::as_int(detail::eval_term(f.lo(), env), "range bound");
      const auto hi = detail::as_int(detail::eval_term(f.hi(), env), "range bound");
      if (detail::bound_in(f.lhs(), env)) {
        const auto x = detail::as_int(detail::eval_term(f.lhs(), env), "range membership");
        return (lo <= x && x <= hi) ? visit(env) : true;
      }
      if (!f.lhs().is_var()) throw EvaluationError("cannot evaluate " + to_string(f));
      for (auto x = lo; x <= hi; ++x) {
        Binding b = env;
        b[f.lhs().name()] = Term::integer(x);
        if (!visit(b)) return false;
      }
      return true;
    }
    const bool lb = detail::bound_in(f.lhs(), env), rb = detail::bound_in(f.rhs(), env);
    if (lb && rb)
      return detail::compare_values(f.cmp(), detail::eval_term(f.lhs(), env), detail::eval_term(f.rhs(), env)) ? visit(env)
                                                                                                               : true;
    if (f.cmp() == CmpOp::Eq && !lb && rb && f.lhs().is_var()) {
      Binding b = env;
      b[f.lhs().name()] = detail::eval_term(f.rhs(), env);
      return visit(b);
    }
    if (f.cmp() == CmpOp::Eq && lb && !rb && f.rhs().is_var()) {
      Binding b = env;
      b[f.rhs().name()] = detail::eval_term(f.lhs(), env);
      return visit(b);
    }
    throw EvaluationError("cannot evaluate " + to_string(f) + ": unbound variables");
  }

  bool aggregate(const Formula& f, const Binding& env, const Visit& visit) {
    const auto& a = f.agg();
    const auto v = aggregate_value(a, env);
    if (!v) return true;
    const Term val = Term::integer(*v);
    if (detail::bound_in(a.result, env)) return detail::eval_term(a.result, env) == val ? visit(env) : true;
    if (!a.result.is_var()) throw EvaluationError("aggregate result must be a variable or evaluable");
    Binding b = env;
    b[a.result.name()] = val;
    return visit(b);
  }

  const Completion& comp_;
  const Interpretation& interp_;
  FixedAtoms* fixed_;
  std::map<std::pair<PredKey, Tuple>, bool> memo_;
  std::map<const void*, std::pair<Formula, std::set<std::string>>> fv_;
  std::map<const void*, std::pair<Formula, Formula>> inst_;
};

/// All axioms hold.
inline bool is_model(const Theory& t, const Completion& c, const Interpretation& i, FixedAtoms* fixed = nullptr) {
  Evaluator ev(c, i, fixed);
  for (const auto& ax : t.axioms)
    if (!ev.holds(ax)) return false;
  return true;
}

/// Every ground atom of every declared open predicate.
inline std::vector<Formula> open_universe(const Theory& t, std::size_t max_atoms) {
  const auto defined = t.defined();
  std::set<PredKey> used;
  for (const auto& ax : t.axioms) for_each_atom(ax, [&](const Formula& a) { used.insert(key_of(a)); });
  for (const auto& d : t.definitions)
    for (const auto& r : d.rules) for_each_atom(r.body, [&](const Formula& a) { used.insert(key_of(a)); });
  for (const auto& p : used)
    if (!defined.count(p) && !t.domains.count(p))
      throw DomainTooLarge("open predicate " + p.str() + " has no declared finite domain");
  std::vector<Formula> out;
  for (const auto& [p, ranges] : t.domains) {
    std::uint64_t n = 1;
    for (const auto& r : ranges) {
      n *= r.size();
      if (n > max_atoms) throw DomainTooLarge("domain of " + p.str() + " exceeds the enumeration bound");
    }
    std::vector<std::int64_t> cur;
    for (const auto& r : ranges) cur.push_back(r.lo);
    for (std::uint64_t k = 0; k < n; ++k) {
      std::vector<Term> args;
      for (auto v : cur) args.push_back(Term::integer(v));
      out.push_back(Formula::atom(p.name, std::move(args)));
      for (std::size_t i = ranges.size(); i-- > 0;) {
        if (++cur[i] <= ranges[i].hi) break;
        cur[i] = ranges[i].lo;
      }
    }
    if (out.size() > max_atoms) throw DomainTooLarge("open universe has more than " + std::to_string(max_atoms) + " atoms");
  }
  return out;
}

/// Source of candidate interpretations; calls `emit` until it returns false.
using CandidateSource = std::function<void(const std::function<bool(const Interpretation&)>& emit)>;

/// Every subset of the declared open universe.
inline CandidateSource all_interpretations(const Theory& t, std::size_t max_atoms = 20) {
  auto universe = open_universe(t, max_atoms);
  return [universe](const std::function<bool(const Interpretation&)>& emit) {
    const std::uint64_t n = std::uint64_t{1} << universe.size();
    for (std::uint64_t mask = 0; mask < n; ++mask) {
      Interpretation i;
      for (std::size_t b = 0; b < universe.size(); ++b)
        if (mask >> b & 1) i.insert(universe[b]);
      if (!emit(i)) return;
    }
  };
}

/// Visits the models among the candidates; returns how many were visited.
inline std::uint64_t enumerate_models(const Theory& t, const CandidateSource& src,
                                      const std::function<bool(const Interpretation&)>& visit) {
  Completion c(t);
  FixedAtoms fixed(c);
  std::uint64_t n = 0;
  src([&](const Interpretation& i) {
    if (!is_model(t, c, i, &fixed)) return true;
    ++n;
    return visit(i);
  });
  return n;
}

inline std::uint64_t enumerate_models(const Theory& t, const std::function<bool(const Interpretation&)>& visit,
                                      std::size_t max_atoms = 20) {
  return enumerate_models(t, all_interpretations(t, max_atoms), visit);
}

/// Bindings of the goal's free variables under one interpretation.
inline std::vector<Binding> query_answers(const Completion& c, const Interpretation& i, const Formula& goal) {
  Evaluator ev(c, i);
  std::vector<Binding> out;
  ev.solutions(goal, {}, [&](const Binding& b) {
    out.push_back(b);
    return true;
  });
  return out;
}

/// Number of models in which the goal has at least one solution.
inline std::uint64_t count_models(const Theory& t, const Formula& goal, std::size_t max_atoms = 20) {
  Completion c(t);
  std::uint64_t n = 0;
  enumerate_models(t, [&](const Interpretation& i) {
    if (Evaluator(c, i).holds(goal)) ++n;
    return true;
  }, max_atoms);
  return n;
}

/// Best objective over all candidate models and goal solutions; nullopt if none.
inline std::optional<std::int64_t> optimal_value(const Theory& t, const Query& q, const CandidateSource& src) {
  if (!q.objective) throw std::invalid_argument("query has no objective");
  Completion c(t);
  std::optional<std::int64_t> best;
  enumerate_models(t, src, [&](const Interpretation& i) {
    Evaluator ev(c, i);
    ev.solutions(q.goal, {}, [&](const Binding& b) {
      const auto v = detail::as_int(b.at(q.objective->var), "objective");
      if (!best || (q.objective->sense == Sense::Maximize ? v > *best : v < *best)) best = v;
      return true;
    });
    return true;
  });
  return best;
}

inline std::optional<std::int64_t> optimal_value(const Theory& t, const Query& q, std::size_t max_atoms = 20) {
  return optimal_value(t, q, all_interpretations(t, max_atoms));
}

}  // namespace idlogic
