#pragma once

// Derivation state: work list, abduced atoms, constraint store and the
// bookkeeping for denials and unfolded sets.

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "idlogic/ast.hpp"
#include "idlogic/fd/model.hpp"

namespace idlogic {

class FlounderingError : public std::runtime_error {
 public:
  FlounderingError(const std::string& denial, const std::string& var)
      : std::runtime_error("floundering: universally quantified " + var + " selected in " + denial), var_(var) {}
  const std::string& variable() const { return var_; }

 private:
  std::string var_;
};

/// The theory falls outside what the engine handles.
class UnsupportedError : public std::runtime_error {
 public:
  UnsupportedError(std::string kind, const std::string& msg) : std::runtime_error(msg), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

class InternalSoundnessError : public std::logic_error {
  using std::logic_error::logic_error;
};

/// forall(universals): not (conds and body)
struct Denial {
  std::vector<std::string> universals;
  std::vector<Formula> conds;  // constraint formulas free of universals
  std::vector<Formula> body;
};

using Goal = std::variant<Formula, Denial>;

/// A denial whose selected open atom is matched against every abduced atom.
struct CheckedDenial {
  Formula atom;
  Denial rest;
};

struct Member {
  std::vector<Term> value;       // ground terms or FD engine variables
  std::vector<fd::Var> bools;    // membership holds if any is true
  std::optional<Term> fvalue;    // lambda value (sum, product)
};

/// Suspended set unfolding waiting for atoms of `pattern`'s predicate.
struct Watcher {
  Formula pattern;
  std::vector<Formula> goals;
  std::vector<Formula> conds;
  Binding bind;
  std::set<std::string> locals;
};

struct UnfoldedSet {
  AggKind kind = AggKind::Card;
  SetExpr set;
  std::optional<FuncExpr> func;
  std::vector<Member> members;
  std::vector<Watcher> watchers;
  std::string result;   // engine FD variable holding the aggregate value
  std::string defined;  // engine boolean: the set is non-empty (minimum/maximum)
  std::string origin;   // printed aggregate, for diagnostics
  bool deferred = false;  // body negates open atoms; expanded once abduction is over
};

struct State {
  std::deque<Goal> theta;
  std::vector<Formula> delta;
  fd::Store cs;
  std::map<std::string, Term> subst;
  std::map<std::string, fd::Var> fd;
  std::vector<CheckedDenial> checked;
  std::vector<UnfoldedSet> sets;
  std::vector<std::pair<std::string, std::string>> query_vars;  // source name, engine name
  int counter = 0;
  int stalled = 0;  // consecutive postponed goals

  std::string fresh(const char* prefix = "#") { return prefix + std::to_string(counter++); }
};

struct Diagnostic {
  std::string kind;
  std::string message;
};

inline bool is_engine_var(const Term& t) { return t.is_var() && !t.name().empty() && t.name()[0] == '#'; }

/// Follows variable bindings; fixed FD variables read as their value.
inline Term deref(const State& s, Term t) {
  while (t.is_var()) {
    auto it = s.subst.find(t.name());
    if (it != s.subst.end()) {
      t = it->second;
      continue;
    }
    auto f = s.fd.find(t.name());
    if (f != s.fd.end() && s.cs.fixed(f->second)) return Term::integer(s.cs.value(f->second));
    break;
  }
  return t;
}

inline Term resolve(const State& s, const Term& t) {
  if (t.is_var()) return deref(s, t);
  if (!t.is_arith()) return t;
  std::vector<Term> args;
  for (const auto& a : t.args()) args.push_back(resolve(s, a));
  return Term::arith(t.op(), std::move(args));
}

/// Applies fn to every term position of f, including aggregate parts.
inline Formula map_terms(const Formula& f, const std::function<Term(const Term&)>& fn) {
  using K = Formula::Kind;
  auto list = [&](const std::vector<Formula>& ks) {
    std::vector<Formula> out;
    for (const auto& k : ks) out.push_back(map_terms(k, fn));
    return out;
  };
  switch (f.kind()) {
    case K::True:
    case K::False: return f;
    case K::Atom: {
      std::vector<Term> args;
      for (const auto& a : f.args()) args.push_back(fn(a));
      return Formula::atom(f.pred(), std::move(args));
    }
    case K::Compare:
      if (f.cmp() == CmpOp::In) return Formula::in_range(fn(f.lhs()), fn(f.lo()), fn(f.hi()));
      return Formula::compare(f.cmp(), fn(f.lhs()), fn(f.rhs()));
    case K::Not: return Formula::negation(map_terms(f.kid(), fn));
    case K::And: return Formula::conj(list(f.kids()));
    case K::Or: return Formula::disj(list(f.kids()));
    case K::Exists: return Formula::exists(f.vars(), map_terms(f.kid(), fn));
    case K::Forall: return Formula::forall(f.vars(), map_terms(f.kid(), fn));
    case K::Implies: return Formula::implies(map_terms(f.kid(0), fn), map_terms(f.kid(1), fn));
    case K::Aggregate: {
      Aggregate a = f.agg();
      a.set.body = map_terms(a.set.body, fn);
      if (a.func) {
        if (a.func->term) a.func->term = fn(*a.func->term);
        else a.func->body = map_terms(a.func->body, fn);
      }
      a.result = fn(a.result);
      return Formula::aggregate(std::move(a));
    }
  }
  return f;
}

inline Formula resolve(const State& s, const Formula& f) {
  return map_terms(f, [&](const Term& t) { return resolve(s, t); });
}

/// Replaces engine variables by terms (no quantifier binds engine names).
inline Term replace(const Term& t, const Binding& b) {
  if (t.is_var()) {
    auto it = b.find(t.name());
    return it == b.end() ? t : it->second;
  }
  if (!t.is_arith()) return t;
  std::vector<Term> args;
  for (const auto& a : t.args()) args.push_back(replace(a, b));
  return Term::arith(t.op(), std::move(args));
}

inline Formula replace(const Formula& f, const Binding& b) {
  if (b.empty()) return f;
  return map_terms(f, [&](const Term& t) { return replace(t, b); });
}

inline bool mentions(const Term& t, const std::set<std::string>& names) {
  if (t.is_var()) return names.count(t.name()) != 0;
  for (const auto& a : t.args())
    if (mentions(a, names)) return true;
  return false;
}

inline bool mentions(const Formula& f, const std::set<std::string>& names) {
  if (names.empty()) return false;
  for (const auto& v : free_vars(f))
    if (names.count(v)) return true;
  return false;
}

inline bool is_ground(const Term& t) {
  if (t.is_var()) return false;
  for (const auto& a : t.args())
    if (!is_ground(a)) return false;
  return true;
}

inline std::string to_string(const Denial& d) {
  std::string s = "forall(";
  for (std::size_t i = 0; i < d.universals.size(); ++i) s += (i ? "," : "") + d.universals[i];
  s += "): <- ";
  std::vector<Formula> all = d.conds;
  all.insert(all.end(), d.body.begin(), d.body.end());
  if (all.empty()) return s + "true";
  return s + to_string(all.size() == 1 ? all[0] : Formula::conj(all));
}

}  // namespace idlogic
