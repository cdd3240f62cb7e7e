#pragma once

// Translation of arithmetic formulas over engine variables into store
// constraints, either posted or reified to a boolean.

#include <algorithm>
#include <map>

#include "idlogic/engine/state.hpp"
#include "idlogic/fd/search.hpp"
#include "idlogic/oracle.hpp"

namespace idlogic::engine {

using fd::Value;

class NotArithmetic : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// sum(coef * var) + k
struct LinExpr {
  std::map<int, Value> coef;
  Value k = 0;
};

inline Value clamp_value(__int128 v) {
  return static_cast<Value>(std::clamp<__int128>(v, fd::kMinValue, fd::kMaxValue));
}

inline __int128 lo_of(const State& s, const LinExpr& e) {
  __int128 r = e.k;
  for (auto [id, a] : e.coef) r += static_cast<__int128>(a) * (a > 0 ? s.cs.min(fd::Var{id}) : s.cs.max(fd::Var{id}));
  return r;
}

inline __int128 hi_of(const State& s, const LinExpr& e) {
  __int128 r = e.k;
  for (auto [id, a] : e.coef) r += static_cast<__int128>(a) * (a > 0 ? s.cs.max(fd::Var{id}) : s.cs.min(fd::Var{id}));
  return r;
}

/// The FD variable of an engine variable, creating it over `dom` if needed.
inline fd::Var fd_var(State& s, const std::string& name, const fd::Domain& dom) {
  auto it = s.fd.find(name);
  if (it != s.fd.end()) return it->second;
  fd::Var v = s.cs.new_var(dom, fd::Role::Problem, name);
  s.fd.emplace(name, v);
  return v;
}

inline fd::Var fd_var(State& s, const std::string& name) {
  return fd_var(s, name, fd::Domain(fd::kMinValue, fd::kMaxValue));
}

/// A fresh engine variable backed by an FD variable.
inline std::string new_fd(State& s, Value lo, Value hi, fd::Role role = fd::Role::Aux) {
  std::string n = s.fresh();
  fd::Var v = s.cs.new_var(lo, hi, role, n);
  s.fd.emplace(n, v);
  return n;
}

/// True when t may take part in arithmetic: integers, variables that are not
/// bound to symbols, and arithmetic over those.
inline bool numeric(const State& s, const Term& t) {
  Term d = t.is_var() ? deref(s, t) : t;
  if (d.is_sym()) return false;
  if (d.is_arith())
    for (const auto& a : d.args())
      if (!numeric(s, a)) return false;
  return true;
}

inline LinExpr linearize(State& s, const Term& t);

inline fd::Var var_of(State& s, const LinExpr& e) {
  if (e.k == 0 && e.coef.size() == 1 && e.coef.begin()->second == 1) return fd::Var{e.coef.begin()->first};
  fd::Var v = s.cs.new_var(clamp_value(lo_of(s, e)), clamp_value(hi_of(s, e)), fd::Role::Aux);
  std::vector<fd::LinTerm> ts{{-1, v}};
  for (auto [id, a] : e.coef) ts.push_back({a, fd::Var{id}});
  fd::add(s.cs, fd::lin(ts, fd::Op::Eq, -e.k));
  return v;
}

inline fd::Var var_of(State& s, const Term& t) { return var_of(s, linearize(s, t)); }

inline LinExpr linearize(State& s, const Term& t0) {
  Term t = t0.is_var() ? deref(s, t0) : t0;
  LinExpr e;
  if (t.is_int()) {
    e.k = t.value();
    return e;
  }
  if (t.is_sym()) throw NotArithmetic("symbol " + t.name() + " in arithmetic");
  if (t.is_var()) {
    e.coef[fd_var(s, t.name()).id] = 1;
    return e;
  }
  auto add_scaled = [](LinExpr& into, const LinExpr& x, Value m) {
    into.k += m * x.k;
    for (auto [id, a] : x.coef) {
      into.coef[id] += m * a;
      if (into.coef[id] == 0) into.coef.erase(id);
    }
  };
  switch (t.op()) {
    case ArithOp::Add:
    case ArithOp::Sub: {
      add_scaled(e, linearize(s, t.args()[0]), 1);
      add_scaled(e, linearize(s, t.args()[1]), t.op() == ArithOp::Add ? 1 : -1);
      return e;
    }
    case ArithOp::Mul: {
      LinExpr a = linearize(s, t.args()[0]), b = linearize(s, t.args()[1]);
      if (a.coef.empty()) {
        add_scaled(e, b, a.k);
        return e;
      }
      if (b.coef.empty()) {
        add_scaled(e, a, b.k);
        return e;
      }
      fd::Var x = var_of(s, a), y = var_of(s, b);
      const __int128 c[4] = {static_cast<__int128>(s.cs.min(x)) * s.cs.min(y), static_cast<__int128>(s.cs.min(x)) * s.cs.max(y),
                             static_cast<__int128>(s.cs.max(x)) * s.cs.min(y), static_cast<__int128>(s.cs.max(x)) * s.cs.max(y)};
      fd::Var z = s.cs.new_var(clamp_value(*std::min_element(c, c + 4)), clamp_value(*std::max_element(c, c + 4)),
                               fd::Role::Aux);
      s.cs.add(std::make_shared<fd::Product>(z, std::vector<fd::Var>{x, y}));
      e.coef[z.id] = 1;
      return e;
    }
    case ArithOp::Abs: {
      LinExpr a = linearize(s, t.args()[0]);
      if (a.coef.empty()) {
        e.k = a.k < 0 ? -a.k : a.k;
        return e;
      }
      fd::Var x = var_of(s, a);
      const __int128 m = std::max<__int128>(-static_cast<__int128>(s.cs.min(x)), s.cs.max(x));
      __int128 lo = 0;
      if (s.cs.min(x) > 0) lo = s.cs.min(x);
      if (s.cs.max(x) < 0) lo = -static_cast<__int128>(s.cs.max(x));
      fd::Var z = s.cs.new_var(clamp_value(lo), clamp_value(m), fd::Role::Aux);
      fd::add(s.cs, fd::AbsDiffC{x, s.cs.constant(0), z});
      e.coef[z.id] = 1;
      return e;
    }
  }
  return e;
}

inline fd::Op op_of(CmpOp c) {
  switch (c) {
    case CmpOp::Eq: return fd::Op::Eq;
    case CmpOp::Ne: return fd::Op::Ne;
    case CmpOp::Lt: return fd::Op::Lt;
    case CmpOp::Le: return fd::Op::Le;
    case CmpOp::Gt: return fd::Op::Gt;
    case CmpOp::Ge: return fd::Op::Ge;
    default: break;
  }
  throw std::invalid_argument("range test is not a relation");
}

inline CmpOp negate(CmpOp c) {
  switch (c) {
    case CmpOp::Eq: return CmpOp::Ne;
    case CmpOp::Ne: return CmpOp::Eq;
    case CmpOp::Lt: return CmpOp::Ge;
    case CmpOp::Le: return CmpOp::Gt;
    case CmpOp::Gt: return CmpOp::Le;
    case CmpOp::Ge: return CmpOp::Lt;
    default: break;
  }
  throw std::invalid_argument("range test has no single negation");
}

/// lhs op rhs as a linear store constraint.
inline fd::LinearC relation(State& s, CmpOp op, const Term& lhs, const Term& rhs) {
  LinExpr a = linearize(s, lhs), b = linearize(s, rhs);
  std::vector<fd::LinTerm> ts;
  std::map<int, Value> c = a.coef;
  for (auto [id, v] : b.coef) c[id] -= v;
  for (auto [id, v] : c)
    if (v != 0) ts.push_back({v, fd::Var{id}});
  return fd::lin(ts, op_of(op), b.k - a.k);
}

/// Is f a formula the store can express once its variables are known numeric?
/// Atoms, quantifiers and aggregates are not.
inline bool is_clp(const State& s, const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::True:
    case K::False: return true;
    case K::Compare: {
      if (f.cmp() == CmpOp::In) return numeric(s, f.lhs()) && is_ground(resolve(s, f.lo())) && is_ground(resolve(s, f.hi()));
      Term a = resolve(s, f.lhs()), b = resolve(s, f.rhs());
      if (is_ground(a) && is_ground(b)) return true;
      return numeric(s, a) && numeric(s, b);
    }
    case K::Not: return is_clp(s, f.kid());
    case K::Implies:
    case K::And:
    case K::Or:
      for (const auto& k : f.kids())
        if (!is_clp(s, k)) return false;
      return true;
    default: return false;
  }
}

/// Ground truth value when every term is known, else nullopt.
inline std::optional<bool> ground_truth(const State& s, const Formula& f);

inline std::optional<Term> ground_value(const State& s, const Term& t) {
  Term r = resolve(s, t);
  if (!is_ground(r)) return std::nullopt;
  try {
    return detail::eval_term(r, {});
  } catch (const EvaluationError&) {
    return std::nullopt;
  }
}

inline std::optional<bool> ground_truth(const State& s, const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::True: return true;
    case K::False: return false;
    case K::Compare: {
      auto a = ground_value(s, f.lhs());
      if (!a) return std::nullopt;
      if (f.cmp() == CmpOp::In) {
        auto lo = ground_value(s, f.lo()), hi = ground_value(s, f.hi());
        if (!lo || !hi) return std::nullopt;
        if (!a->is_int()) return false;
        return lo->value() <= a->value() && a->value() <= hi->value();
      }
      auto b = ground_value(s, f.rhs());
      if (!b) return std::nullopt;
      if (f.cmp() != CmpOp::Eq && f.cmp() != CmpOp::Ne && (!a->is_int() || !b->is_int())) return false;
      return detail::compare_values(f.cmp(), *a, *b);
    }
    case K::Not: {
      auto r = ground_truth(s, f.kid());
      if (!r) return std::nullopt;
      return !*r;
    }
    case K::And:
    case K::Or: {
      const bool is_and = f.is(K::And);
      bool unknown = false;
      for (const auto& k : f.kids()) {
        auto r = ground_truth(s, k);
        if (!r) unknown = true;
        else if (*r != is_and) return !is_and;
      }
      if (unknown) return std::nullopt;
      return is_and;
    }
    case K::Implies: return ground_truth(s, Formula::disj(Formula::negation(f.kid(0)), f.kid(1)));
    default: return std::nullopt;
  }
}

/// |e| compared with a bound becomes a pair of linear tests.
inline std::optional<Formula> split_abs(const Formula& f) {
  if (!f.is(Formula::Kind::Compare) || f.cmp() == CmpOp::In) return std::nullopt;
  CmpOp op = f.cmp();
  Term a = f.lhs(), b = f.rhs();
  if (!(a.is_arith() && a.op() == ArithOp::Abs)) {
    if (!(b.is_arith() && b.op() == ArithOp::Abs)) return std::nullopt;
    std::swap(a, b);
    switch (op) {
      case CmpOp::Lt: op = CmpOp::Gt; break;
      case CmpOp::Le: op = CmpOp::Ge; break;
      case CmpOp::Gt: op = CmpOp::Lt; break;
      case CmpOp::Ge: op = CmpOp::Le; break;
      default: break;
    }
  }
  const Term& e = a.args()[0];
  Term neg = Term::arith(ArithOp::Sub, {Term::integer(0), e});
  switch (op) {
    case CmpOp::Gt:
    case CmpOp::Ge: return Formula::disj(Formula::compare(op, e, b), Formula::compare(op, neg, b));
    case CmpOp::Lt:
    case CmpOp::Le: return Formula::conj(Formula::compare(op, e, b), Formula::compare(op, neg, b));
    default: return std::nullopt;
  }
}

inline fd::Var reify(State& s, const Formula& f);

inline fd::Var reify_all(State& s, const std::vector<Formula>& fs, bool conj) {
  std::vector<fd::LinTerm> ts;
  for (const auto& k : fs) ts.push_back({1, reify(s, k)});
  const Value need = conj ? static_cast<Value>(fs.size()) : 1;
  return fd::reify(s.cs, fd::lin(ts, fd::Op::Ge, need));
}

/// A boolean B with B <=> f.
inline fd::Var reify(State& s, const Formula& f) {
  using K = Formula::Kind;
  if (auto g = ground_truth(s, f)) return s.cs.constant(*g ? 1 : 0);
  switch (f.kind()) {
    case K::Compare: {
      if (auto r = split_abs(f)) return reify(s, *r);
      if (f.cmp() == CmpOp::In)
        return reify_all(s, {Formula::compare(CmpOp::Ge, f.lhs(), f.lo()), Formula::compare(CmpOp::Le, f.lhs(), f.hi())},
                         true);
      return fd::reify(s.cs, relation(s, f.cmp(), f.lhs(), f.rhs()));
    }
    case K::Not: {
      fd::Var b = reify(s, f.kid());
      return fd::reify(s.cs, fd::lin({{1, b}}, fd::Op::Eq, 0));
    }
    case K::And: return reify_all(s, f.kids(), true);
    case K::Or: return reify_all(s, f.kids(), false);
    case K::Implies: return reify(s, Formula::disj(Formula::negation(f.kid(0)), f.kid(1)));
    default: throw NotArithmetic("cannot reify " + to_string(f));
  }
}

/// Adds f as a store constraint (no propagation).
inline void impose(State& s, const Formula& f) {
  using K = Formula::Kind;
  if (auto g = ground_truth(s, f)) {
    if (!*g) fd::add(s.cs, fd::lin({}, fd::Op::Eq, 1));
    return;
  }
  switch (f.kind()) {
    case K::Compare: {
      if (auto r = split_abs(f)) return impose(s, *r);
      if (f.cmp() == CmpOp::In) {
        impose(s, Formula::compare(CmpOp::Ge, f.lhs(), f.lo()));
        impose(s, Formula::compare(CmpOp::Le, f.lhs(), f.hi()));
        return;
      }
      fd::add(s.cs, relation(s, f.cmp(), f.lhs(), f.rhs()));
      return;
    }
    case K::And:
      for (const auto& k : f.kids()) impose(s, k);
      return;
    case K::Or: {
      std::vector<fd::LinTerm> ts;
      for (const auto& k : f.kids()) ts.push_back({1, reify(s, k)});
      fd::add(s.cs, fd::lin(ts, fd::Op::Ge, 1));
      return;
    }
    case K::Not: {
      const Formula& g = f.kid();
      if (g.is(K::Compare) && g.cmp() != CmpOp::In && !split_abs(g)) {
        fd::add(s.cs, relation(s, negate(g.cmp()), g.lhs(), g.rhs()));
        return;
      }
      if (g.is(K::Not)) return impose(s, g.kid());
      if (g.is(K::And) || g.is(K::Or) || g.is(K::Implies)) return impose(s, push_negation(g));
      fd::add(s.cs, fd::lin({{1, reify(s, g)}}, fd::Op::Eq, 0));
      return;
    }
    case K::Implies: return impose(s, Formula::disj(Formula::negation(f.kid(0)), f.kid(1)));
    default: throw NotArithmetic("cannot post " + to_string(f));
  }
}

inline bool post(State& s, const Formula& f) {
  impose(s, f);
  return s.cs.propagate();
}

}  // namespace idlogic::engine
