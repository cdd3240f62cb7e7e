#pragma once

// Denial processing. A denial forall(U): not(conds and body) is rewritten by
// selecting one body literal, in this order of preference: a ground literal or
// an equality fixing a universal; a constraint free of universals (moved to the
// conditions); a defined atom (unfolded); a range over a universal (expanded);
// a disjunction with logical parts (split); an open atom (matched against the
// abduced atoms and kept for later ones); a constraint disjunction (split); an
// aggregate; a negation free of universals.

#include "idlogic/engine/step.hpp"

namespace idlogic::engine::steps {

inline std::set<std::string> universals_of(const Denial& d) { return {d.universals.begin(), d.universals.end()}; }

inline void drop_universal(Denial& d, const std::string& u) {
  d.universals.erase(std::remove(d.universals.begin(), d.universals.end(), u), d.universals.end());
}

/// Flattens the body into literals. Returns false if the denial is satisfied.
inline bool normalize(State& s, Denial& d) {
  using K = Formula::Kind;
  std::vector<Formula> todo(d.body.rbegin(), d.body.rend());
  d.body.clear();
  while (!todo.empty()) {
    Formula l = resolve(s, todo.back());
    todo.pop_back();
    auto push = [&](std::vector<Formula> ks) {
      for (auto it = ks.rbegin(); it != ks.rend(); ++it) todo.push_back(*it);
    };
    switch (l.kind()) {
      case K::True: continue;
      case K::False: return false;
      case K::And: push(l.kids()); continue;
      case K::Exists: {
        std::vector<std::string> names;
        push(renamed(s, l.vars(), l.kid(), &names));
        d.universals.insert(d.universals.end(), names.begin(), names.end());
        continue;
      }
      case K::Implies: push({Formula::disj(Formula::negation(l.kid(0)), l.kid(1))}); continue;
      case K::Forall:
        push({Formula::negation(Formula::exists(l.vars(), Formula::negation(l.kid())))});
        continue;
      case K::Not: {
        const Formula& g = l.kid();
        switch (g.kind()) {
          case K::True: return false;
          case K::False: continue;
          case K::Not: push({g.kid()}); continue;
          case K::Or: {
            std::vector<Formula> ks;
            for (const auto& k : g.kids()) ks.push_back(Formula::negation(k));
            push(ks);
            continue;
          }
          case K::Implies: push({g.kid(0), Formula::negation(g.kid(1))}); continue;
          case K::Forall: push({Formula::exists(g.vars(), Formula::negation(g.kid()))}); continue;
          default: break;
        }
        break;
      }
      default: break;
    }
    d.body.push_back(l);
  }
  return true;
}

/// Only comparisons and connectives over them.
inline bool structural_clp(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::True:
    case K::False:
    case K::Compare: return true;
    case K::Not:
    case K::And:
    case K::Or:
    case K::Implies:
      for (const auto& k : f.kids())
        if (!structural_clp(k)) return false;
      return true;
    default: return false;
  }
}

inline Denial with_body(const Denial& d, std::size_t skip, std::vector<Formula> extra) {
  Denial out{d.universals, d.conds, std::move(extra)};
  for (std::size_t i = 0; i < d.body.size(); ++i)
    if (i != skip) out.body.push_back(d.body[i]);
  return out;
}

inline void substitute_universal(Denial& d, const std::string& u, const Term& t) {
  Binding b{{u, t}};
  for (auto& l : d.body) l = replace(l, b);
  drop_universal(d, u);
}

/// Processes one denial; returns false when the state fails.
inline bool denial(Context& ctx, State& s, Denial d, Alts& alts) {
  using K = Formula::Kind;
  if (!normalize(s, d)) return true;
  for (auto& c : d.conds) c = resolve(s, c);
  const auto U = universals_of(d);
  auto has_u = [&](const Formula& f) { return mentions(f, U); };
  const auto n = d.body.size();

  // ground literals and equalities fixing a universal
  for (std::size_t i = 0; i < n; ++i) {
    const Formula& l = d.body[i];
    if (!has_u(l)) {
      if (auto t = ground_truth(s, l)) {
        if (!*t) return true;
        s.theta.push_front(with_body(d, i, {}));
        return true;
      }
    }
    if (l.is(K::Compare) && l.cmp() == CmpOp::Eq) {
      for (int side = 0; side < 2; ++side) {
        const Term& u = side ? l.rhs() : l.lhs();
        const Term& t = side ? l.lhs() : l.rhs();
        if (u.is_var() && U.count(u.name()) && !mentions(t, {u.name()})) {
          Denial r = with_body(d, i, {});
          substitute_universal(r, u.name(), t);
          s.theta.push_front(std::move(r));
          return true;
        }
      }
    }
  }
  // constraints without universals
  for (std::size_t i = 0; i < n; ++i) {
    const Formula& l = d.body[i];
    if (!has_u(l) && is_clp(s, l)) {
      Denial r = with_body(d, i, {});
      r.conds.push_back(l);
      s.theta.push_front(std::move(r));
      return true;
    }
  }
  // defined atoms
  for (std::size_t i = 0; i < n; ++i) {
    const Formula& l = d.body[i];
    if (l.is(K::Atom) && ctx.is_defined(l)) {
      s.theta.push_front(with_body(d, i, {ctx.comp.instantiate(l)}));
      return true;
    }
  }
  // ranges over a universal
  for (std::size_t i = 0; i < n; ++i) {
    const Formula& l = d.body[i];
    if (!(l.is(K::Compare) && l.cmp() == CmpOp::In && l.lhs().is_var() && U.count(l.lhs().name()))) continue;
    auto lo = ground_value(s, l.lo()), hi = ground_value(s, l.hi());
    if (!lo || !hi || !lo->is_int() || !hi->is_int()) continue;
    if (hi->value() - lo->value() > 100000) throw UnsupportedError("UnsupportedRange", "range too wide in " + to_string(l));
    ctx.note("expand", to_string(l));
    for (auto v = hi->value(); v >= lo->value(); --v) {
      Denial r = with_body(d, i, {});
      substitute_universal(r, l.lhs().name(), Term::integer(v));
      s.theta.push_front(std::move(r));
    }
    return true;
  }
  auto split = [&](std::size_t i) {
    const Formula& l = d.body[i];
    for (auto it = l.kids().rbegin(); it != l.kids().rend(); ++it) s.theta.push_front(with_body(d, i, {*it}));
    return true;
  };
  for (std::size_t i = 0; i < n; ++i)
    if (d.body[i].is(K::Or) && !structural_clp(d.body[i])) return split(i);
  // open atoms
  for (std::size_t i = 0; i < n; ++i) {
    const Formula& l = d.body[i];
    if (!l.is(K::Atom)) continue;
    CheckedDenial cd{l, with_body(d, i, {})};
    ctx.note("check", to_string(d));
    std::vector<Denial> inst;
    for (const auto& a : s.delta)
      if (key_of(a) == key_of(l)) inst.push_back(instance(s, cd, a));
    s.checked.push_back(std::move(cd));
    for (auto it = inst.rbegin(); it != inst.rend(); ++it) s.theta.push_front(std::move(*it));
    return true;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (d.body[i].is(K::Or)) return split(i);
  // aggregates whose set does not depend on universals
  for (std::size_t i = 0; i < n; ++i) {
    const Formula& l = d.body[i];
    if (!l.is(K::Aggregate)) continue;
    Aggregate a = l.agg();
    auto inner = free_vars(a.set);
    if (a.func) {
      auto fv = free_vars(*a.func);
      inner.insert(fv.begin(), fv.end());
    }
    bool blocked = false;
    for (const auto& v : inner)
      if (U.count(v)) blocked = true;
    if (blocked) continue;
    const int idx = reducer::open_set(ctx, s, a);
    const Term r = Term::var(s.sets[static_cast<std::size_t>(idx)].result);
    const std::string defined = s.sets[static_cast<std::size_t>(idx)].defined;
    std::vector<Formula> extra;
    if (!defined.empty()) extra.push_back(Formula::compare(CmpOp::Eq, Term::var(defined), Term::integer(1)));
    Denial out = with_body(d, i, extra);
    if (a.result.is_var() && U.count(a.result.name())) substitute_universal(out, a.result.name(), r);
    else out.body.push_back(Formula::compare(CmpOp::Eq, a.result, r));
    s.theta.push_front(std::move(out));
    return true;
  }
  // negations free of universals
  for (std::size_t i = 0; i < n; ++i) {
    const Formula& l = d.body[i];
    if (!l.is(K::Not) || has_u(l)) continue;
    if (n == 1 && d.conds.empty()) {
      s.theta.push_front(l.kid());
      return true;
    }
    ctx.note("case", to_string(l.kid()));
    State other = s;
    other.theta.push_front(with_body(d, i, {}));
    other.theta.push_front(Denial{{}, {}, {l.kid()}});
    s.theta.push_front(l.kid());
    alts.push_back(std::move(other));
    return true;
  }
  if (n == 0) {
    if (d.conds.empty()) return false;
    return post(s, Formula::negation(d.conds.size() == 1 ? d.conds[0] : Formula::conj(d.conds)));
  }
  std::string u = "?";
  for (const auto& v : free_vars(d.body[0]))
    if (U.count(v)) u = v;
  throw FlounderingError(to_string(d), u);
}

/// Processes one positive goal.
inline bool positive(Context& ctx, State& s, const Formula& g0, Alts& alts) {
  using K = Formula::Kind;
  Formula g = resolve(s, g0);
  switch (g.kind()) {
    case K::True: return true;
    case K::False: return false;
    case K::And:
      for (auto it = g.kids().rbegin(); it != g.kids().rend(); ++it) s.theta.push_front(*it);
      return true;
    case K::Or: {
      if (is_clp(s, g)) return post(s, g);
      for (std::size_t i = 1; i < g.kids().size(); ++i) {
        State alt = s;
        alt.theta.push_front(g.kid(i));
        alts.push_back(std::move(alt));
      }
      s.theta.push_front(g.kid(0));
      return true;
    }
    case K::Exists:
      s.theta.push_front(renamed(s, g.vars(), g.kid())[0]);
      return true;
    case K::Forall: {
      Denial d;
      d.body = renamed(s, g.vars(), push_negation(g.kid()), &d.universals);
      s.theta.push_front(std::move(d));
      return true;
    }
    case K::Implies: s.theta.push_front(Formula::disj(Formula::negation(g.kid(0)), g.kid(1))); return true;
    case K::Not:
      if (is_clp(s, g)) return post(s, g);
      s.theta.push_front(Denial{{}, {}, {g.kid()}});
      return true;
    case K::Atom:
      if (ctx.is_defined(g)) {
        s.theta.push_front(ctx.comp.instantiate(g));
        return true;
      }
      return open_atom(ctx, s, g, alts);
    case K::Aggregate: return aggregate(ctx, s, g);
    case K::Compare: {
      if (auto t = ground_truth(s, g)) return *t;
      if (g.cmp() == CmpOp::In) {
        Term x = g.lhs();
        auto lo = ground_value(s, g.lo()), hi = ground_value(s, g.hi());
        if (x.is_var() && lo && hi && lo->is_int() && hi->is_int()) {
          const fd::Domain dom(lo->value(), hi->value());
          if (!s.fd.count(x.name())) {
            if (dom.empty()) return false;
            fd_var(s, x.name(), dom);
            return s.cs.propagate();
          }
          return s.cs.intersect(s.fd.at(x.name()), dom) && s.cs.propagate();
        }
      }
      if (g.cmp() == CmpOp::Eq) return unify(s, g.lhs(), g.rhs());
      if (is_clp(s, g)) return post(s, g);
      s.theta.push_back(g);
      if (++s.stalled > static_cast<int>(s.theta.size()))
        throw UnsupportedError("Unsupported", "cannot decide " + to_string(g) + " over symbolic values");
      return true;
    }
  }
  return true;
}

/// Selects and processes the first goal.
inline bool step(Context& ctx, State& s, Alts& alts) {
  Goal g = std::move(s.theta.front());
  s.theta.pop_front();
  if (auto* d = std::get_if<Denial>(&g)) {
    s.stalled = 0;
    return denial(ctx, s, std::move(*d), alts);
  }
  const Formula& f = std::get<Formula>(g);
  const int before = s.stalled;
  const bool ok = positive(ctx, s, f, alts);
  if (s.stalled == before) s.stalled = 0;
  return ok;
}

}  // namespace idlogic::engine::steps
