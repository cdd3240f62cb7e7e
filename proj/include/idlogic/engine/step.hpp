#pragma once

// One derivation step: selects the first goal of the work list and rewrites
// it. Extra alternatives are returned to the caller, which explores them
// depth first after the current state.

#include "idlogic/engine/reducer.hpp"

namespace idlogic::engine {

using Alts = std::vector<State>;

namespace steps {

inline bool unbound(const State& s, const Term& t) { return t.is_var() && !s.fd.count(t.name()); }

inline std::vector<Formula> renamed(State& s, const std::vector<std::string>& vs, const Formula& body,
                                    std::vector<std::string>* names = nullptr) {
  Binding ren;
  for (const auto& v : vs) {
    std::string n = s.fresh();
    ren[v] = Term::var(n);
    if (names) names->push_back(n);
  }
  return {substitute(body, ren)};
}

/// l = r; binds symbolic variables, otherwise posts an arithmetic equality.
inline bool unify(State& s, const Term& l0, const Term& r0) {
  Term l = resolve(s, l0), r = resolve(s, r0);
  if (l == r) return true;
  if (unbound(s, r) && !unbound(s, l)) std::swap(l, r);
  if (unbound(s, l) && !r.is_arith()) {
    s.subst[l.name()] = r;
    return true;
  }
  if (is_ground(l) && is_ground(r)) {
    auto a = ground_value(s, l), b = ground_value(s, r);
    return a && b && *a == *b;
  }
  if (!numeric(s, l) || !numeric(s, r)) return false;
  return post(s, Formula::compare(CmpOp::Eq, l, r));
}

/// Domain of argument i of an open predicate, if declared.
inline std::optional<fd::Domain> declared(const Context& ctx, const Formula& atom, std::size_t i) {
  auto it = ctx.theory.domains.find(key_of(atom));
  if (it == ctx.theory.domains.end() || i >= it->second.size()) return std::nullopt;
  return fd::Domain(it->second[i].lo, it->second[i].hi);
}

/// Instance of a checked denial for one abduced atom.
inline Denial instance(const State& s, const CheckedDenial& cd, const Formula& delta) {
  std::set<std::string> univ(cd.rest.universals.begin(), cd.rest.universals.end());
  Binding b;
  std::vector<Formula> eqs;
  for (std::size_t i = 0; i < cd.atom.args().size(); ++i) {
    Term p = replace(cd.atom.args()[i], b);
    Term d = deref(s, delta.args()[i]);
    if (p.is_var() && univ.count(p.name())) b[p.name()] = d;
    else eqs.push_back(Formula::compare(CmpOp::Eq, p, d));
  }
  Denial out;
  for (const auto& u : cd.rest.universals)
    if (!b.count(u)) out.universals.push_back(u);
  out.conds = cd.rest.conds;
  for (auto& e : eqs) out.body.push_back(replace(e, b));
  for (const auto& l : cd.rest.body) out.body.push_back(replace(l, b));
  return out;
}

inline void notify_checked(State& s, const Formula& atom) {
  for (const auto& cd : s.checked)
    if (key_of(cd.atom) == key_of(atom)) s.theta.push_front(instance(s, cd, atom));
}

/// Abduced atoms are pairwise distinct, so the atoms whose arguments all lie
/// in the new atom's argument domains must leave a free tuple there.
inline bool room_for(const State& s, const Formula& atom) {
  std::vector<fd::Domain> box;
  std::uint64_t size = 1;
  for (const auto& t : atom.args()) {
    Term d = deref(s, t);
    if (d.is_int()) box.emplace_back(d.value(), d.value());
    else if (d.is_var() && s.fd.count(d.name())) box.push_back(s.cs.dom(s.fd.at(d.name())));
    else return true;
    size *= box.back().size();
    if (size > 1000000) return true;
  }
  std::uint64_t inside = 0;
  for (const auto& d : s.delta) {
    if (key_of(d) != key_of(atom)) continue;
    bool in = true;
    for (std::size_t i = 0; i < box.size() && in; ++i) {
      Term t = deref(s, d.args()[i]);
      if (t.is_int()) in = box[i].contains(t.value());
      else if (t.is_var() && s.fd.count(t.name())) {
        const auto& dom = s.cs.dom(s.fd.at(t.name()));
        in = box[i].min() <= dom.min() && dom.max() <= box[i].max() && dom.size() <= box[i].size();
        for (const auto& [lo, hi] : dom.intervals())
          for (fd::Value v = lo; in && v <= hi; ++v) in = box[i].contains(v);
      } else in = false;
    }
    if (in && ++inside >= size) return false;
  }
  return true;
}

/// Adds a new atom to the abduced set.
inline bool abduce_new(Context& ctx, State& s, const Formula& a) {
  std::vector<Term> args;
  for (std::size_t i = 0; i < a.args().size(); ++i) {
    Term t = resolve(s, a.args()[i]);
    auto dom = declared(ctx, a, i);
    if (t.is_arith() && !is_ground(t)) t = term_of(s, var_of(s, t));
    else if (t.is_arith()) t = *ground_value(s, t);
    if (t.is_var()) {
      if (dom) {
        if (!s.fd.count(t.name())) fd_var(s, t.name(), *dom);
        else if (!s.cs.intersect(s.fd.at(t.name()), *dom)) return false;
      } else {
        fd_var(s, t.name());
      }
    } else if (dom && (!t.is_int() || !dom->contains(t.value()))) {
      return false;
    }
    args.push_back(t);
  }
  Formula atom = Formula::atom(a.pred(), args);
  if (!room_for(s, atom)) return false;
  for (const auto& d : s.delta) {
    if (key_of(d) != key_of(atom)) continue;
    std::vector<fd::Var> xs, ys;
    bool distinct = false;
    for (std::size_t i = 0; i < args.size(); ++i) {
      Term x = deref(s, args[i]), y = deref(s, d.args()[i]);
      if (is_ground(x) && is_ground(y)) {
        if (x != y) distinct = true;
        continue;
      }
      if (x.is_sym() || y.is_sym()) {
        distinct = true;
        continue;
      }
      xs.push_back(var_of(s, x));
      ys.push_back(var_of(s, y));
    }
    if (distinct) continue;
    if (xs.empty()) return false;
    fd::add(s.cs, fd::TupleNotEqualC{xs, ys});
  }
  if (!s.cs.propagate()) return false;
  s.delta.push_back(atom);
  ctx.note("abduce", to_string(atom));
  notify_checked(s, atom);
  reducer::notify(ctx, s, atom);
  return s.cs.propagate();
}

/// Restricts the variable arguments of an open atom to the declared domains.
inline bool within_domains(Context& ctx, State& s, const Formula& a) {
  for (std::size_t i = 0; i < a.args().size(); ++i) {
    auto dom = declared(ctx, a, i);
    if (!dom) continue;
    Term t = deref(s, a.args()[i]);
    if (t.is_var()) {
      if (!s.fd.count(t.name())) fd_var(s, t.name(), *dom);
      else if (!s.cs.intersect(s.fd.at(t.name()), *dom)) return false;
    } else if (is_ground(t)) {
      auto g = ground_value(s, t);
      if (!g || !g->is_int() || !dom->contains(g->value())) return false;
    }
  }
  return s.cs.propagate();
}

/// Positive open atom: reuse an abduced atom or abduce a new one.
inline bool open_atom(Context& ctx, State& s, const Formula& a0, Alts& alts) {
  Formula a = resolve(s, a0);
  if (!within_domains(ctx, s, a)) return false;
  a = resolve(s, a0);
  std::vector<Formula> clp;
  std::vector<const Formula*> symbolic;
  for (const auto& d : s.delta) {
    if (key_of(d) != key_of(a)) continue;
    std::vector<Formula> eqs;
    bool possible = true, sym = false;
    for (std::size_t i = 0; i < a.args().size() && possible; ++i) {
      Term x = deref(s, a.args()[i]), y = deref(s, d.args()[i]);
      if (x == y) continue;
      if (is_ground(x) && is_ground(y)) {
        auto gx = ground_value(s, x);
        if (!gx || *gx != y) possible = false;
        continue;
      }
      if (x.is_sym() || y.is_sym()) {
        const Term& v = x.is_sym() ? y : x;
        if (unbound(s, v)) sym = true;
        else possible = false;
        continue;
      }
      eqs.push_back(Formula::compare(CmpOp::Eq, x, y));
    }
    if (!possible) continue;
    if (eqs.empty() && !sym) {
      ctx.note("reuse", to_string(a));
      return true;
    }
    if (sym) symbolic.push_back(&d);
    else clp.push_back(eqs.size() == 1 ? eqs[0] : Formula::conj(eqs));
  }
  std::vector<State> options;
  if (!clp.empty()) {
    State r = s;
    if (post(r, clp.size() == 1 ? clp[0] : Formula::disj(clp))) options.push_back(std::move(r));
  }
  for (const Formula* d : symbolic) {
    State r = s;
    bool ok = true;
    for (std::size_t i = 0; i < a.args().size() && ok; ++i) ok = unify(r, a.args()[i], d->args()[i]);
    if (ok) options.push_back(std::move(r));
  }
  if (!options.empty()) {
    State n = s;
    if (abduce_new(ctx, n, a)) options.push_back(std::move(n));
    if (options.empty()) return false;
    s = std::move(options.front());
    for (std::size_t i = 1; i < options.size(); ++i) alts.push_back(std::move(options[i]));
    return true;
  }
  return abduce_new(ctx, s, a);
}

/// Opens the set of a positive aggregate and links its result.
inline bool aggregate(Context& ctx, State& s, const Formula& f) {
  const int idx = reducer::open_set(ctx, s, resolve(s, f).agg());
  const auto& set = s.sets[static_cast<std::size_t>(idx)];
  Term r = Term::var(set.result);
  const std::string defined = set.defined;
  if (!defined.empty() && !post(s, Formula::compare(CmpOp::Eq, Term::var(defined), Term::integer(1)))) return false;
  if (!unify(s, f.agg().result, r)) return false;
  return s.cs.propagate();
}

}  // namespace steps
}  // namespace idlogic::engine
