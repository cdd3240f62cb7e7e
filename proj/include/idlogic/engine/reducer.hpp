#pragma once

// Aggregate reduction. A set expression is unfolded into candidate members,
// each guarded by a membership boolean; open atoms in the set body are matched
// against the abduced atoms and leave a watcher behind so later abductions add
// members. The aggregate relation itself is posted when the set is sealed.

#include <sstream>

#include "idlogic/completion.hpp"
#include "idlogic/engine/clp.hpp"

namespace idlogic::engine {

struct Context {
  Theory theory;
  Completion comp;
  std::vector<Diagnostic> diagnostics;
  // rule, selected literal, |work list|, |abduced|
  std::function<void(const std::string&, const std::string&, std::size_t, std::size_t)> trace;
  const State* current = nullptr;
  // Set bodies are read against a final delta: open atoms are not watched.
  bool closed = false;

  bool is_defined(const Formula& atom) const { return comp.is_defined(key_of(atom)); }
  void note(const std::string& rule, const std::string& what) const {
    if (trace) trace(rule, what, current ? current->theta.size() : 0, current ? current->delta.size() : 0);
  }
  void diagnose(const std::string& kind, const std::string& msg) {
    for (const auto& d : diagnostics)
      if (d.kind == kind && d.message == msg) return;
    diagnostics.push_back({kind, msg});
  }
};

/// Engine name of an FD variable, registering one if it has none.
inline Term term_of(State& s, fd::Var v) {
  for (const auto& [n, x] : s.fd)
    if (x == v) return Term::var(n);
  std::string n = s.fresh();
  s.fd.emplace(n, v);
  s.cs.set_name(v, n);
  return Term::var(n);
}

namespace reducer {

struct Branch {
  std::vector<Formula> goals;
  std::vector<Formula> conds;
  Binding bind;
  std::set<std::string> locals;
};

struct Sink {
  std::function<void(State&, Branch&)> complete;
  std::function<void(State&, Watcher)> watch;
};

inline bool unbound_local(const Branch& b, const Term& t) {
  return t.is_var() && b.locals.count(t.name()) && !b.bind.count(t.name());
}

/// Substitutes bound locals, then state bindings.
inline Term lres(const State& s, const Branch& b, const Term& t) {
  if (t.is_var()) {
    auto it = b.bind.find(t.name());
    if (it != b.bind.end()) return lres(s, b, it->second);
    if (b.locals.count(t.name())) return t;
    return deref(s, t);
  }
  if (!t.is_arith()) return t;
  std::vector<Term> args;
  for (const auto& a : t.args()) args.push_back(lres(s, b, a));
  return Term::arith(t.op(), std::move(args));
}

inline Formula lres(const State& s, const Branch& b, const Formula& f) {
  return map_terms(f, [&](const Term& t) { return lres(s, b, t); });
}

inline std::set<std::string> unbound_in(const Branch& b, const Formula& f) {
  std::set<std::string> out;
  for (const auto& v : free_vars(f))
    if (b.locals.count(v) && !b.bind.count(v)) out.insert(v);
  return out;
}

inline std::set<std::string> unbound_in(const Branch& b, const Term& t) {
  std::set<std::string> out;
  for (const auto& v : free_vars(t))
    if (b.locals.count(v) && !b.bind.count(v)) out.insert(v);
  return out;
}

inline Formula rename_locals(State& s, Branch& b, const std::vector<std::string>& vs, const Formula& body) {
  Binding ren;
  for (const auto& v : vs) {
    std::string n = s.fresh("#s");
    ren[v] = Term::var(n);
    b.locals.insert(n);
  }
  return substitute(body, ren);
}

/// Matches pattern arguments (may hold locals) with abduced atom arguments.
inline bool match(const State& s, Branch& b, const Formula& pattern, const Formula& delta) {
  for (std::size_t i = 0; i < pattern.args().size(); ++i) {
    Term p = lres(s, b, pattern.args()[i]);
    Term a = deref(s, delta.args()[i]);
    if (unbound_local(b, p)) {
      b.bind[p.name()] = a;
      continue;
    }
    if (is_ground(p) && is_ground(a)) {
      auto pv = ground_value(s, p);
      if (!pv || *pv != a) return false;
      continue;
    }
    b.conds.push_back(Formula::compare(CmpOp::Eq, p, a));
  }
  return true;
}

/// Thrown when a set body needs an open atom under negation (or in a lambda)
/// before abduction is over. Such a set is expanded again at the leaf.
struct Deferred {};

inline int open_set(Context& ctx, State& s, const Aggregate& a);
inline void defer(State& s, std::size_t i);
inline void expand(Context& ctx, State& s, Branch b, const Sink& sink);

inline std::string describe(const Formula& g) { return to_string(g); }

/// Collects the complete branches of a closed sub-formula; open atoms refused.
inline std::vector<Branch> sub_expand(Context& ctx, State& s, const Branch& parent, const Formula& g,
                                      const char* what) {
  std::vector<Branch> done;
  Sink sink{[&](State&, Branch& br) { done.push_back(br); },
            [&](State&, Watcher) {
              if (!ctx.closed) throw Deferred{};
            }};
  Branch sub{{g}, {}, parent.bind, parent.locals};
  expand(ctx, s, std::move(sub), sink);
  return done;
}

/// Value of the lambda for one member.
inline Term function_value(Context& ctx, State& s, const FuncExpr& fe, const std::vector<Term>& value) {
  if (fe.term) {
    Binding direct;
    for (std::size_t i = 0; i < fe.params.size(); ++i) direct[fe.params[i]] = value[i];
    return resolve(s, substitute(*fe.term, direct));
  }
  Branch b;
  Binding args;
  for (std::size_t i = 0; i < fe.params.size(); ++i) {
    std::string n = s.fresh("#s");
    b.locals.insert(n);
    b.bind[n] = value[i];
    args[fe.params[i]] = Term::var(n);
  }
  std::string res = s.fresh("#s");
  b.locals.insert(res);
  args[*fe.result] = Term::var(res);
  auto done = sub_expand(ctx, s, b, substitute(fe.body, args), "lambda");
  std::optional<Term> out;
  bool conditional = false;
  for (auto& br : done) {
    Term v = lres(s, br, Term::var(res));
    if (unbound_in(br, v).size()) throw NonFunctional("lambda leaves its result unbound");
    if (!br.conds.empty()) conditional = true;
    else if (out && *out != v) throw NonFunctional("lambda has several values for a member");
    else out = v;
  }
  if (done.empty()) throw NonFunctional("lambda has no value for a member");
  if (!conditional) return *out;
  // The value depends on the member's FD variables: each branch fixes it
  // when its conditions hold, and some branch must hold.
  std::vector<fd::Var> vals;
  Value lo = fd::kMaxValue, hi = fd::kMinValue;
  for (auto& br : done) {
    vals.push_back(var_of(s, lres(s, br, Term::var(res))));
    lo = std::min(lo, s.cs.min(vals.back()));
    hi = std::max(hi, s.cs.max(vals.back()));
  }
  const fd::Var f = var_of(s, Term::var(new_fd(s, lo, hi)));
  std::vector<fd::LinTerm> any;
  for (std::size_t i = 0; i < done.size(); ++i) {
    auto& br = done[i];
    for (auto& c : br.conds) c = lres(s, br, c);
    const fd::Var when = br.conds.empty() ? s.cs.constant(1) : reify(s, Formula::conj(br.conds));
    const fd::Var v = vals[i];
    const fd::Var same = fd::reify(s.cs, fd::lin({{1, f}, {-1, v}}, fd::Op::Eq, 0));
    fd::add(s.cs, fd::lin({{1, same}, {-1, when}}, fd::Op::Ge, 0));
    any.push_back({1, when});
  }
  fd::add(s.cs, fd::lin(any, fd::Op::Ge, 1));
  return term_of(s, f);
}

inline void add_member(Context& ctx, State& s, int idx, Branch& br) {
  std::vector<Term> value;
  bool ground = true;
  for (const auto& p : s.sets[static_cast<std::size_t>(idx)].set.params) {
    Term v = lres(s, br, Term::var(p));
    if (!unbound_in(br, v).empty())
      throw UnsupportedError("UnsupportedSetExpression", "set variable left unbound by " + s.sets[static_cast<std::size_t>(idx)].origin);
    if (v.is_arith()) v = term_of(s, var_of(s, v));
    if (!is_ground(v)) ground = false;
    value.push_back(v);
  }
  for (auto& c : br.conds) c = lres(s, br, c);
  fd::Var b = br.conds.empty() ? s.cs.constant(1)
                               : reify(s, br.conds.size() == 1 ? br.conds[0] : Formula::conj(br.conds));
  auto& set = s.sets[static_cast<std::size_t>(idx)];
  if (ground) {
    for (auto& m : set.members)
      if (m.value == value) {
        m.bools.push_back(b);
        return;
      }
  }
  Member m{value, {b}, std::nullopt};
  if (set.func) {
    FuncExpr fe = *set.func;
    m.fvalue = function_value(ctx, s, fe, value);
  }
  s.sets[static_cast<std::size_t>(idx)].members.push_back(std::move(m));
}

inline Sink set_sink(Context& ctx, int idx) {
  return Sink{[&ctx, idx](State& s, Branch& br) { add_member(ctx, s, idx, br); },
              [&ctx, idx](State& s, Watcher w) {
                if (!ctx.closed) s.sets[static_cast<std::size_t>(idx)].watchers.push_back(std::move(w));
              }};
}

inline void expand(Context& ctx, State& s, Branch b, const Sink& sink) {
  using K = Formula::Kind;
  std::size_t stalled = 0;
  while (!b.goals.empty()) {
    Formula g = lres(s, b, b.goals.front());
    b.goals.erase(b.goals.begin());
    auto delay = [&] {
      b.goals.push_back(g);
      if (++stalled > b.goals.size())
        throw UnsupportedError("UnsupportedSetExpression", "cannot evaluate " + describe(g) + " inside a set expression");
    };
    auto front = [&](std::vector<Formula> fs) { b.goals.insert(b.goals.begin(), fs.begin(), fs.end()); };
    switch (g.kind()) {
      case K::True: break;
      case K::False: return;
      case K::And: front(g.kids()); break;
      case K::Or: {
        for (std::size_t i = 1; i < g.kids().size(); ++i) {
          Branch alt = b;
          alt.goals.insert(alt.goals.begin(), g.kid(i));
          expand(ctx, s, std::move(alt), sink);
        }
        front({g.kid(0)});
        break;
      }
      case K::Exists: front({rename_locals(s, b, g.vars(), g.kid())}); break;
      case K::Implies: front({Formula::disj(Formula::negation(g.kid(0)), g.kid(1))}); break;
      case K::Forall:
        front({Formula::negation(Formula::exists(g.vars(), Formula::negation(g.kid())))});
        break;
      case K::Atom: {
        if (ctx.is_defined(g)) {
          front({ctx.comp.instantiate(g)});
          break;
        }
        std::vector<Formula> rest(b.goals.begin(), b.goals.end());
        sink.watch(s, Watcher{g, rest, b.conds, b.bind, b.locals});
        const std::vector<Formula> delta = s.delta;
        for (const auto& d : delta) {
          if (key_of(d) != key_of(g)) continue;
          Branch alt = b;
          if (match(s, alt, g, d)) expand(ctx, s, std::move(alt), sink);
        }
        return;
      }
      case K::Compare: {
        if (g.cmp() == CmpOp::In && unbound_local(b, g.lhs()) && unbound_in(b, g.lo()).empty() &&
            unbound_in(b, g.hi()).empty()) {
          auto lo = ground_value(s, g.lo()), hi = ground_value(s, g.hi());
          if (!lo || !hi || !lo->is_int() || !hi->is_int())
            throw UnsupportedError("UnsupportedSetExpression", "range bounds not known in " + describe(g));
          if (hi->value() - lo->value() > 100000)
            throw UnsupportedError("UnsupportedSetExpression", "range too wide in " + describe(g));
          for (auto v = lo->value(); v <= hi->value(); ++v) {
            Branch alt = b;
            alt.bind[g.lhs().name()] = Term::integer(v);
            expand(ctx, s, std::move(alt), sink);
          }
          return;
        }
        if (g.cmp() == CmpOp::Eq) {
          Term l = g.lhs(), r = g.rhs();
          if (!unbound_local(b, l)) std::swap(l, r);
          if (unbound_local(b, l) && unbound_in(b, r).empty()) {
            if (r.is_arith() && !is_ground(r)) r = term_of(s, var_of(s, r));
            else if (r.is_arith()) r = *ground_value(s, r);
            b.bind[l.name()] = r;
            stalled = 0;
            break;
          }
        }
        if (!unbound_in(b, g).empty()) {
          delay();
          continue;
        }
        if (auto t = ground_truth(s, g)) {
          if (!*t) return;
          break;
        }
        b.conds.push_back(g);
        break;
      }
      case K::Not: {
        if (!unbound_in(b, g).empty()) {
          delay();
          continue;
        }
        if (is_clp(s, g.kid())) {
          if (auto t = ground_truth(s, g)) {
            if (!*t) return;
            break;
          }
          b.conds.push_back(g);
          break;
        }
        auto done = sub_expand(ctx, s, b, g.kid(), "negation");
        std::vector<Formula> alts;
        bool certain = false;
        for (auto& br : done) {
          if (br.conds.empty()) certain = true;
          else alts.push_back(br.conds.size() == 1 ? br.conds[0] : Formula::conj(br.conds));
        }
        if (certain) return;
        if (!alts.empty()) b.conds.push_back(Formula::negation(alts.size() == 1 ? alts[0] : Formula::disj(alts)));
        break;
      }
      case K::Aggregate: {
        Aggregate a = g.agg();
        auto inner = free_vars(a.set);
        if (a.func) {
          auto fv = free_vars(*a.func);
          inner.insert(fv.begin(), fv.end());
        }
        bool waiting = false;
        for (const auto& v : inner)
          if (b.locals.count(v) && !b.bind.count(v)) waiting = true;
        if (waiting) {
          delay();
          continue;
        }
        const int idx = open_set(ctx, s, a);
        const auto& set = s.sets[static_cast<std::size_t>(idx)];
        Term r = Term::var(set.result);
        if (a.kind == AggKind::Minimum || a.kind == AggKind::Maximum)
          b.conds.push_back(Formula::compare(CmpOp::Eq, Term::var(set.defined), Term::integer(1)));
        if (unbound_local(b, a.result)) b.bind[a.result.name()] = r;
        else b.conds.push_back(Formula::compare(CmpOp::Eq, a.result, r));
        break;
      }
    }
    stalled = 0;
  }
  sink.complete(s, b);
}

/// Creates the unfolded set for `a` (already resolved against the state).
inline int open_set(Context& ctx, State& s, const Aggregate& a) {
  UnfoldedSet u;
  u.kind = a.kind;
  u.origin = to_string(Formula::aggregate(a));
  Branch b;
  Binding ren;
  for (const auto& p : a.set.params) {
    std::string n = s.fresh("#s");
    ren[p] = Term::var(n);
    b.locals.insert(n);
    u.set.params.push_back(n);
  }
  u.set.body = substitute(a.set.body, ren);
  u.func = a.func;
  const Value lo = a.kind == AggKind::Card ? 0 : fd::kMinValue;
  u.result = new_fd(s, lo, fd::kMaxValue);
  if (a.kind == AggKind::Minimum || a.kind == AggKind::Maximum) u.defined = new_fd(s, 0, 1, fd::Role::Boolean);
  b.goals.push_back(u.set.body);
  s.sets.push_back(std::move(u));
  const int idx = static_cast<int>(s.sets.size()) - 1;
  ctx.note("aggregate", s.sets.back().origin);
  try {
    expand(ctx, s, std::move(b), set_sink(ctx, idx));
  } catch (const Deferred&) {
    defer(s, static_cast<std::size_t>(idx));
  }
  return idx;
}

inline void defer(State& s, std::size_t i) {
  s.sets[i].members.clear();
  s.sets[i].watchers.clear();
  s.sets[i].deferred = true;
}

/// Expands a deferred set against the final delta.
inline void reopen(Context& ctx, State& s, std::size_t i) {
  if (!s.sets[i].deferred) return;
  s.sets[i].deferred = false;
  Branch b;
  for (const auto& p : s.sets[i].set.params) b.locals.insert(p);
  b.goals.push_back(s.sets[i].set.body);
  ctx.note("reopen", s.sets[i].origin);
  ctx.closed = true;
  try {
    expand(ctx, s, std::move(b), set_sink(ctx, static_cast<int>(i)));
  } catch (...) {
    ctx.closed = false;
    throw;
  }
  ctx.closed = false;
}

/// Resumes every watcher of every set on a newly abduced atom.
inline void notify(Context& ctx, State& s, const Formula& atom) {
  const std::size_t nsets = s.sets.size();
  for (std::size_t i = 0; i < nsets; ++i) {
    const std::size_t nw = s.sets[i].watchers.size();
    for (std::size_t j = 0; j < nw && !s.sets[i].deferred; ++j) {
      Watcher w = s.sets[i].watchers[j];
      if (key_of(w.pattern) != key_of(atom)) continue;
      Branch b{w.goals, w.conds, w.bind, w.locals};
      try {
        if (match(s, b, w.pattern, atom)) expand(ctx, s, std::move(b), set_sink(ctx, static_cast<int>(i)));
      } catch (const Deferred&) {
        defer(s, i);
      }
    }
  }
}

inline fd::Var var_term(State& s, const Term& t) { return var_of(s, t); }

/// Posts the aggregate relation of set i over its current members.
/// Posts the relation between membership and result. With `relaxed` the
/// relation only says what more members could still reach: a count can grow,
/// other kinds are left free.
inline void seal(State& s, std::size_t i, bool relaxed = false) {
  auto& set = s.sets[i];
  if (relaxed && set.kind != AggKind::Card) return;
  const bool extremum = set.kind == AggKind::Minimum || set.kind == AggKind::Maximum;
  std::vector<fd::Var> B;
  for (const auto& m : set.members) {
    if (m.bools.size() == 1) {
      B.push_back(m.bools[0]);
      continue;
    }
    std::vector<fd::LinTerm> ts;
    for (auto b : m.bools) ts.push_back({1, b});
    B.push_back(fd::reify(s.cs, fd::lin(ts, fd::Op::Ge, 1)));
  }
  const std::vector<Member> members = set.members;
  const AggKind kind = set.kind;
  const fd::Var R = var_of(s, Term::var(set.result));
  // Members whose values may coincide count once: E_i = B_i and no earlier
  // selected member has the same value.
  std::vector<fd::Var> E = B;
  if (!extremum) {
    for (std::size_t a = 0; a < members.size(); ++a) {
      std::vector<fd::LinTerm> dups;
      for (std::size_t c = 0; c < a; ++c) {
        std::vector<Formula> eqs;
        bool distinct = false;
        for (std::size_t k = 0; k < members[a].value.size(); ++k) {
          const Term &x = members[a].value[k], &y = members[c].value[k];
          if (is_ground(x) && is_ground(y)) {
            if (x != y) distinct = true;
            continue;
          }
          if (x.is_sym() || y.is_sym()) {
            distinct = true;
            continue;
          }
          eqs.push_back(Formula::compare(CmpOp::Eq, x, y));
        }
        if (distinct) continue;
        fd::Var same = eqs.empty() ? s.cs.constant(1) : reify(s, Formula::conj(eqs));
        dups.push_back({-1, fd::reify(s.cs, fd::lin({{1, B[c]}, {1, same}}, fd::Op::Ge, 2))});
      }
      if (dups.empty()) continue;
      dups.push_back({1, B[a]});
      E[a] = fd::reify(s.cs, fd::lin(dups, fd::Op::Ge, 1));
    }
  }
  switch (kind) {
    case AggKind::Card: {
      if (relaxed) {
        const fd::Var low = var_of(s, Term::var(new_fd(s, 0, static_cast<Value>(members.size()))));
        fd::add(s.cs, fd::BoolSumC{low, E});
        fd::add(s.cs, fd::lin({{1, R}, {-1, low}}, fd::Op::Ge, 0));
        break;
      }
      s.cs.set_max(R, static_cast<Value>(members.size()));
      fd::add(s.cs, fd::BoolSumC{R, E});
      break;
    }
    case AggKind::Sum: {
      std::vector<std::pair<fd::Var, fd::Var>> ps;
      for (std::size_t a = 0; a < members.size(); ++a) ps.push_back({E[a], var_of(s, *members[a].fvalue)});
      fd::add(s.cs, fd::WeightedBoolSumC{R, ps});
      break;
    }
    case AggKind::Product: {
      std::vector<std::pair<fd::Var, fd::Var>> ps;
      __int128 bound = 1;
      for (std::size_t a = 0; a < members.size(); ++a) {
        fd::Var f = var_of(s, *members[a].fvalue);
        bound *= std::max<__int128>(std::max<__int128>(-static_cast<__int128>(s.cs.min(f)), s.cs.max(f)), 1);
        if (bound > fd::kMaxValue) throw fd::OverflowError("product aggregate may exceed the integer range: " + set.origin);
        ps.push_back({E[a], f});
      }
      fd::add(s.cs, fd::ProductSelectedC{R, ps});
      break;
    }
    case AggKind::Minimum:
    case AggKind::Maximum: {
      const fd::Var D = var_of(s, Term::var(s.sets[i].defined));
      std::vector<fd::LinTerm> ts;
      std::vector<std::pair<fd::Var, fd::Var>> ps;
      for (std::size_t a = 0; a < members.size(); ++a) {
        ts.push_back({1, B[a]});
        ps.push_back({B[a], var_of(s, members[a].value[0])});
      }
      fd::add(s.cs, fd::ReifiedC{D, fd::lin(ts, fd::Op::Ge, 1)});
      fd::add(s.cs, fd::ExtremumSelectedC{R, ps, D, kind == AggKind::Maximum});
      break;
    }
  }
}

inline std::string dump(const State& s) {
  std::ostringstream os;
  for (std::size_t i = 0; i < s.sets.size(); ++i) {
    const auto& set = s.sets[i];
    os << "set " << i << ": " << set.origin << "\n  result " << set.result << " in "
       << s.cs.dom(s.fd.at(set.result)).str() << "\n";
    for (const auto& m : set.members) {
      os << "  member (";
      for (std::size_t k = 0; k < m.value.size(); ++k) os << (k ? "," : "") << to_string(m.value[k]);
      os << ")";
      for (auto b : m.bools) os << " if b" << b.id << s.cs.dom(b).str();
      if (m.fvalue) os << " value " << to_string(*m.fvalue);
      os << "\n";
    }
    for (const auto& w : set.watchers) os << "  watching " << to_string(w.pattern) << "\n";
  }
  return os.str();
}

}  // namespace reducer
}  // namespace idlogic::engine
