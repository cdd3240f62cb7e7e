#pragma once

// Abstract syntax for ID-logic theories with aggregates: terms, formulas,
// set/function expressions, rules, definitions, theories and queries.
//
// Trees are immutable and shared; copying a Term or Formula is a pointer copy.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace idlogic {

enum class ArithOp { Add, Sub, Mul, Abs };

class Term {
 public:
  enum class Kind { Var, Sym, Int, Arith };

  Term() = default;

  static Term var(std::string name) { return Term(Node{Kind::Var, std::move(name), 0, ArithOp::Add, {}}); }
  static Term sym(std::string name) { return Term(Node{Kind::Sym, std::move(name), 0, ArithOp::Add, {}}); }
  static Term integer(std::int64_t v) { return Term(Node{Kind::Int, {}, v, ArithOp::Add, {}}); }
  static Term arith(ArithOp op, std::vector<Term> args) {
    const std::size_t want = op == ArithOp::Abs ? 1 : 2;
    if (args.size() != want) throw std::invalid_argument("arithmetic term arity mismatch");
    return Term(Node{Kind::Arith, {}, 0, op, std::move(args)});
  }

  bool valid() const { return node_ != nullptr; }
  Kind kind() const { return node_->kind; }
  bool is_var() const { return node_ && node_->kind == Kind::Var; }
  bool is_sym() const { return node_ && node_->kind == Kind::Sym; }
  bool is_int() const { return node_ && node_->kind == Kind::Int; }
  bool is_arith() const { return node_ && node_->kind == Kind::Arith; }
  const std::string& name() const { return node_->name; }
  std::int64_t value() const { return node_->value; }
  ArithOp op() const { return node_->op; }
  const std::vector<Term>& args() const { return node_->args; }

  bool operator==(const Term& o) const {
    if (node_ == o.node_) return true;
    if (!node_ || !o.node_) return false;
    if (node_->kind != o.node_->kind) return false;
    switch (node_->kind) {
      case Kind::Var:
      case Kind::Sym: return node_->name == o.node_->name;
      case Kind::Int: return node_->value == o.node_->value;
      case Kind::Arith: return node_->op == o.node_->op && node_->args == o.node_->args;
    }
    return false;
  }
  bool operator!=(const Term& o) const { return !(*this == o); }
  /// Total order: integers before symbols before variables before arithmetic.
  bool operator<(const Term& o) const {
    auto rank = [](Kind k) { return k == Kind::Int ? 0 : k == Kind::Sym ? 1 : k == Kind::Var ? 2 : 3; };
    if (kind() != o.kind()) return rank(kind()) < rank(o.kind());
    switch (kind()) {
      case Kind::Int: return value() < o.value();
      case Kind::Sym:
      case Kind::Var: return name() < o.name();
      case Kind::Arith:
        if (op() != o.op()) return op() < o.op();
        return args() < o.args();
    }
    return false;
  }

 private:
  struct Node {
    Kind kind;
    std::string name;
    std::int64_t value;
    ArithOp op;
    std::vector<Term> args;
  };
  explicit Term(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}
  std::shared_ptr<const Node> node_;
};

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge, In };
enum class AggKind { Card, Sum, Product, Minimum, Maximum };

inline const char* to_string(AggKind k) {
  switch (k) {
    case AggKind::Card: return "card";
    case AggKind::Sum: return "sum";
    case AggKind::Product: return "product";
    case AggKind::Minimum: return "minimum";
    case AggKind::Maximum: return "maximum";
  }
  return "?";
}

inline const char* to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "\\=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "=<";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    case CmpOp::In: return "in";
  }
  return "?";
}

class Formula;
struct Aggregate;

class Formula {
 public:
  enum class Kind { True, False, Atom, Compare, Not, And, Or, Exists, Forall, Implies, Aggregate };

  Formula() : Formula(make(Kind::True)) {}

  static Formula truth() { return Formula(make(Kind::True)); }
  static Formula falsity() { return Formula(make(Kind::False)); }
  static Formula atom(std::string pred, std::vector<Term> args) {
    Node n = make(Kind::Atom);
    n.pred = std::move(pred);
    n.args = std::move(args);
    return Formula(std::move(n));
  }
  static Formula compare(CmpOp op, Term lhs, Term rhs) {
    if (op == CmpOp::In) throw std::invalid_argument("use Formula::in_range");
    Node n = make(Kind::Compare);
    n.cmp = op;
    n.args = {std::move(lhs), std::move(rhs)};
    return Formula(std::move(n));
  }
  static Formula in_range(Term x, Term lo, Term hi) {
    Node n = make(Kind::Compare);
    n.cmp = CmpOp::In;
    n.args = {std::move(x), std::move(lo), std::move(hi)};
    return Formula(std::move(n));
  }
  static Formula negation(Formula f) {
    Node n = make(Kind::Not);
    n.kids = {std::move(f)};
    return Formula(std::move(n));
  }
  static Formula conj(std::vector<Formula> fs) { return nary(Kind::And, std::move(fs)); }
  static Formula disj(std::vector<Formula> fs) { return nary(Kind::Or, std::move(fs)); }
  static Formula conj(Formula a, Formula b) { return conj(std::vector<Formula>{std::move(a), std::move(b)}); }
  static Formula disj(Formula a, Formula b) { return disj(std::vector<Formula>{std::move(a), std::move(b)}); }
  static Formula exists(std::vector<std::string> vars, Formula body) { return quant(Kind::Exists, std::move(vars), std::move(body)); }
  static Formula forall(std::vector<std::string> vars, Formula body) { return quant(Kind::Forall, std::move(vars), std::move(body)); }
  static Formula implies(Formula a, Formula b) {
    Node n = make(Kind::Implies);
    n.kids = {std::move(a), std::move(b)};
    return Formula(std::move(n));
  }
  static Formula aggregate(Aggregate a);

  Kind kind() const { return node_->kind; }
  bool is(Kind k) const { return node_->kind == k; }
  const std::string& pred() const { return node_->pred; }
  const std::vector<Term>& args() const { return node_->args; }
  CmpOp cmp() const { return node_->cmp; }
  const Term& lhs() const { return node_->args[0]; }
  const Term& rhs() const { return node_->args[1]; }
  // Range bounds of an `in` comparison.
  const Term& lo() const { return node_->args[1]; }
  const Term& hi() const { return node_->args[2]; }
  const std::vector<Formula>& kids() const { return node_->kids; }
  const Formula& kid(std::size_t i = 0) const { return node_->kids[i]; }
  const std::vector<std::string>& vars() const { return node_->vars; }
  const Aggregate& agg() const { return *node_->agg; }

  bool same_node(const Formula& o) const { return node_ == o.node_; }
  /// Identity of the shared node; stable while any copy is alive.
  const void* id() const { return node_.get(); }

 private:
  struct Node {
    Kind kind;
    std::string pred;
    std::vector<Term> args;
    CmpOp cmp = CmpOp::Eq;
    std::vector<Formula> kids;
    std::vector<std::string> vars;
    std::shared_ptr<const Aggregate> agg;
  };
  static Node make(Kind k) {
    Node n;
    n.kind = k;
    return n;
  }
  static Formula nary(Kind k, std::vector<Formula> fs) {
    Node n = make(k);
    n.kids = std::move(fs);
    return Formula(std::move(n));
  }
  static Formula quant(Kind k, std::vector<std::string> vars, Formula body) {
    Node n = make(k);
    n.vars = std::move(vars);
    n.kids = {std::move(body)};
    return Formula(std::move(n));
  }
  explicit Formula(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}
  std::shared_ptr<const Node> node_;
};

/// `{ params | body }`
struct SetExpr {
  std::vector<std::string> params;
  Formula body;
};

/// `lambda([params], result where body)` or the arithmetic shorthand
/// `lambda([params], term)`.
struct FuncExpr {
  std::vector<std::string> params;
  std::optional<std::string> result;
  Formula body;
  std::optional<Term> term;
};

struct Aggregate {
  AggKind kind = AggKind::Card;
  SetExpr set;
  std::optional<FuncExpr> func;
  Term result;
};

inline Formula Formula::aggregate(Aggregate a) {
  const bool needs_func = a.kind == AggKind::Sum || a.kind == AggKind::Product;
  if (needs_func != a.func.has_value())
    throw std::invalid_argument(std::string(to_string(a.kind)) + (needs_func ? " requires" : " takes no") +
                                " function expression");
  if (a.func && a.func->params.size() != a.set.params.size())
    throw std::invalid_argument("function expression arity differs from set expression arity");
  Node n = make(Kind::Aggregate);
  n.agg = std::make_shared<const Aggregate>(std::move(a));
  return Formula(std::move(n));
}

/// Predicate identity: name plus arity.
struct PredKey {
  std::string name;
  std::size_t arity = 0;
  auto operator<=>(const PredKey&) const = default;
  std::string str() const { return name + "/" + std::to_string(arity); }
};

inline PredKey key_of(const Formula& atom) { return {atom.pred(), atom.args().size()}; }

struct Rule {
  std::string head;
  std::vector<Term> head_args;
  Formula body;
  PredKey key() const { return {head, head_args.size()}; }
};

struct Definition {
  std::set<PredKey> defined;
  std::vector<Rule> rules;
};

struct Range {
  std::int64_t lo = 0;
  std::int64_t hi = -1;
  auto operator<=>(const Range&) const = default;
  std::uint64_t size() const { return hi < lo ? 0 : static_cast<std::uint64_t>(hi - lo) + 1; }
};

struct Theory {
  std::vector<Definition> definitions;
  std::vector<Formula> axioms;
  /// Argument ranges of open predicates (`open p(1..3, 1..2).`).
  std::map<PredKey, std::vector<Range>> domains;

  std::set<PredKey> defined() const {
    std::set<PredKey> out;
    for (const auto& d : definitions) out.insert(d.defined.begin(), d.defined.end());
    return out;
  }
};

enum class Sense { Minimize, Maximize };

struct Objective {
  Sense sense = Sense::Maximize;
  std::string var;
};

struct Query {
  Formula goal;
  std::optional<Objective> objective;
};

// ---------------------------------------------------------------------------
// Traversal

inline void collect_vars(const Term& t, std::set<std::string>& out) {
  if (!t.valid()) return;
  switch (t.kind()) {
    case Term::Kind::Var: out.insert(t.name()); break;
    case Term::Kind::Arith:
      for (const auto& a : t.args()) collect_vars(a, out);
      break;
    default: break;
  }
}

inline std::set<std::string> free_vars(const Term& t) {
  std::set<std::string> out;
  collect_vars(t, out);
  return out;
}

std::set<std::string> free_vars(const Formula& f);

inline std::set<std::string> free_vars(const SetExpr& s) {
  auto fv = free_vars(s.body);
  for (const auto& p : s.params) fv.erase(p);
  return fv;
}

inline std::set<std::string> free_vars(const FuncExpr& fe) {
  std::set<std::string> fv;
  if (fe.term) {
    fv = free_vars(*fe.term);
  } else {
    fv = free_vars(fe.body);
    if (fe.result) fv.erase(*fe.result);
  }
  for (const auto& p : fe.params) fv.erase(p);
  return fv;
}

inline std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> out;
  switch (f.kind()) {
    case Formula::Kind::True:
    case Formula::Kind::False: break;
    case Formula::Kind::Atom:
    case Formula::Kind::Compare:
      for (const auto& a : f.args()) collect_vars(a, out);
      break;
    case Formula::Kind::Not:
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Implies:
      for (const auto& k : f.kids()) {
        auto s = free_vars(k);
        out.insert(s.begin(), s.end());
      }
      break;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      out = free_vars(f.kid());
      for (const auto& v : f.vars()) out.erase(v);
      break;
    }
    case Formula::Kind::Aggregate: {
      const auto& a = f.agg();
      out = free_vars(a.set);
      if (a.func) {
        auto s = free_vars(*a.func);
        out.insert(s.begin(), s.end());
      }
      collect_vars(a.result, out);
      break;
    }
  }
  return out;
}

/// Calls `fn` on every atom in `f`, including atoms inside set and function
/// expression bodies.
inline void for_each_atom(const Formula& f, const std::function<void(const Formula&)>& fn) {
  switch (f.kind()) {
    case Formula::Kind::Atom: fn(f); break;
    case Formula::Kind::Not:
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Implies:
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      for (const auto& k : f.kids()) for_each_atom(k, fn);
      break;
    case Formula::Kind::Aggregate:
      for_each_atom(f.agg().set.body, fn);
      if (f.agg().func && !f.agg().func->term) for_each_atom(f.agg().func->body, fn);
      break;
    default: break;
  }
}

inline bool contains_aggregate(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Aggregate: return true;
    case Formula::Kind::Not:
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Implies:
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      for (const auto& k : f.kids())
        if (contains_aggregate(k)) return true;
      return false;
    default: return false;
  }
}

// ---------------------------------------------------------------------------
// Substitution

using Binding = std::map<std::string, Term>;

inline Term substitute(const Term& t, const Binding& b) {
  if (!t.valid() || b.empty()) return t;
  switch (t.kind()) {
    case Term::Kind::Var: {
      auto it = b.find(t.name());
      return it == b.end() ? t : it->second;
    }
    case Term::Kind::Arith: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      bool changed = false;
      for (const auto& a : t.args()) {
        args.push_back(substitute(a, b));
        changed = changed || !args.back().valid() || !(args.back() == a);
      }
      return changed ? Term::arith(t.op(), std::move(args)) : t;
    }
    default: return t;
  }
}

namespace detail {

inline std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  for (int i = 1;; ++i) {
    std::string cand = base + "__" + std::to_string(i);
    if (!avoid.count(cand)) return cand;
  }
}

// Free variables of the replacement terms of `b` restricted to keys in `live`.
inline std::set<std::string> range_vars(const Binding& b, const std::set<std::string>& live) {
  std::set<std::string> out;
  for (const auto& [k, t] : b)
    if (live.count(k)) collect_vars(t, out);
  return out;
}

// Drops `bound` from the binding; renames bound variables that would capture a
// variable of a replacement term. Returns the (possibly renamed) bound list and
// the binding to use inside the scope.
inline std::pair<std::vector<std::string>, Binding> enter_scope(const std::vector<std::string>& bound,
                                                                  const Binding& b,
                                                                  const std::set<std::string>& body_free) {
  Binding inner = b;
  for (const auto& v : bound) inner.erase(v);
  const auto captured = range_vars(inner, body_free);
  std::vector<std::string> names = bound;
  std::set<std::string> avoid = captured;
  avoid.insert(body_free.begin(), body_free.end());
  for (const auto& [k, t] : inner) {
    avoid.insert(k);
    collect_vars(t, avoid);
  }
  for (auto& v : names) {
    if (captured.count(v)) {
      std::string nv = fresh_name(v, avoid);
      avoid.insert(nv);
      inner[v] = Term::var(nv);
      v = nv;
    }
  }
  return {names, inner};
}

}  // namespace detail

Formula substitute(const Formula& f, const Binding& b);

inline SetExpr substitute(const SetExpr& s, const Binding& b) {
  auto [params, inner] = detail::enter_scope(s.params, b, free_vars(s.body));
  return SetExpr{params, substitute(s.body, inner)};
}

inline FuncExpr substitute(const FuncExpr& fe, const Binding& b) {
  std::vector<std::string> bound = fe.params;
  if (fe.result) bound.push_back(*fe.result);
  std::set<std::string> body_free = fe.term ? free_vars(*fe.term) : free_vars(fe.body);
  auto [names, inner] = detail::enter_scope(bound, b, body_free);
  FuncExpr out;
  out.params.assign(names.begin(), names.begin() + static_cast<std::ptrdiff_t>(fe.params.size()));
  if (fe.result) out.result = names.back();
  if (fe.term)
    out.term = substitute(*fe.term, inner);
  else
    out.body = substitute(fe.body, inner);
  return out;
}

/// Simultaneous, capture-avoiding substitution.
inline Formula substitute(const Formula& f, const Binding& b) {
  if (b.empty()) return f;
  switch (f.kind()) {
    case Formula::Kind::True:
    case Formula::Kind::False: return f;
    case Formula::Kind::Atom: {
      std::vector<Term> args;
      args.reserve(f.args().size());
      for (const auto& a : f.args()) args.push_back(substitute(a, b));
      return Formula::atom(f.pred(), std::move(args));
    }
    case Formula::Kind::Compare:
      if (f.cmp() == CmpOp::In) return Formula::in_range(substitute(f.lhs(), b), substitute(f.lo(), b), substitute(f.hi(), b));
      return Formula::compare(f.cmp(), substitute(f.lhs(), b), substitute(f.rhs(), b));
    case Formula::Kind::Not: return Formula::negation(substitute(f.kid(), b));
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<Formula> ks;
      ks.reserve(f.kids().size());
      for (const auto& k : f.kids()) ks.push_back(substitute(k, b));
      return f.is(Formula::Kind::And) ? Formula::conj(std::move(ks)) : Formula::disj(std::move(ks));
    }
    case Formula::Kind::Implies: return Formula::implies(substitute(f.kid(0), b), substitute(f.kid(1), b));
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      auto [names, inner] = detail::enter_scope(f.vars(), b, free_vars(f.kid()));
      auto body = substitute(f.kid(), inner);
      return f.is(Formula::Kind::Exists) ? Formula::exists(names, body) : Formula::forall(names, body);
    }
    case Formula::Kind::Aggregate: {
      const auto& a = f.agg();
      Aggregate out;
      out.kind = a.kind;
      out.set = substitute(a.set, b);
      if (a.func) out.func = substitute(*a.func, b);
      out.result = substitute(a.result, b);
      return Formula::aggregate(std::move(out));
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Printing (surface syntax)

inline void print_term(std::ostream& os, const Term& t, bool nested = false) {
  switch (t.kind()) {
    case Term::Kind::Var:
    case Term::Kind::Sym: os << t.name(); break;
    case Term::Kind::Int:
      if (t.value() < 0 && nested)
        os << '(' << t.value() << ')';
      else
        os << t.value();
      break;
    case Term::Kind::Arith:
      if (t.op() == ArithOp::Abs) {
        os << "abs(";
        print_term(os, t.args()[0]);
        os << ')';
        break;
      }
      if (nested) os << '(';
      print_term(os, t.args()[0], true);
      os << (t.op() == ArithOp::Add ? " + " : t.op() == ArithOp::Sub ? " - " : " * ");
      print_term(os, t.args()[1], true);
      if (nested) os << ')';
      break;
  }
}

inline std::string to_string(const Term& t) {
  std::ostringstream os;
  print_term(os, t);
  return os.str();
}

namespace detail {

inline void print_vars(std::ostream& os, const std::vector<std::string>& vs) {
  for (std::size_t i = 0; i < vs.size(); ++i) os << (i ? "," : "") << vs[i];
}

// Precedence: 1 implication, 2 disjunction, 3 conjunction, 4 unary/primary.
// Quantifiers extend as far right as possible, so they are parenthesized
// unless they are in a position of level <= 1.
inline void print_formula(std::ostream& os, const Formula& f, int ctx);

inline void print_set(std::ostream& os, const SetExpr& s) {
  os << "set([";
  print_vars(os, s.params);
  os << "], ";
  print_formula(os, s.body, 0);
  os << ')';
}

inline void print_func(std::ostream& os, const FuncExpr& fe) {
  os << "lambda([";
  print_vars(os, fe.params);
  os << "], ";
  if (fe.term) {
    print_term(os, *fe.term);
  } else {
    os << *fe.result << " where ";
    print_formula(os, fe.body, 4);
  }
  os << ')';
}

inline void print_formula(std::ostream& os, const Formula& f, int ctx) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::True: os << "true"; return;
    case K::False: os << "false"; return;
    case K::Atom:
      os << f.pred();
      if (!f.args().empty()) {
        os << '(';
        for (std::size_t i = 0; i < f.args().size(); ++i) {
          if (i) os << ',';
          print_term(os, f.args()[i]);
        }
        os << ')';
      }
      return;
    case K::Compare:
      print_term(os, f.lhs());
      if (f.cmp() == CmpOp::In) {
        os << " in ";
        print_term(os, f.lo(), true);
        os << "..";
        print_term(os, f.hi(), true);
      } else {
        os << ' ' << to_string(f.cmp()) << ' ';
        print_term(os, f.rhs());
      }
      return;
    case K::Not:
      os << "not ";
      print_formula(os, f.kid(), 4);
      return;
    case K::And:
    case K::Or: {
      if (f.kids().empty()) {
        os << (f.is(K::And) ? "true" : "false");
        return;
      }
      const int level = f.is(K::And) ? 3 : 2;
      const bool paren = ctx > level || f.kids().size() == 1;
      if (paren) os << '(';
      for (std::size_t i = 0; i < f.kids().size(); ++i) {
        if (i) os << (f.is(K::And) ? ", " : " ; ");
        print_formula(os, f.kids()[i], level + 1);
      }
      if (paren) os << ')';
      return;
    }
    case K::Implies:
      if (ctx > 1) os << '(';
      print_formula(os, f.kid(0), 2);
      os << " => ";
      print_formula(os, f.kid(1), 1);
      if (ctx > 1) os << ')';
      return;
    case K::Exists:
    case K::Forall:
      if (ctx > 1) os << '(';
      os << (f.is(K::Exists) ? "exists(" : "forall(");
      print_vars(os, f.vars());
      os << "): ";
      print_formula(os, f.kid(), 1);
      if (ctx > 1) os << ')';
      return;
    case K::Aggregate: {
      const auto& a = f.agg();
      os << to_string(a.kind) << '(';
      print_set(os, a.set);
      os << ", ";
      if (a.func) {
        print_func(os, *a.func);
        os << ", ";
      }
      print_term(os, a.result);
      os << ')';
      return;
    }
  }
}

}  // namespace detail

inline std::string to_string(const Formula& f) {
  std::ostringstream os;
  detail::print_formula(os, f, 0);
  return os.str();
}

inline std::string to_string(const Rule& r) {
  std::ostringstream os;
  os << to_string(Formula::atom(r.head, r.head_args));
  if (!r.body.is(Formula::Kind::True)) {
    os << " <- ";
    detail::print_formula(os, r.body, 0);
  }
  os << '.';
  return os.str();
}

inline std::string print_theory(const Theory& t) {
  std::ostringstream os;
  for (const auto& [k, ranges] : t.domains) {
    os << "open " << k.name;
    if (!ranges.empty()) {
      os << '(';
      for (std::size_t i = 0; i < ranges.size(); ++i) os << (i ? ", " : "") << ranges[i].lo << ".." << ranges[i].hi;
      os << ')';
    }
    os << ".\n";
  }
  for (const auto& d : t.definitions) {
    os << '\n';
    for (const auto& r : d.rules) os << to_string(r) << '\n';
  }
  if (!t.axioms.empty()) os << '\n';
  for (const auto& a : t.axioms) os << "fol " << to_string(a) << ".\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Alpha-equivalence

namespace detail {

using VarMap = std::map<std::string, std::string>;

inline bool alpha_eq(const Term& a, const Term& b, const VarMap& m, const VarMap& rm) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Term::Kind::Var: {
      auto it = m.find(a.name());
      auto rit = rm.find(b.name());
      if (it == m.end() && rit == rm.end()) return a.name() == b.name();
      return it != m.end() && it->second == b.name();
    }
    case Term::Kind::Sym: return a.name() == b.name();
    case Term::Kind::Int: return a.value() == b.value();
    case Term::Kind::Arith:
      if (a.op() != b.op() || a.args().size() != b.args().size()) return false;
      for (std::size_t i = 0; i < a.args().size(); ++i)
        if (!alpha_eq(a.args()[i], b.args()[i], m, rm)) return false;
      return true;
  }
  return false;
}

inline bool bind_all(const std::vector<std::string>& xs, const std::vector<std::string>& ys, VarMap& m, VarMap& rm) {
  if (xs.size() != ys.size()) return false;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    m[xs[i]] = ys[i];
    rm[ys[i]] = xs[i];
  }
  return true;
}

inline bool alpha_eq(const Formula& a, const Formula& b, VarMap m, VarMap rm);

inline bool alpha_eq(const Aggregate& a, const Aggregate& b, const VarMap& m, const VarMap& rm) {
  if (a.kind != b.kind || a.func.has_value() != b.func.has_value()) return false;
  if (!alpha_eq(a.result, b.result, m, rm)) return false;
  {
    VarMap m2 = m, rm2 = rm;
    if (!bind_all(a.set.params, b.set.params, m2, rm2)) return false;
    if (!alpha_eq(a.set.body, b.set.body, m2, rm2)) return false;
  }
  if (a.func) {
    const auto& fa = *a.func;
    const auto& fb = *b.func;
    if (fa.term.has_value() != fb.term.has_value()) return false;
    VarMap m2 = m, rm2 = rm;
    if (!bind_all(fa.params, fb.params, m2, rm2)) return false;
    if (fa.term) return alpha_eq(*fa.term, *fb.term, m2, rm2);
    if (!bind_all({*fa.result}, {*fb.result}, m2, rm2)) return false;
    return alpha_eq(fa.body, fb.body, m2, rm2);
  }
  return true;
}

inline bool alpha_eq(const Formula& a, const Formula& b, VarMap m, VarMap rm) {
  using K = Formula::Kind;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case K::True:
    case K::False: return true;
    case K::Atom:
    case K::Compare:
      if (a.kind() == K::Atom && a.pred() != b.pred()) return false;
      if (a.kind() == K::Compare && a.cmp() != b.cmp()) return false;
      if (a.args().size() != b.args().size()) return false;
      for (std::size_t i = 0; i < a.args().size(); ++i)
        if (!alpha_eq(a.args()[i], b.args()[i], m, rm)) return false;
      return true;
    case K::Not:
    case K::And:
    case K::Or:
    case K::Implies:
      if (a.kids().size() != b.kids().size()) return false;
      for (std::size_t i = 0; i < a.kids().size(); ++i)
        if (!alpha_eq(a.kids()[i], b.kids()[i], m, rm)) return false;
      return true;
    case K::Exists:
    case K::Forall:
      if (!bind_all(a.vars(), b.vars(), m, rm)) return false;
      return alpha_eq(a.kid(), b.kid(), m, rm);
    case K::Aggregate: return alpha_eq(a.agg(), b.agg(), m, rm);
  }
  return false;
}

}  // namespace detail

inline bool alpha_equivalent(const Formula& a, const Formula& b) { return detail::alpha_eq(a, b, {}, {}); }

inline bool alpha_equivalent(const Rule& a, const Rule& b) {
  if (a.head != b.head || a.head_args.size() != b.head_args.size()) return false;
  // Rule variables are implicitly quantified over the whole rule.
  std::set<std::string> va, vb;
  for (const auto& t : a.head_args) collect_vars(t, va);
  for (const auto& t : b.head_args) collect_vars(t, vb);
  auto fa = free_vars(a.body);
  auto fb = free_vars(b.body);
  va.insert(fa.begin(), fa.end());
  vb.insert(fb.begin(), fb.end());
  std::vector<std::string> xs(va.begin(), va.end()), ys(vb.begin(), vb.end());
  auto wrap = [](const Rule& r, const std::vector<std::string>& vs) {
    std::vector<Formula> parts;
    for (std::size_t i = 0; i < r.head_args.size(); ++i)
      parts.push_back(Formula::compare(CmpOp::Eq, Term::var("#head" + std::to_string(i)), r.head_args[i]));
    parts.push_back(r.body);
    return Formula::exists(vs, Formula::conj(std::move(parts)));
  };
  return alpha_equivalent(wrap(a, xs), wrap(b, ys));
}

/// Theories are compared up to renaming of bound variables and regrouping of
/// rules into definitions.
inline bool alpha_equivalent(const Theory& a, const Theory& b) {
  if (a.domains != b.domains || a.axioms.size() != b.axioms.size()) return false;
  for (std::size_t i = 0; i < a.axioms.size(); ++i)
    if (!alpha_equivalent(a.axioms[i], b.axioms[i])) return false;
  std::vector<const Rule*> ra, rb;
  for (const auto& d : a.definitions)
    for (const auto& r : d.rules) ra.push_back(&r);
  for (const auto& d : b.definitions)
    for (const auto& r : d.rules) rb.push_back(&r);
  if (ra.size() != rb.size()) return false;
  for (std::size_t i = 0; i < ra.size(); ++i)
    if (!alpha_equivalent(*ra[i], *rb[i])) return false;
  return a.defined() == b.defined();
}

}  // namespace idlogic
