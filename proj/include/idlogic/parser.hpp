#pragma once

// Recursive-descent parser for the theory and query surface syntax.
// The normative grammar is docs/grammar.ebnf.

#include <cctype>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "idlogic/ast.hpp"

namespace idlogic {

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(int line, int column, const std::string& msg)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

namespace detail {

enum class Tok {
  Ident,
  Var,
  Int,
  LParen,
  RParen,
  LBrack,
  RBrack,
  Comma,
  Semi,
  Colon,
  Dot,
  DotDot,
  Arrow,    // <-
  Implies,  // =>
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  Plus,
  Minus,
  Star,
  End
};

inline const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Var: return "variable";
    case Tok::Int: return "integer";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrack: return "'['";
    case Tok::RBrack: return "']'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Dot: return "'.'";
    case Tok::DotDot: return "'..'";
    case Tok::Arrow: return "'<-'";
    case Tok::Implies: return "'=>'";
    case Tok::Eq: return "'='";
    case Tok::Ne: return "'\\='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'=<'";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::End: return "end of input";
  }
  return "?";
}

struct Token {
  Tok kind;
  std::string text;
  std::int64_t value = 0;
  int line = 1;
  int column = 1;
};

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '%') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t{Tok::End, {}, 0, line, col};
    auto peek = [&](std::size_t k) { return i + k < src.size() ? src[i + k] : '\0'; };
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.text = std::string(src.substr(i, j - i));
      t.kind = (std::isupper(static_cast<unsigned char>(c)) || c == '_') ? Tok::Var : Tok::Ident;
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      std::int64_t v = 0;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
        const int d = src[j] - '0';
        if (v > (std::numeric_limits<std::int32_t>::max() - d) / 10)
          throw SyntaxError(line, col, "integer literal out of range");
        v = v * 10 + d;
        ++j;
      }
      t.kind = Tok::Int;
      t.value = v;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    std::size_t len = 1;
    switch (c) {
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      case '[': t.kind = Tok::LBrack; break;
      case ']': t.kind = Tok::RBrack; break;
      case ',': t.kind = Tok::Comma; break;
      case ';': t.kind = Tok::Semi; break;
      case ':': t.kind = Tok::Colon; break;
      case '+': t.kind = Tok::Plus; break;
      case '-': t.kind = Tok::Minus; break;
      case '*': t.kind = Tok::Star; break;
      case '.':
        if (peek(1) == '.') {
          t.kind = Tok::DotDot;
          len = 2;
        } else {
          t.kind = Tok::Dot;
        }
        break;
      case '<':
        if (peek(1) == '-') {
          t.kind = Tok::Arrow;
          len = 2;
        } else {
          t.kind = Tok::Lt;
        }
        break;
      case '=':
        if (peek(1) == '<') {
          t.kind = Tok::Le;
          len = 2;
        } else if (peek(1) == '>') {
          t.kind = Tok::Implies;
          len = 2;
        } else {
          t.kind = Tok::Eq;
        }
        break;
      case '>':
        if (peek(1) == '=') {
          t.kind = Tok::Ge;
          len = 2;
        } else {
          t.kind = Tok::Gt;
        }
        break;
      case '\\':
        if (peek(1) == '=') {
          t.kind = Tok::Ne;
          len = 2;
          break;
        }
        [[fallthrough]];
      default: throw SyntaxError(line, col, std::string("unexpected character '") + c + "'");
    }
    t.text = std::string(src.substr(i, len));
    advance(len);
    out.push_back(std::move(t));
  }
  out.push_back(Token{Tok::End, {}, 0, line, col});
  return out;
}

inline bool is_aggregate_name(const std::string& s, AggKind& kind) {
  std::string lower;
  for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "card") kind = AggKind::Card;
  else if (lower == "sum") kind = AggKind::Sum;
  else if (lower == "product") kind = AggKind::Product;
  else if (lower == "minimum") kind = AggKind::Minimum;
  else if (lower == "maximum") kind = AggKind::Maximum;
  else return false;
  return true;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

  Theory theory() {
    Theory th;
    bool in_block = false;
    while (!at(Tok::End)) {
      if (at_ident("fol")) {
        next();
        Formula f = formula();
        expect(Tok::Dot);
        auto fv = free_vars(f);
        if (!fv.empty()) f = Formula::forall(std::vector<std::string>(fv.begin(), fv.end()), f);
        th.axioms.push_back(std::move(f));
        in_block = false;
      } else if (at_ident("open")) {
        next();
        open_decl(th);
        while (accept(Tok::Comma)) open_decl(th);
        expect(Tok::Dot);
        in_block = false;
      } else {
        Rule r = rule();
        if (!in_block) th.definitions.emplace_back();
        th.definitions.back().defined.insert(r.key());
        th.definitions.back().rules.push_back(std::move(r));
        in_block = true;
      }
    }
    return th;
  }

  Query query() {
    Query q;
    Formula f = formula();
    accept(Tok::Dot);
    if (!at(Tok::End)) fail("expected end of query");
    std::vector<Formula> parts;
    flatten_and(f, parts);
    std::vector<Formula> goal;
    for (auto& p : parts) {
      if (p.is(Formula::Kind::Atom) && (p.pred() == "minimize" || p.pred() == "maximize") && p.args().size() == 1) {
        if (q.objective) throw SyntaxError(1, 1, "more than one objective directive");
        if (!p.args()[0].is_var()) throw SyntaxError(1, 1, "objective must be a variable");
        q.objective = Objective{p.pred() == "minimize" ? Sense::Minimize : Sense::Maximize, p.args()[0].name()};
      } else {
        goal.push_back(p);
      }
    }
    q.goal = goal.empty() ? Formula::truth() : goal.size() == 1 ? goal[0] : Formula::conj(std::move(goal));
    if (q.objective && !free_vars(q.goal).count(q.objective->var))
      throw SyntaxError(1, 1, "objective variable " + q.objective->var + " does not occur in the goal");
    return q;
  }

  Formula formula() {
    Formula lhs = disjunction();
    if (accept(Tok::Implies)) return Formula::implies(lhs, formula());
    return lhs;
  }

 private:
  static void flatten_and(const Formula& f, std::vector<Formula>& out) {
    if (f.is(Formula::Kind::And)) {
      for (const auto& k : f.kids()) flatten_and(k, out);
    } else {
      out.push_back(f);
    }
  }

  const Token& cur() const { return toks_[pos_]; }
  const Token& look(std::size_t k) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at(Tok t) const { return cur().kind == t; }
  bool at_ident(const char* s) const { return cur().kind == Tok::Ident && cur().text == s; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept(Tok t) {
    if (!at(t)) return false;
    next();
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(cur().line, cur().column, msg); }
  const Token& expect(Tok t) {
    if (!at(t)) {
      std::string got = cur().kind == Tok::End ? "end of input" : "'" + cur().text + "'";
      fail(std::string("expected ") + tok_name(t) + ", found " + got);
    }
    return next();
  }

  Rule rule() {
    if (!at(Tok::Ident)) fail("expected a rule head, 'fol' or 'open'");
    Rule r;
    r.head = next().text;
    if (accept(Tok::LParen)) {
      r.head_args.push_back(term());
      while (accept(Tok::Comma)) r.head_args.push_back(term());
      expect(Tok::RParen);
    }
    r.body = accept(Tok::Arrow) ? formula() : Formula::truth();
    expect(Tok::Dot);
    return r;
  }

  std::int64_t signed_int() {
    const bool neg = accept(Tok::Minus);
    const std::int64_t v = expect(Tok::Int).value;
    return neg ? -v : v;
  }

  void open_decl(Theory& th) {
    if (!at(Tok::Ident)) fail("expected predicate name in open declaration");
    std::string name = next().text;
    std::vector<Range> ranges;
    if (accept(Tok::LParen)) {
      do {
        Range r;
        r.lo = signed_int();
        expect(Tok::DotDot);
        r.hi = signed_int();
        if (r.hi < r.lo) fail("empty range in open declaration");
        ranges.push_back(r);
      } while (accept(Tok::Comma));
      expect(Tok::RParen);
    }
    th.domains[PredKey{name, ranges.size()}] = std::move(ranges);
  }

  Formula disjunction() {
    std::vector<Formula> parts{conjunction()};
    while (accept(Tok::Semi)) parts.push_back(conjunction());
    return parts.size() == 1 ? parts[0] : Formula::disj(std::move(parts));
  }

  Formula conjunction() {
    std::vector<Formula> parts{unary()};
    while (accept(Tok::Comma)) parts.push_back(unary());
    return parts.size() == 1 ? parts[0] : Formula::conj(std::move(parts));
  }

  std::vector<std::string> var_list() {
    std::vector<std::string> vs;
    const bool brack = accept(Tok::LBrack);
    if (!(brack && at(Tok::RBrack))) {
      vs.push_back(expect(Tok::Var).text);
      while (accept(Tok::Comma)) vs.push_back(expect(Tok::Var).text);
    }
    if (brack) expect(Tok::RBrack);
    return vs;
  }

  Formula unary() {
    if (at_ident("not")) {
      next();
      return Formula::negation(unary());
    }
    if ((at_ident("exists") || at_ident("forall")) && look(1).kind == Tok::LParen) {
      const bool ex = next().text == "exists";
      expect(Tok::LParen);
      auto vs = var_list();
      expect(Tok::RParen);
      expect(Tok::Colon);
      Formula body = formula();
      return ex ? Formula::exists(std::move(vs), body) : Formula::forall(std::move(vs), body);
    }
    return primary();
  }

  bool at_cmp() const {
    switch (cur().kind) {
      case Tok::Eq:
      case Tok::Ne:
      case Tok::Lt:
      case Tok::Le:
      case Tok::Gt:
      case Tok::Ge: return true;
      case Tok::Ident: return cur().text == "in";
      default: return false;
    }
  }

  Formula comparison_rest(Term lhs) {
    if (at_ident("in")) {
      next();
      Term lo = unary_term();
      expect(Tok::DotDot);
      Term hi = unary_term();
      return Formula::in_range(std::move(lhs), std::move(lo), std::move(hi));
    }
    CmpOp op;
    switch (next().kind) {
      case Tok::Eq: op = CmpOp::Eq; break;
      case Tok::Ne: op = CmpOp::Ne; break;
      case Tok::Lt: op = CmpOp::Lt; break;
      case Tok::Le: op = CmpOp::Le; break;
      case Tok::Gt: op = CmpOp::Gt; break;
      case Tok::Ge: op = CmpOp::Ge; break;
      default: fail("expected comparison operator");
    }
    return Formula::compare(op, std::move(lhs), term());
  }

  Formula primary() {
    AggKind kind;
    if ((at(Tok::Ident) || at(Tok::Var)) && look(1).kind == Tok::LParen && is_aggregate_name(cur().text, kind))
      return aggregate(kind);
    if (at(Tok::LParen)) {
      // Either a parenthesized formula or a parenthesized term on the left of
      // a comparison.
      const std::size_t save = pos_;
      try {
        next();
        Formula f = formula();
        expect(Tok::RParen);
        if (!at_cmp()) return f;
      } catch (const SyntaxError&) {
      }
      pos_ = save;
      Term lhs = term();
      if (!at_cmp()) fail("expected comparison operator");
      return comparison_rest(std::move(lhs));
    }
    if (at_ident("true") && look(1).kind != Tok::LParen) {
      next();
      return Formula::truth();
    }
    if (at_ident("false") && look(1).kind != Tok::LParen) {
      next();
      return Formula::falsity();
    }
    if (at(Tok::Ident) && cur().text != "abs" && !(look(1).kind == Tok::Eq || look(1).kind == Tok::Ne)) {
      std::string name = next().text;
      std::vector<Term> args;
      if (accept(Tok::LParen)) {
        args.push_back(term());
        while (accept(Tok::Comma)) args.push_back(term());
        expect(Tok::RParen);
      }
      if (at_cmp() && args.empty()) return comparison_rest(Term::sym(name));
      return Formula::atom(std::move(name), std::move(args));
    }
    if (at(Tok::Var) || at(Tok::Int) || at(Tok::Minus) || at(Tok::Ident)) {
      Term lhs = term();
      if (!at_cmp()) fail("expected comparison operator after term");
      return comparison_rest(std::move(lhs));
    }
    fail("expected a formula");
  }

  Formula aggregate(AggKind kind) {
    next();
    expect(Tok::LParen);
    Aggregate a;
    a.kind = kind;
    if (!at_ident("set")) fail("expected set(...) expression");
    next();
    expect(Tok::LParen);
    expect(Tok::LBrack);
    a.set.params = var_list_inner();
    expect(Tok::RBrack);
    expect(Tok::Comma);
    a.set.body = formula();
    expect(Tok::RParen);
    expect(Tok::Comma);
    if (at_ident("lambda")) {
      next();
      expect(Tok::LParen);
      expect(Tok::LBrack);
      FuncExpr fe;
      fe.params = var_list_inner();
      expect(Tok::RBrack);
      expect(Tok::Comma);
      if (at(Tok::Var) && look(1).kind == Tok::Ident && look(1).text == "where") {
        fe.result = next().text;
        next();
        fe.body = formula();
        if (!free_vars(fe.body).count(*fe.result)) fail("lambda result variable " + *fe.result + " does not occur in its body");
      } else {
        fe.term = term();
      }
      expect(Tok::RParen);
      expect(Tok::Comma);
      a.func = std::move(fe);
    }
    a.result = term();
    expect(Tok::RParen);
    try {
      return Formula::aggregate(std::move(a));
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  std::vector<std::string> var_list_inner() {
    std::vector<std::string> vs;
    if (at(Tok::RBrack)) return vs;
    vs.push_back(expect(Tok::Var).text);
    while (accept(Tok::Comma)) vs.push_back(expect(Tok::Var).text);
    return vs;
  }

 public:
  Term term() {
    Term t = mul_term();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      const ArithOp op = next().kind == Tok::Plus ? ArithOp::Add : ArithOp::Sub;
      t = Term::arith(op, {t, mul_term()});
    }
    return t;
  }

 private:
  Term mul_term() {
    Term t = unary_term();
    while (accept(Tok::Star)) t = Term::arith(ArithOp::Mul, {t, unary_term()});
    return t;
  }

  Term unary_term() {
    if (accept(Tok::Minus)) {
      Term t = unary_term();
      if (t.is_int()) return Term::integer(-t.value());
      return Term::arith(ArithOp::Sub, {Term::integer(0), t});
    }
    if (at(Tok::Int)) return Term::integer(next().value);
    AggKind kind;
    if ((at(Tok::Ident) || at(Tok::Var)) && look(1).kind == Tok::LParen && is_aggregate_name(cur().text, kind))
      fail("aggregate in a position other than a literal");
    if (at(Tok::Var)) return Term::var(next().text);
    if (at_ident("abs") && look(1).kind == Tok::LParen) {
      next();
      next();
      Term t = term();
      expect(Tok::RParen);
      return Term::arith(ArithOp::Abs, {t});
    }
    if (at(Tok::Ident)) {
      if (look(1).kind == Tok::LParen) fail("function symbols are not supported in terms");
      return Term::sym(next().text);
    }
    if (accept(Tok::LParen)) {
      Term t = term();
      expect(Tok::RParen);
      return t;
    }
    fail("expected a term");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Theory parse_theory(std::string_view text) { return detail::Parser(text).theory(); }

inline Query parse_query(std::string_view text) { return detail::Parser(text).query(); }

inline Formula parse_formula(std::string_view text) {
  detail::Parser p(text);
  return p.formula();
}

}  // namespace idlogic
