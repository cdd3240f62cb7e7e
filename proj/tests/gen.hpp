#pragma once

// Random theory generators for the property tests. Theories are produced as
// source text so a failing case can be printed and replayed.

#include <random>
#include <string>
#include <vector>

namespace gen {

using Rng = std::mt19937_64;

inline int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

template <class T>
const T& one_of(Rng& rng, const std::vector<T>& xs) {
  return xs[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(xs.size()) - 1))];
}

inline std::string num(int v) { return std::to_string(v); }

struct Case {
  std::string theory;
  std::string query;
};

/// Non-recursive theory over open p/1, q/2 and r/0 with domain 1..K (K <= 3),
/// up to two defined predicates, one to three axioms and a query. No
/// aggregates: those are covered by single_aggregate().
inline Case completion_case(Rng& rng) {
  const int K = pick(rng, 2, 3);
  const std::string k = num(K);
  auto c = [&] { return num(pick(rng, 1, K)); };
  Case out;
  std::string& t = out.theory;
  t += "open p(1.." + k + "), q(1.." + k + ",1.." + k + "), r.\n";

  const int ndef = pick(rng, 0, 2);
  const std::vector<std::string> d1_bodies = {
      "p(X), X > " + c(),
      "exists(Y): q(X,Y), not p(Y)",
      "X in 1.." + k + ", not p(X)",
      "p(X) ; exists(Y): q(Y,X)",
      "X in 1.." + k + ", r",
      "q(X,X)",
      "p(X), X \\= " + c(),
  };
  const std::vector<std::string> d2_bodies = {
      "d1(X), not q(X,X)",
      "X in 1.." + k + ", not d1(X)",
      "d1(X) ; p(X)",
      "exists(Y): q(X,Y), d1(Y)",
      "p(X), not d1(X)",
  };
  if (ndef >= 1) {
    t += "d1(X) <- " + one_of(rng, d1_bodies) + ".\n";
    if (pick(rng, 0, 2) == 0) t += "d1(X) <- " + one_of(rng, d1_bodies) + ".\n";
  }
  if (ndef >= 2) t += "d2(X) <- " + one_of(rng, d2_bodies) + ".\n";

  std::vector<std::string> unary = {"p(X)", "exists(Y): q(X,Y)", "q(X,X)"};
  std::vector<std::string> ground = {"p(" + c() + ")", "q(" + c() + "," + c() + ")", "r"};
  if (ndef >= 1) {
    unary.push_back("d1(X)");
    ground.push_back("d1(" + c() + ")");
  }
  if (ndef >= 2) {
    unary.push_back("d2(X)");
    ground.push_back("d2(" + c() + ")");
  }
  auto neg = [&](const std::string& a) { return pick(rng, 0, 1) ? a : "not " + a; };
  auto ground_lit = [&] { return neg(one_of(rng, ground)); };
  auto consequence = [&] {
    switch (pick(rng, 0, 3)) {
      case 0: return one_of(rng, unary);
      case 1: return "not " + one_of(rng, unary);
      case 2: return "X > " + num(pick(rng, 0, K - 1));
      default: return "X \\= " + c();
    }
  };

  const int nax = pick(rng, 1, 3);
  for (int i = 0; i < nax; ++i) {
    switch (pick(rng, 0, 4)) {
      case 0: t += "fol " + ground_lit() + ".\n"; break;
      case 1: t += "fol forall(X): (" + one_of(rng, unary) + ") => " + consequence() + ".\n"; break;
      case 2: t += "fol exists(X): (" + one_of(rng, unary) + "), " + neg("(" + one_of(rng, unary) + ")") + ".\n"; break;
      case 3: t += "fol (" + ground_lit() + " ; " + ground_lit() + ").\n"; break;
      default: t += "fol " + one_of(rng, ground) + " => " + ground_lit() + ".\n"; break;
    }
  }

  switch (pick(rng, 0, 4)) {
    case 0: out.query = "true."; break;
    case 1: out.query = one_of(rng, unary) + "."; break;
    case 2: out.query = ground_lit() + "."; break;
    case 3: out.query = "p(X), not (" + one_of(rng, unary) + ")."; break;
    default: out.query = "exists(Z): q(Z,Z), " + ground_lit() + "."; break;
  }
  return out;
}

/// What single_aggregate() put in the query.
struct AggregateCase {
  Case c;
  std::string kind;
  bool empty_set = false;  // the set is empty by construction
};

/// One aggregate over open a/1 and b/2 (domain 1..3) in the query. The open
/// atoms are abduced by the query's other literals, so the set is fixed by
/// the time the aggregate is evaluated. `forced` selects a case by number for
/// the first few draws: 0..4 force an empty set for each kind.
inline AggregateCase single_aggregate(Rng& rng, int forced = -1) {
  static const std::vector<std::string> kinds = {"card", "sum", "product", "minimum", "maximum"};
  AggregateCase out;
  out.kind = forced >= 0 && forced < 5 ? kinds[static_cast<std::size_t>(forced)] : one_of(rng, kinds);
  out.empty_set = forced >= 0 && forced < 5;
  std::string& t = out.c.theory;
  t += "open a(1..3), b(1..3,1..3).\n";
  t += "w(1,5) <- true.\nw(2,-2) <- true.\nw(3,7) <- true.\n";
  t += "small(X) <- X in 1..3, X < 3.\n";

  std::vector<std::string> lits;
  if (!out.empty_set) {
    const int n = pick(rng, 0, 4);
    for (int i = 0; i < n; ++i) {
      if (pick(rng, 0, 1))
        lits.push_back("a(" + num(pick(rng, 1, 3)) + ")");
      else
        lits.push_back("b(" + num(pick(rng, 1, 3)) + "," + num(pick(rng, 1, 3)) + ")");
    }
    if (pick(rng, 0, 3) == 0) lits.push_back("a(Z), Z > 1");
    if (pick(rng, 0, 4) == 0) lits.push_back("b(U,V), U < V");
  }

  const bool pair = !out.empty_set && out.kind != "minimum" && out.kind != "maximum" && pick(rng, 0, 2) == 0;
  std::string params, body;
  if (out.empty_set) {
    params = "[X]";
    body = pick(rng, 0, 1) ? "a(X)" : "X in 1..3, X > 5";
  } else if (pair) {
    params = "[X,Y]";
    body = one_of(rng, std::vector<std::string>{"b(X,Y)", "b(X,Y), X =< Y", "a(X), b(X,Y)"});
  } else {
    params = "[X]";
    body = one_of(rng, std::vector<std::string>{"a(X)", "a(X), X > 1", "exists(Y): b(X,Y)", "exists(Y): b(Y,X)",
                                                "X in 1..3, not a(X)", "a(X), small(X)", "a(X) ; exists(Y): b(Y,X)"});
  }

  std::string func;
  if (out.kind == "sum" || out.kind == "product") {
    if (pair)
      func = one_of(rng, std::vector<std::string>{"lambda([X,Y], X + Y)", "lambda([X,Y], X * Y - 1)",
                                                  "lambda([X,Y], Y - X)"});
    else
      func = one_of(rng, std::vector<std::string>{"lambda([X], X)", "lambda([X], X * X + 1)", "lambda([X], abs(X - 2))",
                                                  "lambda([X], C where w(X,C))", "lambda([X], 0 - X)"});
    func += ", ";
  }
  lits.push_back(out.kind + "(set(" + params + ", (" + body + ")), " + func + "R)");
  std::string q;
  for (const auto& l : lits) q += (q.empty() ? "" : ", ") + l;
  out.c.query = q + ".";
  return out;
}

}  // namespace gen
