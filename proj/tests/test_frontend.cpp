#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "idlogic/completion.hpp"
#include "idlogic/parser.hpp"

using namespace idlogic;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(IDLOGIC_FIXTURES) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::set<std::string> names(std::initializer_list<const char*> xs) { return {xs.begin(), xs.end()}; }

}  // namespace

TEST(Parser, GroundAxiom) {
  Theory t = parse_theory("fol aunt(mary,bob).");
  ASSERT_EQ(t.axioms.size(), 1u);
  EXPECT_TRUE(t.definitions.empty());
  const Formula& a = t.axioms[0];
  ASSERT_TRUE(a.is(Formula::Kind::Atom));
  EXPECT_EQ(a.pred(), "aunt");
  EXPECT_EQ(a.args()[0], Term::sym("mary"));
  EXPECT_EQ(a.args()[1], Term::sym("bob"));
}

TEST(Parser, EmptyInput) {
  Theory t = parse_theory("");
  EXPECT_TRUE(t.definitions.empty());
  EXPECT_TRUE(t.axioms.empty());
  Theory c = parse_theory("  % only a comment\n");
  EXPECT_TRUE(c.axioms.empty());
}

TEST(Parser, FamilyDefinitionGroupsBothPredicates) {
  Theory t = parse_theory(slurp("family.idl"));
  ASSERT_EQ(t.definitions.size(), 1u);
  EXPECT_EQ(t.definitions[0].defined, (std::set<PredKey>{{"uncle", 2}, {"aunt", 2}}));
  auto g = build_dependency_graph(t);
  std::set<std::string> open;
  for (const auto& n : g.nodes)
    if (!g.defined.count(n)) open.insert(n.name);
  EXPECT_EQ(open, names({"parent", "brother", "sister", "married", "age", "ageY"}));
  EXPECT_EQ(t.axioms.size(), 2u);
}

TEST(Parser, FreeAxiomVariablesAreUniversallyClosed) {
  Theory t = parse_theory(slurp("family.idl"));
  EXPECT_TRUE(free_vars(t.axioms[0]).empty());
  EXPECT_TRUE(t.axioms[0].is(Formula::Kind::Forall));
}

TEST(Parser, Queries) {
  Query q = parse_query("true.");
  EXPECT_TRUE(q.goal.is(Formula::Kind::True));
  EXPECT_FALSE(q.objective);

  Query a = parse_query("a(6).");
  ASSERT_TRUE(a.goal.is(Formula::Kind::Atom));
  EXPECT_EQ(a.goal.args()[0], Term::integer(6));

  Query m = parse_query("minimum(set([R], exists(W): reserve(W,R)), M), maximize(M).");
  ASSERT_TRUE(m.objective);
  EXPECT_EQ(m.objective->sense, Sense::Maximize);
  EXPECT_EQ(m.objective->var, "M");
  ASSERT_TRUE(m.goal.is(Formula::Kind::Aggregate));
  EXPECT_EQ(m.goal.agg().kind, AggKind::Minimum);
}

TEST(Parser, ObjectiveMustOccurInGoal) {
  EXPECT_THROW(parse_query("a(X), maximize(Y)."), SyntaxError);
}

TEST(Parser, SyntaxErrorsCarryPosition) {
  try {
    parse_theory("p(X) <- q(X).\nfol p(1) ,, q.");
    FAIL() << "expected a syntax error";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_GT(e.column(), 1);
  }
}

TEST(Parser, AggregateOnlyAsLiteral) {
  EXPECT_THROW(parse_formula("X = card(set([Y], a(Y)), N) + 1"), SyntaxError);
}

TEST(Parser, CapitalizedCardIsAccepted) {
  Formula f = parse_formula("Card(set([X], a(X)), N)");
  ASSERT_TRUE(f.is(Formula::Kind::Aggregate));
  EXPECT_EQ(f.agg().kind, AggKind::Card);
}

TEST(FreeVars, Basics) {
  EXPECT_EQ(free_vars(parse_formula("a(X)")), names({"X"}));
  EXPECT_TRUE(free_vars(parse_formula("exists([X]): a(X)")).empty());
  // The set of all aunts of Y.
  Formula f = parse_formula("card(set([X], aunt(X,Y)), N)");
  EXPECT_EQ(free_vars(f.agg().set), names({"Y"}));
  EXPECT_EQ(free_vars(f), names({"Y", "N"}));
}

TEST(Substitute, Basics) {
  Formula a = substitute(parse_formula("a(X)"), {{"X", Term::integer(4)}});
  EXPECT_EQ(to_string(a), "a(4)");
  Formula e = substitute(parse_formula("exists([X]): p(X,Y)"), {{"Y", Term::integer(1)}, {"X", Term::integer(9)}});
  EXPECT_TRUE(alpha_equivalent(e, parse_formula("exists([X]): p(X,1)")));
}

TEST(Substitute, AvoidsCapture) {
  Formula f = substitute(parse_formula("exists([X]): p(X,Y)"), {{"Y", Term::var("X")}});
  EXPECT_TRUE(alpha_equivalent(f, parse_formula("exists([Z]): p(Z,X)")));
  EXPECT_EQ(free_vars(f), names({"X"}));
}

// Independent walk: collect every integer constant and every variable
// occurrence below the set expression.
static void walk(const Formula& f, std::vector<std::string>& out);
static void walk(const Term& t, std::vector<std::string>& out) {
  if (t.is_var()) out.push_back(t.name());
  if (t.is_int()) out.push_back(std::to_string(t.value()));
  for (const auto& a : t.args()) walk(a, out);
}
static void walk(const Formula& f, std::vector<std::string>& out) {
  for (const auto& t : f.args()) walk(t, out);
  for (const auto& k : f.kids()) walk(k, out);
  if (f.is(Formula::Kind::Aggregate)) {
    walk(f.agg().set.body, out);
    walk(f.agg().result, out);
  }
}

TEST(Substitute, RowRuleBody) {
  Theory t = parse_theory("row(I,N) <- card(set([S,P], exists(Y): ship(S,P,I,Y)), N).");
  const Formula body = t.definitions[0].rules[0].body;
  std::vector<std::string> before, after;
  walk(body, before);
  walk(substitute(body, {{"I", Term::integer(3)}}), after);
  std::replace(before.begin(), before.end(), std::string("I"), std::string("3"));
  EXPECT_EQ(before, after);
}

TEST(Substitute, GroundSubstitutionRemovesVariable) {
  for (const char* name : {"family.idl", "mina.idl", "card3.idl"}) {
    Theory t = parse_theory(slurp(name));
    for (const auto& d : t.definitions) {
      for (const auto& r : d.rules) {
        for (const auto& x : free_vars(r.body)) {
          auto expect = free_vars(r.body);
          expect.erase(x);
          EXPECT_EQ(free_vars(substitute(r.body, {{x, Term::integer(7)}})), expect) << name;
        }
      }
    }
  }
}

TEST(RoundTrip, Fixtures) {
  for (const char* name : {"family.idl", "mina.idl", "card3.idl"}) {
    Theory t = parse_theory(slurp(name));
    Theory again = parse_theory(print_theory(t));
    EXPECT_TRUE(alpha_equivalent(t, again)) << name << "\n" << print_theory(t);
  }
}

TEST(Completion, FamilyIsRecursive) {
  Theory t = parse_theory(slurp("family.idl"));
  auto g = build_dependency_graph(t);
  EXPECT_EQ(g.successors({"uncle", 2}), (std::set<PredKey>{{"parent", 2}, {"brother", 2}, {"aunt", 2}, {"married", 2}}));
  EXPECT_EQ(g.successors({"aunt", 2}), (std::set<PredKey>{{"parent", 2}, {"sister", 2}, {"uncle", 2}, {"married", 2}}));
  try {
    assert_nonrecursive(g);
    FAIL() << "expected recursion to be rejected";
  } catch (const RecursionUnsupported& e) {
    EXPECT_EQ(e.cycle().size(), 2u);
  }
}

TEST(Completion, EmptyGraphIsFine) {
  auto g = build_dependency_graph(parse_theory(""));
  EXPECT_TRUE(g.nodes.empty());
  EXPECT_NO_THROW(assert_nonrecursive(g));
}

TEST(Completion, SelfLoopIsRecursion) {
  EXPECT_THROW(Completion(parse_theory("p(X) <- q(X), not p(X).")), RecursionUnsupported);
  EXPECT_THROW(Completion(parse_theory("p(N) <- card(set([X], p(X)), N).")), RecursionUnsupported);
}

TEST(Completion, Mina) {
  Completion c(parse_theory(slurp("mina.idl")));
  const auto& m = c.get({"mina", 1});
  ASSERT_EQ(m.params.size(), 1u);
  const std::string& x = m.params[0];
  EXPECT_TRUE(alpha_equivalent(m.body, parse_formula("a(" + x + "), not bettera(" + x + ")")));
  const auto& b = c.get({"bettera", 1});
  EXPECT_TRUE(alpha_equivalent(b.body, parse_formula("exists([Y]): a(Y), Y < " + b.params[0])));
  EXPECT_EQ(free_vars(b.body), std::set<std::string>{b.params[0]});
}

TEST(Completion, ZeroRulesIsFalse) {
  Definition d;
  d.defined.insert({"q", 1});
  auto cd = complete_predicate(d, {"q", 1});
  EXPECT_TRUE(cd.body.is(Formula::Kind::False));
}

TEST(Completion, HeadTermsBecomeEquations) {
  Theory t = parse_theory(
      "ship_type(S,battleship) <- S = 1.\n"
      "ship_type(S,cruiser) <- S in 2..3.\n");
  Completion c(t);
  const auto& cd = c.get({"ship_type", 2});
  const std::string s = cd.params[0], ty = cd.params[1];
  EXPECT_TRUE(alpha_equivalent(
      cd.body, parse_formula("(" + ty + " = battleship, " + s + " = 1) ; (" + ty + " = cruiser, " + s + " in 2..3)")));
}

TEST(Completion, MergeKeepsRules) {
  Theory t = parse_theory("p(1).\nfol true.\nq(2).\n");
  ASSERT_EQ(t.definitions.size(), 2u);
  Theory m = merge_definitions(t);
  ASSERT_EQ(m.definitions.size(), 1u);
  EXPECT_EQ(m.definitions[0].rules.size(), 2u);
  EXPECT_EQ(m.definitions[0].defined, (std::set<PredKey>{{"p", 1}, {"q", 1}}));
  Theory again = merge_definitions(m);
  EXPECT_TRUE(alpha_equivalent(m, again));
}

TEST(Completion, OpenPredicateWithRulesRejected) {
  EXPECT_THROW(Completion(parse_theory("open p(1..2).\np(1).")), DuplicateDefinition);
  EXPECT_THROW(Completion(parse_theory("p(1).\np(1,2).")), DuplicateDefinition);
}

TEST(Completion, BodiesDoNotMentionOwnPredicate) {
  Completion c(parse_theory(slurp("mina.idl")));
  for (const auto& [p, cd] : c.all()) {
    bool self = false;
    for_each_atom(cd.body, [&](const Formula& a) { self = self || key_of(a) == p; });
    EXPECT_FALSE(self) << p.str();
  }
}
