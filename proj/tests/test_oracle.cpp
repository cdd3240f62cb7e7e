#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "idlogic/oracle.hpp"
#include "idlogic/parser.hpp"

using namespace idlogic;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(IDLOGIC_FIXTURES) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Interpretation interp(std::initializer_list<const char*> atoms) {
  Interpretation i;
  for (const char* a : atoms) i.insert(parse_formula(a));
  return i;
}

bool eval(const char* theory, std::initializer_list<const char*> atoms, const char* f) {
  Completion c(parse_theory(theory));
  return Evaluator(c, interp(atoms)).holds(parse_formula(f));
}

}  // namespace

TEST(Oracle, MinimumModelsOverOneToSix) {
  Theory t = parse_theory("open a(1..6).\nfol mina(4).\nmina(X) <- a(X), not bettera(X).\nbettera(X) <- a(Y), Y<X.\n");
  std::uint64_t n = enumerate_models(t, [&](const Interpretation& i) {
    const auto& rel = i.of({"a", 1});
    EXPECT_FALSE(rel.empty());
    EXPECT_EQ((*rel.begin())[0], Term::integer(4)) << i.str();
    return true;
  });
  // a(4) present, a(1..3) absent, a(5), a(6) free.
  EXPECT_EQ(n, 4u);
}

TEST(Oracle, FalseAxiomHasNoModels) {
  Theory t = parse_theory("open p.\nfol false.");
  EXPECT_EQ(enumerate_models(t, [](const Interpretation&) { return true; }), 0u);
}

TEST(Oracle, NullaryOpenPredicateHasTwoModels) {
  Theory t = parse_theory("open p.");
  EXPECT_EQ(enumerate_models(t, [](const Interpretation&) { return true; }), 2u);
}

TEST(Oracle, UndeclaredOpenPredicateRefused) {
  Theory t = parse_theory("fol p(1).");
  EXPECT_THROW(enumerate_models(t, [](const Interpretation&) { return true; }), DomainTooLarge);
}

TEST(Oracle, EnumerationBound) {
  Theory t = parse_theory("open p(1..10,1..10).");
  EXPECT_THROW(enumerate_models(t, [](const Interpretation&) { return true; }), DomainTooLarge);
}

TEST(Oracle, Aggregates) {
  EXPECT_TRUE(eval("", {"a(1)", "a(5)"}, "card(set([X], a(X)), 2)"));
  EXPECT_TRUE(eval("", {}, "sum(set([X], a(X)), lambda([X], X), 0)"));
  EXPECT_FALSE(eval("", {"a(1)"}, "minimum(set([X], a(X)), 4)"));
  EXPECT_FALSE(eval("", {}, "minimum(set([X], a(X)), M)"));
  EXPECT_TRUE(eval("", {}, "product(set([X], a(X)), lambda([X], X), 1)"));
  EXPECT_TRUE(eval("", {"a(2)", "a(3)"}, "product(set([X], a(X)), lambda([X], X), 6)"));
  EXPECT_TRUE(eval("", {"a(4)", "a(6)"}, "maximum(set([X], a(X)), 6)"));
  EXPECT_TRUE(eval("", {"u(1)", "u(2)", "cap(1,100)", "cap(2,250)", "m(1)"},
                   "sum(set([U], u(U), m(U)), lambda([U], C where cap(U,C)), 100)"));
}

TEST(Oracle, NonFunctionalLambda) {
  EXPECT_THROW(eval("", {"a(1)", "f(1,2)", "f(1,3)"}, "sum(set([X], a(X)), lambda([X], Y where f(X,Y)), S)"),
               NonFunctional);
  EXPECT_THROW(eval("", {"a(1)"}, "sum(set([X], a(X)), lambda([X], Y where f(X,Y)), S)"), NonFunctional);
}

TEST(Oracle, ForallAsNoCounterexample) {
  EXPECT_TRUE(eval("", {"p(1)", "p(2)", "q(1)", "q(2)"}, "forall([X]): p(X) => q(X)"));
  EXPECT_FALSE(eval("", {"p(1)", "p(2)", "q(1)"}, "forall([X]): p(X) => q(X)"));
  EXPECT_TRUE(eval("", {"p(1)"}, "forall([X]): X in 1..3 => X < 4"));
}

TEST(Oracle, DefinedPredicateGeneratesBindings) {
  Completion c(parse_theory("week(W) <- W in 1..5.\nlate(W) <- week(W), W > 3."));
  Interpretation i;
  auto sols = query_answers(c, i, parse_formula("late(W)"));
  ASSERT_EQ(sols.size(), 2u);
  EXPECT_EQ(sols[0].at("W"), Term::integer(4));
}

TEST(Oracle, UnreadyFormulaIsAnError) {
  EXPECT_THROW(eval("", {}, "X < 3"), EvaluationError);
}

TEST(Oracle, OptimalValue) {
  Theory t = parse_theory("");
  EXPECT_EQ(optimal_value(t, parse_query("X in 1..9, maximize(X).")), 9);
  EXPECT_EQ(optimal_value(t, parse_query("X in 1..9, minimize(X).")), 1);
  Theory u = parse_theory("fol false.");
  EXPECT_FALSE(optimal_value(u, parse_query("X in 1..9, maximize(X).")));
}

TEST(Oracle, MinaQueries) {
  Theory t = parse_theory(slurp("mina.idl"));
  EXPECT_GT(count_models(t, parse_formula("true")), 0u);
  EXPECT_GT(count_models(t, parse_formula("a(6)")), 0u);
  EXPECT_EQ(count_models(t, parse_formula("a(1)")), 0u);
}
