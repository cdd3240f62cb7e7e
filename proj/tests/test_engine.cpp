#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "idlogic/idlogic.hpp"

using namespace idlogic;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(IDLOGIC_FIXTURES) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SolveResult run(const std::string& theory, const std::string& query, std::size_t n = 1) {
  SolveOptions opt;
  opt.max_answers = n;
  return solve(parse_theory(theory), parse_query(query), opt);
}

std::string delta_of(const SolveResult& r) {
  if (r.answers.empty()) return "none";
  std::string s;
  for (const auto& a : r.answers[0].delta) s += (s.empty() ? "" : " ") + to_string(a);
  return s;
}

}  // namespace

TEST(Engine, MinaTrue) {
  auto r = run(slurp("mina.idl"), "true.");
  ASSERT_EQ(r.outcome, Outcome::Answers);
  EXPECT_EQ(delta_of(r), "a(4)");
}

TEST(Engine, MinaSix) {
  auto r = run(slurp("mina.idl"), "a(6).");
  EXPECT_EQ(delta_of(r), "a(4) a(6)");
}

TEST(Engine, MinaOneFails) {
  auto r = run(slurp("mina.idl"), "a(1).");
  EXPECT_EQ(r.outcome, Outcome::Failure);
}

TEST(Engine, CardinalityNeedsAbduction) {
  auto r = run(slurp("card3.idl"), "true.");
  EXPECT_EQ(r.outcome, Outcome::Failure);
  EXPECT_TRUE(r.has_diagnostic("UnsupportedAggregateAbduction"));
}

namespace {

const char* kOpen = "open a(1..3), b(1..3,1..3).\nw(1,5) <- true.\nw(2,-2) <- true.\nw(3,7) <- true.\n";

std::string binding(const Answer& a, const std::string& v) {
  for (const auto& [n, t] : a.theta)
    if (n == v) return to_string(t);
  return "unbound";
}

}  // namespace

TEST(Engine, CardOverAbducedAtoms) {
  auto r = run(kOpen, "a(1), a(3), card(set([X], a(X)), R).");
  ASSERT_EQ(r.outcome, Outcome::Answers);
  EXPECT_EQ(binding(r.answers[0], "R"), "2");
}

TEST(Engine, EmptySetConventions) {
  EXPECT_EQ(binding(run(kOpen, "card(set([X], a(X)), R).").answers.at(0), "R"), "0");
  EXPECT_EQ(binding(run(kOpen, "sum(set([X], a(X)), lambda([X], X), R).").answers.at(0), "R"), "0");
  EXPECT_EQ(binding(run(kOpen, "product(set([X], a(X)), lambda([X], X), R).").answers.at(0), "R"), "1");
  EXPECT_EQ(run(kOpen, "minimum(set([X], a(X)), R).").outcome, Outcome::Failure);
  EXPECT_EQ(run(kOpen, "maximum(set([X], a(X)), R).").outcome, Outcome::Failure);
}

TEST(Engine, SumOverConstrainedMembers) {
  auto r = run(kOpen, "b(U,V), U < V, sum(set([X,Y], b(X,Y)), lambda([X,Y], X + Y), R).");
  ASSERT_EQ(r.outcome, Outcome::Answers);
  EXPECT_EQ(binding(r.answers[0], "U"), "1");
  EXPECT_EQ(binding(r.answers[0], "V"), "2");
  EXPECT_EQ(binding(r.answers[0], "R"), "3");
}

TEST(Engine, DuplicateMembersCountOnce) {
  auto r = run(kOpen, "b(1,2), b(3,2), card(set([X], exists(Y): b(Y,X)), R).");
  EXPECT_EQ(binding(r.answers.at(0), "R"), "1");
}

TEST(Engine, NegatedOpenAtomInSet) {
  auto r = run(kOpen, "a(3), maximum(set([X], (X in 1..3, not a(X))), R).");
  ASSERT_EQ(r.outcome, Outcome::Answers);
  EXPECT_EQ(binding(r.answers[0], "R"), "2");
}

TEST(Engine, LambdaValueDependsOnMember) {
  auto r = run(kOpen, "b(3,3), b(U,V), U < V, product(set([X], (exists(Y): b(Y,X))), lambda([X], C where w(X,C)), R).", 3);
  ASSERT_EQ(r.answers.size(), 3u);
  EXPECT_EQ(binding(r.answers[0], "R"), "-14");  // {2,3}
  EXPECT_EQ(binding(r.answers[1], "R"), "7");    // {3}
}

TEST(Engine, MinimumAndMaximum) {
  EXPECT_EQ(binding(run(kOpen, "a(2), a(3), minimum(set([X], a(X)), R).").answers.at(0), "R"), "2");
  EXPECT_EQ(binding(run(kOpen, "a(2), a(3), maximum(set([X], a(X)), R).").answers.at(0), "R"), "3");
}

TEST(Engine, ReusedAtomStaysInDomain) {
  // Matching b(U,V) against two abduced atoms must not leave U, V unbounded.
  auto r = run("open b(1..3,1..3).", "b(1,2), b(3,3), b(U,V), U < V.", 3);
  ASSERT_EQ(r.answers.size(), 3u);
  EXPECT_EQ(delta_of(r), "b(1,2) b(3,3)");
}

TEST(Engine, FiniteUniverseBoundsAbduction) {
  const std::string t =
      "open p(1..2), q(1..2,1..2), r.\n"
      "fol forall(X): (q(X,X)) => exists(Y): q(X,Y).\n"
      "fol not r.\n";
  EXPECT_EQ(run(t, "exists(Z): q(Z,Z), r.").outcome, Outcome::Failure);
}

TEST(Engine, UniversalUnderNegationFlounders) {
  auto r = run("open p(1..3).\nfol forall(X): p(X).\n", "true.");
  EXPECT_EQ(r.outcome, Outcome::Floundering);
  EXPECT_TRUE(r.has_diagnostic("Floundering"));
}

TEST(Engine, RecursionIsRejected) {
  auto r = run(slurp("family.idl"), "true.");
  EXPECT_EQ(r.outcome, Outcome::Unsupported);
  EXPECT_TRUE(r.has_diagnostic("RecursionUnsupported"));
}

TEST(Engine, OptimisationImprovesStrictly) {
  std::vector<fd::Value> seen;
  SolveOptions opt;
  opt.on_incumbent = [&](fd::Value v) { seen.push_back(v); };
  auto r = solve(parse_theory(kOpen), parse_query("a(X), b(X,Y), S = X + Y, maximize(S)."), opt);
  ASSERT_EQ(r.outcome, Outcome::Answers);
  EXPECT_EQ(r.answers.back().objective, 6);
  EXPECT_EQ(r.answers.back().status, "optimal");
  for (std::size_t i = 1; i < seen.size(); ++i) EXPECT_GT(seen[i], seen[i - 1]);
  EXPECT_EQ(seen, r.incumbents);
}

TEST(Engine, AnswersAreModels) {
  const Theory t = parse_theory(slurp("mina.idl"));
  const Completion c(t);
  auto r = solve(t, parse_query("a(6)."), {});
  ASSERT_FALSE(r.answers.empty());
  Interpretation i;
  for (const auto& a : r.answers[0].delta) i.insert(a);
  EXPECT_TRUE(is_model(t, c, i));
}
