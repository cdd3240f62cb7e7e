#include <gtest/gtest.h>

#include <random>

#include "idlogic/fd/model.hpp"
#include "idlogic/fd/search.hpp"

using namespace idlogic::fd;

TEST(Domain, IntervalOperations) {
  Domain d(1, 10);
  EXPECT_EQ(d.size(), 10u);
  d.remove(5);
  EXPECT_EQ(d.str(), "{1..4,6..10}");
  d.restrict_min(4);
  d.restrict_max(6);
  EXPECT_EQ(d.str(), "{4,6}");
  Value n;
  ASSERT_TRUE(d.next_after(4, n));
  EXPECT_EQ(n, 6);
  EXPECT_FALSE(d.contains(5));
  d.intersect(Domain::from_values({6, 7}));
  EXPECT_TRUE(d.fixed());
  EXPECT_EQ(d.value(), 6);
}

TEST(Store, NewVar) {
  Store s;
  Var x = s.new_var(1, 10);
  EXPECT_EQ(s.dom(x).size(), 10u);
  Var b = s.new_bool();
  EXPECT_EQ(s.dom(b), Domain(0, 1));
  EXPECT_THROW(s.new_var(Domain()), EmptyDomain);
  EXPECT_THROW(s.new_var(0, kMaxValue + 1), OverflowError);
}

TEST(Store, PostBounds) {
  Store s;
  Var x = s.new_var(1, 10);
  EXPECT_TRUE(post(s, lin({{1, x}}, Op::Lt, 4)));
  EXPECT_EQ(s.dom(x), Domain(1, 3));
}

TEST(Store, EqualityAcrossDisjointRangesFails) {
  Store s;
  Var x = s.new_var(1, 3), y = s.new_var(5, 7);
  EXPECT_FALSE(post(s, lin({{1, x}, {-1, y}}, Op::Eq, 0)));
}

TEST(Store, NoTouchDisjunctionStaysConsistent) {
  Store s;
  Var x1 = s.new_var(1, 10), x2 = s.new_var(1, 10), y1 = s.new_var(1, 10), y2 = s.new_var(1, 10);
  auto absgt = [&](Var a, Var b) {
    Var z = s.new_var(0, 9, Role::Aux);
    add(s, AbsDiffC{a, b, z});
    return reify(s, lin({{1, z}}, Op::Gt, 1));
  };
  Var b1 = absgt(x1, x2), b2 = absgt(y1, y2);
  EXPECT_TRUE(post(s, lin({{1, b1}, {1, b2}}, Op::Ge, 1)));
  EXPECT_EQ(s.dom(x1), Domain(1, 10));
}

TEST(Store, ReifyEntailedNegation) {
  Store s;
  Var x = s.new_var(5, 9);
  Var b = reify(s, lin({{1, x}}, Op::Lt, 3));
  ASSERT_TRUE(s.propagate());
  EXPECT_TRUE(s.fixed(b));
  EXPECT_EQ(s.value(b), 0);
}

TEST(Store, ReifyForward) {
  Store s;
  Var x = s.new_var(1, 10);
  Var b = reify(s, lin({{1, x}}, Op::Eq, 7));
  ASSERT_TRUE(s.propagate());
  EXPECT_TRUE(post(s, lin({{1, b}}, Op::Eq, 1)));
  EXPECT_TRUE(s.fixed(x));
  EXPECT_EQ(s.value(x), 7);
}

TEST(Store, ReifyRejectsNonLinear) {
  Store s;
  Var x = s.new_var(1, 3), y = s.new_var(1, 3);
  EXPECT_THROW(reify(s, TupleNotEqualC{{x}, {y}}), NotReifiable);
}

TEST(Store, CardinalityFromReifiedMembers) {
  Store s;
  std::vector<Var> xs, bs;
  for (int i = 0; i < 4; ++i) {
    xs.push_back(s.new_var(1, 5));
    bs.push_back(reify(s, lin({{1, xs.back()}}, Op::Eq, 3)));
  }
  Var n = s.new_var(0, 4);
  add(s, BoolSumC{n, bs});
  ASSERT_TRUE(s.propagate());
  ASSERT_TRUE(post(s, lin({{1, n}}, Op::Eq, 4)));
  for (Var x : xs) EXPECT_EQ(s.dom(x), Domain(3, 3));
}

TEST(Store, EmptyPropagate) {
  Store s;
  Var x = s.new_var(1, 4);
  EXPECT_TRUE(s.propagate());
  EXPECT_EQ(s.dom(x), Domain(1, 4));
}

TEST(Store, ChainForcedByTransitivity) {
  Store s;
  Var x = s.new_var(1, 3), y = s.new_var(1, 3), z = s.new_var(1, 3);
  add(s, lin({{1, x}, {-1, y}}, Op::Lt, 0));
  add(s, lin({{1, y}, {-1, z}}, Op::Lt, 0));
  ASSERT_TRUE(s.propagate());
  EXPECT_EQ(s.value(x), 1);
  EXPECT_EQ(s.value(y), 2);
  EXPECT_EQ(s.value(z), 3);
}

TEST(Store, TrailRestoresExactly) {
  Store s;
  Var x = s.new_var(1, 10), y = s.new_var(1, 10);
  add(s, lin({{1, x}, {1, y}}, Op::Le, 12));
  ASSERT_TRUE(s.propagate());
  const Domain dx = s.dom(x), dy = s.dom(y);
  const std::size_t np = s.propagators().size();
  auto lvl = s.mark();
  s.remove(x, 4);
  Var z = s.new_var(0, 3);
  add(s, lin({{1, x}, {-1, z}}, Op::Eq, 1));
  s.propagate();
  s.restore(lvl);
  EXPECT_EQ(s.dom(x), dx);
  EXPECT_EQ(s.dom(y), dy);
  EXPECT_EQ(s.num_vars(), 2u);
  EXPECT_EQ(s.propagators().size(), np);
}

TEST(Store, ExtremumSelected) {
  Store s;
  Var b1 = s.new_bool(), b2 = s.new_bool(), d = s.new_bool();
  Var v1 = s.constant(4), v2 = s.constant(6);
  Var m = s.new_var(0, 10);
  add(s, ReifiedC{d, lin({{1, b1}, {1, b2}}, Op::Ge, 1)});
  add(s, ExtremumSelectedC{m, {{b1, v1}, {b2, v2}}, d, false});
  ASSERT_TRUE(s.propagate());
  // Inactive until the selection is known to be non-empty.
  ASSERT_TRUE(post(s, lin({{1, m}}, Op::Eq, 4)));
  EXPECT_FALSE(s.fixed(b1));
  ASSERT_TRUE(post(s, lin({{1, d}}, Op::Eq, 1)));
  EXPECT_EQ(s.value(b1), 1);
}

TEST(Store, ProductSelected) {
  Store s;
  Var b1 = s.new_bool(), b2 = s.new_bool();
  Var p = s.new_var(0, 100);
  add(s, ProductSelectedC{p, {{b1, s.constant(3)}, {b2, s.constant(5)}}});
  ASSERT_TRUE(post(s, lin({{1, p}}, Op::Eq, 5)));
  int n = 0;
  for_each_solution(s, {b1, b2}, [&](const Solution& sol) {
    ++n;
    EXPECT_EQ(sol[b1], 0);
    EXPECT_EQ(sol[b2], 1);
    return true;
  });
  EXPECT_EQ(n, 1);
}

TEST(Label, Basics) {
  Store s;
  Var x = s.new_var(1, 3);
  auto r = label(s, {x});
  ASSERT_EQ(r.status, SearchStatus::Found);
  EXPECT_EQ((*r.solution)[x], 1);

  Store t;
  Var a = t.new_var(1, 4), b = t.new_var(1, 4);
  add(t, lin({{1, a}, {1, b}}, Op::Eq, 5));
  auto r2 = label(t, {a, b});
  ASSERT_TRUE(r2.solution);
  EXPECT_EQ((*r2.solution)[a], 1);
  EXPECT_EQ((*r2.solution)[b], 4);

  Store u;
  Var c = u.new_var(1, 2);
  add(u, lin({{1, c}}, Op::Gt, 5));
  EXPECT_EQ(label(u, {c}).status, SearchStatus::Exhausted);
}

TEST(BranchAndBound, Basics) {
  Store s;
  Var x = s.new_var(1, 9);
  std::vector<Value> seen;
  SearchOptions opt;
  opt.on_incumbent = [&](Value v, const Solution&) { seen.push_back(v); };
  auto r = branch_and_bound(s, x, Direction::Maximize, {x}, opt);
  EXPECT_EQ(r.status, SearchStatus::Optimal);
  EXPECT_EQ(*r.objective, 9);
  for (std::size_t i = 1; i < seen.size(); ++i) EXPECT_LT(seen[i - 1], seen[i]);

  Store t;
  Var y = t.new_var(1, 2);
  add(t, lin({{1, y}}, Op::Gt, 5));
  auto r2 = branch_and_bound(t, y, Direction::Minimize, {y});
  EXPECT_EQ(r2.status, SearchStatus::Exhausted);
  EXPECT_FALSE(r2.solution);
}

TEST(BranchAndBound, DeadlineReturnsIncumbent) {
  Store s;
  std::vector<Var> xs;
  std::vector<LinTerm> ts;
  for (int i = 0; i < 14; ++i) {
    xs.push_back(s.new_var(0, 9));
    ts.push_back({i % 2 ? 3 : -2, xs.back()});
  }
  Var obj = s.new_var(-1000, 1000, Role::Objective);
  ts.push_back({-1, obj});
  add(s, lin(ts, Op::Eq, 0));
  SearchOptions opt;
  opt.deadline = Clock::now();
  auto r = branch_and_bound(s, obj, Direction::Maximize, xs, opt);
  EXPECT_TRUE(r.status == SearchStatus::BestSoFar || r.status == SearchStatus::TimedOut);
}
