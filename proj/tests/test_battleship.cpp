#include <gtest/gtest.h>

#include <numeric>

#include "idlogic/apps/battleship.hpp"
#include "idlogic/cli/record.hpp"

using namespace idlogic;
using namespace idlogic::battleship;

namespace {

// A legal hand-made fleet: ships in rows 1, 3, 5, 7, 9 with gaps.
Placement hand_fleet() {
  Placement pl;
  auto across = [&](int s, int x, int y) {
    for (int p = 1; p <= ship_length(s); ++p) pl.push_back({s, p, x, y + p - 1});
  };
  across(1, 1, 1);   // 4 cells
  across(2, 1, 6);   // 3
  across(3, 3, 1);   // 3
  across(4, 3, 5);   // 2
  across(5, 3, 8);   // 2
  across(6, 5, 1);   // 2
  across(7, 5, 4);
  across(8, 5, 6);
  across(9, 7, 1);
  across(10, 7, 3);
  return pl;
}

Instance instance_of(const Placement& pl) {
  Instance in;
  for (const auto& p : pl) {
    ++in.rows[p.x - 1];
    ++in.cols[p.y - 1];
  }
  return in;
}

bool mentions(const std::vector<std::string>& bad, const std::string& word) {
  for (const auto& b : bad)
    if (b.find(word) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(Battleship, HandPlacementPasses) {
  const auto pl = hand_fleet();
  EXPECT_TRUE(check(instance_of(pl), pl).empty());
}

TEST(Battleship, DiagonalTouchIsReported) {
  auto pl = hand_fleet();
  // Submarine 10 moved from (7,3) to (6,3): diagonal to ship 6 at (5,2).
  for (auto& p : pl)
    if (p.ship == 10) p.x = 6;
  const auto bad = check(instance_of(pl), pl);
  EXPECT_TRUE(mentions(bad, "touch"));
}

TEST(Battleship, MissingSubmarineIsReported) {
  auto pl = hand_fleet();
  const Instance in = instance_of(pl);
  pl.pop_back();
  const auto bad = check(in, pl);
  EXPECT_TRUE(mentions(bad, "ship 10 part 1 placed 0 times"));
  EXPECT_TRUE(mentions(bad, "tally"));
}

TEST(Battleship, BrokenShapeAndGivenAreReported) {
  auto pl = hand_fleet();
  Instance in = instance_of(pl);
  in.givens.push_back({10, 10, true});
  pl[1].x = 2;  // second part of the battleship leaves its row
  const auto bad = check(in, pl);
  EXPECT_TRUE(mentions(bad, "shape"));
  EXPECT_TRUE(mentions(bad, "given"));
}

TEST(Battleship, GeneratorIsSolvedByItsOwnFleet) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    Placement truth;
    const Instance in = generate(seed, 8, &truth);
    EXPECT_TRUE(check(in, truth).empty()) << "seed " << seed;
    EXPECT_EQ(std::accumulate(in.rows.begin(), in.rows.end(), 0), kCells);
    EXPECT_EQ(std::accumulate(in.cols.begin(), in.cols.end(), 0), kCells);
    EXPECT_EQ(in.givens.size(), 8u);
  }
}

TEST(Battleship, GeneratorIsReproducible) {
  const Instance a = generate(42, 8), b = generate(42, 8), c = generate(43, 8);
  EXPECT_EQ(to_facts(a), to_facts(b));
  EXPECT_NE(to_facts(a), to_facts(c));
}

TEST(Battleship, FactsRoundTrip) {
  const Instance in = generate(7, 12);
  EXPECT_EQ(to_facts(parse_instance(to_facts(in))), to_facts(in));
}

TEST(Battleship, PlacementFromAtoms) {
  const auto pl = placement_of({parse_formula("ship(10,1,7,3)"), parse_formula("boat(1,1)")});
  ASSERT_EQ(pl.size(), 1u);
  EXPECT_EQ(pl[0].ship, 10);
  EXPECT_EQ(pl[0].y, 3);
  EXPECT_THROW(placement_of({parse_formula("ship(10,1,X,3)")}), std::invalid_argument);
}

TEST(Records, TextAndJsonAnswersReadBack) {
  const std::string log =
      "answer 1 [found]: {ship(1,1,2,3), a(1,2)}\n"
      "  X = 3\n"
      "{\"record\":\"answer\",\"index\":2,\"status\":\"found\",\"delta\":[\"ship(2,1,4,4)\"]}\n"
      "{\"record\":\"summary\"}\n";
  const auto got = record::read_answers(log);
  ASSERT_EQ(got.size(), 2u);
  ASSERT_EQ(got[0].size(), 2u);
  EXPECT_EQ(to_string(got[0][1]), "a(1,2)");
  EXPECT_EQ(to_string(got[1][0]), "ship(2,1,4,4)");
}

TEST(Records, AnswerFieldOrder) {
  Answer a;
  a.delta = {parse_formula("a(4)")};
  a.theta = {{"X", Term::integer(4)}};
  a.status = "found";
  EXPECT_EQ(record::answer(a, 1).dump(),
            R"j({"record":"answer","index":1,"status":"found","delta":["a(4)"],"bindings":{"X":4},"objective":null})j");
}
