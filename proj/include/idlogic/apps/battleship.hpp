#pragma once

// Battleship solitaire instances: generator, fact writer and an independent
// placement checker.

#include <algorithm>
#include <array>
#include <cstdlib>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "idlogic/ast.hpp"
#include "idlogic/parser.hpp"

namespace idlogic::battleship {

inline constexpr int kSize = 10;
inline constexpr int kShips = 10;
inline constexpr int kCells = 20;

/// Length of ship s (1-based): one of size 4, two of 3, three of 2, four of 1.
inline int ship_length(int s) {
  if (s == 1) return 4;
  if (s <= 3) return 3;
  if (s <= 6) return 2;
  return 1;
}

struct Given {
  int x = 0, y = 0;
  bool boat = false;
};

struct Instance {
  std::array<int, kSize> rows{};
  std::array<int, kSize> cols{};
  std::vector<Given> givens;
};

struct Part {
  int ship = 0, part = 0, x = 0, y = 0;
};

using Placement = std::vector<Part>;

/// Every violated rule; empty means the placement solves the instance.
inline std::vector<std::string> check(const Instance& in, const Placement& pl) {
  std::vector<std::string> bad;
  auto where = [](const Part& p) {
    return "ship " + std::to_string(p.ship) + " part " + std::to_string(p.part);
  };
  std::array<std::array<int, 5>, kShips + 1> seen{};
  for (const auto& p : pl) {
    if (p.ship < 1 || p.ship > kShips || p.part < 1 || p.part > ship_length(p.ship)) {
      bad.push_back("fleet: no such part: " + where(p));
      continue;
    }
    if (p.x < 1 || p.x > kSize || p.y < 1 || p.y > kSize) bad.push_back("board: off the grid: " + where(p));
    ++seen[p.ship][p.part];
  }
  for (int s = 1; s <= kShips; ++s)
    for (int k = 1; k <= ship_length(s); ++k)
      if (seen[s][k] != 1)
        bad.push_back("fleet: ship " + std::to_string(s) + " part " + std::to_string(k) + " placed " +
                      std::to_string(seen[s][k]) + " times");
  for (std::size_t i = 0; i < pl.size(); ++i)
    for (std::size_t j = i + 1; j < pl.size(); ++j) {
      const Part &a = pl[i], &b = pl[j];
      if (a.ship == b.ship) {
        const bool across = a.x == b.x && a.y - b.y == a.part - b.part;
        const bool down = a.y == b.y && a.x - b.x == a.part - b.part;
        if (a.part != b.part && !across && !down) bad.push_back("shape: " + where(a) + " and part " + std::to_string(b.part) + " not in line");
      } else if (std::abs(a.x - b.x) <= 1 && std::abs(a.y - b.y) <= 1) {
        bad.push_back("touch: " + where(a) + " and " + where(b));
      }
    }
  std::array<int, kSize> rows{}, cols{};
  std::array<std::array<bool, kSize + 1>, kSize + 1> occ{};
  for (const auto& p : pl) {
    if (p.x < 1 || p.x > kSize || p.y < 1 || p.y > kSize) continue;
    ++rows[p.x - 1];
    ++cols[p.y - 1];
    occ[p.x][p.y] = true;
  }
  for (int i = 0; i < kSize; ++i) {
    if (rows[i] != in.rows[i])
      bad.push_back("tally: row " + std::to_string(i + 1) + " has " + std::to_string(rows[i]) + ", expected " +
                    std::to_string(in.rows[i]));
    if (cols[i] != in.cols[i])
      bad.push_back("tally: column " + std::to_string(i + 1) + " has " + std::to_string(cols[i]) + ", expected " +
                    std::to_string(in.cols[i]));
  }
  for (const auto& g : in.givens) {
    const bool here = g.x >= 1 && g.x <= kSize && g.y >= 1 && g.y <= kSize && occ[g.x][g.y];
    if (here != g.boat)
      bad.push_back("given: cell (" + std::to_string(g.x) + "," + std::to_string(g.y) + ") should be " +
                    (g.boat ? "boat" : "water"));
  }
  return bad;
}

/// Random legal fleet; largest ships first, restarting when stuck.
inline Placement random_fleet(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coord(1, kSize), coin(0, 1);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Placement pl;
    bool stuck = false;
    for (int s = 1; s <= kShips && !stuck; ++s) {
      const int len = ship_length(s);
      stuck = true;
      for (int tries = 0; tries < 500; ++tries) {
        const bool down = coin(rng) == 1;
        const int x0 = coord(rng), y0 = coord(rng);
        Placement ship;
        for (int p = 1; p <= len; ++p) ship.push_back({s, p, down ? x0 + p - 1 : x0, down ? y0 : y0 + p - 1});
        bool ok = true;
        for (const auto& a : ship) {
          if (a.x > kSize || a.y > kSize) ok = false;
          for (const auto& b : pl)
            if (std::abs(a.x - b.x) <= 1 && std::abs(a.y - b.y) <= 1) ok = false;
        }
        if (!ok) continue;
        pl.insert(pl.end(), ship.begin(), ship.end());
        stuck = false;
        break;
      }
    }
    if (!stuck) return pl;
  }
  throw std::runtime_error("fleet placement retries exhausted; try another seed");
}

/// Instance with `reveals` random cells revealed, solvable by construction.
inline Instance generate(std::uint64_t seed, int reveals, Placement* truth = nullptr) {
  if (reveals < 0 || reveals > kSize * kSize) throw std::invalid_argument("reveals must be in 0..100");
  std::mt19937_64 rng(seed);
  Placement pl = random_fleet(rng);
  Instance in;
  std::array<std::array<bool, kSize + 1>, kSize + 1> occ{};
  for (const auto& p : pl) {
    ++in.rows[p.x - 1];
    ++in.cols[p.y - 1];
    occ[p.x][p.y] = true;
  }
  std::vector<int> cells(kSize * kSize);
  for (int i = 0; i < kSize * kSize; ++i) cells[i] = i;
  std::shuffle(cells.begin(), cells.end(), rng);
  for (int k = 0; k < reveals; ++k) {
    const int x = cells[k] / kSize + 1, y = cells[k] % kSize + 1;
    in.givens.push_back({x, y, occ[x][y]});
  }
  if (truth) *truth = pl;
  return in;
}

/// Instance data as facts for the battleship theory.
inline std::string to_facts(const Instance& in) {
  std::ostringstream os;
  for (int i = 0; i < kSize; ++i) os << "fol row(" << i + 1 << "," << in.rows[i] << ").\n";
  for (int j = 0; j < kSize; ++j) os << "fol column(" << j + 1 << "," << in.cols[j] << ").\n";
  for (const auto& g : in.givens) os << "fol " << (g.boat ? "boat" : "water") << "(" << g.x << "," << g.y << ").\n";
  return os.str();
}

/// Reads the facts written by to_facts.
inline Instance parse_instance(const std::string& text) {
  Theory t = parse_theory(text);
  Instance in;
  for (const auto& ax : t.axioms) {
    if (!ax.is(Formula::Kind::Atom) || ax.args().size() != 2 || !ax.args()[0].is_int() || !ax.args()[1].is_int())
      throw std::invalid_argument("unexpected instance line: " + to_string(ax));
    const int a = static_cast<int>(ax.args()[0].value()), b = static_cast<int>(ax.args()[1].value());
    const std::string& p = ax.pred();
    if ((p == "row" || p == "column") && (a < 1 || a > kSize)) throw std::invalid_argument("index out of range: " + to_string(ax));
    if (p == "row") in.rows[a - 1] = b;
    else if (p == "column") in.cols[a - 1] = b;
    else if (p == "boat" || p == "water") in.givens.push_back({a, b, p == "boat"});
    else throw std::invalid_argument("unexpected instance line: " + to_string(ax));
  }
  return in;
}

/// ship/4 atoms of an answer as a placement; other atoms are ignored.
inline Placement placement_of(const std::vector<Formula>& atoms) {
  Placement pl;
  for (const auto& a : atoms) {
    if (a.pred() != "ship" || a.args().size() != 4) continue;
    std::array<int, 4> v{};
    for (int i = 0; i < 4; ++i) {
      if (!a.args()[i].is_int()) throw std::invalid_argument("non-ground ship atom " + to_string(a));
      v[i] = static_cast<int>(a.args()[i].value());
    }
    pl.push_back({v[0], v[1], v[2], v[3]});
  }
  return pl;
}

/// ASCII board: '#' ship part, '.' empty.
inline std::string render(const Placement& pl) {
  std::vector<std::string> g(kSize, std::string(kSize, '.'));
  for (const auto& p : pl)
    if (p.x >= 1 && p.x <= kSize && p.y >= 1 && p.y <= kSize) g[p.x - 1][p.y - 1] = '#';
  std::string out;
  for (const auto& r : g) out += r + "\n";
  return out;
}

}  // namespace idlogic::battleship
