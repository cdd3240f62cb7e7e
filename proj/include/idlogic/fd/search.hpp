#pragma once

// Depth-first labeling and branch-and-bound.
//
// Variable order: first-fail (smallest domain), ties by id; the caller's
// variables come before all other store variables. Value order: ascending.
// Branching is binary: x = min(x), then x != min(x).

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "idlogic/fd/store.hpp"

namespace idlogic::fd {

using Clock = std::chrono::steady_clock;

struct Solution {
  std::vector<Value> values;
  Value operator[](Var v) const { return values.at(static_cast<std::size_t>(v.id)); }
};

enum class Direction { Minimize, Maximize };

enum class SearchStatus {
  Found,      // a solution (label)
  Optimal,    // branch-and-bound proved optimality
  BestSoFar,  // deadline hit with an incumbent
  Exhausted,  // complete search, no solution
  TimedOut,   // deadline hit, no solution
};

inline const char* to_string(SearchStatus s) {
  switch (s) {
    case SearchStatus::Found: return "found";
    case SearchStatus::Optimal: return "optimal";
    case SearchStatus::BestSoFar: return "best-so-far";
    case SearchStatus::Exhausted: return "exhausted";
    case SearchStatus::TimedOut: return "timed-out";
  }
  return "?";
}

struct SearchOptions {
  std::optional<Clock::time_point> deadline;
  /// Called with each improving objective value (branch-and-bound only).
  std::function<void(Value, const Solution&)> on_incumbent;
};

struct SearchResult {
  SearchStatus status = SearchStatus::Exhausted;
  std::optional<Solution> solution;
  std::optional<Value> objective;
  std::uint64_t nodes = 0;
};

class LabelingError : public std::logic_error {
  using std::logic_error::logic_error;
};

namespace detail {

class Search {
 public:
  Search(Store& s, std::vector<Var> priority, const SearchOptions& opt) : s_(s), priority_(std::move(priority)), opt_(opt) {}

  /// Visits solutions until `on_solution` returns true. Leaves the store as it was.
  void run(const std::function<bool(const Solution&)>& on_solution, const std::function<bool()>& tighten) {
    on_solution_ = &on_solution;
    tighten_ = &tighten;
    const std::size_t lvl = s_.mark();
    if (s_.propagate()) dfs();
    s_.restore(lvl);
  }

  bool timed_out() const { return timed_out_; }
  std::uint64_t nodes() const { return nodes_; }

 private:
  std::optional<Var> select() const {
    std::optional<Var> best;
    auto consider = [&](Var v) {
      if (s_.fixed(v)) return;
      if (!best || s_.dom(v).size() < s_.dom(*best).size() ||
          (s_.dom(v).size() == s_.dom(*best).size() && v.id < best->id))
        best = v;
    };
    for (Var v : priority_) consider(v);
    if (best) return best;
    for (std::size_t i = 0; i < s_.num_vars(); ++i) consider(Var{static_cast<int>(i)});
    return best;
  }

  Solution snapshot() const {
    Solution sol;
    sol.values.reserve(s_.num_vars());
    for (std::size_t i = 0; i < s_.num_vars(); ++i) sol.values.push_back(s_.value(Var{static_cast<int>(i)}));
    return sol;
  }

  // Returns true when the search should stop.
  bool dfs() {
    for (;;) {
      ++nodes_;
      if (opt_.deadline && (nodes_ & 63) == 0 && Clock::now() >= *opt_.deadline) {
        timed_out_ = true;
        return true;
      }
      if (!(*tighten_)() || !s_.propagate()) return false;
      auto x = select();
      if (!x) {
        if (!s_.check_fixed()) throw LabelingError("labeled assignment violates a posted constraint");
        return (*on_solution_)(snapshot());
      }
      const Value v = s_.min(*x);
      const std::size_t lvl = s_.mark();
      bool stop = false;
      if (s_.assign(*x, v) && s_.propagate()) stop = dfs();
      s_.restore(lvl);
      if (stop) return true;
      if (!s_.remove(*x, v) || !s_.propagate()) return false;
    }
  }

  Store& s_;
  std::vector<Var> priority_;
  const SearchOptions& opt_;
  const std::function<bool(const Solution&)>* on_solution_ = nullptr;
  const std::function<bool()>* tighten_ = nullptr;
  std::uint64_t nodes_ = 0;
  bool timed_out_ = false;
};

}  // namespace detail

/// First solution in the documented order, or exhausted.
inline SearchResult label(Store& s, const std::vector<Var>& vars, const SearchOptions& opt = {}) {
  SearchResult r;
  detail::Search search(s, vars, opt);
  search.run(
      [&](const Solution& sol) {
        r.solution = sol;
        return true;
      },
      [] { return true; });
  r.nodes = search.nodes();
  if (r.solution) r.status = SearchStatus::Found;
  else r.status = search.timed_out() ? SearchStatus::TimedOut : SearchStatus::Exhausted;
  return r;
}

/// Calls `visit` for every solution, in search order, until it returns false.
inline std::uint64_t for_each_solution(Store& s, const std::vector<Var>& vars,
                                       const std::function<bool(const Solution&)>& visit,
                                       const SearchOptions& opt = {}) {
  std::uint64_t n = 0;
  detail::Search search(s, vars, opt);
  search.run(
      [&](const Solution& sol) {
        ++n;
        return !visit(sol);
      },
      [] { return true; });
  return n;
}

/// Optimises `objective`; after each solution the bound is tightened strictly.
inline SearchResult branch_and_bound(Store& s, Var objective, Direction dir, const std::vector<Var>& vars,
                                     const SearchOptions& opt = {}) {
  SearchResult r;
  detail::Search search(s, vars, opt);
  search.run(
      [&](const Solution& sol) {
        r.solution = sol;
        r.objective = sol[objective];
        if (opt.on_incumbent) opt.on_incumbent(*r.objective, sol);
        return false;
      },
      [&] {
        if (!r.objective) return true;
        return dir == Direction::Maximize ? s.set_min(objective, *r.objective + 1)
                                          : s.set_max(objective, *r.objective - 1);
      });
  r.nodes = search.nodes();
  if (search.timed_out()) r.status = r.solution ? SearchStatus::BestSoFar : SearchStatus::TimedOut;
  else r.status = r.solution ? SearchStatus::Optimal : SearchStatus::Exhausted;
  return r;
}

}  // namespace idlogic::fd
