#pragma once

// Constraint vocabulary of the store and its translation to propagators.

#include <map>
#include <memory>
#include <stdexcept>
#include <type_traits>
#include <variant>
#include <vector>

#include "idlogic/fd/propagators.hpp"

namespace idlogic::fd {

class NotReifiable : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class Op { Eq, Ne, Le, Lt, Ge, Gt };

/// sum(coef*var) op k
struct LinearC {
  std::vector<LinTerm> terms;
  Op op = Op::Eq;
  Value k = 0;
};
/// z = |x - y|
struct AbsDiffC {
  Var x, y, z;
};
/// Tuples differ somewhere.
struct TupleNotEqualC {
  std::vector<Var> xs, ys;
};
/// target = sum of booleans
struct BoolSumC {
  Var target;
  std::vector<Var> bools;
};
/// target = sum(b_i * f_i)
struct WeightedBoolSumC {
  Var target;
  std::vector<std::pair<Var, Var>> pairs;
};
/// b <=> inner
struct ReifiedC {
  Var b;
  LinearC inner;
};
/// defined = 1 implies target = min/max of v_i with b_i = 1.
struct ExtremumSelectedC {
  Var target;
  std::vector<std::pair<Var, Var>> pairs;
  Var defined;
  bool is_max = false;
};
/// target = product of (b_i ? f_i : 1)
struct ProductSelectedC {
  Var target;
  std::vector<std::pair<Var, Var>> pairs;
};
/// target = b ? then : otherwise
struct ConditionalC {
  Var target, b, then;
  Value otherwise = 0;
};

using Constraint = std::variant<LinearC, AbsDiffC, TupleNotEqualC, BoolSumC, WeightedBoolSumC, ReifiedC,
                                ExtremumSelectedC, ProductSelectedC, ConditionalC>;

/// Merges repeated variables, drops zero coefficients and maps the relation to
/// one of <=, =, !=.
inline Linear normalize(const LinearC& c) {
  std::map<int, Value> coef;
  for (const auto& t : c.terms) coef[t.var.id] += t.coef;
  std::vector<LinTerm> ts;
  for (const auto& [id, a] : coef)
    if (a != 0) ts.push_back({a, Var{id}});
  switch (c.op) {
    case Op::Le: return Linear(ts, LinRel::Le, c.k);
    case Op::Lt: return Linear(ts, LinRel::Le, c.k - 1);
    case Op::Ge: return Linear(detail::negated(ts), LinRel::Le, -c.k);
    case Op::Gt: return Linear(detail::negated(ts), LinRel::Le, -c.k - 1);
    case Op::Eq: return Linear(ts, LinRel::Eq, c.k);
    case Op::Ne: return Linear(ts, LinRel::Ne, c.k);
  }
  return Linear(ts, LinRel::Eq, c.k);
}

inline LinearC lin(std::vector<LinTerm> terms, Op op, Value k) { return LinearC{std::move(terms), op, k}; }

/// Adds the constraint without running propagation.
inline void add(Store& s, const Constraint& c);

/// B <=> c for a reifiable constraint (linear relations only).
inline Var reify(Store& s, const Constraint& c) {
  const auto* l = std::get_if<LinearC>(&c);
  if (!l) throw NotReifiable("only linear relations can be reified");
  Var b = s.new_bool();
  s.add(std::make_shared<ReifiedLinear>(b, normalize(*l)));
  return b;
}

inline void add(Store& s, const Constraint& c) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, LinearC>) {
          s.add(std::make_shared<Linear>(normalize(x)));
        } else if constexpr (std::is_same_v<T, AbsDiffC>) {
          // z >= x-y, z >= y-x, and one of the two is tight.
          add(s, lin({{1, x.z}, {-1, x.x}, {1, x.y}}, Op::Ge, 0));
          add(s, lin({{1, x.z}, {1, x.x}, {-1, x.y}}, Op::Ge, 0));
          Var b1 = reify(s, lin({{1, x.z}, {-1, x.x}, {1, x.y}}, Op::Eq, 0));
          Var b2 = reify(s, lin({{1, x.z}, {1, x.x}, {-1, x.y}}, Op::Eq, 0));
          add(s, lin({{1, b1}, {1, b2}}, Op::Ge, 1));
        } else if constexpr (std::is_same_v<T, TupleNotEqualC>) {
          if (x.xs.size() != x.ys.size()) throw std::invalid_argument("tuple_not_equal arity mismatch");
          s.add(std::make_shared<TupleNotEqual>(x.xs, x.ys));
        } else if constexpr (std::is_same_v<T, BoolSumC>) {
          std::vector<LinTerm> ts{{1, x.target}};
          for (Var b : x.bools) ts.push_back({-1, b});
          add(s, lin(std::move(ts), Op::Eq, 0));
        } else if constexpr (std::is_same_v<T, WeightedBoolSumC>) {
          std::vector<LinTerm> ts{{1, x.target}};
          for (const auto& [b, f] : x.pairs) {
            if (s.fixed(f)) {
              ts.push_back({-s.value(f), b});
              continue;
            }
            Var t = s.new_var(std::min<Value>(0, s.min(f)), std::max<Value>(0, s.max(f)), Role::Aux);
            s.add(std::make_shared<Conditional>(t, b, f, 0));
            ts.push_back({-1, t});
          }
          add(s, lin(std::move(ts), Op::Eq, 0));
        } else if constexpr (std::is_same_v<T, ReifiedC>) {
          s.add(std::make_shared<ReifiedLinear>(x.b, normalize(x.inner)));
        } else if constexpr (std::is_same_v<T, ExtremumSelectedC>) {
          s.add(std::make_shared<ExtremumSelected>(x.target, x.pairs, x.defined, x.is_max));
        } else if constexpr (std::is_same_v<T, ProductSelectedC>) {
          std::vector<Var> factors;
          for (const auto& [b, f] : x.pairs) {
            Var t = s.new_var(std::min<Value>(1, s.min(f)), std::max<Value>(1, s.max(f)), Role::Aux);
            s.add(std::make_shared<Conditional>(t, b, f, 1));
            factors.push_back(t);
          }
          s.add(std::make_shared<Product>(x.target, std::move(factors)));
        } else if constexpr (std::is_same_v<T, ConditionalC>) {
          s.add(std::make_shared<Conditional>(x.target, x.b, x.then, x.otherwise));
        }
      },
      c);
}

/// Records c and propagates to a fixpoint.
inline bool post(Store& s, const Constraint& c) {
  add(s, c);
  return s.propagate();
}

}  // namespace idlogic::fd
