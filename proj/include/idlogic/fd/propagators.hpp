#pragma once

#include <algorithm>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "idlogic/fd/store.hpp"

namespace idlogic::fd {

using Wide = __int128;

struct LinTerm {
  Value coef;
  Var var;
};

/// Normalised linear relation `sum(coef*var) op k` with op in {<=, =, !=}.
enum class LinRel { Le, Eq, Ne };

namespace detail {

inline Wide floor_div(Wide a, Wide b) {
  Wide q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}
inline Wide ceil_div(Wide a, Wide b) { return -floor_div(-a, b); }

inline Value clamp_wide(Wide w) {
  const Wide lo = static_cast<Wide>(kMinValue) * 4, hi = static_cast<Wide>(kMaxValue) * 4;
  return static_cast<Value>(std::clamp(w, lo, hi));
}

inline Wide term_min(const Store& s, const LinTerm& t) {
  return t.coef > 0 ? static_cast<Wide>(t.coef) * s.min(t.var) : static_cast<Wide>(t.coef) * s.max(t.var);
}
inline Wide term_max(const Store& s, const LinTerm& t) {
  return t.coef > 0 ? static_cast<Wide>(t.coef) * s.max(t.var) : static_cast<Wide>(t.coef) * s.min(t.var);
}

inline bool prop_le(Store& s, const std::vector<LinTerm>& ts, Value k) {
  Wide lo = 0;
  for (const auto& t : ts) lo += term_min(s, t);
  if (lo > k) return false;
  for (const auto& t : ts) {
    const Wide room = static_cast<Wide>(k) - (lo - term_min(s, t));
    if (t.coef > 0) {
      const Wide b = floor_div(room, t.coef);
      if (b < s.max(t.var) && !s.set_max(t.var, clamp_wide(b))) return false;
    } else {
      const Wide b = ceil_div(room, t.coef);
      if (b > s.min(t.var) && !s.set_min(t.var, clamp_wide(b))) return false;
    }
  }
  return true;
}

inline std::vector<LinTerm> negated(const std::vector<LinTerm>& ts) {
  std::vector<LinTerm> out = ts;
  for (auto& t : out) t.coef = -t.coef;
  return out;
}

}  // namespace detail

class Linear final : public Propagator {
 public:
  Linear(std::vector<LinTerm> terms, LinRel rel, Value k) : terms_(std::move(terms)), neg_(detail::negated(terms_)), rel_(rel), k_(k) {}

  const std::vector<LinTerm>& terms() const { return terms_; }
  LinRel rel() const { return rel_; }
  Value k() const { return k_; }

  std::vector<Var> scope() const override {
    std::vector<Var> vs;
    for (const auto& t : terms_) vs.push_back(t.var);
    return vs;
  }

  bool propagate(Store& s) const override {
    switch (rel_) {
      case LinRel::Le:
        return detail::prop_le(s, terms_, k_);
      case LinRel::Eq:
        return detail::prop_le(s, terms_, k_) && detail::prop_le(s, neg_, -k_) && unary_eq(s);
      case LinRel::Ne:
        return prop_ne(s);
    }
    return true;
  }

  bool check(const Store& s) const override {
    Wide sum = 0;
    for (const auto& t : terms_) sum += static_cast<Wide>(t.coef) * s.value(t.var);
    switch (rel_) {
      case LinRel::Le: return sum <= k_;
      case LinRel::Eq: return sum == k_;
      case LinRel::Ne: return sum != k_;
    }
    return false;
  }

  /// Constraint holds in every assignment of the current domains.
  bool entailed(const Store& s) const {
    switch (rel_) {
      case LinRel::Le: return max_sum(s) <= k_;
      case LinRel::Eq: return eq_entailed(s);
      case LinRel::Ne: return eq_disentailed(s);
    }
    return false;
  }
  /// Constraint fails in every assignment of the current domains.
  bool disentailed(const Store& s) const {
    switch (rel_) {
      case LinRel::Le: return min_sum(s) > k_;
      case LinRel::Eq: return eq_disentailed(s);
      case LinRel::Ne: return eq_entailed(s);
    }
    return false;
  }

  Linear negation() const {
    switch (rel_) {
      case LinRel::Le: return Linear(neg_, LinRel::Le, -k_ - 1);
      case LinRel::Eq: return Linear(terms_, LinRel::Ne, k_);
      case LinRel::Ne: return Linear(terms_, LinRel::Eq, k_);
    }
    return *this;
  }

  std::string describe(const Store& s) const override {
    std::ostringstream os;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (i) os << " + ";
      if (terms_[i].coef != 1) os << terms_[i].coef << "*";
      os << s.name(terms_[i].var);
    }
    if (terms_.empty()) os << "0";
    os << (rel_ == LinRel::Le ? " =< " : rel_ == LinRel::Eq ? " = " : " \\= ") << k_;
    return os.str();
  }

 private:
  Wide min_sum(const Store& s) const {
    Wide w = 0;
    for (const auto& t : terms_) w += detail::term_min(s, t);
    return w;
  }
  Wide max_sum(const Store& s) const {
    Wide w = 0;
    for (const auto& t : terms_) w += detail::term_max(s, t);
    return w;
  }

  // Sum of the fixed terms plus the single unfixed term, if there is at most one.
  bool split_unfixed(const Store& s, Wide& fixed_sum, const LinTerm*& open, int& n_open) const {
    fixed_sum = 0;
    open = nullptr;
    n_open = 0;
    for (const auto& t : terms_) {
      if (s.fixed(t.var)) {
        fixed_sum += static_cast<Wide>(t.coef) * s.value(t.var);
      } else {
        ++n_open;
        open = &t;
      }
    }
    return n_open <= 1;
  }

  bool eq_entailed(const Store& s) const {
    Wide fs;
    const LinTerm* open;
    int n;
    split_unfixed(s, fs, open, n);
    return n == 0 && fs == k_;
  }

  bool eq_disentailed(const Store& s) const {
    if (min_sum(s) > k_ || max_sum(s) < k_) return true;
    Wide fs;
    const LinTerm* open;
    int n;
    split_unfixed(s, fs, open, n);
    if (n == 0) return fs != k_;
    if (n == 1) {
      const Wide rest = static_cast<Wide>(k_) - fs;
      if (rest % open->coef != 0) return true;
      const Wide v = rest / open->coef;
      return v < kMinValue * 4 || v > kMaxValue * 4 || !s.dom(open->var).contains(static_cast<Value>(v));
    }
    return false;
  }

  // With one unfixed variable, equality is made domain consistent.
  bool unary_eq(Store& s) const {
    Wide fs;
    const LinTerm* open;
    int n;
    split_unfixed(s, fs, open, n);
    if (n == 0) return fs == k_;
    if (n > 1) return true;
    const Wide rest = static_cast<Wide>(k_) - fs;
    if (rest % open->coef != 0) return false;
    return s.assign(open->var, detail::clamp_wide(rest / open->coef));
  }

  bool prop_ne(Store& s) const {
    Wide fs;
    const LinTerm* open;
    int n;
    split_unfixed(s, fs, open, n);
    if (n == 0) return fs != k_;
    if (n > 1) return true;
    const Wide rest = static_cast<Wide>(k_) - fs;
    if (rest % open->coef != 0) return true;
    const Wide v = rest / open->coef;
    if (v < kMinValue * 4 || v > kMaxValue * 4) return true;
    return s.remove(open->var, static_cast<Value>(v));
  }

  std::vector<LinTerm> terms_;
  std::vector<LinTerm> neg_;
  LinRel rel_;
  Value k_;
};

/// B <=> inner.
class ReifiedLinear final : public Propagator {
 public:
  ReifiedLinear(Var b, Linear inner) : b_(b), pos_(std::move(inner)), neg_(pos_.negation()) {}

  std::vector<Var> scope() const override {
    auto vs = pos_.scope();
    vs.push_back(b_);
    return vs;
  }
  bool propagate(Store& s) const override {
    if (s.fixed(b_)) return s.value(b_) == 1 ? pos_.propagate(s) : neg_.propagate(s);
    if (pos_.entailed(s)) return s.assign(b_, 1);
    if (pos_.disentailed(s)) return s.assign(b_, 0);
    return true;
  }
  bool check(const Store& s) const override { return (s.value(b_) == 1) == pos_.check(s); }
  std::string describe(const Store& s) const override { return s.name(b_) + " <=> (" + pos_.describe(s) + ")"; }

 private:
  Var b_;
  Linear pos_;
  Linear neg_;
};

/// Tuples xs and ys differ in at least one position.
class TupleNotEqual final : public Propagator {
 public:
  TupleNotEqual(std::vector<Var> xs, std::vector<Var> ys) : xs_(std::move(xs)), ys_(std::move(ys)) {}

  std::vector<Var> scope() const override {
    auto vs = xs_;
    vs.insert(vs.end(), ys_.begin(), ys_.end());
    return vs;
  }
  bool propagate(Store& s) const override {
    int undecided = -1;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      const auto& dx = s.dom(xs_[i]);
      const auto& dy = s.dom(ys_[i]);
      if (dx.fixed() && dy.fixed()) {
        if (dx.value() != dy.value()) return true;
        continue;
      }
      if (dx.max() < dy.min() || dy.max() < dx.min()) return true;
      if (undecided >= 0) return true;
      undecided = static_cast<int>(i);
    }
    if (undecided < 0) return false;
    const Var x = xs_[static_cast<std::size_t>(undecided)];
    const Var y = ys_[static_cast<std::size_t>(undecided)];
    if (s.fixed(x)) return s.remove(y, s.value(x));
    if (s.fixed(y)) return s.remove(x, s.value(y));
    return true;
  }
  bool check(const Store& s) const override {
    for (std::size_t i = 0; i < xs_.size(); ++i)
      if (s.value(xs_[i]) != s.value(ys_[i])) return true;
    return false;
  }
  std::string describe(const Store&) const override { return "tuple_not_equal"; }

 private:
  std::vector<Var> xs_, ys_;
};

/// When `defined` is 1: target = min (or max) of v_i over pairs with b_i = 1.
/// Whether the selection is non-empty is linked to `defined` by the caller.
class ExtremumSelected final : public Propagator {
 public:
  ExtremumSelected(Var target, std::vector<std::pair<Var, Var>> pairs, Var defined, bool is_max)
      : target_(target), pairs_(std::move(pairs)), defined_(defined), is_max_(is_max) {}

  std::vector<Var> scope() const override {
    std::vector<Var> vs{target_, defined_};
    for (const auto& [b, v] : pairs_) {
      vs.push_back(b);
      vs.push_back(v);
    }
    return vs;
  }

  bool propagate(Store& s) const override {
    if (!(s.fixed(defined_) && s.value(defined_) == 1)) return true;
    // Work in a mirrored space for max so the logic below is always "min".
    auto lo = [&](Var x) { return is_max_ ? -s.max(x) : s.min(x); };
    auto hi = [&](Var x) { return is_max_ ? -s.min(x) : s.max(x); };
    auto raise = [&](Var x, Value a) { return is_max_ ? s.set_max(x, -a) : s.set_min(x, a); };
    auto lower = [&](Var x, Value a) { return is_max_ ? s.set_min(x, -a) : s.set_max(x, a); };

    bool any = false;
    Value least = 0;
    for (const auto& [b, v] : pairs_) {
      if (s.max(b) == 0) continue;
      least = any ? std::min(least, lo(v)) : lo(v);
      any = true;
    }
    if (!any) return false;
    if (!raise(target_, least)) return false;
    for (const auto& [b, v] : pairs_) {
      if (s.min(b) == 1) {
        if (!lower(target_, hi(v))) return false;
        if (!raise(v, lo(target_))) return false;
      }
    }
    int support = -1, n_support = 0;
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      const auto& [b, v] = pairs_[i];
      if (s.max(b) == 0) continue;
      if (hi(v) < lo(target_)) {
        if (!s.assign(b, 0)) return false;
        continue;
      }
      if (lo(v) <= hi(target_)) {
        ++n_support;
        support = static_cast<int>(i);
      }
    }
    if (n_support == 0) return false;
    if (n_support == 1) {
      const auto& [b, v] = pairs_[static_cast<std::size_t>(support)];
      if (!s.assign(b, 1)) return false;
      if (!lower(v, hi(target_)) || !raise(v, lo(target_))) return false;
      if (!lower(target_, hi(v)) || !raise(target_, lo(v))) return false;
    }
    return true;
  }

  bool check(const Store& s) const override {
    if (s.value(defined_) == 0) return true;
    bool any = false;
    Value best = 0;
    for (const auto& [b, v] : pairs_) {
      if (s.value(b) != 1) continue;
      const Value x = s.value(v);
      best = !any ? x : (is_max_ ? std::max(best, x) : std::min(best, x));
      any = true;
    }
    return any && best == s.value(target_);
  }

  std::string describe(const Store& s) const override {
    return s.name(target_) + (is_max_ ? " = max_of_selected" : " = min_of_selected");
  }

 private:
  Var target_;
  std::vector<std::pair<Var, Var>> pairs_;
  Var defined_;
  bool is_max_;
};

/// target = (b ? then : otherwise).
class Conditional final : public Propagator {
 public:
  Conditional(Var target, Var b, Var then, Value otherwise) : target_(target), b_(b), then_(then), else_(otherwise) {}

  std::vector<Var> scope() const override { return {target_, b_, then_}; }

  bool propagate(Store& s) const override {
    if (s.fixed(b_)) {
      if (s.value(b_) == 0) return s.assign(target_, else_);
      Domain t = s.dom(target_);
      t.intersect(s.dom(then_));
      return s.intersect(target_, t) && s.intersect(then_, s.dom(target_));
    }
    if (!s.dom(target_).contains(else_)) return s.assign(b_, 1);
    Domain both = s.dom(target_);
    both.intersect(s.dom(then_));
    if (both.empty()) return s.assign(b_, 0);
    return s.set_min(target_, std::min(s.min(then_), else_)) && s.set_max(target_, std::max(s.max(then_), else_));
  }

  bool check(const Store& s) const override {
    return s.value(target_) == (s.value(b_) == 1 ? s.value(then_) : else_);
  }
  std::string describe(const Store& s) const override {
    return s.name(target_) + " = " + s.name(b_) + " ? " + s.name(then_) + " : " + std::to_string(else_);
  }

 private:
  Var target_, b_, then_;
  Value else_;
};

/// target = product of factors, bounds consistent.
class Product final : public Propagator {
 public:
  Product(Var target, std::vector<Var> factors) : target_(target), factors_(std::move(factors)) {}

  std::vector<Var> scope() const override {
    auto vs = factors_;
    vs.push_back(target_);
    return vs;
  }

  bool propagate(Store& s) const override {
    Wide lo = 1, hi = 1;
    const Wide cap = static_cast<Wide>(kMaxValue) * kMaxValue;
    for (Var f : factors_) {
      const Wide c[4] = {lo * s.min(f), lo * s.max(f), hi * s.min(f), hi * s.max(f)};
      lo = *std::min_element(c, c + 4);
      hi = *std::max_element(c, c + 4);
      lo = std::max(lo, -cap);
      hi = std::min(hi, cap);
    }
    if (lo > s.min(target_) && !s.set_min(target_, detail::clamp_wide(lo))) return false;
    if (hi < s.max(target_) && !s.set_max(target_, detail::clamp_wide(hi))) return false;
    // With one factor left open and the target fixed, division decides it.
    int open = -1;
    Wide known = 1;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (s.fixed(factors_[i])) {
        known *= s.value(factors_[i]);
        known = std::clamp(known, -cap, cap);
      } else if (open >= 0) {
        return true;
      } else {
        open = static_cast<int>(i);
      }
    }
    if (open < 0 || !s.fixed(target_) || known == 0) return true;
    const Wide t = s.value(target_);
    if (t % known != 0) return false;
    return s.assign(factors_[static_cast<std::size_t>(open)], detail::clamp_wide(t / known));
  }

  bool check(const Store& s) const override {
    const Wide cap = static_cast<Wide>(kMaxValue) * kMaxValue;
    Wide p = 1;
    for (Var f : factors_) p = std::clamp(p * s.value(f), -cap, cap);
    return p == s.value(target_);
  }
  std::string describe(const Store& s) const override { return s.name(target_) + " = product"; }

 private:
  Var target_;
  std::vector<Var> factors_;
};

}  // namespace idlogic::fd
