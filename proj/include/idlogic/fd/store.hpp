#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "idlogic/fd/domain.hpp"

namespace idlogic::fd {

class EmptyDomain : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
  auto operator<=>(const Var&) const = default;
};

enum class Role { Problem, Boolean, Objective, Aux };

class Store;

/// Stateless propagator. All state lives in the store's domains, which keeps
/// restore-to-mark exact.
class Propagator {
 public:
  virtual ~Propagator() = default;
  virtual std::vector<Var> scope() const = 0;
  /// Narrows domains; false means a domain was emptied or a violation found.
  virtual bool propagate(Store& s) const = 0;
  /// Ground evaluation; only meaningful when every scope var is fixed.
  virtual bool check(const Store& s) const = 0;
  virtual std::string describe(const Store& s) const = 0;
};

using PropagatorPtr = std::shared_ptr<const Propagator>;

struct TraceEvent {
  Var var;
  Domain before;
  Domain after;
  std::string cause;
};

class Store {
 public:
  Var new_var(const Domain& d, Role role = Role::Problem, std::string name = {}) {
    if (d.empty()) throw EmptyDomain("empty domain for new variable " + name);
    if (d.min() < kMinValue || d.max() > kMaxValue)
      throw OverflowError("domain " + d.str() + " exceeds the supported integer range");
    Var v{static_cast<int>(doms_.size())};
    doms_.push_back(d);
    roles_.push_back(role);
    names_.push_back(name.empty() ? "_V" + std::to_string(v.id) : std::move(name));
    watch_.emplace_back();
    stamp_.push_back(0);
    return v;
  }
  Var new_var(Value lo, Value hi, Role role = Role::Problem, std::string name = {}) {
    return new_var(Domain(lo, hi), role, std::move(name));
  }
  Var new_bool(std::string name = {}) { return new_var(Domain::boolean(), Role::Boolean, std::move(name)); }
  Var constant(Value v) { return new_var(Domain(v, v), Role::Aux, "#" + std::to_string(v)); }

  std::size_t num_vars() const { return doms_.size(); }
  const Domain& dom(Var v) const { return doms_.at(static_cast<std::size_t>(v.id)); }
  Value min(Var v) const { return dom(v).min(); }
  Value max(Var v) const { return dom(v).max(); }
  bool fixed(Var v) const { return dom(v).fixed(); }
  Value value(Var v) const { return dom(v).value(); }
  Role role(Var v) const { return roles_.at(static_cast<std::size_t>(v.id)); }
  void set_role(Var v, Role r) { roles_.at(static_cast<std::size_t>(v.id)) = r; }
  const std::string& name(Var v) const { return names_.at(static_cast<std::size_t>(v.id)); }
  void set_name(Var v, std::string n) { names_.at(static_cast<std::size_t>(v.id)) = std::move(n); }
  bool failed() const { return failed_; }
  const std::vector<PropagatorPtr>& propagators() const { return props_; }

  // Domain updates. Each returns false when the store becomes inconsistent.
  bool set_min(Var v, Value lo) {
    return update(v, [&](Domain& d) { return d.restrict_min(lo); });
  }
  bool set_max(Var v, Value hi) {
    return update(v, [&](Domain& d) { return d.restrict_max(hi); });
  }
  bool remove(Var v, Value x) {
    return update(v, [&](Domain& d) { return d.remove(x); });
  }
  bool assign(Var v, Value x) {
    return update(v, [&](Domain& d) { return d.assign(x); });
  }
  bool intersect(Var v, const Domain& o) {
    return update(v, [&](Domain& d) { return d.intersect(o); });
  }

  /// Adds a propagator and schedules it. Call propagate() to reach a fixpoint.
  void add(PropagatorPtr p) {
    const int idx = static_cast<int>(props_.size());
    for (Var v : p->scope()) {
      auto& w = watch_.at(static_cast<std::size_t>(v.id));
      if (w.empty() || w.back() != idx) w.push_back(idx);
    }
    props_.push_back(std::move(p));
    queued_.push_back(0);
    enqueue(idx);
  }

  bool propagate() {
    while (!failed_ && !queue_.empty()) {
      const int idx = queue_.front();
      queue_.pop_front();
      queued_[static_cast<std::size_t>(idx)] = 0;
      current_ = props_[static_cast<std::size_t>(idx)].get();
      const bool ok = current_->propagate(*this);
      current_ = nullptr;
      if (!ok) fail();
    }
    return !failed_;
  }

  bool post(PropagatorPtr p) {
    add(std::move(p));
    return propagate();
  }

  /// Opens a choice point; returns the level to pass to restore().
  std::size_t mark() {
    marks_.push_back({trail_.size(), props_.size(), doms_.size(), failed_});
    epochs_.push_back(++epoch_counter_);
    return marks_.size() - 1;
  }

  /// Undoes every change made since mark() returned `level`.
  void restore(std::size_t level) {
    if (level >= marks_.size()) throw std::out_of_range("restore to unknown mark");
    const Mark m = marks_[level];
    while (trail_.size() > m.trail) {
      auto& e = trail_.back();
      if (static_cast<std::size_t>(e.var) < doms_.size()) doms_[static_cast<std::size_t>(e.var)] = std::move(e.old);
      trail_.pop_back();
    }
    doms_.resize(m.vars);
    roles_.resize(m.vars);
    names_.resize(m.vars);
    watch_.resize(m.vars);
    stamp_.resize(m.vars);
    props_.resize(m.props);
    queued_.resize(m.props);
    for (auto& w : watch_)
      while (!w.empty() && static_cast<std::size_t>(w.back()) >= m.props) w.pop_back();
    queue_.clear();
    std::fill(queued_.begin(), queued_.end(), 0);
    failed_ = m.failed;
    marks_.resize(level);
    epochs_.resize(level);
  }
  std::size_t level() const { return marks_.size(); }

  /// True when every propagator whose scope is fixed accepts the assignment.
  bool check_fixed() const {
    for (const auto& p : props_) {
      bool all = true;
      for (Var v : p->scope()) all = all && fixed(v);
      if (all && !p->check(*this)) return false;
    }
    return true;
  }

  void set_trace(std::function<void(const TraceEvent&)> cb) { trace_ = std::move(cb); }

 private:
  struct Mark {
    std::size_t trail, props, vars;
    bool failed;
  };
  struct TrailEntry {
    int var;
    Domain old;
  };

  void fail() {
    failed_ = true;
    queue_.clear();
    std::fill(queued_.begin(), queued_.end(), 0);
  }

  void enqueue(int idx) {
    auto& q = queued_[static_cast<std::size_t>(idx)];
    if (q) return;
    q = 1;
    queue_.push_back(idx);
  }

  template <class F>
  bool update(Var v, F&& op) {
    if (failed_) return false;
    const auto i = static_cast<std::size_t>(v.id);
    Domain& d = doms_.at(i);
    if (!epochs_.empty() && stamp_[i] != epochs_.back()) {
      trail_.push_back({v.id, d});
      stamp_[i] = epochs_.back();
    }
    Domain before;
    if (trace_) before = d;
    if (!op(d)) return true;
    if (trace_) trace_({v, before, d, current_ ? current_->describe(*this) : std::string("search")});
    if (d.empty()) {
      fail();
      return false;
    }
    // The running propagator is re-queued too, so it reaches its own fixpoint.
    for (int p : watch_[i]) enqueue(p);
    return true;
  }

  std::vector<Domain> doms_;
  std::vector<Role> roles_;
  std::vector<std::string> names_;
  std::vector<std::vector<int>> watch_;
  std::vector<std::uint64_t> stamp_;
  std::vector<PropagatorPtr> props_;
  std::vector<char> queued_;
  std::deque<int> queue_;
  std::vector<TrailEntry> trail_;
  std::vector<Mark> marks_;
  std::vector<std::uint64_t> epochs_;
  std::uint64_t epoch_counter_ = 0;
  bool failed_ = false;
  const Propagator* current_ = nullptr;
  std::function<void(const TraceEvent&)> trace_;
};

}  // namespace idlogic::fd
