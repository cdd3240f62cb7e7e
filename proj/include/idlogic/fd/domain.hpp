#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace idlogic::fd {

using Value = std::int64_t;

/// Largest magnitude a domain bound may take.
inline constexpr Value kMaxValue = std::numeric_limits<std::int32_t>::max();
inline constexpr Value kMinValue = -kMaxValue;

class OverflowError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Finite set of integers stored as sorted, disjoint, non-adjacent intervals.
class Domain {
 public:
  Domain() = default;
  Domain(Value lo, Value hi) {
    if (lo <= hi) iv_.emplace_back(lo, hi);
  }
  static Domain from_values(std::vector<Value> vs) {
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    Domain d;
    for (Value v : vs) {
      if (!d.iv_.empty() && d.iv_.back().second + 1 == v)
        d.iv_.back().second = v;
      else
        d.iv_.emplace_back(v, v);
    }
    return d;
  }
  static Domain boolean() { return Domain(0, 1); }

  bool empty() const { return iv_.empty(); }
  Value min() const { return iv_.front().first; }
  Value max() const { return iv_.back().second; }
  bool fixed() const { return iv_.size() == 1 && iv_[0].first == iv_[0].second; }
  Value value() const { return iv_.front().first; }
  std::uint64_t size() const {
    std::uint64_t n = 0;
    for (const auto& [a, b] : iv_) n += static_cast<std::uint64_t>(b - a) + 1;
    return n;
  }
  bool contains(Value v) const {
    auto it = std::lower_bound(iv_.begin(), iv_.end(), v, [](const auto& p, Value x) { return p.second < x; });
    return it != iv_.end() && it->first <= v;
  }
  /// Smallest value strictly greater than v, if any.
  bool next_after(Value v, Value& out) const {
    for (const auto& [a, b] : iv_) {
      if (b <= v) continue;
      out = std::max(a, v + 1);
      return true;
    }
    return false;
  }
  const std::vector<std::pair<Value, Value>>& intervals() const { return iv_; }

  // Mutators return true if the domain changed.
  bool restrict_min(Value lo) {
    if (empty() || lo <= min()) return false;
    while (!iv_.empty() && iv_.front().second < lo) iv_.erase(iv_.begin());
    if (!iv_.empty() && iv_.front().first < lo) iv_.front().first = lo;
    return true;
  }
  bool restrict_max(Value hi) {
    if (empty() || hi >= max()) return false;
    while (!iv_.empty() && iv_.back().first > hi) iv_.pop_back();
    if (!iv_.empty() && iv_.back().second > hi) iv_.back().second = hi;
    return true;
  }
  bool remove(Value v) {
    auto it = std::lower_bound(iv_.begin(), iv_.end(), v, [](const auto& p, Value x) { return p.second < x; });
    if (it == iv_.end() || it->first > v) return false;
    if (it->first == v && it->second == v) {
      iv_.erase(it);
    } else if (it->first == v) {
      ++it->first;
    } else if (it->second == v) {
      --it->second;
    } else {
      const Value hi = it->second;
      it->second = v - 1;
      iv_.insert(it + 1, {v + 1, hi});
    }
    return true;
  }
  bool assign(Value v) {
    if (fixed() && value() == v) return false;
    const bool had = contains(v);
    iv_.clear();
    if (had) iv_.emplace_back(v, v);
    return true;
  }
  bool intersect(const Domain& o) {
    std::vector<std::pair<Value, Value>> out;
    std::size_t i = 0, j = 0;
    while (i < iv_.size() && j < o.iv_.size()) {
      const Value lo = std::max(iv_[i].first, o.iv_[j].first);
      const Value hi = std::min(iv_[i].second, o.iv_[j].second);
      if (lo <= hi) out.emplace_back(lo, hi);
      if (iv_[i].second < o.iv_[j].second) ++i;
      else ++j;
    }
    if (out == iv_) return false;
    iv_ = std::move(out);
    return true;
  }

  bool operator==(const Domain& o) const { return iv_ == o.iv_; }

  std::string str() const {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < iv_.size(); ++i) {
      if (i) os << ',';
      if (iv_[i].first == iv_[i].second) os << iv_[i].first;
      else os << iv_[i].first << ".." << iv_[i].second;
    }
    os << '}';
    return os.str();
  }

 private:
  std::vector<std::pair<Value, Value>> iv_;
};

}  // namespace idlogic::fd
