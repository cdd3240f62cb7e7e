#pragma once

// Dependency analysis, recursion rejection, definition merging and Clark
// completion of non-recursive definitions.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "idlogic/ast.hpp"

namespace idlogic {

class RecursionUnsupported : public std::runtime_error {
 public:
  explicit RecursionUnsupported(std::vector<PredKey> cycle)
      : std::runtime_error("recursive definitions are not supported: " + describe(cycle)), cycle_(std::move(cycle)) {}
  const std::vector<PredKey>& cycle() const { return cycle_; }

 private:
  static std::string describe(const std::vector<PredKey>& c) {
    std::string s;
    for (const auto& k : c) s += k.str() + " -> ";
    if (!c.empty()) s += c.front().str();
    return s;
  }
  std::vector<PredKey> cycle_;
};

class DuplicateDefinition : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DependencyGraph {
  std::set<PredKey> nodes;
  std::set<PredKey> defined;
  std::map<PredKey, std::set<PredKey>> edges;

  const std::set<PredKey>& successors(const PredKey& p) const {
    static const std::set<PredKey> none;
    auto it = edges.find(p);
    return it == edges.end() ? none : it->second;
  }
};

inline DependencyGraph build_dependency_graph(const Theory& t) {
  DependencyGraph g;
  g.defined = t.defined();
  for (const auto& d : t.definitions) {
    for (const auto& r : d.rules) {
      const PredKey p = r.key();
      g.nodes.insert(p);
      auto& out = g.edges[p];
      for_each_atom(r.body, [&](const Formula& a) {
        g.nodes.insert(key_of(a));
        out.insert(key_of(a));
      });
    }
  }
  for (const auto& ax : t.axioms) for_each_atom(ax, [&](const Formula& a) { g.nodes.insert(key_of(a)); });
  return g;
}

/// Returns one cycle among defined predicates, if any.
inline std::optional<std::vector<PredKey>> find_cycle(const DependencyGraph& g) {
  enum Color { White, Grey, Black };
  std::map<PredKey, Color> color;
  std::vector<PredKey> stack;
  std::optional<std::vector<PredKey>> found;
  std::function<void(const PredKey&)> dfs = [&](const PredKey& p) {
    color[p] = Grey;
    stack.push_back(p);
    for (const auto& q : g.successors(p)) {
      if (found) return;
      if (!g.defined.count(q)) continue;
      if (color[q] == Grey) {
        auto it = std::find(stack.begin(), stack.end(), q);
        found = std::vector<PredKey>(it, stack.end());
        return;
      }
      if (color[q] == White) dfs(q);
    }
    stack.pop_back();
    color[p] = Black;
  };
  for (const auto& p : g.defined) {
    if (found) break;
    if (color[p] == White) dfs(p);
  }
  return found;
}

inline void assert_nonrecursive(const DependencyGraph& g) {
  if (auto c = find_cycle(g)) throw RecursionUnsupported(*c);
}

/// Rejects theories where a declared-open predicate heads a rule, or where the
/// same predicate name is defined with different arities.
inline void check_definitions(const Theory& t) {
  std::map<std::string, std::size_t> arity;
  for (const auto& d : t.definitions) {
    for (const auto& p : d.defined) {
      if (t.domains.count(p)) throw DuplicateDefinition("predicate " + p.str() + " is declared open but has rules");
      auto [it, fresh] = arity.emplace(p.name, p.arity);
      if (!fresh && it->second != p.arity)
        throw DuplicateDefinition("predicate " + p.name + " defined with arities " + std::to_string(it->second) +
                                  " and " + std::to_string(p.arity));
    }
  }
}

inline Theory merge_definitions(const Theory& t) {
  check_definitions(t);
  Theory out = t;
  out.definitions.clear();
  Definition merged;
  for (const auto& d : t.definitions) {
    merged.defined.insert(d.defined.begin(), d.defined.end());
    merged.rules.insert(merged.rules.end(), d.rules.begin(), d.rules.end());
  }
  if (!merged.rules.empty() || !merged.defined.empty()) out.definitions.push_back(std::move(merged));
  return out;
}

/// `forall(params): pred(params) <-> body`
struct CompletedDef {
  PredKey pred;
  std::vector<std::string> params;
  Formula body;
};

namespace detail {

inline void all_names(const Formula& f, std::set<std::string>& out);

inline void all_names(const Aggregate& a, std::set<std::string>& out) {
  out.insert(a.set.params.begin(), a.set.params.end());
  all_names(a.set.body, out);
  if (a.func) {
    out.insert(a.func->params.begin(), a.func->params.end());
    if (a.func->result) out.insert(*a.func->result);
    if (a.func->term) collect_vars(*a.func->term, out);
    else all_names(a.func->body, out);
  }
  collect_vars(a.result, out);
}

inline void all_names(const Formula& f, std::set<std::string>& out) {
  for (const auto& t : f.args()) collect_vars(t, out);
  out.insert(f.vars().begin(), f.vars().end());
  for (const auto& k : f.kids()) all_names(k, out);
  if (f.is(Formula::Kind::Aggregate)) all_names(f.agg(), out);
}

}  // namespace detail

inline CompletedDef complete_predicate(const Definition& d, const PredKey& p) {
  std::set<std::string> taken;
  std::vector<const Rule*> rules;
  for (const auto& r : d.rules) {
    if (r.key() != p) continue;
    rules.push_back(&r);
    for (const auto& t : r.head_args) collect_vars(t, taken);
    detail::all_names(r.body, taken);
  }
  CompletedDef cd;
  cd.pred = p;
  for (std::size_t i = 0; i < p.arity; ++i) {
    std::string name = "X" + std::to_string(i + 1);
    while (taken.count(name)) name += "_";
    cd.params.push_back(name);
  }
  std::vector<Formula> disjuncts;
  for (const Rule* r : rules) {
    std::set<std::string> locals;
    for (const auto& t : r->head_args) collect_vars(t, locals);
    auto fb = free_vars(r->body);
    locals.insert(fb.begin(), fb.end());
    Binding to_param;
    std::vector<Formula> parts;
    std::vector<std::pair<std::size_t, Term>> pending;
    for (std::size_t i = 0; i < r->head_args.size(); ++i) {
      const Term& t = r->head_args[i];
      if (t.is_var() && !to_param.count(t.name())) {
        to_param[t.name()] = Term::var(cd.params[i]);
        locals.erase(t.name());
      } else {
        pending.emplace_back(i, t);
      }
    }
    for (const auto& [i, t] : pending)
      parts.push_back(Formula::compare(CmpOp::Eq, Term::var(cd.params[i]), substitute(t, to_param)));
    Formula body = substitute(r->body, to_param);
    if (!body.is(Formula::Kind::True) || parts.empty()) parts.push_back(body);
    Formula disjunct = parts.size() == 1 ? parts[0] : Formula::conj(std::move(parts));
    if (!locals.empty()) disjunct = Formula::exists(std::vector<std::string>(locals.begin(), locals.end()), disjunct);
    disjuncts.push_back(std::move(disjunct));
  }
  if (disjuncts.empty()) cd.body = Formula::falsity();
  else if (disjuncts.size() == 1) cd.body = disjuncts[0];
  else cd.body = Formula::disj(std::move(disjuncts));
  return cd;
}

/// Completed definitions of every defined predicate of a (merged) theory.
class Completion {
 public:
  Completion() = default;

  explicit Completion(const Theory& t) {
    check_definitions(t);
    auto g = build_dependency_graph(t);
    assert_nonrecursive(g);
    Theory merged = merge_definitions(t);
    if (merged.definitions.empty()) return;
    const auto& d = merged.definitions.front();
    for (const auto& p : d.defined) defs_.emplace(p, complete_predicate(d, p));
  }

  bool is_defined(const PredKey& p) const { return defs_.count(p) != 0; }
  const CompletedDef& get(const PredKey& p) const { return defs_.at(p); }
  const std::map<PredKey, CompletedDef>& all() const { return defs_; }

  /// B_p[args]
  Formula instantiate(const Formula& atom) const {
    const auto& cd = defs_.at(key_of(atom));
    Binding b;
    for (std::size_t i = 0; i < cd.params.size(); ++i) b[cd.params[i]] = atom.args()[i];
    return substitute(cd.body, b);
  }

 private:
  std::map<PredKey, CompletedDef> defs_;
};

inline std::string to_string(const CompletedDef& cd) {
  std::vector<Term> args;
  for (const auto& p : cd.params) args.push_back(Term::var(p));
  Rule r{cd.pred.name, args, cd.body};
  return "% completion of " + cd.pred.str() + "\n" + to_string(r);
}

}  // namespace idlogic
