#pragma once

// Line-delimited JSON records written by `idsolve solve --json` and read back
// by `idsolve check`. Field order is fixed; see docs/records.md.

#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "idlogic/engine/solver.hpp"
#include "idlogic/parser.hpp"

namespace idlogic::record {

using Json = nlohmann::ordered_json;

inline Json value_of(const Term& t) {
  if (t.is_int()) return t.value();
  return to_string(t);
}

inline Json atoms(const std::vector<Formula>& delta) {
  Json out = Json::array();
  for (const auto& a : delta) out.push_back(to_string(a));
  return out;
}

inline Json bindings(const std::vector<std::pair<std::string, Term>>& theta) {
  Json out = Json::object();
  for (const auto& [v, t] : theta) out[v] = value_of(t);
  return out;
}

inline Json objective(const std::optional<fd::Value>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json answer(const Answer& a, std::size_t index) {
  Json r;
  r["record"] = "answer";
  r["index"] = index;
  r["status"] = a.status;
  r["delta"] = atoms(a.delta);
  r["bindings"] = bindings(a.theta);
  r["objective"] = objective(a.objective);
  return r;
}

inline Json incumbent(fd::Value v, double elapsed) {
  Json r;
  r["record"] = "incumbent";
  r["objective"] = v;
  r["elapsed_seconds"] = elapsed;
  return r;
}

inline Json diagnostics(const std::vector<Diagnostic>& ds) {
  Json out = Json::array();
  for (const auto& d : ds) {
    Json j;
    j["kind"] = d.kind;
    j["message"] = d.message;
    out.push_back(j);
  }
  return out;
}

inline Json summary(const SolveResult& r) {
  Json j;
  j["record"] = "summary";
  j["mode"] = "solve";
  j["status"] = to_string(r.outcome);
  j["answers"] = r.answers.size();
  j["objective"] = r.answers.empty() ? Json(nullptr) : objective(r.answers.back().objective);
  j["reduction_seconds"] = r.reduction_seconds;
  j["search_seconds"] = r.search_seconds;
  j["steps"] = r.steps;
  j["nodes"] = r.nodes;
  j["incumbents"] = r.incumbents;
  j["diagnostics"] = diagnostics(r.diagnostics);
  return j;
}

/// Atoms of a text-mode answer line `answer N [status]: {a, b, ...}`.
inline std::optional<std::vector<Formula>> text_answer(const std::string& line) {
  if (line.rfind("answer ", 0) != 0) return std::nullopt;
  const auto open = line.find('{'), close = line.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) return std::nullopt;
  std::vector<Formula> delta;
  const std::string body = line.substr(open + 1, close - open - 1);
  std::size_t depth = 0, start = 0;
  for (std::size_t i = 0; i <= body.size(); ++i) {
    if (i < body.size() && body[i] == '(') ++depth;
    if (i < body.size() && body[i] == ')') --depth;
    if (i == body.size() || (body[i] == ',' && depth == 0)) {
      const std::string a = body.substr(start, i - start);
      if (a.find_first_not_of(' ') != std::string::npos) delta.push_back(parse_formula(a));
      start = i + 1;
    }
  }
  return delta;
}

/// Abduced atoms of every answer in `text`, one list per answer. Both the
/// JSON records and the text-mode answer lines are read; other lines are
/// skipped, so mixed logs are accepted.
inline std::vector<std::vector<Formula>> read_answers(const std::string& text) {
  std::vector<std::vector<Formula>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (auto t = text_answer(line)) {
      out.push_back(std::move(*t));
      continue;
    }
    const auto p = line.find_first_not_of(" \t\r");
    if (p == std::string::npos || line[p] != '{') continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.value("record", "") != "answer") continue;
    std::vector<Formula> delta;
    for (const auto& a : j.at("delta")) delta.push_back(parse_formula(a.get<std::string>()));
    out.push_back(std::move(delta));
  }
  return out;
}

}  // namespace idlogic::record
