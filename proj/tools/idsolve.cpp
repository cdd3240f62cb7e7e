// idsolve: solve ID-logic theories, check and generate battleship puzzles.
//
// Exit status: 0 answer, 1 failure (or nothing found before the timeout),
// 2 floundering or unsupported fragment, 3 usage or internal error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "idlogic/apps/battleship.hpp"
#include "idlogic/cli/record.hpp"
#include "idlogic/idlogic.hpp"

using namespace idlogic;

namespace {

constexpr double kDefaultTimeout = 300;

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Usage("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

double default_timeout() {
  const char* env = std::getenv("IDSOLVE_TIMEOUT");
  if (!env || !*env) return kDefaultTimeout;
  char* end = nullptr;
  const double v = std::strtod(env, &end);
  if (*end || !(v > 0)) throw Usage(std::string("IDSOLVE_TIMEOUT must be a positive number of seconds, got ") + env);
  return v;
}

struct SolveConfig {
  std::vector<std::string> theories;
  std::string query;
  std::string optimize;
  std::optional<double> timeout;
  std::size_t max_answers = 1;
  bool json = false, oracle = false;
  bool dump_completion = false, dump_aggregates = false;
  bool trace_derivation = false, trace_propagation = false;
};

Query load_query(const SolveConfig& c) {
  std::string text = c.query;
  std::error_code ec;
  if (std::filesystem::is_regular_file(c.query, ec)) text = slurp(c.query);
  Query q = parse_query(text);
  if (!c.optimize.empty()) {
    const auto colon = c.optimize.find(':');
    const std::string sense = c.optimize.substr(0, colon);
    if (colon == std::string::npos || (sense != "min" && sense != "max") || colon + 1 == c.optimize.size())
      throw Usage("--optimize expects min:VAR or max:VAR");
    const std::string var = c.optimize.substr(colon + 1);
    if (!free_vars(q.goal).count(var)) throw Usage("objective variable " + var + " does not occur in the query");
    q.objective = Objective{sense == "min" ? Sense::Minimize : Sense::Maximize, var};
  }
  return q;
}

int exit_code(const SolveResult& r) {
  switch (r.outcome) {
    case Outcome::Answers: return 0;
    case Outcome::Floundering:
    case Outcome::Unsupported: return 2;
    case Outcome::Failure: return r.has_diagnostic("UnsupportedAggregateAbduction") ? 2 : 1;
    case Outcome::Timeout: return 1;
  }
  return 3;
}

void print_text_answer(const Answer& a, std::size_t index) {
  std::cout << "answer " << index << " [" << a.status << "]: " << "{";
  for (std::size_t i = 0; i < a.delta.size(); ++i) std::cout << (i ? ", " : "") << to_string(a.delta[i]);
  std::cout << "}\n";
  for (const auto& [v, t] : a.theta) std::cout << "  " << v << " = " << to_string(t) << "\n";
  if (a.objective) std::cout << "  objective = " << *a.objective << "\n";
  auto pl = battleship::placement_of(a.delta);
  if (!pl.empty()) std::cout << battleship::render(pl);
}

int run_oracle(const SolveConfig& c, const Theory& t, const Query& q) {
  std::vector<Answer> found;
  std::vector<Diagnostic> diags;
  std::string status = "failure";
  auto t0 = fd::Clock::now();
  try {
    Completion comp(t);
    enumerate_models(t, [&](const Interpretation& i) {
      for (const auto& b : query_answers(comp, i, q.goal)) {
        Answer a;
        a.delta = i.atoms();
        for (const auto& v : free_vars(q.goal)) a.theta.push_back({v, b.at(v)});
        a.status = "model";
        if (q.objective) {
          a.objective = detail::as_int(b.at(q.objective->var), "objective");
          const bool better = found.empty() || (q.objective->sense == Sense::Maximize
                                                    ? *a.objective > *found[0].objective
                                                    : *a.objective < *found[0].objective);
          if (better) found = {a};
          continue;
        }
        found.push_back(a);
        if (found.size() >= c.max_answers) return false;
      }
      return true;
    });
    if (!found.empty()) status = "answers";
  } catch (const DomainTooLarge& e) {
    diags.push_back({"DomainTooLarge", e.what()});
    status = "unsupported";
  } catch (const RecursionUnsupported& e) {
    diags.push_back({"RecursionUnsupported", e.what()});
    status = "unsupported";
  } catch (const OracleError& e) {
    diags.push_back({"OracleError", e.what()});
    status = "unsupported";
  }
  const double secs = std::chrono::duration<double>(fd::Clock::now() - t0).count();
  if (q.objective && !found.empty()) found[0].status = "optimal";
  for (std::size_t i = 0; i < found.size(); ++i) {
    if (c.json) std::cout << record::answer(found[i], i + 1).dump() << "\n";
    else print_text_answer(found[i], i + 1);
  }
  if (c.json) {
    record::Json j;
    j["record"] = "summary";
    j["mode"] = "oracle";
    j["status"] = status;
    j["answers"] = found.size();
    j["objective"] = found.empty() ? record::Json(nullptr) : record::objective(found[0].objective);
    j["reduction_seconds"] = 0.0;
    j["search_seconds"] = secs;
    j["steps"] = 0;
    j["nodes"] = 0;
    j["incumbents"] = record::Json::array();
    j["diagnostics"] = record::diagnostics(diags);
    std::cout << j.dump() << "\n";
  } else {
    for (const auto& d : diags) std::cout << "diagnostic " << d.kind << ": " << d.message << "\n";
    std::cout << "status: " << status << " (oracle, " << found.size() << " answer" << (found.size() == 1 ? "" : "s")
              << ")\n";
    std::cout << "times: reduction 0 s, search " << secs << " s\n";
  }
  if (status == "answers") return 0;
  return status == "unsupported" ? 2 : 1;
}

int run_solve(const SolveConfig& c) {
  std::string text;
  for (const auto& p : c.theories) text += slurp(p) + "\n";
  Theory t = parse_theory(text);
  Query q = load_query(c);
  const double timeout = c.timeout ? *c.timeout : default_timeout();
  if (!(timeout > 0)) throw Usage("--timeout must be positive");

  if (c.dump_completion) {
    try {
      Completion comp(t);
      for (const auto& [p, cd] : comp.all()) std::cerr << to_string(cd) << "\n";
    } catch (const RecursionUnsupported& e) {
      std::cerr << "% no completion: " << e.what() << "\n";
    }
  }
  if (c.oracle) return run_oracle(c, t, q);

  SolveOptions opt;
  opt.deadline = fd::Clock::now() + std::chrono::duration_cast<fd::Clock::duration>(std::chrono::duration<double>(timeout));
  opt.max_answers = c.max_answers;
  const auto t0 = fd::Clock::now();
  opt.on_incumbent = [&](fd::Value v) {
    const double at = std::chrono::duration<double>(fd::Clock::now() - t0).count();
    if (c.json) std::cout << record::incumbent(v, at).dump() << std::endl;
    else std::cout << "incumbent " << v << " at " << at << " s" << std::endl;
  };
  if (c.trace_derivation)
    opt.trace_derivation = [](const std::string& rule, const std::string& what, std::size_t theta, std::size_t delta) {
      std::cerr << "derive " << rule << " |theta|=" << theta << " |delta|=" << delta << " " << what << "\n";
    };
  if (c.trace_propagation)
    opt.trace_propagation = [](const fd::TraceEvent& e) {
      std::cerr << "prop v" << e.var.id << " " << e.before.str() << " -> " << e.after.str() << " by " << e.cause << "\n";
    };

  SolveResult r = solve(t, q, opt);
  if (c.dump_aggregates) std::cerr << (r.aggregates.empty() ? "% no aggregate sets\n" : r.aggregates);

  for (std::size_t i = 0; i < r.answers.size(); ++i) {
    if (c.json) std::cout << record::answer(r.answers[i], i + 1).dump() << "\n";
    else print_text_answer(r.answers[i], i + 1);
  }
  if (c.json) {
    std::cout << record::summary(r).dump() << "\n";
  } else {
    for (const auto& d : r.diagnostics) std::cout << "diagnostic " << d.kind << ": " << d.message << "\n";
    std::cout << "status: " << to_string(r.outcome) << " (" << r.answers.size() << " answer"
              << (r.answers.size() == 1 ? "" : "s") << ")\n";
    std::cout << std::fixed << std::setprecision(3) << "times: reduction " << r.reduction_seconds << " s, search "
              << r.search_seconds << " s\n";
  }
  return exit_code(r);
}

int run_check(const std::string& instance_path, const std::string& answer_path) {
  const auto in = battleship::parse_instance(slurp(instance_path));
  const auto answers = record::read_answers(slurp(answer_path));
  if (answers.empty()) {
    std::cout << "no answer in " << answer_path << "\n";
    return 1;
  }
  int bad = 0;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const auto violations = battleship::check(in, battleship::placement_of(answers[i]));
    for (const auto& v : violations) std::cout << "answer " << i + 1 << ": " << v << "\n";
    if (!violations.empty()) ++bad;
  }
  if (bad) return 1;
  std::cout << "ok: " << answers.size() << " answer" << (answers.size() == 1 ? "" : "s") << " pass\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Abductive solver for ID-logic theories with aggregates"};
  app.require_subcommand(1);

  SolveConfig sc;
  auto* solve_cmd = app.add_subcommand("solve", "solve a query against one or more theory files");
  solve_cmd->add_option("THEORY", sc.theories, "theory files, concatenated in order")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--query,-q", sc.query, "query text, or a file holding it")->required();
  solve_cmd->add_option("--optimize", sc.optimize, "min:VAR or max:VAR; overrides the query's objective");
  solve_cmd->add_option("--timeout", sc.timeout, "seconds (default: $IDSOLVE_TIMEOUT, else 300)");
  solve_cmd->add_option("--max-answers", sc.max_answers, "stop after N answers")->check(CLI::PositiveNumber);
  solve_cmd->add_flag("--json", sc.json, "line-delimited JSON records");
  solve_cmd->add_flag("--oracle", sc.oracle, "brute-force model enumeration instead of the engine");
  solve_cmd->add_flag("--dump-completion", sc.dump_completion, "print completed definitions to stderr");
  solve_cmd->add_flag("--dump-aggregates", sc.dump_aggregates, "print unfolded aggregate sets to stderr");
  solve_cmd->add_flag("--trace-derivation", sc.trace_derivation, "one stderr line per derivation step");
  solve_cmd->add_flag("--trace-propagation", sc.trace_propagation, "one stderr line per domain change");

  std::string instance, answer;
  auto* check_cmd = app.add_subcommand("check", "check an answer");
  check_cmd->require_subcommand(1);
  auto* check_bs = check_cmd->add_subcommand("battleship", "check solver output against a battleship instance");
  check_bs->add_option("INSTANCE", instance, "instance facts")->required()->check(CLI::ExistingFile);
  check_bs->add_option("ANSWER", answer, "output of idsolve solve, text or --json")->required()->check(CLI::ExistingFile);

  std::uint64_t seed = 1;
  int reveals = 8;
  auto* gen_cmd = app.add_subcommand("gen", "generate an instance");
  gen_cmd->require_subcommand(1);
  auto* gen_bs = gen_cmd->add_subcommand("battleship", "random solvable 10x10 battleship puzzle");
  gen_bs->add_option("--seed", seed, "random seed")->required();
  gen_bs->add_option("--reveals", reveals, "number of revealed cells")->check(CLI::Range(0, 100));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  try {
    if (*solve_cmd) return run_solve(sc);
    if (*check_bs) return run_check(instance, answer);
    if (*gen_bs) {
      std::cout << battleship::to_facts(battleship::generate(seed, reveals));
      return 0;
    }
  } catch (const Usage& e) {
    std::cerr << "idsolve: " << e.what() << "\n";
  } catch (const SyntaxError& e) {
    std::cerr << "idsolve: syntax error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "idsolve: internal error: " << e.what() << "\n";
  }
  return 3;
}
