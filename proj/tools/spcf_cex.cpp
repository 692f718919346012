// spcf-cex: search an SPCF program for reachable primitive failures and
// report a concrete, possibly higher-order counterexample.
//
//   spcf-cex verify FILE [--solver CMD] [--max-steps N] [--max-states N]
//                        [--format json|text] [--trace] [--no-validate]
//                        [--timeout SECS] [--builtin-bound N] [--differential]
//
// Exit codes: 0 no counterexample within budget ("verified" when the search
// space was exhausted, "unknown" otherwise); 1 counterexample emitted;
// 2 usage, parse or type error; 3 solver failure.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "spcf/cex.hpp"
#include "spcf/delta.hpp"
#include "spcf/heap.hpp"
#include "spcf/logic.hpp"
#include "spcf/machine.hpp"
#include "spcf/oracle.hpp"
#include "spcf/syntax.hpp"

namespace {

struct RunConfig {
  std::string input_path;
  long max_steps = 100000;
  long max_states = 50000;
  std::string solver_cmd;  // empty: built-in backend
  spcf::Int builtin_bound = 256;
  std::string format = "text";
  bool trace = false;
  bool validate = true;
  double timeout_secs = 10.0;
  bool differential = false;
};

int fail_usage(const std::string& msg) {
  std::cerr << "spcf-cex: " << msg << "\n";
  return 2;
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

spcf::Prover make_prover(const RunConfig& cfg) {
  if (!cfg.solver_cmd.empty())
    return spcf::Prover(std::make_unique<spcf::SmtProcessSolver>(cfg.solver_cmd));
  return spcf::Prover(std::make_unique<spcf::BuiltinSolver>(cfg.builtin_bound));
}

int run_differential(const spcf::Program& program, const RunConfig& cfg) {
  if (!program.opq_order.empty()) return fail_usage("--differential requires an opaque-free program");
  spcf::Prover prover = make_prover(cfg);
  spcf::Budget budget{cfg.max_steps, cfg.max_states,
                      std::chrono::milliseconds(static_cast<long>(cfg.timeout_secs * 1000))};
  spcf::SearchReport report = spcf::run(program, budget, prover);
  spcf::ConcreteResult direct = spcf::concrete_eval(program.root, cfg.max_steps);

  std::string machine_outcome = "none";
  for (const auto& o : report.outcomes) {
    if (const auto* a = std::get_if<spcf::AnswerOutcome>(&o)) {
      if (const auto* i = std::get_if<spcf::IntS>(&a->heap.at(a->loc)))
        machine_outcome = "value " + std::to_string(i->value);
      else
        machine_outcome = "function";
    } else if (const auto* b = std::get_if<spcf::BlameOutcome>(&o)) {
      machine_outcome = "error " + spcf::show(b->label) + " " + spcf::op_name(b->op);
    }
  }
  std::string oracle_outcome;
  switch (direct.kind) {
    case spcf::ConcreteResult::Kind::IntValue: oracle_outcome = "value " + std::to_string(direct.value); break;
    case spcf::ConcreteResult::Kind::Closure: oracle_outcome = "function"; break;
    case spcf::ConcreteResult::Kind::Error:
      oracle_outcome = "error " + spcf::show(direct.blame) + " " + spcf::op_name(direct.op);
      break;
    case spcf::ConcreteResult::Kind::Diverged: oracle_outcome = "diverged"; break;
  }
  bool agree = machine_outcome == oracle_outcome;
  std::cout << "machine:     " << machine_outcome << "\n"
            << "interpreter: " << oracle_outcome << "\n"
            << (agree ? "AGREE" : "DISAGREE") << "\n";
  return agree ? 0 : 1;
}

int run_verify(const RunConfig& cfg) {
  auto text = read_file(cfg.input_path);
  if (!text) return fail_usage("cannot read " + cfg.input_path);

  spcf::Program program;
  try {
    program = spcf::parse(*text);
    spcf::typecheck(program);
  } catch (const spcf::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const spcf::TypeError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  if (cfg.differential) return run_differential(program, cfg);

  auto started = std::chrono::steady_clock::now();
  spcf::Prover prover = make_prover(cfg);
  spcf::Budget budget{cfg.max_steps, cfg.max_states,
                      std::chrono::milliseconds(static_cast<long>(cfg.timeout_secs * 1000))};

  spcf::TraceFn trace;
  if (cfg.trace) {
    trace = [](const spcf::State& from, const spcf::State& to, const char* rule) {
      std::cout << "⟨" << spcf::show(from.expr) << "⟩ | " << spcf::show(to.heap) << " | " << rule << "\n";
    };
  }

  spcf::SearchReport report = spcf::run(program, budget, prover, trace);

  std::optional<spcf::Counterexample> reported;
  bool solver_unknown = false;
  long spurious = 0;
  for (const auto& outcome : report.outcomes) {
    const auto* blame = std::get_if<spcf::BlameOutcome>(&outcome);
    if (!blame) continue;
    auto built = spcf::build_counterexample(program, *blame, prover);
    if (const auto* none = std::get_if<spcf::NoModel>(&built)) {
      if (none->reason == spcf::NoModel::Reason::Unknown)
        solver_unknown = true;
      else
        ++spurious;
      continue;
    }
    spcf::Counterexample cex = std::get<spcf::Counterexample>(built);
    if (!cfg.validate) {
      reported = std::move(cex);
      break;
    }
    auto v = spcf::validate(program, cex, cfg.max_steps);
    cex.validated = v.ok ? spcf::Counterexample::Validation::Passed : spcf::Counterexample::Validation::Failed;
    cex.validation_detail = v.detail;
    if (v.ok) {
      reported = std::move(cex);
      break;
    }
    if (!reported) reported = std::move(cex);  // keep the first, in case none validates
  }

  bool exhausted_budget = false;
  for (const auto& outcome : report.outcomes)
    if (std::holds_alternative<spcf::ExhaustedOutcome>(outcome)) exhausted_budget = true;

  long elapsed_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();

  std::string verdict =
      reported ? "counterexample" : (exhausted_budget || solver_unknown) ? "unknown" : "safe";

  if (cfg.format == "json") {
    nlohmann::json out;
    if (reported) {
      out = spcf::counterexample_json(*reported, cfg.validate);
      if (cfg.validate && reported->validated != spcf::Counterexample::Validation::Passed)
        out["validationDetail"] = reported->validation_detail;
    } else {
      out["verdict"] = verdict;
      if (verdict == "unknown")
        out["reason"] = solver_unknown ? "solver-unknown" : "budget-exhausted";
    }
    out["statesExplored"] = report.states_explored;
    out["solverQueries"] = prover.queries();
    out["backend"] = prover.backend_name();
    out["spuriousPaths"] = spurious;
    out["elapsedMs"] = elapsed_ms;
    std::cout << out.dump(2) << "\n";
  } else {
    if (reported) {
      std::cout << spcf::counterexample_text(*reported, cfg.validate);
      if (cfg.validate && reported->validated != spcf::Counterexample::Validation::Passed)
        std::cout << "Validation failure: " << reported->validation_detail << "\n";
    } else if (verdict == "safe") {
      std::cout << "verified: no reachable primitive failure\n";
    } else {
      std::cout << "safe within budget: no counterexample found ("
                << (solver_unknown ? "solver returned unknown" : "search budget exhausted") << ")\n";
    }
    std::cout << "states explored: " << report.states_explored << ", solver queries: " << prover.queries()
              << ", backend: " << prover.backend_name() << ", elapsed: " << elapsed_ms << " ms\n";
  }

  return reported ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"counterexample search for SPCF programs"};
  app.require_subcommand(1);

  RunConfig cfg;
  CLI::App* verify = app.add_subcommand("verify", "search one program for reachable failures");
  verify->add_option("file", cfg.input_path, "program file (.spcf)")->required();
  verify->add_option("--max-steps", cfg.max_steps, "transition budget")->check(CLI::PositiveNumber);
  verify->add_option("--max-states", cfg.max_states, "state budget")->check(CLI::PositiveNumber);
  verify->add_option("--solver", cfg.solver_cmd, "external SMT-LIB2 solver command reading stdin");
  verify->add_option("--builtin-bound", cfg.builtin_bound, "value bound of the built-in backend")
      ->check(CLI::PositiveNumber);
  verify->add_option("--format", cfg.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  verify->add_flag("--trace", cfg.trace, "print one line per transition");
  verify->add_flag("--differential", cfg.differential,
                   "compare the machine against direct interpretation (opaque-free programs)");
  bool no_validate = false;
  verify->add_flag("--no-validate", no_validate, "skip concrete re-execution of counterexamples");
  verify->add_option("--timeout", cfg.timeout_secs, "wall-clock limit in seconds")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  cfg.validate = !no_validate;

  try {
    return run_verify(cfg);
  } catch (const spcf::SolverError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
