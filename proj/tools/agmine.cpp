// Command-line front end for the attributed-grammar mining library:
// fuzz grammar-valid inputs, run subject programs and attributed grammars,
// mine an attributed grammar from a program, and evaluate the result.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "agmine/cli_support.hpp"
#include "agmine/pipeline.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;          // usage or parse errors, total failure
constexpr int kExitPartialCoverage = 2;
constexpr int kExitMiningFailure = 3;  // mapping failure or merge conflict

struct CommonOpts {
  std::uint64_t seed = 0;
  int max_inputs = 200;
  int max_depth = 32;
  std::string inputs_path;
  std::string out_path;
  std::string format = "text";
};

bool json_mode(const CommonOpts& o) { return o.format == "json-lines"; }

void emit(const CommonOpts& o, const json& j, const std::string& text) {
  if (json_mode(o))
    std::cout << j.dump() << "\n";
  else
    std::cout << text << "\n";
}

agmine::Grammar load_grammar(const std::string& path) {
  return agmine::parse_grammar(agmine::read_file(path));
}

agmine::ProgramAST load_program(const std::string& path) {
  return agmine::parse_program(agmine::read_file(path));
}

std::vector<std::string> gather_inputs(const CommonOpts& o, const std::string& positional) {
  if (!o.inputs_path.empty()) return agmine::load_inputs(o.inputs_path);
  return {agmine::unescape_input(positional)};
}

int cmd_fuzz(const std::string& grammar_path, const CommonOpts& o) {
  agmine::Grammar g = load_grammar(grammar_path);
  agmine::GenerationBudget budget;
  budget.max_inputs = o.max_inputs;
  budget.max_depth = o.max_depth;
  agmine::FuzzResult res = agmine::generate_inputs(g, budget, o.seed);
  for (const auto& in : res.inputs)
    emit(o, json{{"type", "input"}, {"value", agmine::escape_input(in)}},
         "input: " + agmine::escape_input(in));
  size_t universe = agmine::enumerate_positions(g).size();
  size_t covered = universe - res.uncovered.size();
  emit(o,
       json{{"type", "coverage"},
            {"inputs", res.inputs.size()},
            {"covered", covered},
            {"positions", universe},
            {"full", res.full_coverage}},
       "inputs=" + std::to_string(res.inputs.size()) + " covered=" + std::to_string(covered) +
           "/" + std::to_string(universe) + " full=" + (res.full_coverage ? "true" : "false"));
  for (const auto& p : res.uncovered)
    emit(o, json{{"type", "uncovered"}, {"position", p.to_string()}},
         "uncovered: " + p.to_string());
  if (!o.out_path.empty()) agmine::write_input_dir(o.out_path, res.inputs);
  return res.full_coverage ? kExitOk : kExitPartialCoverage;
}

int cmd_derive(const std::string& grammar_path, const std::string& positional,
               const CommonOpts& o) {
  agmine::Grammar g = load_grammar(grammar_path);
  for (const auto& in : gather_inputs(o, positional)) {
    agmine::DNodePtr tree = agmine::derive(g, in);  // ParseFailure -> exit 1
    std::string rendered = agmine::render_tree(*tree);
    if (json_mode(o)) {
      emit(o, json{{"type", "tree"}, {"input", agmine::escape_input(in)}, {"tree", rendered}},
           "");
    } else {
      std::cout << "input: " << agmine::escape_input(in) << "\n" << rendered;
    }
  }
  return kExitOk;
}

int cmd_run_program(const std::string& program_path, const std::string& positional,
                    const CommonOpts& o) {
  agmine::ProgramAST p = load_program(program_path);
  for (const auto& in : gather_inputs(o, positional)) {
    agmine::Outcome out = agmine::execute(p, in);
    std::string shown = out.ok ? agmine::canonical_serialize(out.result) : out.error;
    emit(o,
         json{{"type", "result"},
              {"input", agmine::escape_input(in)},
              {"ok", out.ok},
              {"output", shown}},
         "input: " + agmine::escape_input(in) + " " + (out.ok ? "ok" : "error") + ": " + shown);
  }
  return kExitOk;
}

int cmd_run_ag(const std::string& ag_path, const std::string& positional,
               const CommonOpts& o) {
  agmine::Grammar ag = load_grammar(ag_path);
  agmine::validate_ag(ag);
  for (const auto& in : gather_inputs(o, positional)) {
    bool ok = true;
    std::string shown;
    try {
      shown = agmine::canonical_serialize(agmine::run_ag(ag, in));
    } catch (const std::exception& e) {
      ok = false;
      shown = e.what();
    }
    emit(o,
         json{{"type", "result"},
              {"input", agmine::escape_input(in)},
              {"ok", ok},
              {"output", shown}},
         "input: " + agmine::escape_input(in) + " " + (ok ? "ok" : "error") + ": " + shown);
  }
  return kExitOk;
}

int cmd_mine(const std::string& grammar_path, const std::string& program_path,
             bool auto_fuzz, const CommonOpts& o) {
  agmine::Grammar g = load_grammar(grammar_path);
  agmine::ProgramAST p = load_program(program_path);

  std::vector<std::string> inputs;
  if (auto_fuzz) {
    agmine::GenerationBudget budget;
    budget.max_inputs = o.max_inputs;
    budget.max_depth = o.max_depth;
    inputs = agmine::generate_inputs(g, budget, o.seed).inputs;
  } else if (!o.inputs_path.empty()) {
    inputs = agmine::load_inputs(o.inputs_path);
  } else {
    std::cerr << "mine: provide --inputs PATH or --auto-fuzz\n";
    return kExitUsage;
  }

  agmine::MiningReport rep = agmine::mine(g, p, inputs);
  std::map<std::string, size_t> counts;
  for (const auto& r : rep.inputs) {
    std::string status = agmine::to_string(r.status);
    counts[status]++;
    emit(o,
         json{{"type", "input"},
              {"input", agmine::escape_input(r.input)},
              {"status", status},
              {"detail", r.detail}},
         "input: " + agmine::escape_input(r.input) + " status=" + status +
             (r.detail.empty() ? "" : " detail=" + r.detail));
  }
  for (const auto& c : rep.conflicts)
    emit(o, json{{"type", "merge-conflict"}, {"detail", c.describe()}},
         "merge-conflict: " + c.describe());

  std::string summary;
  for (const auto& [k, v] : counts) summary += " " + k + "=" + std::to_string(v);
  emit(o,
       json{{"type", "summary"},
            {"total", rep.inputs.size()},
            {"counts", counts},
            {"ag", rep.ag.has_value()},
            {"error", rep.error}},
       "total=" + std::to_string(rep.inputs.size()) + summary +
           " ag=" + (rep.ag ? "yes" : "no") + (rep.error.empty() ? "" : " error=" + rep.error));

  if (rep.ag) {
    std::string text = agmine::serialize_ag(*rep.ag);
    if (!o.out_path.empty())
      agmine::write_file(o.out_path, text);
    else if (!json_mode(o))
      std::cout << text;
    else
      emit(o, json{{"type", "ag"}, {"text", text}}, "");
  }

  bool structural_failure = !rep.conflicts.empty() || rep.mapping_failures() ||
                            (!rep.ag && rep.ok_count() > 0);
  if (structural_failure) return kExitMiningFailure;
  if (!rep.ag) return kExitUsage;  // every input failed before mapping
  return kExitOk;
}

int cmd_eval(const std::string& ag_path, const std::string& program_path,
             const CommonOpts& o) {
  agmine::Grammar ag = load_grammar(ag_path);
  agmine::validate_ag(ag);
  agmine::ProgramAST p = load_program(program_path);
  if (o.inputs_path.empty()) {
    std::cerr << "eval: provide --inputs PATH\n";
    return kExitUsage;
  }
  agmine::EvalReport rep = agmine::evaluate(ag, p, agmine::load_inputs(o.inputs_path));

  char acc[32];
  std::snprintf(acc, sizeof acc, "%.4f", rep.accuracy());
  emit(o,
       json{{"type", "summary"},
            {"inputs", rep.cases.size()},
            {"matches", rep.matches},
            {"accuracy", acc}},
       "inputs=" + std::to_string(rep.cases.size()) + "\nmatches=" +
           std::to_string(rep.matches) + "\naccuracy=" + acc);
  for (const auto& c : rep.cases) {
    if (c.match) continue;
    emit(o,
         json{{"type", "mismatch"},
              {"input", agmine::escape_input(c.input)},
              {"program", c.prog_out},
              {"ag", c.ag_out}},
         "mismatch: input=" + agmine::escape_input(c.input) + " program=" + c.prog_out +
             " ag=" + c.ag_out);
  }
  return rep.matches == rep.cases.size() ? kExitOk : kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attributed-grammar mining toolkit"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string grammar_path, program_path, ag_path, input_arg;
  bool auto_fuzz = false;

  auto add_common = [&](CLI::App* cmd, bool with_inputs = true) {
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--max-inputs", o.max_inputs, "generation budget");
    cmd->add_option("--max-depth", o.max_depth, "rule nesting budget");
    if (with_inputs) cmd->add_option("--inputs", o.inputs_path, "input dir or escaped-lines file");
    cmd->add_option("--out", o.out_path, "output file or directory");
    cmd->add_option("--format", o.format, "text|json-lines")
        ->check(CLI::IsMember({"text", "json-lines"}));
  };

  CLI::App* fuzz = app.add_subcommand("fuzz", "generate grammar-valid inputs");
  fuzz->add_option("grammar", grammar_path, "grammar file")->required();
  add_common(fuzz, false);

  CLI::App* derive_cmd = app.add_subcommand("derive", "dump derivation trees");
  derive_cmd->add_option("grammar", grammar_path, "grammar file")->required();
  derive_cmd->add_option("input", input_arg, "escaped input string");
  add_common(derive_cmd);

  CLI::App* runp = app.add_subcommand("run-program", "run a subject program");
  runp->add_option("program", program_path, "program file")->required();
  runp->add_option("input", input_arg, "escaped input string");
  add_common(runp);

  CLI::App* runag = app.add_subcommand("run-ag", "run an attributed grammar");
  runag->add_option("ag", ag_path, "attributed grammar file")->required();
  runag->add_option("input", input_arg, "escaped input string");
  add_common(runag);

  CLI::App* mine = app.add_subcommand("mine", "mine an attributed grammar from a program");
  mine->add_option("grammar", grammar_path, "grammar file")->required();
  mine->add_option("program", program_path, "program file")->required();
  mine->add_flag("--auto-fuzz", auto_fuzz, "generate mining inputs with the fuzzer");
  add_common(mine);

  CLI::App* eval_cmd = app.add_subcommand("eval", "compare program and attributed grammar");
  eval_cmd->add_option("ag", ag_path, "attributed grammar file")->required();
  eval_cmd->add_option("program", program_path, "program file")->required();
  add_common(eval_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (fuzz->parsed()) return cmd_fuzz(grammar_path, o);
    if (derive_cmd->parsed()) return cmd_derive(grammar_path, input_arg, o);
    if (runp->parsed()) return cmd_run_program(program_path, input_arg, o);
    if (runag->parsed()) return cmd_run_ag(ag_path, input_arg, o);
    if (mine->parsed()) return cmd_mine(grammar_path, program_path, auto_fuzz, o);
    if (eval_cmd->parsed()) return cmd_eval(ag_path, program_path, o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
