#pragma once

#include <optional>
#include <string>
#include <vector>

#include "agmine/ag_runtime.hpp"
#include "agmine/fuzzer.hpp"
#include "agmine/transfer.hpp"

namespace agmine {

// ---------------------------------------------------------------------------
// End-to-end mining: program + grammar + inputs -> attributed grammar, and
// evaluation of a mined AG against the original program.
// ---------------------------------------------------------------------------

enum class InputStatus {
  Ok,             // contributed an annotation
  NotDerivable,   // grammar rejects the input
  TraceFailed,    // the program raised / failed on the input
  MappingFailed,  // trees could not be reconciled or semantics not liftable
};

inline const char* to_string(InputStatus s) {
  switch (s) {
    case InputStatus::Ok: return "ok";
    case InputStatus::NotDerivable: return "not-derivable";
    case InputStatus::TraceFailed: return "trace-exception";
    case InputStatus::MappingFailed: return "mapping-failed";
  }
  return "?";
}

struct InputReport {
  std::string input;
  InputStatus status = InputStatus::Ok;
  std::string detail;
};

struct MiningReport {
  std::vector<InputReport> inputs;
  std::vector<MergeConflict> conflicts;
  std::optional<Grammar> ag;
  std::string error;  // set when no AG could be produced

  bool mapping_failures() const {
    for (const auto& r : inputs)
      if (r.status == InputStatus::MappingFailed) return true;
    return false;
  }
  size_t ok_count() const {
    size_t n = 0;
    for (const auto& r : inputs)
      if (r.status == InputStatus::Ok) ++n;
    return n;
  }
};

inline MiningReport mine(const Grammar& g, const ProgramAST& prog,
                         const std::vector<std::string>& inputs) {
  MiningReport rep;
  auto aliases = compute_ref_aliases(g);
  std::vector<Annotation> anns;
  for (const auto& in : inputs) {
    InputReport ir;
    ir.input = in;
    DNodePtr dt;
    try {
      dt = derive(g, in);
    } catch (const ParseFailure& f) {
      ir.status = InputStatus::NotDerivable;
      ir.detail = f.what();
      rep.inputs.push_back(std::move(ir));
      continue;
    }
    Outcome o = execute(prog, in);
    if (!o.ok) {
      ir.status = InputStatus::TraceFailed;
      ir.detail = o.error;
      rep.inputs.push_back(std::move(ir));
      continue;
    }
    try {
      PNodePtr pt = build_parse_tree(o.trace);
      Mapping m = map_trees(pt, dt);
      resolve_unmapped(pt, m);
      anns.push_back(transfer_input(g, prog, pt, m, aliases, in));
    } catch (const MappingError& e) {
      ir.status = InputStatus::MappingFailed;
      ir.detail = e.what();
      rep.inputs.push_back(std::move(ir));
      continue;
    } catch (const TraceError& e) {
      ir.status = InputStatus::MappingFailed;
      ir.detail = e.what();
      rep.inputs.push_back(std::move(ir));
      continue;
    }
    rep.inputs.push_back(std::move(ir));
  }

  if (anns.empty()) {
    rep.error = "no input produced a usable annotation";
    return rep;
  }
  MergeResult mr;
  try {
    mr = merge_annotations(anns);
  } catch (const MappingError& e) {
    rep.error = e.what();
    return rep;
  }
  rep.conflicts = std::move(mr.conflicts);
  if (!rep.conflicts.empty()) {
    rep.error = "merge produced " + std::to_string(rep.conflicts.size()) + " conflict(s)";
    return rep;
  }
  try {
    rep.ag = build_ag(g, mr.merged, aliases);
  } catch (const GrammarError& e) {
    rep.error = std::string("mined grammar failed validation: ") + e.what();
  } catch (const MappingError& e) {
    rep.error = e.what();
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Evaluation: an input matches when program and AG both succeed and produce
// the same canonical output. Any failure on either side is a mismatch.
// ---------------------------------------------------------------------------

struct EvalCase {
  std::string input;
  bool prog_ok = false;
  bool ag_ok = false;
  std::string prog_out;  // canonical output, or failure message
  std::string ag_out;
  bool match = false;
};

struct EvalReport {
  std::vector<EvalCase> cases;
  size_t matches = 0;
  double accuracy() const {
    return cases.empty() ? 1.0 : static_cast<double>(matches) / static_cast<double>(cases.size());
  }
};

inline EvalReport evaluate(const Grammar& ag, const ProgramAST& prog,
                           const std::vector<std::string>& inputs) {
  EvalReport rep;
  for (const auto& in : inputs) {
    EvalCase c;
    c.input = in;
    Outcome o = execute(prog, in);
    c.prog_ok = o.ok;
    c.prog_out = o.ok ? canonical_serialize(o.result) : o.error;
    try {
      Value v = run_ag(ag, in);
      c.ag_ok = true;
      c.ag_out = canonical_serialize(v);
    } catch (const std::exception& e) {
      c.ag_ok = false;
      c.ag_out = e.what();
    }
    c.match = c.prog_ok && c.ag_ok && c.prog_out == c.ag_out;
    if (c.match) ++rep.matches;
    rep.cases.push_back(std::move(c));
  }
  return rep;
}

}  // namespace agmine
