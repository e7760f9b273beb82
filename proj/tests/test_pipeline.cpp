#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "agmine/pipeline.hpp"

using namespace agmine;

static std::string slurp(const std::string& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

static Grammar corpus_grammar(const char* name) {
  return parse_grammar(slurp(std::string(CORPUS_DIR) + "/" + name + "/grammar.txt"));
}
static ProgramAST corpus_program(const char* name) {
  return parse_program(slurp(std::string(CORPUS_DIR) + "/" + name + "/program.txt"));
}

TEST_CASE("mined grammars reproduce the program output on fresh inputs") {
  for (const char* name : {"number", "cgidecode", "abc", "xmltag", "calc"}) {
    CAPTURE(name);
    Grammar g = corpus_grammar(name);
    ProgramAST prog = corpus_program(name);
    FuzzResult train = generate_inputs(g, GenerationBudget{}, 42);
    REQUIRE(train.full_coverage);
    MiningReport rep = mine(g, prog, train.inputs);
    CAPTURE(rep.error);
    REQUIRE(rep.ag.has_value());
    CHECK(rep.conflicts.empty());

    GenerationBudget eval_budget;
    eval_budget.max_inputs = 120;
    FuzzOptions opts;
    opts.stop_on_full_coverage = false;
    FuzzResult test = generate_inputs(g, eval_budget, 1234, opts);
    REQUIRE(test.inputs.size() >= 100);
    EvalReport er = evaluate(*rep.ag, prog, test.inputs);
    for (const auto& c : er.cases) {
      CAPTURE(c.input);
      CHECK(c.match);
    }
    CHECK(er.accuracy() == 1.0);
  }
}

TEST_CASE("input reports classify each outcome") {
  Grammar g = corpus_grammar("number");
  ProgramAST prog = corpus_program("number");
  MiningReport rep = mine(g, prog, {"-74521", "zz", "-9836", "0686"});
  REQUIRE(rep.inputs.size() == 4);
  CHECK(rep.inputs[0].status == InputStatus::Ok);
  CHECK(rep.inputs[1].status == InputStatus::NotDerivable);
  CHECK(rep.inputs[2].status == InputStatus::Ok);
  CHECK(rep.inputs[3].status == InputStatus::Ok);
  CHECK(std::string(to_string(InputStatus::Ok)) == "ok");
  CHECK(std::string(to_string(InputStatus::NotDerivable)) == "not-derivable");
  CHECK(std::string(to_string(InputStatus::TraceFailed)) == "trace-exception");
  CHECK(std::string(to_string(InputStatus::MappingFailed)) == "mapping-failed");
  REQUIRE(rep.ag.has_value());
}

TEST_CASE("a program that raises on a derivable input is a trace failure") {
  // the division program rejects zero divisors the grammar permits
  Grammar g = corpus_grammar("simpleexpr");
  ProgramAST prog = corpus_program("simpleexpr");
  MiningReport rep = mine(g, prog, {"8/0"});
  REQUIRE(rep.inputs.size() == 1);
  CHECK(rep.inputs[0].status == InputStatus::TraceFailed);
  CHECK(!rep.ag.has_value());
}

TEST_CASE("a grammar mined from safe inputs mismatches on a crashing input") {
  Grammar g = corpus_grammar("simpleexpr");
  ProgramAST prog = corpus_program("simpleexpr");
  // training inputs avoid division by zero but cover every digit alternative
  std::vector<std::string> safe{"0", "1", "2", "3", "4", "5",
                                "6", "7", "8", "9", "8/2", "9/3/1"};
  MiningReport rep = mine(g, prog, safe);
  CAPTURE(rep.error);
  REQUIRE(rep.ag.has_value());
  CHECK(rep.conflicts.empty());

  EvalReport good = evaluate(*rep.ag, prog, safe);
  CHECK(good.accuracy() == 1.0);

  // the program raises on 8/0 while the mined grammar derives it; the
  // attribute evaluation also fails, and a double failure is not a match
  EvalReport bad = evaluate(*rep.ag, prog, {"8/0"});
  REQUIRE(bad.cases.size() == 1);
  CHECK(!bad.cases[0].match);
  CHECK(!bad.cases[0].prog_ok);
  CHECK(bad.accuracy() == 0.0);
}

TEST_CASE("a loop the grammar cannot express fails mining loudly") {
  Grammar g = corpus_grammar("iterloop");
  ProgramAST prog = corpus_program("iterloop");
  FuzzResult fr = generate_inputs(g, GenerationBudget{}, 3);
  MiningReport rep = mine(g, prog, fr.inputs);
  CHECK(!rep.ag.has_value());
  CHECK(rep.mapping_failures());
  for (const auto& r : rep.inputs) CHECK(r.status == InputStatus::MappingFailed);
}

TEST_CASE("mining with no usable input reports an error instead of a grammar") {
  Grammar g = corpus_grammar("number");
  ProgramAST prog = corpus_program("number");
  MiningReport rep = mine(g, prog, {"zz", "yy"});
  CHECK(!rep.ag.has_value());
  CHECK(rep.ok_count() == 0);
  CHECK(!rep.error.empty());
}

TEST_CASE("evaluation compares canonical outputs") {
  Grammar g = corpus_grammar("number");
  ProgramAST prog = corpus_program("number");
  MiningReport rep = mine(g, prog, {"-74521", "-9836", "0686"});
  REQUIRE(rep.ag.has_value());
  EvalReport er = evaluate(*rep.ag, prog, {"-78", "0686", "x"});
  REQUIRE(er.cases.size() == 3);
  CHECK(er.cases[0].match);
  CHECK(er.cases[0].prog_out == "-78");
  CHECK(er.cases[0].ag_out == "-78");
  CHECK(er.cases[1].match);
  CHECK(er.cases[1].prog_out == "686");  // leading zeros normalized by both
  CHECK(!er.cases[2].match);             // neither side accepts 'x'
  CHECK(er.matches == 2);
}
