#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "agmine/ag_runtime.hpp"

using namespace agmine;

static const char* kNumberAg =
    "NumberParser^N = sem sign = 1 endsem [ '-' sem sign = -1 endsem ] "
    "Digit^D sem value = D endsem { Digit^D2 sem value = 10 * value + D2 endsem } "
    "sem N = sign * value endsem .\n"
    "Digit^D = '0' sem D = int('0') endsem | '1' sem D = int('1') endsem | "
    "'2' sem D = int('2') endsem | '3' sem D = int('3') endsem | "
    "'4' sem D = int('4') endsem | '5' sem D = int('5') endsem | "
    "'6' sem D = int('6') endsem | '7' sem D = int('7') endsem | "
    "'8' sem D = int('8') endsem | '9' sem D = int('9') endsem .\n";

static std::string run(const char* ag_text, const std::string& input) {
  Grammar ag = parse_grammar(ag_text);
  validate_ag(ag);
  return canonical_serialize(run_ag(ag, input));
}

TEST_CASE("a hand-written number grammar evaluates signed integers") {
  // oracle: plain strtol on the same inputs
  for (const char* in : {"-78", "5", "0686", "-74521", "0", "900"}) {
    CAPTURE(in);
    CHECK(run(kNumberAg, in) == std::to_string(std::strtol(in, nullptr, 10)));
  }
}

TEST_CASE("attribute evaluation follows option and repetition structure") {
  const char* ag =
      "List^L = sem L = [] endsem { Item^I sem L = L + [I] endsem } .\n"
      "Item^I = 'x' sem I = 'x' endsem | 'y' sem I = 'y' endsem .\n";
  CHECK(run(ag, "") == "[]");
  CHECK(run(ag, "xyx") == "[\"x\",\"y\",\"x\"]");
}

TEST_CASE("in-attributes flow from caller arguments into the callee") {
  const char* ag =
      "Total^T = sem acc = 0 endsem { Item(acc)^I sem acc = I endsem } "
      "sem T = acc endsem .\n"
      "Item(lo)^I = 'x' sem I = lo + 1 endsem .\n";
  CHECK(run(ag, "") == "0");
  CHECK(run(ag, "xxxx") == "4");
}

TEST_CASE("builtin functions are available in semantic blocks") {
  const char* ag =
      "C^V = 'a' sem V = chr(ord('a') + len('xyz')) endsem .\n";
  CHECK(run(ag, "a") == "\"d\"");
}

TEST_CASE("inputs outside the language fail with a parse error") {
  Grammar ag = parse_grammar(kNumberAg);
  CHECK_THROWS_AS(run_ag(ag, "x1"), ParseFailure);
  CHECK_THROWS_AS(run_ag(ag, ""), ParseFailure);
}

TEST_CASE("an unassigned out-attribute is a runtime error") {
  // validate_ag would flag this statically; run_ag must also fail cleanly
  const char* ag = "A^V = 'x' .\n";
  Grammar g = parse_grammar(ag);
  CHECK_THROWS_AS(run_ag(g, "x"), AgRuntimeError);
}

TEST_CASE("reading an unbound attribute is an evaluation error") {
  const char* ag = "A^V = 'x' sem V = missing + 1 endsem .\n";
  Grammar g = parse_grammar(ag);
  CHECK_THROWS_AS(run_ag(g, "x"), EvalError);
}

TEST_CASE("only the taken alternative's statements execute") {
  const char* ag =
      "A^V = 'x' sem V = 1 endsem | 'y' sem V = err endsem .\n";
  Grammar g = parse_grammar(ag);
  CHECK(canonical_serialize(run_ag(g, "x")) == "1");
  CHECK_THROWS_AS(run_ag(g, "y"), EvalError);  // 'err' unbound on this path
}

TEST_CASE("division by zero in a semantic block raises") {
  const char* ag = "A^V = 'x' sem V = 1 / 0 endsem .\n";
  Grammar g = parse_grammar(ag);
  CHECK_THROWS_AS(run_ag(g, "x"), EvalError);
}

TEST_CASE("a start rule with parameters is rejected") {
  const char* ag = "A(p)^V = 'x' sem V = p endsem .\n";
  Grammar g = parse_grammar(ag);
  CHECK_THROWS_AS(run_ag(g, "x"), AgRuntimeError);
}

TEST_CASE("attribute scopes are per rule application") {
  // each Pair application rebinds its local 'a'; outer bindings are invisible
  const char* ag =
      "Top^T = Pair^P Pair^P2 sem T = [P, P2] endsem .\n"
      "Pair^V = Ch^C sem a = C endsem Ch^C2 sem V = a + C2 endsem .\n"
      "Ch^C = 'x' sem C = 'x' endsem | 'y' sem C = 'y' endsem .\n";
  CHECK(run(ag, "xyyx") == "[\"xy\",\"yx\"]");
}
