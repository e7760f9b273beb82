#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "agmine/grammar.hpp"

using namespace agmine;

static const char* kNumberGrammar =
    "NumberParser = [ '-' ] Digit { Digit } .\n"
    "Digit = '0' | '1' | '2' | '3' | '4' | '5' | '6' | '7' | '8' | '9' .\n";

TEST_CASE("grammar parses and serializes back to the same text") {
  Grammar g = parse_grammar(kNumberGrammar);
  CHECK(serialize_grammar(g) == kNumberGrammar);
  Grammar again = parse_grammar(serialize_grammar(g));
  CHECK(serialize_grammar(again) == kNumberGrammar);
}

TEST_CASE("rule bodies are rooted at a sequence with stable child paths") {
  Grammar g = parse_grammar(kNumberGrammar);
  const Rule* np = g.find_rule("NumberParser");
  REQUIRE(np != nullptr);
  CHECK(np->root->kind == GKind::Sequence);
  CHECK(np->root->pos.to_string() == "NumberParser/");
  REQUIRE(np->root->children.size() == 3);
  CHECK(np->root->children[0]->kind == GKind::Option);
  CHECK(np->root->children[0]->pos.to_string() == "NumberParser/0");
  CHECK(np->root->children[0]->children[0]->kind == GKind::Terminal);
  CHECK(np->root->children[0]->children[0]->pos.to_string() == "NumberParser/0.0");
  CHECK(np->root->children[1]->kind == GKind::NonterminalRef);
  CHECK(np->root->children[2]->kind == GKind::Repetition);
  CHECK(np->root->children[2]->children[0]->pos.to_string() == "NumberParser/2.0");
}

TEST_CASE("position enumeration counts every addressable grammar node") {
  Grammar g = parse_grammar(kNumberGrammar);
  auto ps = enumerate_positions(g);
  CHECK(ps.size() == 18);  // 6 in NumberParser + 12 in Digit (root, choice, 10 terminals)
}

TEST_CASE("position ids order, compare and prefix correctly") {
  PositionId a{"R", {0, 1}};
  PositionId b{"R", {0, 1, 2}};
  PositionId c{"R", {0, 2}};
  CHECK(a == a);
  CHECK(!(a == b));
  CHECK(a < b);
  CHECK(b < c);
  CHECK(a.is_prefix_of(b));
  CHECK(!b.is_prefix_of(a));
  CHECK(!a.is_prefix_of(c));
  CHECK(b.to_string() == "R/0.1.2");
}

TEST_CASE("attributed grammar round-trips attributes, aliases and arguments") {
  const char* ag_text =
      "Sum^S = sem acc = 0 endsem { Item(acc)^V sem acc = acc + V endsem } "
      "sem S = acc endsem .\n"
      "Item(lo)^V = 'x' sem V = lo + 1 endsem .\n";
  Grammar g = parse_grammar(ag_text);
  CHECK(serialize_ag(g) == ag_text);
  const Rule* sum = g.find_rule("Sum");
  REQUIRE(sum != nullptr);
  CHECK(sum->out_attr == "S");
  const Rule* item = g.find_rule("Item");
  REQUIRE(item != nullptr);
  CHECK(item->params == std::vector<std::string>{"lo"});
  CHECK(item->out_attr == "V");
  CHECK_NOTHROW(validate_ag(g));
}

TEST_CASE("grammar validation rejects undefined rule references") {
  CHECK_THROWS_AS(parse_grammar("A = B .\n"), GrammarError);
}

TEST_CASE("grammar parse errors carry diagnostics") {
  CHECK_THROWS_AS(parse_grammar("A = 'x'"), GrammarError);     // missing dot
  CHECK_THROWS_AS(parse_grammar("A = [ 'x' .\n"), GrammarError);
  CHECK_THROWS_AS(parse_grammar(""), GrammarError);            // no rules
}

TEST_CASE("attributed grammar validation flags missing out-attribute assignments") {
  // one alternative never assigns the declared out-attribute
  const char* bad =
      "A^V = 'x' sem V = 1 endsem | 'y' .\n";
  Grammar g = parse_grammar(bad);
  CHECK_THROWS_AS(validate_ag(g), GrammarError);
}

TEST_CASE("multi-character terminals are kept as single items") {
  Grammar g = parse_grammar("T = '</' 'a' .\n");
  const Rule* t = g.find_rule("T");
  REQUIRE(t->root->children.size() == 2);
  CHECK(t->root->children[0]->text == "</");
}

TEST_CASE("walk visits every node of a rule body exactly once") {
  Grammar g = parse_grammar(kNumberGrammar);
  int n = 0;
  for (const auto& r : g.rules)
    Grammar::walk(r.root, [&](const GExprPtr&) { ++n; });
  CHECK(n == 18);
}
