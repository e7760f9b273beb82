#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "agmine/parse_tree.hpp"

using namespace agmine;

static std::string slurp(const std::string& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

static PNodePtr number_tree(const std::string& input) {
  ProgramAST prog = parse_program(slurp(std::string(CORPUS_DIR) + "/number/program.txt"));
  Outcome o = execute(prog, input);
  REQUIRE(o.ok);
  return build_parse_tree(o.trace);
}

TEST_CASE("parse tree for -78 renders the frozen golden structure") {
  CHECK(render_parse_tree(*number_tree("-78")) ==
        "number[1-3]\n"
        "  sem: sign = 1\n"
        "  if number/1#0[1-1]\n"
        "    sem: sign = -1\n"
        "    '-'[1-1]\n"
        "  if number/2#0[2-3]\n"
        "    digit[2-2]\n"
        "      if digit/0#0[2-2]\n"
        "        sem: res = int('7')\n"
        "        '7'[2-2]\n"
        "        sem: @return = res\n"
        "    sem: value = digit()\n"
        "    while number/2.0.1[3-3]\n"
        "      #iter\n"
        "      digit[3-3]\n"
        "        if digit/0#0[3-3]\n"
        "          sem: res = int('8')\n"
        "          '8'[3-3]\n"
        "          sem: @return = res\n"
        "      sem: value = 10 * value + digit()\n"
        "    sem: @return = sign * value\n");
}

TEST_CASE("parse tree for 5 keeps the zero-width loop node") {
  PNodePtr t = number_tree("5");
  CHECK(render_parse_tree(*t) ==
        "number[1-1]\n"
        "  sem: sign = 1\n"
        "  if number/2#0[1-1]\n"
        "    digit[1-1]\n"
        "      if digit/0#0[1-1]\n"
        "        sem: res = int('5')\n"
        "        '5'[1-1]\n"
        "        sem: @return = res\n"
        "    sem: value = digit()\n"
        "    while number/2.0.1[2-1]\n"
        "    sem: @return = sign * value\n");
  // the skipped '-' test consumed nothing and carried no statements in its
  // untaken branch: it leaves no node at all
  const ParseNode* guard = t->children[0].get();
  CHECK(guard->kind == PKind::Condition);
  REQUIRE(guard->children.size() == 2);
  const ParseNode* loop = guard->children[1].get();
  CHECK(loop->kind == PKind::Loop);
  CHECK(loop->children.empty());
  CHECK(loop->iter_marks.empty());
  CHECK(loop->yield().length() == 0);
}

TEST_CASE("child yields partition each node's consumed range") {
  PNodePtr t = number_tree("-74521");
  std::function<void(const ParseNode*)> rec = [&](const ParseNode* n) {
    size_t at = n->begin0;
    for (const auto& c : n->children) {
      if (c->begin0 == c->end0) continue;  // zero-width structure nodes float
      CHECK(c->begin0 == at);
      at = c->end0;
    }
    if (!n->children.empty()) CHECK(at == n->end0);
    for (const auto& c : n->children) rec(c.get());
  };
  rec(t.get());
}

TEST_CASE("every consumed character appears as exactly one leaf in order") {
  PNodePtr t = number_tree("-9836");
  std::string leaves;
  std::function<void(const ParseNode*)> rec = [&](const ParseNode* n) {
    if (n->kind == PKind::InputChar) leaves += n->label;
    for (const auto& c : n->children) rec(c.get());
  };
  rec(t.get());
  CHECK(leaves == "-9836");
}

TEST_CASE("statement slots always bracket the children") {
  PNodePtr t = number_tree("-78");
  std::function<void(const ParseNode*)> rec = [&](const ParseNode* n) {
    CHECK(n->slots.size() == n->children.size() + 1);
    for (const auto& c : n->children) rec(c.get());
  };
  rec(t.get());
}

TEST_CASE("iteration marks point at valid slot offsets") {
  PNodePtr t = number_tree("-74521");
  std::function<void(const ParseNode*)> rec = [&](const ParseNode* n) {
    if (n->kind == PKind::Loop) {
      for (const auto& mk : n->iter_marks) {
        REQUIRE(mk.child_index < n->slots.size());
        CHECK(mk.stmt_offset <= n->slots[mk.child_index].size());
      }
    }
    for (const auto& c : n->children) rec(c.get());
  };
  rec(t.get());
  // "74521" has four loop iterations after the first digit
  const ParseNode* guard = t->children[1].get();
  const ParseNode* loop = guard->children[1].get();
  REQUIRE(loop->kind == PKind::Loop);
  CHECK(loop->iter_marks.size() == 4);
}

TEST_CASE("unbalanced traces are rejected") {
  std::vector<TraceEvent> missing_exit;
  TraceEvent enter;
  enter.kind = EventKind::CallEnter;
  enter.name = "f";
  missing_exit.push_back(enter);
  CHECK_THROWS_AS(build_parse_tree(missing_exit), TraceError);

  std::vector<TraceEvent> extra_exit;
  TraceEvent exit_ev;
  exit_ev.kind = EventKind::CallExit;
  exit_ev.name = "f";
  extra_exit.push_back(enter);
  extra_exit.push_back(exit_ev);
  extra_exit.push_back(exit_ev);
  CHECK_THROWS_AS(build_parse_tree(extra_exit), TraceError);
}

TEST_CASE("a loop iteration event outside any loop is rejected") {
  std::vector<TraceEvent> bad;
  TraceEvent enter;
  enter.kind = EventKind::CallEnter;
  enter.name = "f";
  TraceEvent iter;
  iter.kind = EventKind::LoopIter;
  bad.push_back(enter);
  bad.push_back(iter);
  CHECK_THROWS_AS(build_parse_tree(bad), TraceError);
}
