#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "agmine/expr.hpp"

namespace agmine {

// ---------------------------------------------------------------------------
// Positions: rule name + child-index path from the rule's root expression.
// The rule body is always rooted at a Sequence node with the empty path, so
// positions survive reformatting and serialization round-trips.
// ---------------------------------------------------------------------------

struct PositionId {
  std::string rule;
  std::vector<int> path;

  bool operator==(const PositionId& o) const { return rule == o.rule && path == o.path; }
  bool operator!=(const PositionId& o) const { return !(*this == o); }
  bool operator<(const PositionId& o) const {
    if (rule != o.rule) return rule < o.rule;
    return path < o.path;
  }

  std::string to_string() const {
    std::string s = rule + "/";
    for (size_t i = 0; i < path.size(); ++i) {
      if (i) s += '.';
      s += std::to_string(path[i]);
    }
    return s;
  }

  bool is_prefix_of(const PositionId& o) const {
    if (rule != o.rule || path.size() > o.path.size()) return false;
    return std::equal(path.begin(), path.end(), o.path.begin());
  }
};

// ---------------------------------------------------------------------------
// Grammar expressions.
// ---------------------------------------------------------------------------

enum class GKind {
  Terminal,
  NonterminalRef,
  Sequence,
  Choice,
  Option,
  Repetition,
  SemBlock,
};

struct GExpr;
using GExprPtr = std::shared_ptr<GExpr>;

struct GExpr {
  GKind kind;
  std::string text;                  // Terminal text / referenced rule name
  std::string out_alias;             // NonterminalRef: local alias for the out-attribute
  std::vector<ExprPtr> args;         // NonterminalRef: in-attribute arguments
  std::vector<SemStmt> statements;   // SemBlock
  std::vector<GExprPtr> children;
  PositionId pos;
  SourceLoc loc;

  static GExprPtr make(GKind k) {
    auto e = std::make_shared<GExpr>();
    e->kind = k;
    return e;
  }
};

struct Rule {
  std::string name;
  std::vector<std::string> params;  // inherited attributes
  std::string out_attr;             // synthesized attribute; empty if none
  GExprPtr root;                    // always a Sequence
  SourceLoc loc;
};

struct Grammar {
  std::vector<Rule> rules;

  const std::string& start() const { return rules.front().name; }

  const Rule* find_rule(const std::string& name) const {
    for (const auto& r : rules)
      if (r.name == name) return &r;
    return nullptr;
  }
  Rule* find_rule(const std::string& name) {
    for (auto& r : rules)
      if (r.name == name) return &r;
    return nullptr;
  }

  bool is_attributed() const {
    for (const auto& r : rules) {
      if (!r.out_attr.empty() || !r.params.empty()) return true;
      bool found = false;
      walk(r.root, [&](const GExprPtr& e) {
        if (e->kind == GKind::SemBlock) found = true;
      });
      if (found) return true;
    }
    return false;
  }

  template <typename F>
  static void walk(const GExprPtr& e, F&& f) {
    f(e);
    for (const auto& c : e->children) walk(c, f);
  }

  const GExpr* expr_at(const PositionId& p) const {
    const Rule* r = find_rule(p.rule);
    if (!r) return nullptr;
    const GExpr* e = r->root.get();
    for (int idx : p.path) {
      if (idx < 0 || idx >= static_cast<int>(e->children.size())) return nullptr;
      e = e->children[static_cast<size_t>(idx)].get();
    }
    return e;
  }
};

struct GrammarError : std::runtime_error {
  SourceLoc loc;
  GrammarError(const std::string& msg, SourceLoc l = {})
      : std::runtime_error(l.line ? msg + " at line " + std::to_string(l.line) + ", column " +
                                        std::to_string(l.column)
                                  : msg),
        loc(l) {}
};

// ---------------------------------------------------------------------------
// Grammar file parsing. Wirth-style EBNF:
//
//   Name = expr .           alternation |, option [..], repetition {..},
//                           grouping (..), terminals in single quotes.
//
// Attributed extensions:
//
//   Name(p1,p2)^Out = ...   in-attribute parameters and out-attribute
//   Ref(a)^A                arguments and out-alias at reference sites;
//                           '(' must directly follow the name
//   sem stmt; stmt endsem   semantic block between sequence items
// ---------------------------------------------------------------------------

namespace gdetail {

enum class GTokKind { Ident, Term, Sym, Sem, End };

struct GTok {
  GTokKind kind;
  std::string text;                 // ident name / terminal text / symbol / raw sem source
  bool adjacent = false;            // '(' directly after previous token
  SourceLoc loc;
};

inline std::vector<GTok> glex(const std::string& src) {
  std::vector<GTok> out;
  size_t i = 0;
  int line = 1, col = 1;
  auto cur_loc = [&]() { return SourceLoc{line, col}; };
  auto bump = [&](char c) {
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  };
  size_t last_end = std::string::npos;
  while (i < src.size()) {
    char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') bump(src[i++]);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      bump(c);
      ++i;
      continue;
    }
    SourceLoc loc = cur_loc();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) {
        bump(src[j]);
        ++j;
      }
      std::string word = src.substr(i, j - i);
      if (word == "sem") {
        // capture raw text until a bare `endsem`, respecting string quotes
        size_t k = j;
        std::string raw;
        for (;;) {
          if (k >= src.size()) throw GrammarError("unterminated sem block", loc);
          char d = src[k];
          if (d == '\'' || d == '"') {
            char q = d;
            raw += d;
            bump(src[k++]);
            while (k < src.size() && src[k] != q) {
              if (src[k] == '\\' && k + 1 < src.size()) {
                raw += src[k];
                bump(src[k++]);
              }
              raw += src[k];
              bump(src[k++]);
            }
            if (k >= src.size()) throw GrammarError("unterminated string in sem block", loc);
            raw += src[k];
            bump(src[k++]);
            continue;
          }
          if ((std::isalpha(static_cast<unsigned char>(d)) || d == '_')) {
            size_t m = k;
            while (m < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[m])) || src[m] == '_'))
              ++m;
            std::string w = src.substr(k, m - k);
            if (w == "endsem") {
              for (size_t t = k; t < m; ++t) bump(src[t]);
              k = m;
              break;
            }
            raw += w;
            for (size_t t = k; t < m; ++t) bump(src[t]);
            k = m;
            continue;
          }
          raw += d;
          bump(src[k++]);
        }
        out.push_back({GTokKind::Sem, raw, false, loc});
        i = k;
        last_end = i;
        continue;
      }
      out.push_back({GTokKind::Ident, word, false, loc});
      i = j;
      last_end = i;
      continue;
    }
    if (c == '\'') {
      std::string text;
      size_t j = i + 1;
      bump(c);
      while (j < src.size() && src[j] != '\'') {
        if (src[j] == '\\' && j + 1 < src.size()) {
          char n = src[j + 1];
          if (n == 'n')
            text += '\n';
          else if (n == 't')
            text += '\t';
          else
            text += n;
          bump(src[j]);
          bump(src[j + 1]);
          j += 2;
        } else {
          if (src[j] == '\n') throw GrammarError("unterminated terminal", loc);
          text += src[j];
          bump(src[j]);
          ++j;
        }
      }
      if (j >= src.size()) throw GrammarError("unterminated terminal", loc);
      bump(src[j]);
      out.push_back({GTokKind::Term, text, false, loc});
      i = j + 1;
      last_end = i;
      continue;
    }
    static const std::string syms = "=.|[]{}()^,";
    if (syms.find(c) != std::string::npos) {
      GTok t{GTokKind::Sym, std::string(1, c), false, loc};
      if (c == '(' && last_end == i) t.adjacent = true;
      out.push_back(t);
      bump(c);
      ++i;
      last_end = i;
      continue;
    }
    throw GrammarError(std::string("unexpected character '") + c + "'", loc);
  }
  out.push_back({GTokKind::End, "", false, cur_loc()});
  return out;
}

class GParser {
public:
  explicit GParser(const std::string& src) : toks_(glex(src)) {}

  Grammar parse() {
    Grammar g;
    std::set<std::string> names;
    while (peek().kind != GTokKind::End) {
      Rule r = parse_rule();
      if (!names.insert(r.name).second)
        throw GrammarError("duplicate rule '" + r.name + "'", r.loc);
      g.rules.push_back(std::move(r));
    }
    if (g.rules.empty()) throw GrammarError("grammar has no rules");
    // resolve references
    for (const auto& r : g.rules) {
      Grammar::walk(r.root, [&](const GExprPtr& e) {
        if (e->kind == GKind::NonterminalRef) {
          bool found = false;
          for (const auto& r2 : g.rules)
            if (r2.name == e->text) found = true;
          if (!found)
            throw GrammarError("undefined nonterminal '" + e->text + "'", e->loc);
        }
      });
    }
    for (auto& r : g.rules) assign_positions(r);
    return g;
  }

private:
  const GTok& peek(int off = 0) const { return toks_[pos_ + off]; }
  GTok advance() { return toks_[pos_++]; }
  bool at_sym(const std::string& s) const {
    return peek().kind == GTokKind::Sym && peek().text == s;
  }
  void expect_sym(const std::string& s) {
    if (!at_sym(s)) throw GrammarError("expected '" + s + "'", peek().loc);
    ++pos_;
  }

  Rule parse_rule() {
    if (peek().kind != GTokKind::Ident)
      throw GrammarError("expected rule name", peek().loc);
    Rule r;
    r.loc = peek().loc;
    r.name = advance().text;
    if (at_sym("(") && toks_[pos_].adjacent) {
      advance();
      while (!at_sym(")")) {
        if (peek().kind != GTokKind::Ident)
          throw GrammarError("expected parameter name", peek().loc);
        r.params.push_back(advance().text);
        if (at_sym(",")) advance();
      }
      advance();
    }
    if (at_sym("^")) {
      advance();
      if (peek().kind != GTokKind::Ident)
        throw GrammarError("expected out-attribute name", peek().loc);
      r.out_attr = advance().text;
    }
    expect_sym("=");
    GExprPtr body = parse_alt();
    expect_sym(".");
    // rule bodies are always rooted at a Sequence
    if (body->kind == GKind::Sequence) {
      r.root = body;
    } else {
      r.root = GExpr::make(GKind::Sequence);
      r.root->loc = body->loc;
      r.root->children.push_back(body);
    }
    return r;
  }

  GExprPtr parse_alt() {
    GExprPtr first = parse_seq();
    if (!at_sym("|")) return first;
    auto choice = GExpr::make(GKind::Choice);
    choice->loc = first->loc;
    choice->children.push_back(first);
    while (at_sym("|")) {
      advance();
      choice->children.push_back(parse_seq());
    }
    return choice;
  }

  GExprPtr parse_seq() {
    std::vector<GExprPtr> items;
    while (is_item_start()) items.push_back(parse_item());
    if (items.empty()) throw GrammarError("empty sequence", peek().loc);
    if (items.size() == 1) return items[0];
    auto seq = GExpr::make(GKind::Sequence);
    seq->loc = items[0]->loc;
    seq->children = std::move(items);
    return seq;
  }

  bool is_item_start() const {
    if (peek().kind == GTokKind::Term || peek().kind == GTokKind::Ident ||
        peek().kind == GTokKind::Sem)
      return true;
    return at_sym("[") || at_sym("{") || at_sym("(");
  }

  GExprPtr parse_item() {
    const GTok& t = peek();
    if (t.kind == GTokKind::Term) {
      advance();
      auto e = GExpr::make(GKind::Terminal);
      e->text = t.text;
      e->loc = t.loc;
      if (e->text.empty()) throw GrammarError("empty terminal", t.loc);
      return e;
    }
    if (t.kind == GTokKind::Sem) {
      advance();
      auto e = GExpr::make(GKind::SemBlock);
      e->loc = t.loc;
      try {
        e->statements = parse_sem_statements(t.text);
      } catch (const SyntaxError& ex) {
        throw GrammarError(std::string("in sem block: ") + ex.what(), t.loc);
      }
      return e;
    }
    if (t.kind == GTokKind::Ident) {
      advance();
      auto e = GExpr::make(GKind::NonterminalRef);
      e->text = t.text;
      e->loc = t.loc;
      if (at_sym("(") && peek().adjacent) {
        advance();
        // in-attribute arguments use the sem expression language
        std::string raw;
        int depth = 1;
        SourceLoc aloc = peek().loc;
        while (depth > 0) {
          if (peek().kind == GTokKind::End)
            throw GrammarError("unterminated argument list", aloc);
          const GTok& a = advance();
          if (a.kind == GTokKind::Sym && a.text == "(") ++depth;
          if (a.kind == GTokKind::Sym && a.text == ")") {
            --depth;
            if (depth == 0) break;
          }
          if (a.kind == GTokKind::Term)
            raw += "'" + a.text + "'";
          else
            raw += a.text;
          raw += ' ';
        }
        Tokenizer tz(raw, false);
        ExprParser p(tz.tokens());
        if (p.peek().kind != TokKind::End && p.peek().kind != TokKind::Newline) {
          e->args.push_back(p.parse_expr());
          while (p.at_op(",")) {
            p.advance();
            e->args.push_back(p.parse_expr());
          }
        }
      }
      if (at_sym("^")) {
        advance();
        if (peek().kind != GTokKind::Ident)
          throw GrammarError("expected out-attribute alias", peek().loc);
        e->out_alias = advance().text;
      }
      return e;
    }
    if (at_sym("[")) {
      auto loc = advance().loc;
      auto e = GExpr::make(GKind::Option);
      e->loc = loc;
      e->children.push_back(parse_alt());
      expect_sym("]");
      return e;
    }
    if (at_sym("{")) {
      auto loc = advance().loc;
      auto e = GExpr::make(GKind::Repetition);
      e->loc = loc;
      e->children.push_back(parse_alt());
      expect_sym("}");
      return e;
    }
    if (at_sym("(")) {
      advance();
      auto e = parse_alt();
      expect_sym(")");
      return e;
    }
    throw GrammarError("expected grammar item", t.loc);
  }

  static void assign_positions(Rule& r) {
    std::vector<int> path;
    assign(r.root, r.name, path);
  }
  static void assign(const GExprPtr& e, const std::string& rule, std::vector<int>& path) {
    e->pos = PositionId{rule, path};
    for (size_t i = 0; i < e->children.size(); ++i) {
      path.push_back(static_cast<int>(i));
      assign(e->children[i], rule, path);
      path.pop_back();
    }
  }

  std::vector<GTok> toks_;
  size_t pos_ = 0;
};

}  // namespace gdetail

inline Grammar parse_grammar(const std::string& text) {
  return gdetail::GParser(text).parse();
}

// ---------------------------------------------------------------------------
// Position enumeration: deterministic pre-order over every rule. This is
// the coverage universe for the input fuzzer.
// ---------------------------------------------------------------------------

inline std::vector<PositionId> enumerate_positions(const Grammar& g) {
  std::vector<PositionId> out;
  for (const auto& r : g.rules)
    Grammar::walk(r.root, [&](const GExprPtr& e) { out.push_back(e->pos); });
  return out;
}

// ---------------------------------------------------------------------------
// Serialization.
// ---------------------------------------------------------------------------

namespace gdetail {

inline void serialize_expr(std::ostream& os, const GExprPtr& e, bool parenthesize_choice) {
  switch (e->kind) {
    case GKind::Terminal: {
      os << '\'';
      for (char c : e->text) {
        if (c == '\n') {
          os << "\\n";
        } else if (c == '\t') {
          os << "\\t";
        } else {
          if (c == '\'' || c == '\\') os << '\\';
          os << c;
        }
      }
      os << '\'';
      break;
    }
    case GKind::NonterminalRef: {
      os << e->text;
      if (!e->args.empty()) {
        os << '(';
        for (size_t i = 0; i < e->args.size(); ++i) {
          if (i) os << ", ";
          os << expr_to_string(e->args[i]);
        }
        os << ')';
      }
      if (!e->out_alias.empty()) os << '^' << e->out_alias;
      break;
    }
    case GKind::Sequence: {
      for (size_t i = 0; i < e->children.size(); ++i) {
        if (i) os << ' ';
        serialize_expr(os, e->children[i], true);
      }
      break;
    }
    case GKind::Choice: {
      if (parenthesize_choice) os << "( ";
      for (size_t i = 0; i < e->children.size(); ++i) {
        if (i) os << " | ";
        serialize_expr(os, e->children[i], true);
      }
      if (parenthesize_choice) os << " )";
      break;
    }
    case GKind::Option:
      os << "[ ";
      serialize_expr(os, e->children[0], false);
      os << " ]";
      break;
    case GKind::Repetition:
      os << "{ ";
      serialize_expr(os, e->children[0], false);
      os << " }";
      break;
    case GKind::SemBlock: {
      os << "sem ";
      for (size_t i = 0; i < e->statements.size(); ++i) {
        if (i) os << "; ";
        os << stmt_to_string(e->statements[i]);
      }
      os << " endsem";
      break;
    }
  }
}

}  // namespace gdetail

inline std::string serialize_grammar(const Grammar& g) {
  std::ostringstream os;
  for (const auto& r : g.rules) {
    os << r.name;
    if (!r.params.empty()) {
      os << '(';
      for (size_t i = 0; i < r.params.size(); ++i) {
        if (i) os << ", ";
        os << r.params[i];
      }
      os << ')';
    }
    if (!r.out_attr.empty()) os << '^' << r.out_attr;
    os << " = ";
    if (r.root->children.size() == 1 && r.root->children[0]->kind == GKind::Choice)
      gdetail::serialize_expr(os, r.root->children[0], false);
    else
      gdetail::serialize_expr(os, r.root, false);
    os << " .\n";
  }
  return os.str();
}

inline std::string serialize_ag(const Grammar& g) { return serialize_grammar(g); }

// ---------------------------------------------------------------------------
// Structural equality, ignoring positions and source locations.
// ---------------------------------------------------------------------------

inline bool gexpr_equal(const GExprPtr& a, const GExprPtr& b) {
  if (a->kind != b->kind || a->text != b->text || a->out_alias != b->out_alias)
    return false;
  if (a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!expr_equal(a->args[i], b->args[i])) return false;
  if (!stmts_equal(a->statements, b->statements)) return false;
  if (a->children.size() != b->children.size()) return false;
  for (size_t i = 0; i < a->children.size(); ++i)
    if (!gexpr_equal(a->children[i], b->children[i])) return false;
  return true;
}

inline bool grammar_equal(const Grammar& a, const Grammar& b) {
  if (a.rules.size() != b.rules.size()) return false;
  for (size_t i = 0; i < a.rules.size(); ++i) {
    const Rule& x = a.rules[i];
    const Rule& y = b.rules[i];
    if (x.name != y.name || x.params != y.params || x.out_attr != y.out_attr) return false;
    if (!gexpr_equal(x.root, y.root)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Attributed-grammar well-formedness: every attribute read must be preceded
// by a definition on the same path, and a declared out-attribute must be
// assigned on every alternative.
// ---------------------------------------------------------------------------

inline void validate_ag(const Grammar& g, std::vector<std::string>* errors_out = nullptr) {
  std::vector<std::string> errors;
  for (const auto& r : g.rules) {
    std::set<std::string> defined(r.params.begin(), r.params.end());

    std::function<std::set<std::string>(const GExprPtr&, std::set<std::string>)> walk =
        [&](const GExprPtr& e, std::set<std::string> def) -> std::set<std::string> {
      switch (e->kind) {
        case GKind::Terminal:
          return def;
        case GKind::SemBlock: {
          for (const auto& st : e->statements) {
            std::vector<std::string> reads;
            collect_reads(st.expr, reads);
            for (const auto& v : reads)
              if (!def.count(v))
                errors.push_back("rule " + r.name + ": '" + v +
                                 "' read before definition in sem block at " +
                                 e->pos.to_string());
            std::function<void(const ExprPtr&)> check_calls = [&](const ExprPtr& x) {
              if (x->kind == ExprKind::Call && !is_builtin(x->name))
                errors.push_back("rule " + r.name + ": sem block calls non-builtin '" +
                                 x->name + "'");
              for (const auto& c : x->children) check_calls(c);
            };
            check_calls(st.expr);
            if (st.kind == SemStmtKind::Assign) def.insert(st.target);
          }
          return def;
        }
        case GKind::NonterminalRef: {
          for (const auto& a : e->args) {
            std::vector<std::string> reads;
            collect_reads(a, reads);
            for (const auto& v : reads)
              if (!def.count(v))
                errors.push_back("rule " + r.name + ": '" + v +
                                 "' read before definition in arguments of " + e->text);
          }
          const Rule* callee = g.find_rule(e->text);
          if (callee) {
            if (!e->out_alias.empty() && callee->out_attr.empty())
              errors.push_back("rule " + r.name + ": reference " + e->text +
                               " has alias but callee has no out-attribute");
            if (e->args.size() != callee->params.size())
              errors.push_back("rule " + r.name + ": reference " + e->text + " passes " +
                               std::to_string(e->args.size()) + " argument(s), rule takes " +
                               std::to_string(callee->params.size()));
          }
          if (!e->out_alias.empty()) def.insert(e->out_alias);
          return def;
        }
        case GKind::Sequence: {
          for (const auto& c : e->children) def = walk(c, std::move(def));
          return def;
        }
        case GKind::Option:
        case GKind::Repetition: {
          walk(e->children[0], def);  // body may not execute
          return def;
        }
        case GKind::Choice: {
          std::set<std::string> acc;
          bool first = true;
          for (const auto& alt : e->children) {
            auto d = walk(alt, def);
            if (first) {
              acc = std::move(d);
              first = false;
            } else {
              std::set<std::string> inter;
              std::set_intersection(acc.begin(), acc.end(), d.begin(), d.end(),
                                    std::inserter(inter, inter.begin()));
              acc = std::move(inter);
            }
          }
          return acc;
        }
      }
      return def;
    };

    auto final_def = walk(r.root, defined);
    if (!r.out_attr.empty() && !final_def.count(r.out_attr))
      errors.push_back("rule " + r.name + ": out-attribute '" + r.out_attr +
                       "' is not assigned on every alternative");
  }
  if (errors_out) {
    *errors_out = std::move(errors);
    return;
  }
  if (!errors.empty()) throw GrammarError("ill-formed attributed grammar: " + errors.front());
}

}  // namespace agmine
