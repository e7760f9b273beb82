#pragma once

#include <cctype>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "agmine/value.hpp"

namespace agmine {

struct SourceLoc {
  int line = 0;
  int column = 0;
};

struct SyntaxError : std::runtime_error {
  SourceLoc loc;
  SyntaxError(const std::string& msg, SourceLoc l)
      : std::runtime_error(msg + " at line " + std::to_string(l.line) + ", column " +
                           std::to_string(l.column)),
        loc(l) {}
};

// ---------------------------------------------------------------------------
// Expression AST. This is the expression subset shared by subject programs
// and the `sem ... endsem` blocks of attributed grammars.
// ---------------------------------------------------------------------------

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

enum class ExprKind {
  Literal,     // int / float / string / bool / null
  Var,         // identifier
  ListLit,     // [e, e, ...]
  MapLit,      // {k: v, ...}
  Index,       // a[i]
  Slice,       // a[i:j]
  Binary,      // + - * / == != < <= > >= in and or
  Unary,       // - not
  Call,        // f(args) -- builtin or subject function
};

struct Expr {
  ExprKind kind;
  SourceLoc loc;

  Value literal;                       // Literal
  std::string name;                    // Var name, Call callee, Binary/Unary op
  std::vector<ExprPtr> children;       // operands / args / elements
  std::vector<std::string> map_keys;   // MapLit keys (parallel to children)

  static ExprPtr make(ExprKind k, SourceLoc loc = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->loc = loc;
    return e;
  }
  static ExprPtr lit(Value v, SourceLoc loc = {}) {
    auto e = make(ExprKind::Literal, loc);
    e->literal = std::move(v);
    return e;
  }
  static ExprPtr var(std::string n, SourceLoc loc = {}) {
    auto e = make(ExprKind::Var, loc);
    e->name = std::move(n);
    return e;
  }
};

// Simple statements as they appear inside sem blocks and subject programs.
// Control flow (if/while/def) exists only in the subject language and lives
// in subject.hpp; SemStmt covers what can be attached to a grammar.
enum class SemStmtKind {
  Assign,      // name = expr
  ExprStmt,    // expr
};

struct SemStmt {
  SemStmtKind kind;
  std::string target;  // Assign only
  ExprPtr expr;
  SourceLoc loc;
};

// ---------------------------------------------------------------------------
// Structural equality (ignores source locations).
// ---------------------------------------------------------------------------

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind) return false;
  if (a->name != b->name) return false;
  if (a->kind == ExprKind::Literal && !(a->literal == b->literal)) return false;
  if (a->map_keys != b->map_keys) return false;
  if (a->children.size() != b->children.size()) return false;
  for (size_t i = 0; i < a->children.size(); ++i)
    if (!expr_equal(a->children[i], b->children[i])) return false;
  return true;
}

inline bool stmt_equal(const SemStmt& a, const SemStmt& b) {
  return a.kind == b.kind && a.target == b.target && expr_equal(a.expr, b.expr);
}

inline bool stmts_equal(const std::vector<SemStmt>& a, const std::vector<SemStmt>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!stmt_equal(a[i], b[i])) return false;
  return true;
}

inline ExprPtr expr_clone(const ExprPtr& e) {
  if (!e) return nullptr;
  auto c = std::make_shared<Expr>(*e);
  for (auto& ch : c->children) ch = expr_clone(ch);
  return c;
}

// ---------------------------------------------------------------------------
// Printing. Parentheses are inserted around nested binary operands so that
// printed statements parse back to the same tree.
// ---------------------------------------------------------------------------

namespace detail {

inline int binop_prec(const std::string& op) {
  if (op == "or") return 1;
  if (op == "and") return 2;
  if (op == "==" || op == "!=" || op == "<" || op == "<=" || op == ">" || op == ">=" ||
      op == "in")
    return 4;
  if (op == "+" || op == "-") return 5;
  if (op == "*" || op == "/") return 6;
  return 0;
}

inline void print_expr(std::ostream& os, const ExprPtr& e, int parent_prec);

inline void print_literal(std::ostream& os, const Value& v) {
  if (v.is_string()) {
    os << '\'';
    for (char c : v.as_string()) {
      if (c == '\'' || c == '\\') os << '\\';
      os << c;
    }
    os << '\'';
  } else {
    canonical_serialize(os, v);
  }
}

inline void print_expr(std::ostream& os, const ExprPtr& e, int parent_prec) {
  switch (e->kind) {
    case ExprKind::Literal:
      print_literal(os, e->literal);
      break;
    case ExprKind::Var:
      os << e->name;
      break;
    case ExprKind::ListLit: {
      os << '[';
      for (size_t i = 0; i < e->children.size(); ++i) {
        if (i) os << ", ";
        print_expr(os, e->children[i], 0);
      }
      os << ']';
      break;
    }
    case ExprKind::MapLit: {
      os << '{';
      for (size_t i = 0; i < e->children.size(); ++i) {
        if (i) os << ", ";
        os << '\'' << e->map_keys[i] << "': ";
        print_expr(os, e->children[i], 0);
      }
      os << '}';
      break;
    }
    case ExprKind::Index:
      print_expr(os, e->children[0], 7);
      os << '[';
      print_expr(os, e->children[1], 0);
      os << ']';
      break;
    case ExprKind::Slice:
      print_expr(os, e->children[0], 7);
      os << '[';
      print_expr(os, e->children[1], 0);
      os << ':';
      print_expr(os, e->children[2], 0);
      os << ']';
      break;
    case ExprKind::Binary: {
      int p = binop_prec(e->name);
      bool parens = p < parent_prec ||
                    (p == parent_prec && (e->name == "-" || e->name == "/"));
      if (parens) os << '(';
      print_expr(os, e->children[0], p);
      os << ' ' << e->name << ' ';
      print_expr(os, e->children[1], p + 1);
      if (parens) os << ')';
      break;
    }
    case ExprKind::Unary:
      if (e->name == "not") {
        os << "not ";
        print_expr(os, e->children[0], 3);
      } else {
        os << e->name;
        print_expr(os, e->children[0], 7);
      }
      break;
    case ExprKind::Call:
      os << e->name << '(';
      for (size_t i = 0; i < e->children.size(); ++i) {
        if (i) os << ", ";
        print_expr(os, e->children[i], 0);
      }
      os << ')';
      break;
  }
}

}  // namespace detail

inline std::string expr_to_string(const ExprPtr& e) {
  std::ostringstream os;
  detail::print_expr(os, e, 0);
  return os.str();
}

inline std::string stmt_to_string(const SemStmt& s) {
  if (s.kind == SemStmtKind::Assign) return s.target + " = " + expr_to_string(s.expr);
  return expr_to_string(s.expr);
}

// ---------------------------------------------------------------------------
// Tokenizer + expression parser. Used directly for sem-block statements; the
// subject-language parser in subject.hpp reuses the token stream.
// ---------------------------------------------------------------------------

enum class TokKind {
  End,
  Newline,
  Indent,
  Dedent,
  Ident,
  Int,
  Float,
  Str,
  Op,  // punctuation / operators
};

struct Token {
  TokKind kind;
  std::string text;
  std::int64_t int_val = 0;
  double float_val = 0;
  SourceLoc loc;
};

/// Tokenizes an indentation-structured source. When `track_indent` is false
/// (sem-block statement lists) newlines are emitted but indent/dedent are not.
class Tokenizer {
public:
  explicit Tokenizer(std::string src, bool track_indent = true)
      : src_(std::move(src)), track_indent_(track_indent) {
    tokenize();
  }

  const std::vector<Token>& tokens() const { return toks_; }

private:
  void tokenize() {
    size_t i = 0;
    int line = 1;
    std::vector<int> indents{0};
    bool at_line_start = true;
    int paren_depth = 0;

    auto loc_at = [&](size_t col0) { return SourceLoc{line, static_cast<int>(col0) + 1}; };

    while (i <= src_.size()) {
      if (at_line_start && track_indent_ && paren_depth == 0) {
        size_t j = i;
        int width = 0;
        while (j < src_.size() && (src_[j] == ' ' || src_[j] == '\t')) {
          width += (src_[j] == '\t') ? 8 : 1;
          ++j;
        }
        // blank or comment-only lines do not affect indentation
        if (j >= src_.size() || src_[j] == '\n' || src_[j] == '#') {
          i = j;
          if (i < src_.size() && src_[i] == '#')
            while (i < src_.size() && src_[i] != '\n') ++i;
          if (i < src_.size()) {
            ++i;
            ++line;
            continue;
          }
          break;
        }
        if (width > indents.back()) {
          indents.push_back(width);
          toks_.push_back({TokKind::Indent, "", 0, 0, loc_at(0)});
        } else {
          while (width < indents.back()) {
            indents.pop_back();
            toks_.push_back({TokKind::Dedent, "", 0, 0, loc_at(0)});
          }
          if (width != indents.back())
            throw SyntaxError("inconsistent indentation", loc_at(0));
        }
        i = j;
        at_line_start = false;
        continue;
      }
      at_line_start = false;

      if (i >= src_.size()) break;
      char c = src_[i];
      size_t col = i;
      if (c == '\n') {
        ++i;
        ++line;
        if (paren_depth == 0) {
          if (!toks_.empty() && toks_.back().kind != TokKind::Newline &&
              toks_.back().kind != TokKind::Indent && toks_.back().kind != TokKind::Dedent)
            toks_.push_back({TokKind::Newline, "", 0, 0, loc_at(col)});
          at_line_start = true;
        }
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r') {
        ++i;
        continue;
      }
      if (c == '#') {
        while (i < src_.size() && src_[i] != '\n') ++i;
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t j = i;
        while (j < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_'))
          ++j;
        toks_.push_back({TokKind::Ident, src_.substr(i, j - i), 0, 0, loc_at(col)});
        i = j;
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        size_t j = i;
        while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
        bool is_float = false;
        if (j + 1 < src_.size() && src_[j] == '.' &&
            std::isdigit(static_cast<unsigned char>(src_[j + 1]))) {
          is_float = true;
          ++j;
          while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
        }
        Token t{is_float ? TokKind::Float : TokKind::Int, src_.substr(i, j - i), 0, 0,
                loc_at(col)};
        if (is_float)
          t.float_val = std::strtod(t.text.c_str(), nullptr);
        else
          t.int_val = std::strtoll(t.text.c_str(), nullptr, 10);
        toks_.push_back(t);
        i = j;
        continue;
      }
      if (c == '\'' || c == '"') {
        char quote = c;
        std::string out;
        size_t j = i + 1;
        while (j < src_.size() && src_[j] != quote) {
          if (src_[j] == '\\' && j + 1 < src_.size()) {
            char n = src_[j + 1];
            if (n == 'n')
              out += '\n';
            else if (n == 't')
              out += '\t';
            else
              out += n;
            j += 2;
          } else {
            if (src_[j] == '\n') throw SyntaxError("unterminated string", loc_at(col));
            out += src_[j++];
          }
        }
        if (j >= src_.size()) throw SyntaxError("unterminated string", loc_at(col));
        Token t{TokKind::Str, out, 0, 0, loc_at(col)};
        toks_.push_back(t);
        i = j + 1;
        continue;
      }
      // operators
      static const char* two_char[] = {"==", "!=", "<=", ">=", "+=", "-=", "*=", "/="};
      std::string op(1, c);
      if (i + 1 < src_.size()) {
        std::string two = src_.substr(i, 2);
        for (const char* t : two_char)
          if (two == t) {
            op = two;
            break;
          }
      }
      if (op == "(" || op == "[" || op == "{") ++paren_depth;
      if (op == ")" || op == "]" || op == "}") --paren_depth;
      toks_.push_back({TokKind::Op, op, 0, 0, loc_at(col)});
      i += op.size();
    }
    if (!toks_.empty() && toks_.back().kind != TokKind::Newline)
      toks_.push_back({TokKind::Newline, "", 0, 0, SourceLoc{line, 1}});
    if (track_indent_) {
      while (indents.size() > 1) {
        indents.pop_back();
        toks_.push_back({TokKind::Dedent, "", 0, 0, SourceLoc{line, 1}});
      }
    }
    toks_.push_back({TokKind::End, "", 0, 0, SourceLoc{line, 1}});
  }

  std::string src_;
  bool track_indent_;
  std::vector<Token> toks_;
};

/// Recursive-descent parser over a token slice. Exposed so the subject
/// language parser can reuse expression parsing.
class ExprParser {
public:
  ExprParser(const std::vector<Token>& toks, size_t pos = 0) : toks_(toks), pos_(pos) {}

  size_t pos() const { return pos_; }
  const Token& peek(int off = 0) const { return toks_[pos_ + off]; }

  bool at_op(const std::string& t) const {
    return peek().kind == TokKind::Op && peek().text == t;
  }
  bool at_ident(const std::string& t) const {
    return peek().kind == TokKind::Ident && peek().text == t;
  }
  Token expect_op(const std::string& t) {
    if (!at_op(t)) throw SyntaxError("expected '" + t + "'", peek().loc);
    return toks_[pos_++];
  }
  Token advance() { return toks_[pos_++]; }

  ExprPtr parse_expr() { return parse_or(); }

  std::vector<ExprPtr> parse_expr_list(const std::string& close) {
    std::vector<ExprPtr> out;
    if (!at_op(close)) {
      out.push_back(parse_expr());
      while (at_op(",")) {
        advance();
        out.push_back(parse_expr());
      }
    }
    expect_op(close);
    return out;
  }

private:
  ExprPtr binop(const std::string& op, ExprPtr l, ExprPtr r, SourceLoc loc) {
    auto e = Expr::make(ExprKind::Binary, loc);
    e->name = op;
    e->children = {std::move(l), std::move(r)};
    return e;
  }

  ExprPtr parse_or() {
    auto l = parse_and();
    while (at_ident("or")) {
      auto loc = advance().loc;
      l = binop("or", l, parse_and(), loc);
    }
    return l;
  }
  ExprPtr parse_and() {
    auto l = parse_not();
    while (at_ident("and")) {
      auto loc = advance().loc;
      l = binop("and", l, parse_not(), loc);
    }
    return l;
  }
  ExprPtr parse_not() {
    if (at_ident("not")) {
      auto loc = advance().loc;
      auto e = Expr::make(ExprKind::Unary, loc);
      e->name = "not";
      e->children = {parse_not()};
      return e;
    }
    return parse_cmp();
  }
  ExprPtr parse_cmp() {
    auto l = parse_add();
    static const char* cmps[] = {"==", "!=", "<", "<=", ">", ">="};
    for (;;) {
      bool matched = false;
      for (const char* c : cmps) {
        if (at_op(c)) {
          auto loc = advance().loc;
          l = binop(c, l, parse_add(), loc);
          matched = true;
          break;
        }
      }
      if (!matched && at_ident("in")) {
        auto loc = advance().loc;
        l = binop("in", l, parse_add(), loc);
        matched = true;
      }
      if (!matched) return l;
    }
  }
  ExprPtr parse_add() {
    auto l = parse_mul();
    while (at_op("+") || at_op("-")) {
      auto t = advance();
      l = binop(t.text, l, parse_mul(), t.loc);
    }
    return l;
  }
  ExprPtr parse_mul() {
    auto l = parse_unary();
    while (at_op("*") || at_op("/")) {
      auto t = advance();
      l = binop(t.text, l, parse_unary(), t.loc);
    }
    return l;
  }
  ExprPtr parse_unary() {
    if (at_op("-")) {
      auto loc = advance().loc;
      // fold a leading minus into numeric literals
      if (peek().kind == TokKind::Int) {
        auto t = advance();
        return postfix(Expr::lit(Value(-t.int_val), loc));
      }
      if (peek().kind == TokKind::Float) {
        auto t = advance();
        return postfix(Expr::lit(Value(-t.float_val), loc));
      }
      auto e = Expr::make(ExprKind::Unary, loc);
      e->name = "-";
      e->children = {parse_unary()};
      return e;
    }
    return postfix(parse_atom());
  }
  ExprPtr postfix(ExprPtr base) {
    for (;;) {
      if (at_op("[")) {
        auto loc = advance().loc;
        auto idx = parse_expr();
        if (at_op(":")) {
          advance();
          auto hi = parse_expr();
          expect_op("]");
          auto e = Expr::make(ExprKind::Slice, loc);
          e->children = {base, idx, hi};
          base = e;
        } else {
          expect_op("]");
          auto e = Expr::make(ExprKind::Index, loc);
          e->children = {base, idx};
          base = e;
        }
      } else {
        return base;
      }
    }
  }
  ExprPtr parse_atom() {
    const Token& t = peek();
    switch (t.kind) {
      case TokKind::Int:
        advance();
        return Expr::lit(Value(t.int_val), t.loc);
      case TokKind::Float:
        advance();
        return Expr::lit(Value(t.float_val), t.loc);
      case TokKind::Str:
        advance();
        return Expr::lit(Value(t.text), t.loc);
      case TokKind::Ident: {
        if (t.text == "True") {
          advance();
          return Expr::lit(Value(true), t.loc);
        }
        if (t.text == "False") {
          advance();
          return Expr::lit(Value(false), t.loc);
        }
        if (t.text == "None") {
          advance();
          return Expr::lit(Value(), t.loc);
        }
        advance();
        if (at_op("(")) {
          advance();
          auto e = Expr::make(ExprKind::Call, t.loc);
          e->name = t.text;
          e->children = parse_expr_list(")");
          return e;
        }
        return Expr::var(t.text, t.loc);
      }
      case TokKind::Op:
        if (t.text == "(") {
          advance();
          auto e = parse_expr();
          expect_op(")");
          return e;
        }
        if (t.text == "[") {
          advance();
          auto e = Expr::make(ExprKind::ListLit, t.loc);
          e->children = parse_expr_list("]");
          return e;
        }
        if (t.text == "{") {
          advance();
          auto e = Expr::make(ExprKind::MapLit, t.loc);
          while (!at_op("}")) {
            if (peek().kind != TokKind::Str)
              throw SyntaxError("map literal key must be a string", peek().loc);
            e->map_keys.push_back(advance().text);
            expect_op(":");
            e->children.push_back(parse_expr());
            if (at_op(","))
              advance();
            else
              break;
          }
          expect_op("}");
          return e;
        }
        break;
      default:
        break;
    }
    throw SyntaxError("unexpected token '" + t.text + "'", t.loc);
  }

  const std::vector<Token>& toks_;
  size_t pos_;
};

/// Parses a sem-block statement list: assignments and expression statements,
/// separated by newlines or semicolons.
inline std::vector<SemStmt> parse_sem_statements(const std::string& src) {
  Tokenizer tz(src, /*track_indent=*/false);
  const auto& toks = tz.tokens();
  std::vector<SemStmt> out;
  size_t pos = 0;
  while (toks[pos].kind != TokKind::End) {
    if (toks[pos].kind == TokKind::Newline ||
        (toks[pos].kind == TokKind::Op && toks[pos].text == ";")) {
      ++pos;
      continue;
    }
    SemStmt st;
    st.loc = toks[pos].loc;
    if (toks[pos].kind == TokKind::Ident && toks[pos + 1].kind == TokKind::Op &&
        toks[pos + 1].text == "=") {
      st.kind = SemStmtKind::Assign;
      st.target = toks[pos].text;
      ExprParser p(toks, pos + 2);
      st.expr = p.parse_expr();
      pos = p.pos();
    } else {
      st.kind = SemStmtKind::ExprStmt;
      ExprParser p(toks, pos);
      st.expr = p.parse_expr();
      pos = p.pos();
    }
    out.push_back(std::move(st));
  }
  return out;
}

/// Builtins available both to subject programs and inside sem blocks.
inline bool is_builtin(const std::string& name) {
  static const char* names[] = {"int", "float", "str",    "len",
                                "ord", "chr",   "append", "ParserException"};
  for (const char* n : names)
    if (name == n) return true;
  return false;
}

// Variables read by an expression (in evaluation order, with duplicates).
inline void collect_reads(const ExprPtr& e, std::vector<std::string>& out) {
  if (!e) return;
  if (e->kind == ExprKind::Var) out.push_back(e->name);
  for (const auto& c : e->children) collect_reads(c, out);
}

inline bool expr_reads_var(const ExprPtr& e, const std::string& name) {
  if (!e) return false;
  if (e->kind == ExprKind::Var && e->name == name) return true;
  for (const auto& c : e->children)
    if (expr_reads_var(c, name)) return true;
  return false;
}

}  // namespace agmine
