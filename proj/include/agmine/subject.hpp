#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "agmine/eval.hpp"
#include "agmine/expr.hpp"

namespace agmine {

// ---------------------------------------------------------------------------
// Subject-language AST. Subject programs are small imperative recursive
// descent parsers over a distinguished read-only input string `s` with an
// integer cursor variable that the program advances as it consumes input.
// ---------------------------------------------------------------------------

enum class StmtKind { Assign, AugAssign, ExprStmt, If, While, Return, Raise, Pass };

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;

struct Branch {
  ExprPtr test;  // null for `else`
  std::vector<StmtPtr> body;
};

struct Stmt {
  StmtKind kind;
  SourceLoc loc;
  std::string site_id;         // function name + statement path, stable
  std::string target;          // Assign / AugAssign
  std::string op;              // AugAssign: + - * /
  ExprPtr expr;                // RHS / expression / return / raise / while-test
  std::vector<Branch> branches;  // If
  std::vector<StmtPtr> body;     // While
};

struct SubjectFunction {
  std::string name;
  std::vector<std::string> params;
  std::vector<StmtPtr> body;
  SourceLoc loc;
};

struct ProgramAST {
  std::vector<StmtPtr> top_level;
  std::vector<SubjectFunction> functions;  // entry = first function
  std::string cursor_var;                  // empty if the program never consumes

  const SubjectFunction* find_function(const std::string& name) const {
    for (const auto& f : functions)
      if (f.name == name) return &f;
    return nullptr;
  }
};

struct ProgramError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Parsing.
// ---------------------------------------------------------------------------

namespace sdetail {

class ProgramParser {
public:
  explicit ProgramParser(const std::string& src) : tz_(src, true), toks_(tz_.tokens()) {}

  ProgramAST parse() {
    ProgramAST p;
    while (peek().kind != TokKind::End) {
      if (peek().kind == TokKind::Newline) {
        ++pos_;
        continue;
      }
      if (at_ident("def")) {
        p.functions.push_back(parse_def());
      } else {
        p.top_level.push_back(parse_stmt());
      }
    }
    if (p.functions.empty()) throw SyntaxError("program defines no function", {1, 1});
    assign_site_ids(p);
    identify_cursor(p);
    return p;
  }

private:
  const Token& peek(int off = 0) const { return toks_[pos_ + off]; }
  Token advance() { return toks_[pos_++]; }
  bool at_ident(const std::string& t) const {
    return peek().kind == TokKind::Ident && peek().text == t;
  }
  bool at_op(const std::string& t) const {
    return peek().kind == TokKind::Op && peek().text == t;
  }
  void expect_op(const std::string& t) {
    if (!at_op(t)) throw SyntaxError("expected '" + t + "'", peek().loc);
    ++pos_;
  }
  void expect_newline() {
    if (peek().kind != TokKind::Newline)
      throw SyntaxError("expected end of line", peek().loc);
    ++pos_;
  }

  SubjectFunction parse_def() {
    SubjectFunction f;
    f.loc = peek().loc;
    advance();  // def
    if (peek().kind != TokKind::Ident) throw SyntaxError("expected function name", peek().loc);
    f.name = advance().text;
    expect_op("(");
    while (!at_op(")")) {
      if (peek().kind != TokKind::Ident)
        throw SyntaxError("expected parameter name", peek().loc);
      f.params.push_back(advance().text);
      if (at_op(",")) advance();
    }
    advance();
    expect_op(":");
    f.body = parse_block();
    return f;
  }

  std::vector<StmtPtr> parse_block() {
    expect_newline();
    if (peek().kind != TokKind::Indent)
      throw SyntaxError("expected an indented block", peek().loc);
    ++pos_;
    std::vector<StmtPtr> body;
    while (peek().kind != TokKind::Dedent && peek().kind != TokKind::End) {
      if (peek().kind == TokKind::Newline) {
        ++pos_;
        continue;
      }
      body.push_back(parse_stmt());
    }
    if (peek().kind == TokKind::Dedent) ++pos_;
    if (body.empty()) throw SyntaxError("empty block", peek().loc);
    return body;
  }

  StmtPtr parse_stmt() {
    auto st = std::make_shared<Stmt>();
    st->loc = peek().loc;
    if (at_ident("if")) {
      st->kind = StmtKind::If;
      advance();
      Branch b;
      b.test = parse_expr_here();
      expect_op(":");
      b.body = parse_block();
      st->branches.push_back(std::move(b));
      while (at_ident("elif")) {
        advance();
        Branch eb;
        eb.test = parse_expr_here();
        expect_op(":");
        eb.body = parse_block();
        st->branches.push_back(std::move(eb));
      }
      if (at_ident("else")) {
        advance();
        expect_op(":");
        Branch eb;
        eb.body = parse_block();
        st->branches.push_back(std::move(eb));
      }
      return st;
    }
    if (at_ident("while")) {
      st->kind = StmtKind::While;
      advance();
      st->expr = parse_expr_here();
      expect_op(":");
      st->body = parse_block();
      return st;
    }
    if (at_ident("return")) {
      st->kind = StmtKind::Return;
      advance();
      if (peek().kind != TokKind::Newline) st->expr = parse_expr_here();
      expect_newline();
      return st;
    }
    if (at_ident("raise")) {
      st->kind = StmtKind::Raise;
      advance();
      st->expr = parse_expr_here();
      expect_newline();
      return st;
    }
    if (at_ident("pass")) {
      st->kind = StmtKind::Pass;
      advance();
      expect_newline();
      return st;
    }
    if (peek().kind == TokKind::Ident && peek(1).kind == TokKind::Op) {
      const std::string& op = peek(1).text;
      if (op == "=") {
        st->kind = StmtKind::Assign;
        st->target = advance().text;
        advance();
        st->expr = parse_expr_here();
        expect_newline();
        return st;
      }
      if (op == "+=" || op == "-=" || op == "*=" || op == "/=") {
        st->kind = StmtKind::AugAssign;
        st->target = advance().text;
        st->op = std::string(1, advance().text[0]);
        st->expr = parse_expr_here();
        expect_newline();
        return st;
      }
    }
    st->kind = StmtKind::ExprStmt;
    st->expr = parse_expr_here();
    expect_newline();
    return st;
  }

  ExprPtr parse_expr_here() {
    ExprParser p(toks_, pos_);
    auto e = p.parse_expr();
    pos_ = p.pos();
    return e;
  }

  static void assign_ids(std::vector<StmtPtr>& body, const std::string& prefix) {
    for (size_t i = 0; i < body.size(); ++i) {
      Stmt& st = *body[i];
      st.site_id = prefix + std::to_string(i);
      if (st.kind == StmtKind::If) {
        for (size_t b = 0; b < st.branches.size(); ++b)
          assign_ids(st.branches[b].body,
                     st.site_id + "." + std::to_string(b) + ".");
      } else if (st.kind == StmtKind::While) {
        assign_ids(st.body, st.site_id + ".0.");
      }
    }
  }

  static void assign_site_ids(ProgramAST& p) {
    assign_ids(p.top_level, "@top/");
    for (auto& f : p.functions) assign_ids(f.body, f.name + "/");
  }

  // The cursor is the variable that both indexes `s` and is mutated.
  static void identify_cursor(ProgramAST& p) {
    std::set<std::string> index_vars;
    std::set<std::string> mutated;

    std::function<void(const ExprPtr&)> scan_expr = [&](const ExprPtr& e) {
      if (!e) return;
      if ((e->kind == ExprKind::Index || e->kind == ExprKind::Slice) &&
          e->children[0]->kind == ExprKind::Var && e->children[0]->name == "s") {
        for (size_t i = 1; i < e->children.size(); ++i) {
          std::vector<std::string> reads;
          collect_reads(e->children[i], reads);
          for (auto& v : reads) index_vars.insert(v);
        }
      }
      for (const auto& c : e->children) scan_expr(c);
    };
    std::function<void(const std::vector<StmtPtr>&)> scan = [&](const std::vector<StmtPtr>& b) {
      for (const auto& sp : b) {
        const Stmt& st = *sp;
        if (st.kind == StmtKind::Assign || st.kind == StmtKind::AugAssign) {
          if (st.target == "s")
            throw ProgramError("the input string 's' is read-only (it is bound by the harness)");
          mutated.insert(st.target);
        }
        scan_expr(st.expr);
        for (const auto& br : st.branches) {
          scan_expr(br.test);
          scan(br.body);
        }
        scan(st.body);
      }
    };
    scan(p.top_level);
    for (const auto& f : p.functions) scan(f.body);

    std::set<std::string> cursors;
    for (const auto& v : index_vars)
      if (mutated.count(v)) cursors.insert(v);
    if (cursors.size() > 1) {
      std::string msg = "ambiguous cursor: multiple mutated variables index 's':";
      for (const auto& c : cursors) msg += " " + c;
      throw ProgramError(msg);
    }
    if (!cursors.empty()) p.cursor_var = *cursors.begin();
  }

  Tokenizer tz_;
  const std::vector<Token>& toks_;
  size_t pos_ = 0;
};

}  // namespace sdetail

inline ProgramAST parse_program(const std::string& text) {
  return sdetail::ProgramParser(text).parse();
}

// ---------------------------------------------------------------------------
// Statement classification: syntax analysis (Syn) vs semantic action (Sem).
// A statement is Syn iff it is a conditional or loop whose test reads the
// input `s`, a mutation of the cursor, or a raise; everything else is Sem.
// ---------------------------------------------------------------------------

enum class StmtClass { Syn, Sem };

namespace sdetail {

inline bool reads_input(const ExprPtr& e) { return expr_reads_var(e, "s"); }

inline void classify_block(const std::vector<StmtPtr>& body, const ProgramAST& p,
                           std::map<std::string, StmtClass>& out) {
  for (const auto& sp : body) {
    const Stmt& st = *sp;
    StmtClass cls = StmtClass::Sem;
    switch (st.kind) {
      case StmtKind::If: {
        bool syn = false;
        for (const auto& b : st.branches)
          if (b.test && reads_input(b.test)) syn = true;
        cls = syn ? StmtClass::Syn : StmtClass::Sem;
        break;
      }
      case StmtKind::While:
        cls = reads_input(st.expr) ? StmtClass::Syn : StmtClass::Sem;
        break;
      case StmtKind::Raise:
        cls = StmtClass::Syn;
        break;
      case StmtKind::Assign:
      case StmtKind::AugAssign: {
        if (!p.cursor_var.empty() && st.target == p.cursor_var) {
          // cursor mutations must be pure cursor arithmetic; fused
          // consume-and-compute statements are rejected
          std::vector<std::string> reads;
          collect_reads(st.expr, reads);
          for (const auto& v : reads)
            if (v != p.cursor_var)
              throw ProgramError("statement at " + st.site_id +
                                 " mixes cursor mutation with other reads ('" + v +
                                 "'); keep consumption and semantics separate");
          cls = StmtClass::Syn;
        }
        break;
      }
      default:
        break;
    }
    out[st.site_id] = cls;
    for (const auto& b : st.branches) classify_block(b.body, p, out);
    classify_block(st.body, p, out);
  }
}

}  // namespace sdetail

inline std::map<std::string, StmtClass> classify_statements(const ProgramAST& p) {
  std::map<std::string, StmtClass> out;
  sdetail::classify_block(p.top_level, p, out);
  for (const auto& f : p.functions) sdetail::classify_block(f.body, p, out);
  return out;
}

// ---------------------------------------------------------------------------
// Trace events.
// ---------------------------------------------------------------------------

enum class EventKind {
  CallEnter,
  CallExit,
  BranchEnter,
  BranchExit,
  LoopEnter,
  LoopIter,
  LoopExit,
  Consume,
  SemStmt,
};

struct CallRef {
  std::string callee;
  size_t enter_seq;
};

struct TraceEvent {
  EventKind kind;
  size_t seq = 0;
  std::string name;        // function name / site-id
  int branch_index = -1;   // BranchEnter/Exit
  size_t input_pos = 0;    // 0-based cursor at the event
  size_t begin0 = 0;       // Consume range, 0-based half-open
  size_t end0 = 0;
  std::string text;        // Consume text
  SemStmt stmt;            // SemStmt: normalized statement
  std::vector<CallRef> calls;  // subject calls made while evaluating stmt
  std::vector<Value> args;     // CallEnter
  Value ret;                   // CallExit
};

struct Outcome {
  Value result;
  std::vector<TraceEvent> trace;
  bool ok = false;
  std::string error;
  size_t error_pos = 0;  // 0-based cursor position at the failure
};

// Reserved assignment target marking `return e` statements in the trace;
// semantic transfer rewrites it into the rule's out-attribute.
inline const char* kReturnTarget = "@return";

// ---------------------------------------------------------------------------
// Tracing interpreter.
// ---------------------------------------------------------------------------

namespace sdetail {

struct ReturnSignal {
  Value value;
};
struct RaiseSignal {
  std::string message;
};

class Interpreter {
public:
  Interpreter(const ProgramAST& p, const std::string& input)
      : p_(p), input_(input), classes_(classify_statements(p)) {}

  Outcome run() {
    Outcome out;
    try {
      if (!p_.cursor_var.empty()) globals_[p_.cursor_var] = Value(0);
      globals_["s"] = Value(input_);
      for (const auto& st : p_.top_level) exec(*st, nullptr);
      const SubjectFunction& entry = p_.functions.front();
      if (!entry.params.empty())
        throw ProgramError("entry function '" + entry.name + "' must take no parameters");
      out.result = call_function(entry, {});
      out.ok = true;
    } catch (const RaiseSignal& r) {
      out.ok = false;
      out.error = r.message;
      out.error_pos = cursor();
    } catch (const EvalError& e) {
      out.ok = false;
      out.error = e.what();
      out.error_pos = cursor();
    } catch (const ReturnSignal&) {
      out.ok = false;
      out.error = "return outside of function";
    }
    out.trace = std::move(trace_);
    return out;
  }

private:
  struct Frame;

  struct Ctx : EvalContext {
    Interpreter& in;
    Frame* frame;
    // set while evaluating a recorded Sem statement
    std::vector<CallRef>* call_log = nullptr;

    Ctx(Interpreter& i, Frame* f) : in(i), frame(f) {}

    Value get_var(const std::string& name, SourceLoc loc) override {
      if (frame) {
        auto it = frame->locals.find(name);
        if (it != frame->locals.end()) return it->second;
      }
      auto it = in.globals_.find(name);
      if (it != in.globals_.end()) return it->second;
      throw EvalError("unbound variable '" + name + "'", loc);
    }

    Value call(const std::string& name, const std::vector<Value>& args,
               SourceLoc loc) override {
      const SubjectFunction* f = in.p_.find_function(name);
      if (!f) throw EvalError("unknown function '" + name + "'", loc);
      if (args.size() != f->params.size())
        throw EvalError("function '" + name + "' expects " +
                            std::to_string(f->params.size()) + " argument(s)",
                        loc);
      size_t enter_seq = in.next_seq();
      if (call_log) call_log->push_back({name, enter_seq});
      return in.call_function(*f, args, enter_seq);
    }
  };

  struct Frame {
    std::map<std::string, Value> locals;
  };

  size_t next_seq() { return seq_++; }

  void emit(TraceEvent ev) {
    if (trace_.size() >= 1'000'000)
      throw EvalError("subject program exceeded trace limit");
    ev.seq = next_seq();
    ev.input_pos = cursor();
    trace_.push_back(std::move(ev));
  }
  void emit_with_seq(TraceEvent ev, size_t seq) {
    ev.seq = seq;
    ev.input_pos = cursor();
    trace_.push_back(std::move(ev));
  }

  size_t cursor() const {
    if (p_.cursor_var.empty()) return 0;
    auto it = globals_.find(p_.cursor_var);
    if (it == globals_.end() || !it->second.is_int()) return 0;
    auto v = it->second.as_int();
    return v < 0 ? 0 : static_cast<size_t>(v);
  }

  Value call_function(const SubjectFunction& f, const std::vector<Value>& args,
                      std::optional<size_t> enter_seq_opt = {}) {
    if (++depth_ > 500) throw EvalError("subject recursion too deep");
    TraceEvent enter;
    enter.kind = EventKind::CallEnter;
    enter.name = f.name;
    enter.args = args;
    if (enter_seq_opt)
      emit_with_seq(std::move(enter), *enter_seq_opt);
    else
      emit(std::move(enter));

    Frame frame;
    for (size_t i = 0; i < f.params.size(); ++i) frame.locals[f.params[i]] = args[i];
    Value ret;
    try {
      for (const auto& st : f.body) exec(*st, &frame);
    } catch (const ReturnSignal& r) {
      ret = r.value;
    }
    TraceEvent exitev;
    exitev.kind = EventKind::CallExit;
    exitev.name = f.name;
    exitev.ret = ret;
    emit(std::move(exitev));
    --depth_;
    return ret;
  }

  void assign_var(Frame* frame, const std::string& name, Value v) {
    if (globals_.count(name)) {
      globals_[name] = std::move(v);
      return;
    }
    if (frame)
      frame->locals[name] = std::move(v);
    else
      globals_[name] = std::move(v);
  }

  Value eval_plain(const ExprPtr& e, Frame* frame) {
    Ctx ctx(*this, frame);
    return eval_expr(e, ctx);
  }

  // Evaluates `e` while building the normalized copy recorded with SemStmt
  // events: reads of `s` (and of the cursor) become literals of the value
  // actually read, and subject-function calls are logged so the transfer
  // step can substitute out-attribute aliases.
  Value eval_norm(const ExprPtr& e, Frame* frame, ExprPtr& norm,
                  std::vector<CallRef>& calls) {
    Ctx ctx(*this, frame);
    ctx.call_log = &calls;
    return eval_rewrite(e, ctx, norm);
  }

  Value eval_rewrite(const ExprPtr& e, Ctx& ctx, ExprPtr& norm) {
    bool concretize =
        ((e->kind == ExprKind::Index || e->kind == ExprKind::Slice) &&
         e->children[0]->kind == ExprKind::Var && e->children[0]->name == "s") ||
        (e->kind == ExprKind::Var &&
         (e->name == "s" || (!p_.cursor_var.empty() && e->name == p_.cursor_var)));
    if (concretize) {
      Value v = eval_expr(e, ctx);
      norm = Expr::lit(v, e->loc);
      return v;
    }
    if (e->kind == ExprKind::Binary && (e->name == "and" || e->name == "or")) {
      // keep short-circuit behavior; normalize both sides only when reached
      ExprPtr ln, rn;
      Value l = eval_rewrite(e->children[0], ctx, ln);
      bool take_right = (e->name == "and") ? value_truthy(l) : !value_truthy(l);
      if (!take_right) {
        rn = expr_clone(e->children[1]);
        norm = Expr::make(ExprKind::Binary, e->loc);
        norm->name = e->name;
        norm->children = {ln, rn};
        return l;
      }
      Value r = eval_rewrite(e->children[1], ctx, rn);
      norm = Expr::make(ExprKind::Binary, e->loc);
      norm->name = e->name;
      norm->children = {ln, rn};
      return r;
    }
    // evaluate children left to right, rewriting each
    auto out = std::make_shared<Expr>(*e);
    std::vector<Value> vals;
    for (size_t i = 0; i < e->children.size(); ++i) {
      ExprPtr cn;
      vals.push_back(eval_rewrite(e->children[i], ctx, cn));
      out->children[i] = cn;
    }
    norm = out;
    switch (e->kind) {
      case ExprKind::Literal:
        return e->literal;
      case ExprKind::Var:
        return ctx.get_var(e->name, e->loc);
      case ExprKind::ListLit:
        return Value(ValueList(vals.begin(), vals.end()));
      case ExprKind::MapLit: {
        ValueMap m;
        for (size_t i = 0; i < vals.size(); ++i) m[e->map_keys[i]] = vals[i];
        return Value(std::move(m));
      }
      case ExprKind::Call: {
        if (is_builtin(e->name)) return call_builtin(e->name, vals, e->loc);
        return ctx.call(e->name, vals, e->loc);
      }
      default: {
        // for the remaining kinds re-evaluation is side-effect free: rebuild
        // from the evaluated children via a literal-bound context
        struct LitCtx : EvalContext {
          Ctx& base;
          explicit LitCtx(Ctx& b) : base(b) {}
          Value get_var(const std::string& n, SourceLoc l) override {
            return base.get_var(n, l);
          }
          Value call(const std::string&, const std::vector<Value>&, SourceLoc l) override {
            throw EvalError("unexpected call during rewrite", l);
          }
        };
        // children already normalized to literals/rewritten forms; evaluate
        // a shallow copy whose children are literal values
        auto shallow = std::make_shared<Expr>(*e);
        for (size_t i = 0; i < vals.size(); ++i)
          shallow->children[i] = Expr::lit(vals[i], e->loc);
        LitCtx lc(ctx);
        return eval_expr(shallow, lc);
      }
    }
  }

  void exec(const Stmt& st, Frame* frame) {
    if (++steps_ > 20'000'000) throw EvalError("subject program exceeded step limit");
    StmtClass cls = classes_.at(st.site_id);
    switch (st.kind) {
      case StmtKind::Pass:
        return;
      case StmtKind::Assign:
      case StmtKind::AugAssign: {
        bool is_cursor = !p_.cursor_var.empty() && st.target == p_.cursor_var;
        if (is_cursor) {
          size_t old = cursor();
          Value rhs = eval_plain(st.expr, frame);
          Value nv = rhs;
          if (st.kind == StmtKind::AugAssign) {
            Value cur = globals_[p_.cursor_var];
            nv = detail::arith(st.op, cur, rhs, st.loc);
          }
          globals_[p_.cursor_var] = nv;
          size_t now = cursor();
          if (now < old)
            throw EvalError("cursor moved backwards at " + st.site_id, st.loc);
          if (now > old) {
            if (now > input_.size())
              throw EvalError("cursor advanced past end of input", st.loc);
            TraceEvent ev;
            ev.kind = EventKind::Consume;
            ev.begin0 = old;
            ev.end0 = now;
            ev.text = input_.substr(old, now - old);
            emit(std::move(ev));
          }
          return;
        }
        // semantic assignment
        ExprPtr norm;
        std::vector<CallRef> calls;
        Value rhs = eval_norm(st.expr, frame, norm, calls);
        ExprPtr full = norm;
        if (st.kind == StmtKind::AugAssign) {
          auto bin = Expr::make(ExprKind::Binary, st.loc);
          bin->name = st.op;
          bin->children = {Expr::var(st.target, st.loc), norm};
          full = bin;
          Ctx ctx(*this, frame);
          rhs = detail::arith(st.op, ctx.get_var(st.target, st.loc), rhs, st.loc);
        }
        assign_var(frame, st.target, rhs);
        TraceEvent ev;
        ev.kind = EventKind::SemStmt;
        ev.name = st.site_id;
        ev.stmt = SemStmt{SemStmtKind::Assign, st.target, full, st.loc};
        ev.calls = std::move(calls);
        emit(std::move(ev));
        return;
      }
      case StmtKind::ExprStmt: {
        ExprPtr norm;
        std::vector<CallRef> calls;
        eval_norm(st.expr, frame, norm, calls);
        TraceEvent ev;
        ev.kind = EventKind::SemStmt;
        ev.name = st.site_id;
        ev.stmt = SemStmt{SemStmtKind::ExprStmt, "", norm, st.loc};
        ev.calls = std::move(calls);
        emit(std::move(ev));
        return;
      }
      case StmtKind::Return: {
        Value v;
        ExprPtr norm;
        std::vector<CallRef> calls;
        if (st.expr) v = eval_norm(st.expr, frame, norm, calls);
        if (norm) {
          TraceEvent ev;
          ev.kind = EventKind::SemStmt;
          ev.name = st.site_id;
          ev.stmt = SemStmt{SemStmtKind::Assign, kReturnTarget, norm, st.loc};
          ev.calls = std::move(calls);
          emit(std::move(ev));
        }
        throw ReturnSignal{v};
      }
      case StmtKind::Raise: {
        Value v = eval_plain(st.expr, frame);
        std::string msg = v.is_string() ? v.as_string() : canonical_serialize(v);
        throw RaiseSignal{msg};
      }
      case StmtKind::If: {
        int taken = -1;
        for (size_t b = 0; b < st.branches.size(); ++b) {
          const Branch& br = st.branches[b];
          if (!br.test || value_truthy(eval_plain(br.test, frame))) {
            taken = static_cast<int>(b);
            break;
          }
        }
        if (taken < 0) return;
        if (cls == StmtClass::Syn) {
          TraceEvent ev;
          ev.kind = EventKind::BranchEnter;
          ev.name = st.site_id;
          ev.branch_index = taken;
          emit(std::move(ev));
          auto leave = [&]() {
            TraceEvent ex;
            ex.kind = EventKind::BranchExit;
            ex.name = st.site_id;
            ex.branch_index = taken;
            emit(std::move(ex));
          };
          try {
            for (const auto& s : st.branches[static_cast<size_t>(taken)].body) exec(*s, frame);
          } catch (const ReturnSignal&) {
            leave();  // a return ends the branch where the function ends
            throw;
          }
          leave();
        } else {
          for (const auto& s : st.branches[static_cast<size_t>(taken)].body) exec(*s, frame);
        }
        return;
      }
      case StmtKind::While: {
        if (cls == StmtClass::Syn) {
          TraceEvent ev;
          ev.kind = EventKind::LoopEnter;
          ev.name = st.site_id;
          emit(std::move(ev));
          auto leave = [&]() {
            TraceEvent ex;
            ex.kind = EventKind::LoopExit;
            ex.name = st.site_id;
            emit(std::move(ex));
          };
          try {
            while (value_truthy(eval_plain(st.expr, frame))) {
              TraceEvent it;
              it.kind = EventKind::LoopIter;
              it.name = st.site_id;
              emit(std::move(it));
              for (const auto& s : st.body) exec(*s, frame);
            }
          } catch (const ReturnSignal&) {
            leave();  // a return ends the loop where the function ends
            throw;
          }
          leave();
        } else {
          while (value_truthy(eval_plain(st.expr, frame)))
            for (const auto& s : st.body) exec(*s, frame);
        }
        return;
      }
    }
  }

  const ProgramAST& p_;
  const std::string& input_;
  std::map<std::string, StmtClass> classes_;
  std::map<std::string, Value> globals_;
  std::vector<TraceEvent> trace_;
  size_t seq_ = 0;
  size_t steps_ = 0;
  int depth_ = 0;
};

}  // namespace sdetail

inline Outcome execute(const ProgramAST& p, const std::string& input) {
  sdetail::Interpreter in(p, input);
  return in.run();
}

}  // namespace agmine
