#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "agmine/expr.hpp"
#include "agmine/value.hpp"

namespace agmine {

struct EvalError : std::runtime_error {
  SourceLoc loc;
  EvalError(const std::string& msg, SourceLoc l = {}) : std::runtime_error(msg), loc(l) {}
};

/// Evaluation context. The subject interpreter and the AG runtime provide
/// their own variable resolution and (for the subject) function dispatch.
struct EvalContext {
  virtual ~EvalContext() = default;
  virtual Value get_var(const std::string& name, SourceLoc loc) = 0;
  // Non-builtin call. The AG runtime rejects these; the subject interpreter
  // dispatches to program functions.
  virtual Value call(const std::string& name, const std::vector<Value>& args,
                     SourceLoc loc) = 0;
};

namespace detail {

inline bool truthy(const Value& v) {
  if (v.is_bool()) return v.as_bool();
  if (v.is_int()) return v.as_int() != 0;
  if (v.is_float()) return v.as_float() != 0.0;
  if (v.is_string()) return !v.as_string().empty();
  if (v.is_list()) return !v.as_list().empty();
  if (v.is_map()) return !v.as_map().empty();
  return false;
}

inline Value arith(const std::string& op, const Value& a, const Value& b, SourceLoc loc) {
  if (op == "+" && a.is_string() && b.is_string()) return Value(a.as_string() + b.as_string());
  if (op == "+" && a.is_list() && b.is_list()) {
    ValueList l = a.as_list();
    for (const auto& e : b.as_list()) l.push_back(e);
    return Value(std::move(l));
  }
  if (!a.is_number() || !b.is_number())
    throw EvalError(std::string("unsupported operand types for '") + op + "': " +
                        a.type_name() + " and " + b.type_name(),
                    loc);
  if (a.is_int() && b.is_int()) {
    std::int64_t x = a.as_int(), y = b.as_int();
    if (op == "+") return Value(x + y);
    if (op == "-") return Value(x - y);
    if (op == "*") return Value(x * y);
    if (y == 0) throw EvalError("division by zero", loc);
    return Value(x / y);
  }
  double x = a.numeric(), y = b.numeric();
  if (op == "+") return Value(x + y);
  if (op == "-") return Value(x - y);
  if (op == "*") return Value(x * y);
  if (y == 0.0) throw EvalError("division by zero", loc);
  return Value(x / y);
}

inline int compare(const Value& a, const Value& b, SourceLoc loc) {
  if (a.is_number() && b.is_number()) {
    double x = a.numeric(), y = b.numeric();
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (a.is_string() && b.is_string())
    return a.as_string().compare(b.as_string()) < 0
               ? -1
               : (a.as_string() == b.as_string() ? 0 : 1);
  throw EvalError(std::string("cannot order ") + a.type_name() + " and " + b.type_name(),
                  loc);
}

inline Value membership(const Value& item, const Value& container, SourceLoc loc) {
  if (container.is_string()) {
    if (!item.is_string()) return Value(false);
    // empty string is not considered a member; keeps `s[i] in '...'`
    // well-behaved when the cursor has run off the end of the input
    if (item.as_string().empty()) return Value(false);
    return Value(container.as_string().find(item.as_string()) != std::string::npos);
  }
  if (container.is_list()) {
    for (const auto& e : container.as_list())
      if (e == item) return Value(true);
    return Value(false);
  }
  if (container.is_map())
    return Value(item.is_string() && container.as_map().count(item.as_string()) > 0);
  throw EvalError(std::string("'in' needs a string, list or map, got ") +
                      container.type_name(),
                  loc);
}

inline std::int64_t as_index(const Value& v, SourceLoc loc) {
  if (!v.is_int()) throw EvalError(std::string("index must be int, got ") + v.type_name(), loc);
  return v.as_int();
}

}  // namespace detail

inline Value call_builtin(const std::string& name, const std::vector<Value>& args,
                          SourceLoc loc) {
  auto want = [&](size_t n) {
    if (args.size() != n)
      throw EvalError(name + "() expects " + std::to_string(n) + " argument(s)", loc);
  };
  if (name == "int") {
    want(1);
    const Value& v = args[0];
    if (v.is_int()) return v;
    if (v.is_float()) return Value(static_cast<std::int64_t>(v.as_float()));
    if (v.is_bool()) return Value(static_cast<std::int64_t>(v.as_bool() ? 1 : 0));
    if (v.is_string()) {
      try {
        size_t used = 0;
        std::int64_t r = std::stoll(v.as_string(), &used);
        if (used != v.as_string().size()) throw std::invalid_argument("");
        return Value(r);
      } catch (...) {
        throw EvalError("int() cannot parse '" + v.as_string() + "'", loc);
      }
    }
    throw EvalError(std::string("int() on ") + v.type_name(), loc);
  }
  if (name == "float") {
    want(1);
    const Value& v = args[0];
    if (v.is_float()) return v;
    if (v.is_int()) return Value(static_cast<double>(v.as_int()));
    if (v.is_string()) {
      try {
        size_t used = 0;
        double r = std::stod(v.as_string(), &used);
        if (used != v.as_string().size()) throw std::invalid_argument("");
        return Value(r);
      } catch (...) {
        throw EvalError("float() cannot parse '" + v.as_string() + "'", loc);
      }
    }
    throw EvalError(std::string("float() on ") + v.type_name(), loc);
  }
  if (name == "str") {
    want(1);
    const Value& v = args[0];
    if (v.is_string()) return v;
    if (v.is_int()) return Value(std::to_string(v.as_int()));
    if (v.is_float()) return Value(detail::shortest_double(v.as_float()));
    if (v.is_bool()) return Value(std::string(v.as_bool() ? "True" : "False"));
    return Value(canonical_serialize(v));
  }
  if (name == "len") {
    want(1);
    const Value& v = args[0];
    if (v.is_string()) return Value(static_cast<std::int64_t>(v.as_string().size()));
    if (v.is_list()) return Value(static_cast<std::int64_t>(v.as_list().size()));
    if (v.is_map()) return Value(static_cast<std::int64_t>(v.as_map().size()));
    throw EvalError(std::string("len() on ") + v.type_name(), loc);
  }
  if (name == "ord") {
    want(1);
    if (!args[0].is_string() || args[0].as_string().size() != 1)
      throw EvalError("ord() expects a single-character string", loc);
    return Value(static_cast<std::int64_t>(
        static_cast<unsigned char>(args[0].as_string()[0])));
  }
  if (name == "chr") {
    want(1);
    std::int64_t c = detail::as_index(args[0], loc);
    if (c < 0 || c > 255) throw EvalError("chr() out of range", loc);
    return Value(std::string(1, static_cast<char>(c)));
  }
  if (name == "append") {
    want(2);
    if (!args[0].is_list()) throw EvalError("append() expects a list", loc);
    ValueList l = args[0].as_list();
    l.push_back(args[1]);
    return Value(std::move(l));
  }
  if (name == "ParserException") {
    want(1);
    return args[0];
  }
  throw EvalError("unknown function '" + name + "'", loc);
}

inline Value eval_expr(const ExprPtr& e, EvalContext& ctx) {
  switch (e->kind) {
    case ExprKind::Literal:
      return e->literal;
    case ExprKind::Var:
      return ctx.get_var(e->name, e->loc);
    case ExprKind::ListLit: {
      ValueList l;
      for (const auto& c : e->children) l.push_back(eval_expr(c, ctx));
      return Value(std::move(l));
    }
    case ExprKind::MapLit: {
      ValueMap m;
      for (size_t i = 0; i < e->children.size(); ++i)
        m[e->map_keys[i]] = eval_expr(e->children[i], ctx);
      return Value(std::move(m));
    }
    case ExprKind::Index: {
      Value base = eval_expr(e->children[0], ctx);
      Value key = eval_expr(e->children[1], ctx);
      if (base.is_map()) {
        if (!key.is_string()) throw EvalError("map key must be a string", e->loc);
        auto it = base.as_map().find(key.as_string());
        if (it == base.as_map().end())
          throw EvalError("key '" + key.as_string() + "' not found", e->loc);
        return it->second;
      }
      std::int64_t idx = detail::as_index(key, e->loc);
      if (base.is_string()) {
        const std::string& s = base.as_string();
        // out-of-range string index reads as empty; parsers probe one past
        // the end of the input
        if (idx < 0 || idx >= static_cast<std::int64_t>(s.size())) return Value(std::string());
        return Value(std::string(1, s[static_cast<size_t>(idx)]));
      }
      if (base.is_list()) {
        const auto& l = base.as_list();
        if (idx < 0 || idx >= static_cast<std::int64_t>(l.size()))
          throw EvalError("list index out of range", e->loc);
        return l[static_cast<size_t>(idx)];
      }
      throw EvalError(std::string("cannot index ") + base.type_name(), e->loc);
    }
    case ExprKind::Slice: {
      Value base = eval_expr(e->children[0], ctx);
      std::int64_t lo = detail::as_index(eval_expr(e->children[1], ctx), e->loc);
      std::int64_t hi = detail::as_index(eval_expr(e->children[2], ctx), e->loc);
      if (!base.is_string()) throw EvalError("slicing is only defined on strings", e->loc);
      const std::string& s = base.as_string();
      std::int64_t n = static_cast<std::int64_t>(s.size());
      lo = std::max<std::int64_t>(0, std::min(lo, n));
      hi = std::max<std::int64_t>(lo, std::min(hi, n));
      return Value(s.substr(static_cast<size_t>(lo), static_cast<size_t>(hi - lo)));
    }
    case ExprKind::Binary: {
      const std::string& op = e->name;
      if (op == "and") {
        Value l = eval_expr(e->children[0], ctx);
        if (!detail::truthy(l)) return l;
        return eval_expr(e->children[1], ctx);
      }
      if (op == "or") {
        Value l = eval_expr(e->children[0], ctx);
        if (detail::truthy(l)) return l;
        return eval_expr(e->children[1], ctx);
      }
      Value l = eval_expr(e->children[0], ctx);
      Value r = eval_expr(e->children[1], ctx);
      if (op == "in") return detail::membership(l, r, e->loc);
      if (op == "==") return Value(l == r);
      if (op == "!=") return Value(!(l == r));
      if (op == "<") return Value(detail::compare(l, r, e->loc) < 0);
      if (op == "<=") return Value(detail::compare(l, r, e->loc) <= 0);
      if (op == ">") return Value(detail::compare(l, r, e->loc) > 0);
      if (op == ">=") return Value(detail::compare(l, r, e->loc) >= 0);
      return detail::arith(op, l, r, e->loc);
    }
    case ExprKind::Unary: {
      Value v = eval_expr(e->children[0], ctx);
      if (e->name == "not") return Value(!detail::truthy(v));
      if (v.is_int()) return Value(-v.as_int());
      if (v.is_float()) return Value(-v.as_float());
      throw EvalError(std::string("cannot negate ") + v.type_name(), e->loc);
    }
    case ExprKind::Call: {
      std::vector<Value> args;
      for (const auto& c : e->children) args.push_back(eval_expr(c, ctx));
      if (is_builtin(e->name)) return call_builtin(e->name, args, e->loc);
      return ctx.call(e->name, args, e->loc);
    }
  }
  throw EvalError("unreachable expression kind", e->loc);
}

inline bool value_truthy(const Value& v) { return detail::truthy(v); }

}  // namespace agmine
