#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace agmine {

/// Runtime value shared by the subject-language interpreter and the
/// attributed-grammar runtime.
class Value;
using ValueList = std::vector<Value>;
using ValueMap = std::map<std::string, Value>;

class Value {
public:
  struct Null {
    bool operator==(const Null&) const { return true; }
  };

  using Storage =
      std::variant<Null, bool, std::int64_t, double, std::string, ValueList, ValueMap>;

  Value() : v_(Null{}) {}
  Value(bool b) : v_(b) {}
  Value(std::int64_t i) : v_(i) {}
  Value(int i) : v_(static_cast<std::int64_t>(i)) {}
  Value(double d) : v_(d) {}
  Value(std::string s) : v_(std::move(s)) {}
  Value(const char* s) : v_(std::string(s)) {}
  Value(ValueList l) : v_(std::move(l)) {}
  Value(ValueMap m) : v_(std::move(m)) {}

  bool is_null() const { return std::holds_alternative<Null>(v_); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_float() const { return std::holds_alternative<double>(v_); }
  bool is_number() const { return is_int() || is_float(); }
  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_list() const { return std::holds_alternative<ValueList>(v_); }
  bool is_map() const { return std::holds_alternative<ValueMap>(v_); }

  bool as_bool() const { return std::get<bool>(v_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
  double as_float() const { return std::get<double>(v_); }
  const std::string& as_string() const { return std::get<std::string>(v_); }
  const ValueList& as_list() const { return std::get<ValueList>(v_); }
  ValueList& as_list() { return std::get<ValueList>(v_); }
  const ValueMap& as_map() const { return std::get<ValueMap>(v_); }
  ValueMap& as_map() { return std::get<ValueMap>(v_); }

  double numeric() const { return is_int() ? static_cast<double>(as_int()) : as_float(); }

  bool operator==(const Value& o) const { return v_ == o.v_; }
  bool operator!=(const Value& o) const { return !(*this == o); }

  const char* type_name() const {
    switch (v_.index()) {
      case 0: return "null";
      case 1: return "bool";
      case 2: return "int";
      case 3: return "float";
      case 4: return "string";
      case 5: return "list";
      default: return "map";
    }
  }

private:
  Storage v_;
};

namespace detail {

// Shortest decimal rendering that round-trips through strtod.
inline std::string shortest_double(double d) {
  for (int prec = 1; prec <= 17; ++prec) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", prec, d);
    if (std::strtod(buf, nullptr) == d) {
      std::string s(buf);
      // keep the float/int distinction visible
      if (s.find_first_of(".eEnN") == std::string::npos) s += ".0";
      return s;
    }
  }
  return "0.0";
}

inline void escape_string(std::ostream& os, const std::string& s) {
  os << '"';
  for (char c : s) {
    switch (c) {
      case '"': os << "\\\""; break;
      case '\\': os << "\\\\"; break;
      case '\n': os << "\\n"; break;
      case '\t': os << "\\t"; break;
      case '\r': os << "\\r"; break;
      default: os << c;
    }
  }
  os << '"';
}

}  // namespace detail

/// Canonical text form used when comparing program output against the
/// attributed-grammar output: JSON-like, map keys sorted, shortest
/// round-trip floats, integers kept distinct from floats.
inline void canonical_serialize(std::ostream& os, const Value& v) {
  if (v.is_null()) {
    os << "null";
  } else if (v.is_bool()) {
    os << (v.as_bool() ? "true" : "false");
  } else if (v.is_int()) {
    os << v.as_int();
  } else if (v.is_float()) {
    os << detail::shortest_double(v.as_float());
  } else if (v.is_string()) {
    detail::escape_string(os, v.as_string());
  } else if (v.is_list()) {
    os << '[';
    bool first = true;
    for (const auto& e : v.as_list()) {
      if (!first) os << ',';
      first = false;
      canonical_serialize(os, e);
    }
    os << ']';
  } else {
    os << '{';
    bool first = true;
    for (const auto& [k, e] : v.as_map()) {
      if (!first) os << ',';
      first = false;
      detail::escape_string(os, k);
      os << ':';
      canonical_serialize(os, e);
    }
    os << '}';
  }
}

inline std::string canonical_serialize(const Value& v) {
  std::ostringstream os;
  canonical_serialize(os, v);
  return os.str();
}

}  // namespace agmine
