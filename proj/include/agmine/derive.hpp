#pragma once

#include <functional>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "agmine/grammar.hpp"

namespace agmine {

// 1-based inclusive character range; empty ranges are (start, start-1).
struct YieldRange {
  int start = 1;
  int end = 0;

  bool empty() const { return end < start; }
  int length() const { return empty() ? 0 : end - start + 1; }
  bool operator==(const YieldRange& o) const { return start == o.start && end == o.end; }
  bool operator!=(const YieldRange& o) const { return !(*this == o); }

  std::string to_string() const {
    return "[" + std::to_string(start) + "-" + std::to_string(end) + "]";
  }
};

enum class DKind { Terminal, Nonterminal, Repetition, Option, Choice };

struct DerivationNode;
using DNodePtr = std::shared_ptr<DerivationNode>;

struct DerivationNode {
  DKind kind;
  std::string label;       // terminal text or rule name or structure tag
  PositionId pos;          // grammar position that produced this node
  int alt_index = -1;      // Choice: taken alternative
  size_t begin0 = 0;       // consumed range, 0-based half-open [begin0, end0)
  size_t end0 = 0;
  std::vector<DNodePtr> children;

  YieldRange yield() const {
    return YieldRange{static_cast<int>(begin0) + 1, static_cast<int>(end0)};
  }
};

inline YieldRange yield_of(const DerivationNode& n) { return n.yield(); }

struct ParseFailure : std::runtime_error {
  size_t position;                  // 1-based position of the furthest failure
  std::set<std::string> expected;   // terminals expected there
  ParseFailure(size_t pos, std::set<std::string> exp)
      : std::runtime_error(message(pos, exp)), position(pos), expected(std::move(exp)) {}

  static std::string message(size_t pos, const std::set<std::string>& exp) {
    std::string m = "parse failure at position " + std::to_string(pos);
    if (!exp.empty()) {
      m += ", expected one of:";
      for (const auto& e : exp) m += " '" + e + "'";
    }
    return m;
  }
};

namespace ddetail {

struct Deriver {
  const Grammar& g;
  const std::string& input;
  size_t furthest = 0;
  std::set<std::string> expected;

  using Yield = std::function<bool(size_t end, std::vector<DNodePtr> nodes)>;

  // Enumerates matches of `e` at `pos` in ordered-choice order; the
  // continuation returns true to accept (which stops the search).
  bool try_expr(const GExprPtr& e, size_t pos, const Yield& k) {
    switch (e->kind) {
      case GKind::Terminal: {
        const std::string& t = e->text;
        if (pos + t.size() <= input.size() && input.compare(pos, t.size(), t) == 0) {
          auto n = std::make_shared<DerivationNode>();
          n->kind = DKind::Terminal;
          n->label = t;
          n->pos = e->pos;
          n->begin0 = pos;
          n->end0 = pos + t.size();
          return k(pos + t.size(), {n});
        }
        if (pos > furthest) {
          furthest = pos;
          expected.clear();
        }
        if (pos == furthest) expected.insert(t);
        return false;
      }
      case GKind::SemBlock:
        return k(pos, {});
      case GKind::NonterminalRef: {
        const Rule* r = g.find_rule(e->text);
        return try_expr(r->root, pos, [&](size_t end, std::vector<DNodePtr> kids) {
          auto n = std::make_shared<DerivationNode>();
          n->kind = DKind::Nonterminal;
          n->label = e->text;
          n->pos = e->pos;
          n->begin0 = pos;
          n->end0 = end;
          n->children = std::move(kids);
          return k(end, {n});
        });
      }
      case GKind::Sequence:
        return try_seq(e, 0, pos, {}, k);
      case GKind::Choice: {
        for (size_t i = 0; i < e->children.size(); ++i) {
          bool ok = try_expr(e->children[i], pos, [&](size_t end, std::vector<DNodePtr> kids) {
            auto n = std::make_shared<DerivationNode>();
            n->kind = DKind::Choice;
            n->label = "Choice";
            n->pos = e->pos;
            n->alt_index = static_cast<int>(i);
            n->begin0 = pos;
            n->end0 = end;
            n->children = std::move(kids);
            return k(end, {n});
          });
          if (ok) return true;
        }
        return false;
      }
      case GKind::Option: {
        // greedy: take the body first, fall back to skipping it
        bool ok = try_expr(e->children[0], pos, [&](size_t end, std::vector<DNodePtr> kids) {
          auto n = std::make_shared<DerivationNode>();
          n->kind = DKind::Option;
          n->label = "Option";
          n->pos = e->pos;
          n->begin0 = pos;
          n->end0 = end;
          n->children = std::move(kids);
          return k(end, {n});
        });
        if (ok) return true;
        return k(pos, {});
      }
      case GKind::Repetition:
        return try_rep(e, pos, pos, {}, k);
    }
    return false;
  }

  bool try_seq(const GExprPtr& seq, size_t idx, size_t pos, std::vector<DNodePtr> acc,
               const Yield& k) {
    if (idx == seq->children.size()) return k(pos, std::move(acc));
    return try_expr(seq->children[idx], pos, [&](size_t end, std::vector<DNodePtr> kids) {
      std::vector<DNodePtr> acc2 = acc;
      for (auto& n : kids) acc2.push_back(std::move(n));
      return try_seq(seq, idx + 1, end, std::move(acc2), k);
    });
  }

  bool try_rep(const GExprPtr& rep, size_t start, size_t pos, std::vector<DNodePtr> acc,
               const Yield& k) {
    // greedy: another iteration first; empty iterations are rejected so
    // repetition always terminates
    bool ok = try_expr(rep->children[0], pos, [&](size_t end, std::vector<DNodePtr> kids) {
      if (end == pos) return false;
      std::vector<DNodePtr> acc2 = acc;
      for (auto& n : kids) acc2.push_back(std::move(n));
      return try_rep(rep, start, end, std::move(acc2), k);
    });
    if (ok) return true;
    auto n = std::make_shared<DerivationNode>();
    n->kind = DKind::Repetition;
    n->label = "Rep";
    n->pos = rep->pos;
    n->begin0 = start;
    n->end0 = pos;
    n->children = std::move(acc);
    return k(pos, {n});
  }
};

}  // namespace ddetail

/// Parses `input` against `g`, returning the derivation tree. Recursive
/// descent with ordered-choice backtracking: alternatives are tried in
/// grammar order, options and repetitions are greedy, and the first
/// derivation spanning the whole input wins.
inline DNodePtr derive(const Grammar& g, const std::string& input) {
  ddetail::Deriver d{g, input, 0, {}};
  DNodePtr result;
  const Rule& start = g.rules.front();
  bool ok = d.try_expr(start.root, 0, [&](size_t end, std::vector<DNodePtr> kids) {
    if (end != input.size()) {
      if (end > d.furthest) {
        d.furthest = end;
        d.expected.clear();
        d.expected.insert("<end of input>");
      }
      return false;
    }
    auto n = std::make_shared<DerivationNode>();
    n->kind = DKind::Nonterminal;
    n->label = start.name;
    n->pos = PositionId{start.name, {}};
    n->begin0 = 0;
    n->end0 = end;
    n->children = std::move(kids);
    result = n;
    return true;
  });
  if (!ok) throw ParseFailure(d.furthest + 1, d.expected);
  return result;
}

/// Positions exercised by a derivation tree: every node's position plus all
/// of its ancestor positions inside the same rule (collapsed sequence and
/// group nodes produce no derivation node of their own).
inline void covered_positions(const DNodePtr& node, std::set<PositionId>& out) {
  PositionId p = node->pos;
  for (;;) {
    out.insert(p);
    if (p.path.empty()) break;
    p.path.pop_back();
  }
  for (const auto& c : node->children) covered_positions(c, out);
}

/// Indented debug rendering, one `label[start-end]` per line.
inline void render_tree(std::ostream& os, const DerivationNode& n, int indent = 0) {
  for (int i = 0; i < indent; ++i) os << "  ";
  if (n.kind == DKind::Terminal)
    os << '\'' << n.label << '\'';
  else
    os << n.label;
  os << n.yield().to_string() << '\n';
  for (const auto& c : n.children) render_tree(os, *c, indent + 1);
}

inline std::string render_tree(const DerivationNode& n) {
  std::ostringstream os;
  render_tree(os, n);
  return os.str();
}

}  // namespace agmine
