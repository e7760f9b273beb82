#pragma once

#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "agmine/derive.hpp"
#include "agmine/subject.hpp"

namespace agmine {

// ---------------------------------------------------------------------------
// Parse trees recovered from execution traces. Nodes mirror the control
// events of the subject program: function calls, input-reading conditionals,
// input-reading loops and the consumed characters themselves. Semantic
// statements are not nodes; they live in the slots between children.
// ---------------------------------------------------------------------------

enum class PKind { InputChar, Function, Loop, Condition };

struct AttachedStmt {
  SemStmt stmt;
  std::vector<CallRef> calls;  // subject calls made by the statement
  std::string site;
  size_t seq = 0;
};

struct IterMark {
  size_t child_index;   // first child belonging to the iteration
  size_t stmt_offset;   // offset into slot[child_index] where it starts
};

struct ParseNode;
using PNodePtr = std::shared_ptr<ParseNode>;

struct ParseNode {
  PKind kind;
  std::string label;       // consumed char / function name / statement site
  int branch_index = -1;   // Condition: taken branch
  size_t begin0 = 0;       // consumed range, 0-based half-open [begin0, end0)
  size_t end0 = 0;
  size_t enter_seq = 0;    // Function: sequence number of the CallEnter event
  std::vector<PNodePtr> children;
  // slots.size() == children.size() + 1: statements before/between/after
  std::vector<std::vector<AttachedStmt>> slots;
  std::vector<IterMark> iter_marks;  // Loop: one per iteration

  YieldRange yield() const {
    return YieldRange{static_cast<int>(begin0) + 1, static_cast<int>(end0)};
  }
  bool has_statements() const {
    for (const auto& s : slots)
      if (!s.empty()) return true;
    return false;
  }
};

struct TraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace pdetail {

struct Frame {
  PNodePtr node;
};

inline void add_child(ParseNode& parent, PNodePtr child) {
  parent.children.push_back(std::move(child));
  parent.slots.emplace_back();
}

}  // namespace pdetail

/// Folds a successful execution trace into a parse tree. The trace must be
/// well nested; the result is the tree of the entry function call.
inline PNodePtr build_parse_tree(const std::vector<TraceEvent>& trace) {
  using pdetail::Frame;
  auto make = [](PKind k, const std::string& label, size_t pos) {
    auto n = std::make_shared<ParseNode>();
    n->kind = k;
    n->label = label;
    n->begin0 = n->end0 = pos;
    n->slots.emplace_back();
    return n;
  };

  std::vector<Frame> stack;
  stack.push_back({make(PKind::Function, "@root", 0)});

  auto top = [&]() -> ParseNode& { return *stack.back().node; };
  auto pop_into_parent = [&](EventKind kind, const TraceEvent& ev) {
    PNodePtr done = stack.back().node;
    stack.pop_back();
    if (stack.empty()) throw TraceError("unbalanced trace: extra exit event");
    done->end0 = ev.input_pos;
    ParseNode& parent = top();
    parent.end0 = ev.input_pos;

    if (kind == EventKind::BranchExit && done->children.empty() &&
        done->begin0 == done->end0) {
      // a conditional that consumed nothing is not a structure node; keep
      // its statements in the surrounding slot
      for (auto& st : done->slots[0]) parent.slots.back().push_back(std::move(st));
      return;
    }
    pdetail::add_child(parent, std::move(done));
  };

  for (const auto& ev : trace) {
    switch (ev.kind) {
      case EventKind::CallEnter: {
        auto n = make(PKind::Function, ev.name, ev.input_pos);
        n->enter_seq = ev.seq;
        stack.push_back({n});
        break;
      }
      case EventKind::BranchEnter: {
        auto n = make(PKind::Condition, ev.name, ev.input_pos);
        n->branch_index = ev.branch_index;
        stack.push_back({n});
        break;
      }
      case EventKind::LoopEnter:
        stack.push_back({make(PKind::Loop, ev.name, ev.input_pos)});
        break;
      case EventKind::CallExit:
        pop_into_parent(EventKind::CallExit, ev);
        break;
      case EventKind::BranchExit:
        pop_into_parent(EventKind::BranchExit, ev);
        break;
      case EventKind::LoopExit:
        pop_into_parent(EventKind::LoopExit, ev);
        break;
      case EventKind::LoopIter: {
        ParseNode& loop = top();
        if (loop.kind != PKind::Loop)
          throw TraceError("loop iteration outside of a loop");
        loop.iter_marks.push_back(
            {loop.children.size(), loop.slots.back().size()});
        break;
      }
      case EventKind::Consume: {
        ParseNode& parent = top();
        for (size_t i = ev.begin0; i < ev.end0; ++i) {
          auto c = make(PKind::InputChar, ev.text.substr(i - ev.begin0, 1), i);
          c->end0 = i + 1;
          pdetail::add_child(parent, std::move(c));
        }
        parent.end0 = ev.end0;
        break;
      }
      case EventKind::SemStmt: {
        ParseNode& parent = top();
        parent.slots.back().push_back(AttachedStmt{ev.stmt, ev.calls, ev.name, ev.seq});
        break;
      }
    }
  }

  if (stack.size() != 1) throw TraceError("unbalanced trace: missing exit event");
  ParseNode& root = top();
  if (root.children.size() != 1 || root.has_statements())
    throw TraceError("trace does not reduce to a single entry call");
  return root.children[0];
}

// ---------------------------------------------------------------------------
// Rendering: children and slot statements interleaved in trace order.
// ---------------------------------------------------------------------------

inline void render_parse_tree(std::ostringstream& os, const ParseNode& n, int indent = 0) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  os << pad;
  switch (n.kind) {
    case PKind::InputChar:
      os << "'" << n.label << "'";
      break;
    case PKind::Function:
      os << n.label;
      break;
    case PKind::Loop:
      os << "while " << n.label;
      break;
    case PKind::Condition:
      os << "if " << n.label << "#" << n.branch_index;
      break;
  }
  os << n.yield().to_string() << '\n';
  std::string inner(static_cast<size_t>(indent + 1) * 2, ' ');
  size_t iter = 0;
  for (size_t slot = 0; slot < n.slots.size(); ++slot) {
    for (size_t off = 0; off <= n.slots[slot].size(); ++off) {
      while (iter < n.iter_marks.size() && n.iter_marks[iter].child_index == slot &&
             n.iter_marks[iter].stmt_offset == off) {
        os << inner << "#iter\n";
        ++iter;
      }
      if (off < n.slots[slot].size())
        os << inner << "sem: " << stmt_to_string(n.slots[slot][off].stmt) << '\n';
    }
    if (slot < n.children.size()) render_parse_tree(os, *n.children[slot], indent + 1);
  }
}

inline std::string render_parse_tree(const ParseNode& n) {
  std::ostringstream os;
  render_parse_tree(os, n, 0);
  return os.str();
}

}  // namespace agmine
