#pragma once

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "agmine/mapping.hpp"
#include "agmine/subject.hpp"

namespace agmine {

// ---------------------------------------------------------------------------
// Semantic transfer: lifts the statements attached to a mapped parse tree
// into grammar boundaries, producing a per-input annotation. Annotations from
// several inputs are merged into one, which is then written back into the
// grammar as an attributed grammar.
//
// A boundary is a point between items of a grammar sequence, or one of the
// two sides of a bare item (an item whose parent is a choice, option or
// repetition). Because skipped optional items leave no trace, a statement's
// placement is recorded as an interval of equivalent boundary indices; merge
// intersects the intervals contributed by different inputs.
// ---------------------------------------------------------------------------

struct BoundaryEntry {
  PositionId container;  // sequence position, or the bare item itself
  bool bare = false;
  int lo = 0, hi = 0;    // interval of admissible boundary indices
  int resolved = -1;     // final index, set by merge
  std::vector<SemStmt> stmts;
  std::vector<std::string> witnesses;
};

struct Annotation {
  std::map<std::string, std::vector<BoundaryEntry>> rules;
  std::map<std::string, std::string> out_attrs;           // rule -> attr name
  std::map<std::string, std::vector<std::string>> params;  // rule -> in-attrs
  std::map<PositionId, std::vector<ExprPtr>> ref_args;     // ref site -> args
  std::string witness;
};

struct MergeConflict {
  std::string rule;
  PositionId container;
  int position = 0;
  std::vector<SemStmt> variant_a, variant_b;
  std::vector<std::string> witnesses_a, witnesses_b;
  std::string describe() const {
    auto side = [](const std::vector<SemStmt>& v) {
      std::string s;
      for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += "; ";
        s += stmt_to_string(v[i]);
      }
      return s.empty() ? "(nothing)" : s;
    };
    auto names = [](const std::vector<std::string>& w) {
      std::string s;
      for (size_t i = 0; i < w.size(); ++i) {
        if (i) s += ", ";
        s += "'" + w[i] + "'";
      }
      return s;
    };
    return "rule " + rule + " at " + container.to_string() + "#" +
           std::to_string(position) + ": [" + side(variant_a) + "] (from " +
           names(witnesses_a) + ") vs [" + side(variant_b) + "] (from " +
           names(witnesses_b) + ")";
  }
};

struct MergeResult {
  Annotation merged;
  std::vector<MergeConflict> conflicts;
};

// ---------------------------------------------------------------------------
// Reference aliases are a property of the grammar alone: within each rule,
// references get the uppercased first letter of the callee, suffixed with
// 2, 3, ... on collision. The rule's own out-attribute name (its uppercased
// first letter) is reserved up front.
// ---------------------------------------------------------------------------

inline std::string out_attr_name(const std::string& rule) {
  return std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(rule[0]))));
}

inline std::map<PositionId, std::string> compute_ref_aliases(const Grammar& g) {
  std::map<PositionId, std::string> aliases;
  for (const auto& r : g.rules) {
    std::set<std::string> used{out_attr_name(r.name)};
    Grammar::walk(r.root, [&](const GExprPtr& e) {
      if (e->kind != GKind::NonterminalRef) return;
      std::string base = out_attr_name(e->text);
      std::string name = base;
      int k = 2;
      while (used.count(name)) name = base + std::to_string(k++);
      used.insert(name);
      aliases[e->pos] = name;
    });
  }
  return aliases;
}

// ---------------------------------------------------------------------------
// Per-input transfer.
// ---------------------------------------------------------------------------

namespace tdetail {

struct NatBoundary {
  PositionId container;
  bool bare = false;
  int index = 0;
  bool operator==(const NatBoundary& o) const {
    return container == o.container && bare == o.bare && index == o.index;
  }
};

struct LinItem {
  bool is_stmt = false;  // false: blocker (call/loop/condition child)
  NatBoundary at;
  SemStmt stmt;
  const DerivationNode* scope = nullptr;  // for interval sliding
};

struct Transfer {
  const Grammar& g;
  const ProgramAST& prog;
  const Mapping& m;
  const std::map<PositionId, std::string>& aliases;
  Annotation ann;
  std::map<size_t, const ParseNode*> fn_by_seq;

  Transfer(const Grammar& gr, const ProgramAST& pr, const Mapping& mm,
           const std::map<PositionId, std::string>& al)
      : g(gr), prog(pr), m(mm), aliases(al) {}

  void index_functions(const ParseNode* n) {
    if (n->kind == PKind::Function) fn_by_seq[n->enter_seq] = n;
    for (const auto& c : n->children) index_functions(c.get());
  }

  // does the current rule application (searched from `scope`, not crossing
  // nested rule applications) contain a derivation node at or under `item`?
  static bool item_present(const DerivationNode* scope, const PositionId& item) {
    std::function<bool(const DerivationNode*, bool)> go =
        [&](const DerivationNode* d, bool is_root) -> bool {
      if (d->pos.rule == item.rule && item.is_prefix_of(d->pos)) return true;
      if (!is_root && d->kind == DKind::Nonterminal) return false;
      for (const auto& c : d->children)
        if (go(c.get(), false)) return true;
      return false;
    };
    return go(scope, true);
  }

  NatBoundary boundary_of(const PositionId& item, bool after) const {
    NatBoundary b;
    if (!item.path.empty()) {
      PositionId parent{item.rule, std::vector<int>(item.path.begin(), item.path.end() - 1)};
      const GExpr* pe = g.expr_at(parent);
      if (pe && pe->kind == GKind::Sequence) {
        b.container = parent;
        b.index = static_cast<int>(item.path.back()) + (after ? 1 : 0);
        return b;
      }
    }
    b.container = item;
    b.bare = true;
    // statements cannot depend on a terminal, so the canonical side for a
    // bare terminal is after it ('0' sem ... endsem, not sem ... endsem '0')
    const GExpr* ie = g.expr_at(item);
    b.index = (after || (ie && ie->kind == GKind::Terminal)) ? 1 : 0;
    return b;
  }

  ExprPtr substitute(const ExprPtr& e, std::deque<CallRef>& calls) {
    auto out = std::make_shared<Expr>(*e);
    for (size_t i = 0; i < e->children.size(); ++i)
      out->children[i] = substitute(e->children[i], calls);
    if (e->kind == ExprKind::Call && !is_builtin(e->name) && prog.find_function(e->name)) {
      if (calls.empty() || calls.front().callee != e->name)
        throw MappingError("call record mismatch for '" + e->name + "'");
      CallRef ref = calls.front();
      calls.pop_front();
      auto it = fn_by_seq.find(ref.enter_seq);
      if (it == fn_by_seq.end() || !m.mapped_p(it->second))
        throw MappingError("result of call to '" + e->name +
                           "' cannot be expressed: the call has no grammar counterpart");
      const DerivationNode* d = m.p2d.at(it->second);
      const std::string& alias = aliases.at(d->pos);
      // register in-attribute arguments at the reference site
      auto [ait, inserted] = ann.ref_args.try_emplace(d->pos, out->children);
      if (!inserted) {
        bool same = ait->second.size() == out->children.size();
        for (size_t i = 0; same && i < out->children.size(); ++i)
          same = expr_equal(ait->second[i], out->children[i]);
        if (!same)
          throw MappingError("reference " + d->pos.to_string() +
                             " is called with differing arguments");
      }
      return Expr::var(alias, e->loc);
    }
    return out;
  }

  SemStmt substitute_stmt(const AttachedStmt& a, const std::string& rule) {
    std::deque<CallRef> q(a.calls.begin(), a.calls.end());
    SemStmt st = a.stmt;
    st.expr = substitute(st.expr, q);
    if (!q.empty()) throw MappingError("unconsumed call record in statement");
    if (st.kind == SemStmtKind::Assign && st.target == kReturnTarget) {
      st.target = out_attr_name(rule);
      auto [it, inserted] = ann.out_attrs.try_emplace(rule, st.target);
      (void)it;
      (void)inserted;
    }
    return st;
  }

  void process_application(const ParseNode* F) {
    const DerivationNode* D = m.p2d.at(F);
    const std::string& rule = D->label;
    const SubjectFunction* fn = prog.find_function(F->label);
    if (fn) {
      auto [it, inserted] = ann.params.try_emplace(rule, fn->params);
      if (!inserted && it->second != fn->params)
        throw MappingError("rule " + rule + " bound to functions with different parameters");
    }
    std::vector<LinItem> list;
    collect(F, D, rule, list);
    peephole(list);

    // group consecutive statements sharing a natural boundary; slide the
    // group over items absent from this application to get its interval
    const Rule* r = g.find_rule(rule);
    for (size_t i = 0; i < list.size();) {
      if (!list[i].is_stmt) {
        ++i;
        continue;
      }
      size_t j = i;
      std::vector<SemStmt> group;
      while (j < list.size() && list[j].is_stmt && list[j].at == list[i].at) {
        group.push_back(list[j].stmt);
        ++j;
      }
      BoundaryEntry e;
      e.container = list[i].at.container;
      e.bare = list[i].at.bare;
      e.lo = e.hi = list[i].at.index;
      e.stmts = std::move(group);
      if (!e.bare) {
        const GExpr* seq = g.expr_at(e.container);
        int n = static_cast<int>(seq->children.size());
        const DerivationNode* scope = list[i].scope;
        auto item_at = [&](int k) {
          PositionId p = e.container;
          p.path.push_back(k);
          return p;
        };
        while (e.lo > 0 && !item_present(scope, item_at(e.lo - 1))) --e.lo;
        while (e.hi < n && !item_present(scope, item_at(e.hi))) ++e.hi;
      }
      e.witnesses.push_back(ann.witness);
      ann.rules[rule].push_back(std::move(e));
      i = j;
    }
    (void)r;
  }

  // Collects the statements of one rule application in execution order,
  // recursing into loops/conditions of the same application and spawning
  // nested applications at function children.
  void collect(const ParseNode* Q, const DerivationNode* scope, const std::string& rule,
               std::vector<LinItem>& list) {
    if (Q->kind == PKind::Loop) {
      collect_loop(Q, rule, list);
      return;
    }
    size_t n = Q->children.size();
    for (size_t k = 0; k <= n; ++k) {
      for (const auto& a : Q->slots[k]) {
        LinItem it;
        it.is_stmt = true;
        it.stmt = substitute_stmt(a, rule);
        it.scope = scope;
        if (k < n)
          it.at = boundary_of(m.p2d.at(Q->children[k].get())->pos, false);
        else if (n > 0)
          it.at = boundary_of(m.p2d.at(Q->children[n - 1].get())->pos, true);
        else
          it.at = NatBoundary{PositionId{rule, {}}, false, 0};
        list.push_back(std::move(it));
      }
      if (k < n) child(Q->children[k].get(), rule, list);
    }
  }

  void child(const ParseNode* c, const std::string& rule, std::vector<LinItem>& list) {
    switch (c->kind) {
      case PKind::InputChar:
        return;  // consumption does not block statement fusion
      case PKind::Function:
        process_application(c);
        list.push_back(LinItem{});  // blocker
        return;
      case PKind::Condition:
        list.push_back(LinItem{});  // blocker: statement fusion must not
        collect(c, m.p2d.at(c), rule, list);
        list.push_back(LinItem{});  // cross a conditional boundary
        return;
      case PKind::Loop:
        collect_loop(c, rule, list);
        return;
    }
  }

  void collect_loop(const ParseNode* Q, const std::string& rule,
                    std::vector<LinItem>& list) {
    const DerivationNode* rep = m.p2d.at(Q);
    // partition the loop's items into iterations
    auto items = mdetail::flatten(*Q);
    std::vector<std::vector<mdetail::Item>> iters;
    for (const auto& it : items) {
      if (it.kind == mdetail::Item::Iter) {
        iters.emplace_back();
        continue;
      }
      if (iters.empty())
        throw MappingError("loop body items before the first iteration");
      iters.back().push_back(it);
    }

    // all iterations must project onto the same grammar shape
    struct Shape {
      std::vector<std::pair<PositionId, bool>> nodes;  // (pos, is_stmt)
      std::vector<SemStmt> stmts;
    };
    std::vector<Shape> shapes;
    for (const auto& iter : iters) {
      Shape sh;
      for (const auto& it : iter) {
        if (it.kind == mdetail::Item::Stmt) {
          sh.stmts.push_back(substitute_stmt_shape(it.stmt));
          sh.nodes.emplace_back(PositionId{}, true);
        } else {
          sh.nodes.emplace_back(m.p2d.at(it.child.get())->pos, false);
        }
      }
      shapes.push_back(std::move(sh));
    }
    for (size_t i = 1; i < shapes.size(); ++i) {
      bool same = shapes[i].nodes == shapes[0].nodes &&
                  stmts_equal(shapes[i].stmts, shapes[0].stmts);
      if (!same)
        throw MappingError("loop iterations have differing semantics in rule " + rule);
    }

    list.push_back(LinItem{});  // blocker before the loop
    // transfer the first iteration's own statements; recurse into the
    // children of every iteration
    bool first = true;
    for (const auto& iter : iters) {
      const ParseNode* prev = nullptr;
      const ParseNode* next = nullptr;
      for (size_t i = 0; i < iter.size(); ++i) {
        const auto& it = iter[i];
        if (it.kind == mdetail::Item::Child) {
          child(it.child.get(), rule, list);
          prev = it.child.get();
          continue;
        }
        if (!first) continue;
        next = nullptr;
        for (size_t j = i + 1; j < iter.size(); ++j)
          if (iter[j].kind == mdetail::Item::Child) {
            next = iter[j].child.get();
            break;
          }
        LinItem li;
        li.is_stmt = true;
        li.stmt = substitute_stmt(it.stmt, rule);
        li.scope = rep;
        if (next)
          li.at = boundary_of(m.p2d.at(next)->pos, false);
        else if (prev)
          li.at = boundary_of(m.p2d.at(prev)->pos, true);
        else
          throw MappingError("loop iteration statements cannot be anchored in rule " + rule);
        list.push_back(std::move(li));
      }
      first = false;
    }
    list.push_back(LinItem{});  // blocker after the loop
  }

  // shape comparison needs substituted statements without double-registering
  // side tables; substitution is idempotent on those, so reuse it
  SemStmt substitute_stmt_shape(const AttachedStmt& a) {
    std::deque<CallRef> q(a.calls.begin(), a.calls.end());
    SemStmt st = a.stmt;
    st.expr = substitute(st.expr, q);
    if (st.kind == SemStmtKind::Assign && st.target == kReturnTarget)
      st.target = "@";  // loops never carry returns; normalize for comparison
    return st;
  }

  // folds `t = E; x = ... t ...` into `x = ... E ...` when t is a temporary
  // read exactly once, immediately next, with no intervening call boundary
  void peephole(std::vector<LinItem>& list) {
    auto reads_of = [&](const std::string& var) {
      int count = 0;
      for (const auto& it : list) {
        if (!it.is_stmt) continue;
        std::vector<std::string> reads;
        collect_reads(it.stmt.expr, reads);
        for (const auto& r : reads)
          if (r == var) ++count;
      }
      return count;
    };
    auto assigns_of = [&](const std::string& var) {
      int count = 0;
      for (const auto& it : list)
        if (it.is_stmt && it.stmt.kind == SemStmtKind::Assign && it.stmt.target == var)
          ++count;
      return count;
    };
    std::function<ExprPtr(const ExprPtr&, const std::string&, const ExprPtr&)> repl =
        [&](const ExprPtr& e, const std::string& var, const ExprPtr& with) -> ExprPtr {
      if (e->kind == ExprKind::Var && e->name == var) return with;
      auto out = std::make_shared<Expr>(*e);
      for (size_t i = 0; i < e->children.size(); ++i)
        out->children[i] = repl(e->children[i], var, with);
      return out;
    };

    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t i = 0; i + 1 < list.size(); ++i) {
        if (!list[i].is_stmt || list[i].stmt.kind != SemStmtKind::Assign) continue;
        if (!list[i + 1].is_stmt) continue;
        const std::string& t = list[i].stmt.target;
        if (t.empty() || std::isupper(static_cast<unsigned char>(t[0]))) continue;
        if (!expr_reads_var(list[i + 1].stmt.expr, t)) continue;
        if (reads_of(t) != 1 || assigns_of(t) != 1) continue;
        list[i + 1].stmt.expr = repl(list[i + 1].stmt.expr, t, list[i].stmt.expr);
        list.erase(list.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
};

}  // namespace tdetail

inline Annotation transfer_input(const Grammar& g, const ProgramAST& prog,
                                 const PNodePtr& proot, const Mapping& m,
                                 const std::map<PositionId, std::string>& aliases,
                                 const std::string& witness) {
  tdetail::Transfer t(g, prog, m, aliases);
  t.ann.witness = witness;
  t.index_functions(proot.get());
  t.process_application(proot.get());
  return t.ann;
}

// ---------------------------------------------------------------------------
// Merge.
// ---------------------------------------------------------------------------

inline MergeResult merge_annotations(const std::vector<Annotation>& inputs) {
  MergeResult res;
  Annotation& out = res.merged;
  for (const auto& ann : inputs) {
    for (const auto& [rule, entries] : ann.rules) {
      auto& dst = out.rules[rule];
      for (const auto& e : entries) {
        bool merged = false;
        for (auto& d : dst) {
          if (!(d.container == e.container) || d.bare != e.bare) continue;
          bool overlap = !(e.hi < d.lo || d.hi < e.lo);
          if (overlap && stmts_equal(d.stmts, e.stmts)) {
            d.lo = std::max(d.lo, e.lo);
            d.hi = std::min(d.hi, e.hi);
            for (const auto& w : e.witnesses)
              if (std::find(d.witnesses.begin(), d.witnesses.end(), w) == d.witnesses.end())
                d.witnesses.push_back(w);
            merged = true;
            break;
          }
        }
        if (!merged) dst.push_back(e);
      }
    }
    for (const auto& [rule, attr] : ann.out_attrs) out.out_attrs[rule] = attr;
    for (const auto& [rule, ps] : ann.params) {
      auto [it, inserted] = out.params.try_emplace(rule, ps);
      if (!inserted && it->second != ps)
        throw MappingError("rule " + rule + " bound to functions with different parameters");
    }
    for (const auto& [pos, args] : ann.ref_args) {
      auto [it, inserted] = out.ref_args.try_emplace(pos, args);
      if (!inserted) {
        bool same = it->second.size() == args.size();
        for (size_t i = 0; same && i < args.size(); ++i)
          same = expr_equal(it->second[i], args[i]);
        if (!same)
          throw MappingError("reference " + pos.to_string() +
                             " is called with differing arguments across inputs");
      }
    }
  }

  // resolve each entry to the earliest admissible boundary; two entries with
  // different statements landing on the same boundary are a conflict
  for (auto& [rule, entries] : out.rules) {
    for (auto& e : entries) e.resolved = e.lo;
    for (size_t i = 0; i < entries.size(); ++i) {
      for (size_t j = i + 1; j < entries.size(); ++j) {
        BoundaryEntry& a = entries[i];
        BoundaryEntry& b = entries[j];
        if (!(a.container == b.container) || a.bare != b.bare) continue;
        if (a.resolved != b.resolved) continue;
        if (stmts_equal(a.stmts, b.stmts)) continue;
        res.conflicts.push_back(MergeConflict{rule, a.container, a.resolved, a.stmts,
                                              b.stmts, a.witnesses, b.witnesses});
      }
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// AG construction: write the merged annotation back into a copy of the
// grammar and round-trip it through the parser so positions are fresh.
// ---------------------------------------------------------------------------

inline Grammar build_ag(const Grammar& g, const Annotation& merged,
                        const std::map<PositionId, std::string>& aliases) {
  Grammar ag = parse_grammar(serialize_grammar(g));

  auto expr_ptr_at = [&](const PositionId& p) -> GExprPtr {
    for (auto& r : ag.rules) {
      if (r.name != p.rule) continue;
      GExprPtr e = r.root;
      for (int idx0 : p.path) {
        size_t idx = static_cast<size_t>(idx0);
        if (idx >= e->children.size()) return nullptr;
        e = e->children[idx];
      }
      return e;
    }
    return nullptr;
  };
  auto parent_slot = [&](const PositionId& p) -> std::pair<GExprPtr, size_t> {
    PositionId parent{p.rule, std::vector<int>(p.path.begin(), p.path.end() - 1)};
    return {expr_ptr_at(parent), static_cast<size_t>(p.path.back())};
  };
  auto make_sem = [](const std::vector<SemStmt>& stmts) {
    auto e = std::make_shared<GExpr>();
    e->kind = GKind::SemBlock;
    e->statements = stmts;
    return e;
  };

  // set rule attributes
  for (auto& r : ag.rules) {
    auto ito = merged.out_attrs.find(r.name);
    if (ito != merged.out_attrs.end()) r.out_attr = ito->second;
    auto itp = merged.params.find(r.name);
    if (itp != merged.params.end()) r.params = itp->second;
  }

  // decorate references before any structural mutation invalidates positions
  for (auto& r : ag.rules) {
    Grammar::walk(r.root, [&](const GExprPtr& e) {
      if (e->kind != GKind::NonterminalRef) return;
      auto ita = merged.out_attrs.find(e->text);
      if (ita != merged.out_attrs.end()) e->out_alias = aliases.at(e->pos);
      auto itr = merged.ref_args.find(e->pos);
      if (itr != merged.ref_args.end()) e->args = itr->second;
    });
  }

  // resolve all insertion targets up front (pointers survive mutation)
  struct SeqIns {
    GExprPtr seq;
    int index;
    size_t order;
    std::vector<SemStmt> stmts;
  };
  struct BareIns {
    GExprPtr parent;
    size_t slot;
    GExprPtr item;
    std::vector<SemStmt> before, after;
  };
  std::vector<SeqIns> seq_ins;
  std::map<const GExpr*, BareIns> bare_ins;
  size_t order = 0;
  for (const auto& [rule, entries] : merged.rules) {
    for (const auto& e : entries) {
      if (!e.bare) {
        GExprPtr seq = expr_ptr_at(e.container);
        if (!seq || seq->kind != GKind::Sequence)
          throw MappingError("boundary container " + e.container.to_string() +
                             " is not a sequence");
        seq_ins.push_back({seq, e.resolved, order++, e.stmts});
      } else {
        GExprPtr item = expr_ptr_at(e.container);
        auto [parent, slot] = parent_slot(e.container);
        if (!item || !parent)
          throw MappingError("cannot locate boundary item " + e.container.to_string());
        auto& b = bare_ins.try_emplace(item.get(), BareIns{parent, slot, item, {}, {}})
                      .first->second;
        auto& side = e.resolved == 0 ? b.before : b.after;
        side.insert(side.end(), e.stmts.begin(), e.stmts.end());
      }
    }
  }
  std::stable_sort(seq_ins.begin(), seq_ins.end(), [](const SeqIns& a, const SeqIns& b) {
    if (a.seq.get() != b.seq.get()) return a.seq.get() < b.seq.get();
    if (a.index != b.index) return a.index > b.index;  // insert back-to-front
    return a.order > b.order;
  });
  for (const auto& ins : seq_ins)
    ins.seq->children.insert(ins.seq->children.begin() + ins.index, make_sem(ins.stmts));
  for (const auto& [key, b] : bare_ins) {
    auto wrap = std::make_shared<GExpr>();
    wrap->kind = GKind::Sequence;
    if (!b.before.empty()) wrap->children.push_back(make_sem(b.before));
    wrap->children.push_back(b.item);
    if (!b.after.empty()) wrap->children.push_back(make_sem(b.after));
    b.parent->children[b.slot] = wrap;
  }

  Grammar result = parse_grammar(serialize_grammar(ag));
  validate_ag(result);
  return result;
}

}  // namespace agmine
