#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "agmine/derive.hpp"
#include "agmine/parse_tree.hpp"

namespace agmine {

// ---------------------------------------------------------------------------
// Mapping between a parse tree (recovered from a program trace) and the
// derivation tree of the same input. Built in three phases: terminal
// alignment, bottom-up ascent from each terminal, and structure pairing
// inside already-mapped scopes. A fourth phase dissolves parse-tree nodes
// that have no grammar counterpart, pushing their statements onto the
// surrounding slots.
// ---------------------------------------------------------------------------

struct MappingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Mapping {
  std::map<const ParseNode*, const DerivationNode*> p2d;
  std::map<const DerivationNode*, const ParseNode*> d2p;

  bool mapped_p(const ParseNode* p) const { return p2d.count(p) > 0; }
  bool mapped_d(const DerivationNode* d) const { return d2p.count(d) > 0; }
};

namespace mdetail {

inline bool compatible(PKind pk, DKind dk) {
  switch (pk) {
    case PKind::Function:
      return dk == DKind::Nonterminal;
    case PKind::Loop:
      return dk == DKind::Repetition;
    case PKind::Condition:
      return dk == DKind::Option || dk == DKind::Choice;
    case PKind::InputChar:
      return dk == DKind::Terminal;
  }
  return false;
}

struct TreeIndex {
  std::map<const ParseNode*, const ParseNode*> pparent;
  std::map<const DerivationNode*, const DerivationNode*> dparent;
  std::map<const DerivationNode*, int> ddepth;
  std::vector<const ParseNode*> ppre;      // preorder
  std::vector<const DerivationNode*> dpre;
  std::map<const DerivationNode*, size_t> dorder;

  void index_p(const ParseNode* n, const ParseNode* parent) {
    pparent[n] = parent;
    ppre.push_back(n);
    for (const auto& c : n->children) index_p(c.get(), n);
  }
  void index_d(const DerivationNode* n, const DerivationNode* parent, int depth) {
    dparent[n] = parent;
    ddepth[n] = depth;
    dorder[n] = dpre.size();
    dpre.push_back(n);
    for (const auto& c : n->children) index_d(c.get(), n, depth + 1);
  }
};

inline void collect_leaves_p(const ParseNode* n, std::vector<const ParseNode*>& out) {
  if (n->kind == PKind::InputChar) {
    out.push_back(n);
    return;
  }
  for (const auto& c : n->children) collect_leaves_p(c.get(), out);
}

inline void collect_leaves_d(const DerivationNode* n,
                             std::vector<const DerivationNode*>& out) {
  if (n->kind == DKind::Terminal) {
    out.push_back(n);
    return;
  }
  for (const auto& c : n->children) collect_leaves_d(c.get(), out);
}

}  // namespace mdetail

/// Phases 1-3. Throws MappingError when the trees cannot be reconciled.
inline Mapping map_trees(const PNodePtr& proot, const DNodePtr& droot) {
  using namespace mdetail;
  Mapping m;
  TreeIndex ix;
  ix.index_p(proot.get(), nullptr);
  ix.index_d(droot.get(), nullptr, 0);

  auto pair = [&](const ParseNode* p, const DerivationNode* d) {
    m.p2d[p] = d;
    m.d2p[d] = p;
  };

  // --- phase 1: terminal alignment -----------------------------------------
  std::vector<const ParseNode*> pleaves;
  std::vector<const DerivationNode*> dleaves;
  collect_leaves_p(proot.get(), pleaves);
  collect_leaves_d(droot.get(), dleaves);

  std::vector<std::pair<const ParseNode*, const DerivationNode*>> anchors;
  size_t pi = 0;
  for (const auto* dt : dleaves) {
    size_t len = dt->label.size();
    if (pi + len > pleaves.size())
      throw MappingError("program consumed fewer characters than the grammar derives");
    std::string got;
    for (size_t k = 0; k < len; ++k) got += pleaves[pi + k]->label;
    if (got != dt->label || pleaves[pi]->begin0 != dt->begin0)
      throw MappingError("consumed characters disagree with grammar terminals at input position " +
                         std::to_string(dt->begin0 + 1));
    for (size_t k = 0; k < len; ++k) m.p2d[pleaves[pi + k]] = dt;
    m.d2p[dt] = pleaves[pi];
    anchors.emplace_back(pleaves[pi], dt);
    pi += len;
  }
  if (pi != pleaves.size())
    throw MappingError("program consumed more characters than the grammar derives");

  pair(proot.get(), droot.get());

  // --- phase 2: bottom-up ascent from each terminal ------------------------
  for (auto [pstart, dstart] : anchors) {
    const ParseNode* u = ix.pparent.at(pstart);
    const DerivationNode* v = dstart;
    while (u && v) {
      auto itp = m.p2d.find(u);
      if (itp != m.p2d.end()) {
        if (itp->second != v) break;
        u = ix.pparent.at(u);
        v = ix.dparent.at(v);
        continue;
      }
      if (m.mapped_d(v)) {
        v = ix.dparent.at(v);
        continue;
      }
      YieldRange yu = u->yield();
      YieldRange yv = v->yield();
      if (yu == yv) {
        if (compatible(u->kind, v->kind)) {
          pair(u, v);
          u = ix.pparent.at(u);
          v = ix.dparent.at(v);
        } else {
          v = ix.dparent.at(v);  // try a shallower grammar node with this yield
        }
        continue;
      }
      if (yu.length() < yv.length()) {
        u = ix.pparent.at(u);
      } else if (yv.length() < yu.length()) {
        v = ix.dparent.at(v);
      } else {
        throw MappingError("structures with equal length but different ranges: parse " +
                           yu.to_string() + " vs grammar " + yv.to_string());
      }
    }
  }

  // --- phase 3: structure pairing inside mapped scopes ---------------------
  auto nearest_mapped_p = [&](const ParseNode* n) -> const ParseNode* {
    const ParseNode* a = ix.pparent.at(n);
    while (a && !m.mapped_p(a)) a = ix.pparent.at(a);
    return a;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (const ParseNode* u : ix.ppre) {
      if (u->kind == PKind::InputChar || m.mapped_p(u)) continue;
      const ParseNode* pa = nearest_mapped_p(u);
      if (!pa) continue;
      const DerivationNode* da = m.p2d.at(pa);

      // grammar-side candidates: unmapped compatible nodes with the same
      // yield whose nearest mapped ancestor is `da`
      std::vector<const DerivationNode*> cands;
      std::function<void(const DerivationNode*)> scan = [&](const DerivationNode* d) {
        for (const auto& cptr : d->children) {
          const DerivationNode* c = cptr.get();
          if (m.mapped_d(c)) continue;  // scope boundary
          if (compatible(u->kind, c->kind) && c->yield() == u->yield())
            cands.push_back(c);
          scan(c);
        }
      };
      scan(da);
      if (cands.empty()) continue;
      std::stable_sort(cands.begin(), cands.end(),
                       [&](const DerivationNode* a, const DerivationNode* b) {
                         return ix.ddepth.at(a) < ix.ddepth.at(b);
                       });

      // competitors: parse-side peers of `u` in the same scope asking for the
      // same yield and kind; the j-th competitor takes the j-th candidate
      size_t j = 0;
      bool found = false;
      for (const ParseNode* w : ix.ppre) {
        if (w->kind != u->kind || m.mapped_p(w)) continue;
        if (!(w->yield() == u->yield())) continue;
        if (nearest_mapped_p(w) != pa) continue;
        if (w == u) {
          found = true;
          break;
        }
        ++j;
      }
      (void)found;
      if (j >= cands.size()) continue;
      m.p2d[u] = cands[j];
      m.d2p[cands[j]] = u;
      changed = true;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Phase 4: dissolve unmapped parse nodes, splicing their children and
// statements into the parent. After this every structure node in the parse
// tree is mapped.
// ---------------------------------------------------------------------------

namespace mdetail {

struct Item {
  enum Kind { Stmt, Child, Iter } kind;
  AttachedStmt stmt;
  PNodePtr child;
};

inline std::vector<Item> flatten(const ParseNode& n) {
  std::vector<Item> items;
  size_t iter = 0;
  for (size_t slot = 0; slot < n.slots.size(); ++slot) {
    for (size_t off = 0; off <= n.slots[slot].size(); ++off) {
      while (iter < n.iter_marks.size() && n.iter_marks[iter].child_index == slot &&
             n.iter_marks[iter].stmt_offset == off) {
        items.push_back({Item::Iter, {}, nullptr});
        ++iter;
      }
      if (off < n.slots[slot].size())
        items.push_back({Item::Stmt, n.slots[slot][off], nullptr});
    }
    if (slot < n.children.size())
      items.push_back({Item::Child, {}, n.children[slot]});
  }
  return items;
}

inline void rebuild(ParseNode& n, const std::vector<Item>& items) {
  n.children.clear();
  n.slots.assign(1, {});
  n.iter_marks.clear();
  for (const auto& it : items) {
    switch (it.kind) {
      case Item::Stmt:
        n.slots.back().push_back(it.stmt);
        break;
      case Item::Child:
        n.children.push_back(it.child);
        n.slots.emplace_back();
        break;
      case Item::Iter:
        n.iter_marks.push_back({n.children.size(), n.slots.back().size()});
        break;
    }
  }
}

inline std::vector<Item> dissolve_level(const ParseNode& n, const Mapping& m) {
  std::vector<Item> out;
  for (auto& it : flatten(n)) {
    if (it.kind != Item::Child || it.child->kind == PKind::InputChar ||
        m.mapped_p(it.child.get())) {
      out.push_back(it);
      continue;
    }
    const ParseNode& u = *it.child;
    if (u.kind == PKind::Loop && u.has_statements())
      throw MappingError("program loop with semantics has no grammar counterpart");
    std::vector<Item> sub = dissolve_level(u, m);
    bool has_child = false, has_stmt = false;
    for (const auto& s : sub) {
      has_child = has_child || s.kind == Item::Child;
      has_stmt = has_stmt || s.kind == Item::Stmt;
    }
    if (has_stmt && !has_child)
      throw MappingError("statements of an unmapped structure cannot be anchored");
    for (auto& s : sub)
      if (s.kind != Item::Iter) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace mdetail

inline void resolve_unmapped(const PNodePtr& node, const Mapping& m) {
  mdetail::rebuild(*node, mdetail::dissolve_level(*node, m));
  for (const auto& c : node->children)
    if (c->kind != PKind::InputChar) resolve_unmapped(c, m);
}

// ---------------------------------------------------------------------------
// Diagnostics.
// ---------------------------------------------------------------------------

namespace mdetail {

inline void dump_walk(const ParseNode* n, const std::string& path, const Mapping& m,
                      std::ostringstream& os) {
  auto it = m.p2d.find(n);
  os << "parse:" << (path.empty() ? "." : path);
  if (it != m.p2d.end())
    os << " <-> deriv:" << it->second->pos.to_string();
  else
    os << " <-> (unmapped)";
  os << '\n';
  for (size_t i = 0; i < n->children.size(); ++i)
    dump_walk(n->children[i].get(), path.empty() ? std::to_string(i)
                                                 : path + "." + std::to_string(i),
              m, os);
}

}  // namespace mdetail

inline std::string mapping_dump(const PNodePtr& proot, const Mapping& m) {
  std::ostringstream os;
  mdetail::dump_walk(proot.get(), "", m, os);
  return os.str();
}

}  // namespace agmine
