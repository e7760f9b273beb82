#pragma once

#include <map>
#include <string>
#include <vector>

#include "agmine/derive.hpp"
#include "agmine/eval.hpp"
#include "agmine/grammar.hpp"

namespace agmine {

// ---------------------------------------------------------------------------
// Attributed-grammar interpreter: derives the input with the grammar part of
// the AG, then evaluates the rule bodies in lockstep with the derivation
// tree. Every rule application gets a fresh environment holding its
// in-attributes; the start rule's out-attribute is the result.
// ---------------------------------------------------------------------------

struct AgRuntimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace adetail {

struct RuleEnv : EvalContext {
  std::map<std::string, Value> vars;

  Value get_var(const std::string& name, SourceLoc loc) override {
    auto it = vars.find(name);
    if (it == vars.end()) throw EvalError("unbound attribute '" + name + "'", loc);
    return it->second;
  }
  Value call(const std::string& name, const std::vector<Value>&, SourceLoc loc) override {
    throw EvalError("call to '" + name + "': only builtin functions are available here",
                    loc);
  }
};

struct AgEvaluator {
  const Grammar& ag;

  Value apply(const DerivationNode* d, std::vector<Value> args) {
    const Rule* r = ag.find_rule(d->label);
    if (!r) throw AgRuntimeError("no rule named " + d->label);
    if (args.size() != r->params.size())
      throw AgRuntimeError("rule " + r->name + " expects " +
                           std::to_string(r->params.size()) + " in-attribute(s)");
    RuleEnv env;
    for (size_t i = 0; i < args.size(); ++i) env.vars[r->params[i]] = std::move(args[i]);
    size_t used = walk_items(r->root->children, d->children, 0, env);
    if (used != d->children.size())
      throw AgRuntimeError("derivation does not line up with rule " + r->name);
    if (r->out_attr.empty()) return Value();
    auto it = env.vars.find(r->out_attr);
    if (it == env.vars.end())
      throw AgRuntimeError("rule " + r->name + " did not assign its out-attribute '" +
                           r->out_attr + "'");
    return it->second;
  }

  void exec_block(const GExprPtr& e, RuleEnv& env) {
    for (const auto& st : e->statements) {
      Value v = eval_expr(st.expr, env);
      if (st.kind == SemStmtKind::Assign) env.vars[st.target] = std::move(v);
    }
  }

  // walks grammar items against the flat derivation children, starting at
  // `start`; returns the index after the last consumed child
  size_t walk_items(const std::vector<GExprPtr>& items,
                    const std::vector<DNodePtr>& kids, size_t start, RuleEnv& env) {
    size_t ci = start;
    for (const auto& item : items) {
      if (item->kind == GKind::SemBlock) {
        exec_block(item, env);
        continue;
      }
      if (ci < kids.size() && kids[ci]->pos == item->pos) {
        walk_item(item, kids[ci].get(), env);
        ++ci;
        continue;
      }
      if (item->kind == GKind::Option) continue;  // not taken
      throw AgRuntimeError("derivation does not line up at " + item->pos.to_string());
    }
    return ci;
  }

  void walk_group(const GExprPtr& e, const DerivationNode* d, RuleEnv& env) {
    if (e->kind == GKind::Sequence) {
      size_t used = walk_items(e->children, d->children, 0, env);
      if (used != d->children.size())
        throw AgRuntimeError("derivation does not line up inside " + e->pos.to_string());
      return;
    }
    size_t used = walk_items({e}, d->children, 0, env);
    (void)used;
  }

  void walk_item(const GExprPtr& e, const DerivationNode* d, RuleEnv& env) {
    switch (e->kind) {
      case GKind::Terminal:
        return;
      case GKind::NonterminalRef: {
        std::vector<Value> args;
        for (const auto& a : e->args) args.push_back(eval_expr(a, env));
        Value v = apply(d, std::move(args));
        if (!e->out_alias.empty()) env.vars[e->out_alias] = std::move(v);
        return;
      }
      case GKind::Choice: {
        if (d->alt_index < 0 ||
            d->alt_index >= static_cast<int>(e->children.size()))
          throw AgRuntimeError("invalid alternative index");
        walk_group(e->children[static_cast<size_t>(d->alt_index)], d, env);
        return;
      }
      case GKind::Option:
        walk_group(e->children[0], d, env);
        return;
      case GKind::Repetition: {
        const GExprPtr& body = e->children[0];
        size_t ci = 0;
        while (ci < d->children.size()) {
          size_t next;
          if (body->kind == GKind::Sequence)
            next = walk_items(body->children, d->children, ci, env);
          else
            next = walk_items({body}, d->children, ci, env);
          if (next == ci)
            throw AgRuntimeError("repetition made no progress at " + e->pos.to_string());
          ci = next;
        }
        return;
      }
      case GKind::Sequence:
      case GKind::SemBlock:
        throw AgRuntimeError("unexpected grammar node during evaluation");
    }
  }
};

}  // namespace adetail

/// Runs an attributed grammar on an input: derivation plus attribute
/// evaluation. Throws ParseFailure if the input is not in the language and
/// EvalError/AgRuntimeError if attribute evaluation fails.
inline Value run_ag(const Grammar& ag, const std::string& input) {
  DNodePtr tree = derive(ag, input);
  const Rule& start = ag.rules.front();
  if (!start.params.empty())
    throw AgRuntimeError("start rule " + start.name + " must not take in-attributes");
  adetail::AgEvaluator ev{ag};
  return ev.apply(tree.get(), {});
}

}  // namespace agmine
