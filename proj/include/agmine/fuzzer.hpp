#pragma once

#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "agmine/derive.hpp"
#include "agmine/grammar.hpp"

namespace agmine {

struct GenerationBudget {
  int max_inputs = 200;
  int max_depth = 32;
  int max_repetition = 8;
  int max_length = 2000;  // soft cap: exceeding it forces minimal expansions
};

struct FuzzOptions {
  bool use_coverage = true;        // steer choices toward uncovered positions
  bool use_cooldown = true;        // penalize frequently used alternatives
  bool stop_on_full_coverage = true;
  // test hook: fixed per-alternative weights used when cooldown is off
  std::map<PositionId, double> fixed_weights;
};

struct CoverageState {
  std::set<PositionId> covered;
  std::map<PositionId, int> usage_count;
  std::uint64_t seed = 0;
};

struct FuzzResult {
  std::vector<std::string> inputs;
  CoverageState coverage;
  std::vector<PositionId> uncovered;
  bool full_coverage = false;
};

namespace fdetail {

constexpr int kInf = std::numeric_limits<int>::max() / 4;

struct GrammarInfo {
  const Grammar& g;
  std::map<std::string, int> rule_depth;                 // min ref-nesting to terminate
  std::map<const GExpr*, int> expr_depth;
  std::map<std::string, std::set<PositionId>> rule_reach;
  std::map<const GExpr*, std::set<PositionId>> expr_reach;

  explicit GrammarInfo(const Grammar& grammar) : g(grammar) {
    for (const auto& r : g.rules) rule_depth[r.name] = kInf;
    // fixpoint on minimal expansion depth
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& r : g.rules) {
        int d = depth_of(r.root);
        if (d < rule_depth[r.name]) {
          rule_depth[r.name] = d;
          changed = true;
        }
      }
    }
    for (const auto& r : g.rules) Grammar::walk(r.root, [&](const GExprPtr& e) {
      expr_depth[e.get()] = depth_of(e);
    });
    // fixpoint on reachable positions
    changed = true;
    while (changed) {
      changed = false;
      for (const auto& r : g.rules) {
        std::set<PositionId> reach;
        Grammar::walk(r.root, [&](const GExprPtr& e) {
          reach.insert(e->pos);
          if (e->kind == GKind::NonterminalRef) {
            const auto& sub = rule_reach[e->text];
            reach.insert(sub.begin(), sub.end());
          }
        });
        if (reach != rule_reach[r.name]) {
          rule_reach[r.name] = std::move(reach);
          changed = true;
        }
      }
    }
    for (const auto& r : g.rules) Grammar::walk(r.root, [&](const GExprPtr& e) {
      std::set<PositionId> reach;
      Grammar::walk(e, [&](const GExprPtr& s) {
        reach.insert(s->pos);
        if (s->kind == GKind::NonterminalRef) {
          const auto& sub = rule_reach[s->text];
          reach.insert(sub.begin(), sub.end());
        }
      });
      expr_reach[e.get()] = std::move(reach);
    });
  }

  int depth_of(const GExprPtr& e) const {
    switch (e->kind) {
      case GKind::Terminal:
      case GKind::SemBlock:
        return 0;
      case GKind::NonterminalRef: {
        auto it = rule_depth.find(e->text);
        int d = it == rule_depth.end() ? kInf : it->second;
        return d >= kInf ? kInf : d + 1;
      }
      case GKind::Sequence: {
        int m = 0;
        for (const auto& c : e->children) m = std::max(m, depth_of(c));
        return m;
      }
      case GKind::Choice: {
        int m = kInf;
        for (const auto& c : e->children) m = std::min(m, depth_of(c));
        return m;
      }
      case GKind::Option:
      case GKind::Repetition:
        return 0;
    }
    return kInf;
  }
};

struct Generator {
  const GrammarInfo& info;
  const GenerationBudget& budget;
  const FuzzOptions& opts;
  std::set<PositionId>& covered;          // working guess, may run ahead of real coverage
  std::map<PositionId, int>& usage;
  std::mt19937_64& rng;
  std::string out;

  bool uncovered_in(const GExpr* e) const {
    if (!opts.use_coverage) return false;
    for (const auto& p : info.expr_reach.at(e))
      if (!covered.count(p)) return true;
    return false;
  }

  void mark(const PositionId& pos) {
    PositionId p = pos;
    for (;;) {
      covered.insert(p);
      if (p.path.empty()) break;
      p.path.pop_back();
    }
  }

  double weight_of(const GExprPtr& alt) const {
    if (opts.use_cooldown) {
      auto it = usage.find(alt->pos);
      int used = it == usage.end() ? 0 : it->second;
      return 1.0 / (1.0 + used);
    }
    auto it = opts.fixed_weights.find(alt->pos);
    return it == opts.fixed_weights.end() ? 1.0 : it->second;
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

  bool oversize() const { return static_cast<int>(out.size()) >= budget.max_length; }

  void gen(const GExprPtr& e, int depth) {
    mark(e->pos);
    switch (e->kind) {
      case GKind::Terminal:
        out += e->text;
        return;
      case GKind::SemBlock:
        return;
      case GKind::NonterminalRef:
        gen(info.g.find_rule(e->text)->root, depth + 1);
        return;
      case GKind::Sequence:
        for (const auto& c : e->children) gen(c, depth);
        return;
      case GKind::Choice: {
        const auto& alts = e->children;
        std::vector<const GExprPtr*> cands;
        if (depth >= budget.max_depth || oversize()) {
          // pick the fastest-terminating alternative
          int best = kInf;
          const GExprPtr* pick = nullptr;
          for (const auto& a : alts) {
            int d = info.expr_depth.at(a.get());
            if (d < best) {
              best = d;
              pick = &a;
            }
          }
          usage[(*pick)->pos]++;
          gen(*pick, depth);
          return;
        }
        for (const auto& a : alts)
          if (uncovered_in(a.get())) cands.push_back(&a);
        if (cands.empty())
          for (const auto& a : alts) cands.push_back(&a);
        double total = 0;
        std::vector<double> w;
        for (const auto* a : cands) {
          w.push_back(weight_of(*a));
          total += w.back();
        }
        double x = uniform() * total;
        size_t idx = 0;
        for (; idx + 1 < w.size(); ++idx) {
          if (x < w[idx]) break;
          x -= w[idx];
        }
        usage[(*cands[idx])->pos]++;
        gen(*cands[idx], depth);
        return;
      }
      case GKind::Option: {
        if (depth >= budget.max_depth || oversize()) return;
        bool take = uncovered_in(e->children[0].get()) ||
                    uniform() < 0.5;
        if (take) {
          usage[e->pos]++;
          gen(e->children[0], depth);
        }
        return;
      }
      case GKind::Repetition: {
        if (depth >= budget.max_depth || oversize()) return;
        int iters = 0;
        while (iters < budget.max_repetition && !oversize()) {
          bool want = uncovered_in(e->children[0].get());
          if (!want && !(uniform() < 0.5)) break;
          usage[e->pos]++;
          gen(e->children[0], depth);
          ++iters;
        }
        return;
      }
    }
  }
};

}  // namespace fdetail

struct UnderivableInput : std::runtime_error {
  size_t index;
  UnderivableInput(size_t i, const std::string& why)
      : std::runtime_error("input #" + std::to_string(i) + " is not derivable: " + why),
        index(i) {}
};

inline CoverageState coverage_of(const Grammar& g, const std::vector<std::string>& inputs) {
  CoverageState st;
  for (size_t i = 0; i < inputs.size(); ++i) {
    try {
      auto tree = derive(g, inputs[i]);
      covered_positions(tree, st.covered);
    } catch (const ParseFailure& f) {
      throw UnderivableInput(i, f.what());
    }
  }
  return st;
}

/// Generates grammar-valid inputs until every grammar position is covered or
/// the budget runs out. Coverage is always confirmed against the derivation
/// tree of each generated input, not the generation path.
inline FuzzResult generate_inputs(const Grammar& g, const GenerationBudget& budget,
                                  std::uint64_t seed, const FuzzOptions& opts = {}) {
  fdetail::GrammarInfo info(g);
  if (info.rule_depth.at(g.start()) >= fdetail::kInf)
    throw GrammarError("grammar has no finite derivation from the start rule");

  FuzzResult res;
  res.coverage.seed = seed;
  std::mt19937_64 rng(seed);
  std::set<std::string> seen;
  std::vector<PositionId> universe = enumerate_positions(g);

  auto full = [&]() {
    for (const auto& p : universe)
      if (!res.coverage.covered.count(p)) return false;
    return true;
  };

  int attempts = 0;
  const int max_attempts = budget.max_inputs * 10 + 10;
  while (static_cast<int>(res.inputs.size()) < budget.max_inputs && attempts < max_attempts) {
    if (opts.stop_on_full_coverage && full()) break;
    ++attempts;
    std::set<PositionId> guess = res.coverage.covered;
    fdetail::Generator gen{info, budget, opts, guess, res.coverage.usage_count, rng, {}};
    gen.gen(g.rules.front().root, 0);
    std::string s = std::move(gen.out);
    DNodePtr tree;
    try {
      tree = derive(g, s);
    } catch (const ParseFailure&) {
      continue;  // generation path disagrees with ordered-choice parsing
    }
    covered_positions(tree, res.coverage.covered);
    if (seen.insert(s).second) res.inputs.push_back(std::move(s));
  }
  res.full_coverage = full();
  for (const auto& p : universe)
    if (!res.coverage.covered.count(p)) res.uncovered.push_back(p);
  return res;
}

}  // namespace agmine
