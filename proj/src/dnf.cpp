#include "sitrec/dnf.hpp"

#include <algorithm>
#include <map>

namespace sitrec {

namespace {

bool is_lower(Comparator c) { return c == Comparator::GT || c == Comparator::GE; }
bool is_upper(Comparator c) { return c == Comparator::LT || c == Comparator::LE; }

// True when bound `a` admits no more values than bound `b` (same side).
bool tighter(const Condition& a, const Condition& b) {
  if (is_lower(a.comparator)) {
    if (a.operand.value != b.operand.value) return a.operand.value > b.operand.value;
    return a.comparator == Comparator::GT;
  }
  if (a.operand.value != b.operand.value) return a.operand.value < b.operand.value;
  return a.comparator == Comparator::LT;
}

}  // namespace

std::optional<DnfPath> normalize_path(DnfPath path) {
  std::vector<Condition> kept;
  std::map<std::string, Condition> lower, upper;
  std::map<std::string, double> exact;
  for (auto c : path.conditions) {
    if (c.operand.kind == OperandKind::exact) {
      if (c.comparator == Comparator::NE) {
        c.comparator = Comparator::EQ;
        c.operand.value = 1.0 - c.operand.value;
      }
      auto [it, inserted] = exact.emplace(c.sensor, c.operand.value);
      if (!inserted && it->second != c.operand.value) return std::nullopt;
      if (inserted) kept.push_back(c);
      continue;
    }
    if (is_lower(c.comparator) || is_upper(c.comparator)) {
      auto& side = is_lower(c.comparator) ? lower : upper;
      auto it = side.find(c.sensor);
      if (it == side.end()) side.emplace(c.sensor, c);
      else if (tighter(c, it->second)) it->second = c;
      continue;
    }
    kept.push_back(c);
  }
  for (auto& [_, c] : lower) kept.push_back(c);
  for (auto& [_, c] : upper) kept.push_back(c);
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  path.conditions = std::move(kept);
  return path;
}

bool path_less(const DnfPath& a, const DnfPath& b) {
  if (a.conditions.size() != b.conditions.size()) return a.conditions.size() < b.conditions.size();
  return a.conditions < b.conditions;
}

void sort_paths(std::vector<DnfPath>& paths) {
  std::stable_sort(paths.begin(), paths.end(), path_less);
}

bool same_path_set(const DnfTree& a, const DnfTree& b) {
  auto sets = [](const DnfTree& d) {
    std::vector<std::vector<Condition>> out;
    for (const auto& p : d.paths) out.push_back(p.conditions);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  return a.situation == b.situation && sets(a) == sets(b);
}

namespace {

struct Partial {
  std::vector<Condition> conditions;
  bool any_and = false;
  bool all_rare = true;
};

std::vector<Partial> expand(const TemplateNode& n, std::size_t limit) {
  if (n.kind == NodeKind::condition) return {Partial{{n.condition}, false, true}};

  std::vector<std::vector<Partial>> parts;
  parts.reserve(n.children.size());
  for (const auto& c : n.children) parts.push_back(expand(c, limit));

  if (n.kind == NodeKind::any_of) {
    std::vector<Partial> out;
    for (auto& p : parts) {
      if (out.size() + p.size() > limit) {
        throw Error(ErrorCode::expansion_limit, "more than " + std::to_string(limit) + " paths");
      }
      std::move(p.begin(), p.end(), std::back_inserter(out));
    }
    return out;
  }

  std::size_t total = 1;
  for (const auto& p : parts) {
    if (p.empty()) return {};
    if (total > limit / p.size()) {
      throw Error(ErrorCode::expansion_limit, "more than " + std::to_string(limit) + " paths");
    }
    total *= p.size();
  }
  std::vector<Partial> out{Partial{{}, true, n.rare}};
  for (const auto& p : parts) {
    std::vector<Partial> next;
    next.reserve(out.size() * p.size());
    for (const auto& prefix : out) {
      for (const auto& choice : p) {
        Partial q = prefix;
        q.conditions.insert(q.conditions.end(), choice.conditions.begin(), choice.conditions.end());
        q.all_rare = q.all_rare && choice.all_rare;
        next.push_back(std::move(q));
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace

DnfTree template_to_dnf(const SituationTemplate& t, const DnfOptions& options,
                        std::vector<std::string>* warnings) {
  if (auto problem = template_problem(t)) throw Error(ErrorCode::semantic, *problem);
  DnfTree d;
  d.situation = t.situation;
  for (auto& partial : expand(t.root, options.expansion_limit)) {
    DnfPath raw{std::move(partial.conditions), std::nullopt, std::nullopt,
                partial.any_and && partial.all_rare};
    auto path = normalize_path(raw);
    if (!path) {
      if (warnings) warnings->push_back(t.situation + ": dropped contradictory path " + to_string(raw));
      continue;
    }
    auto dup = std::find_if(d.paths.begin(), d.paths.end(),
                            [&](const DnfPath& p) { return p.conditions == path->conditions; });
    if (dup != d.paths.end()) {
      dup->rare = dup->rare || path->rare;
      continue;
    }
    d.paths.push_back(std::move(*path));
  }
  sort_paths(d.paths);
  return d;
}

DnfTree decision_tree_to_dnf(const DecisionTree& tree, std::string_view label,
                             std::vector<std::string>* warnings) {
  if (label == kNoneLabel) {
    throw Error(ErrorCode::invalid_argument, "cannot extract paths for the reserved label");
  }
  DnfTree d;
  d.situation = std::string(label);
  if (tree.nodes.empty()) return d;
  if (tree.is_single_leaf()) {
    if (warnings) warnings->push_back("NoSplitTree: single-leaf tree yields no paths for '" + d.situation + "'");
    return d;
  }
  std::vector<Condition> branch;
  auto walk = [&](auto& self, std::size_t i) -> void {
    const auto& n = tree.nodes[i];
    if (n.is_leaf) {
      if (n.label != label) return;
      DnfPath raw{branch, n.purity, n.cardinality, false};
      auto path = normalize_path(std::move(raw));
      if (path) d.paths.push_back(std::move(*path));
      return;
    }
    branch.push_back(n.test);
    self(self, static_cast<std::size_t>(n.pass));
    branch.back().comparator = negate(n.test.comparator);
    self(self, static_cast<std::size_t>(n.fail));
    branch.pop_back();
  };
  walk(walk, 0);
  sort_paths(d.paths);
  return d;
}

SituationTemplate dnf_to_template(const DnfTree& d) {
  if (d.paths.empty()) throw Error(ErrorCode::empty_dnf, d.situation + ": no paths");
  if (auto problem = dnf_problem(d)) throw Error(ErrorCode::semantic, *problem);
  std::vector<TemplateNode> ands;
  for (const auto& p : d.paths) {
    std::vector<TemplateNode> leaves;
    for (const auto& c : p.conditions) leaves.push_back(TemplateNode::leaf(c));
    ands.push_back(TemplateNode::all_of(std::move(leaves), p.rare));
  }
  SituationTemplate t;
  t.situation = d.situation;
  t.root = ands.size() == 1 ? std::move(ands.front()) : TemplateNode::any_of(std::move(ands));
  return t;
}

}  // namespace sitrec
