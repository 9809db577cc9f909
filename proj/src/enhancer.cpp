#include "sitrec/enhancer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>

namespace sitrec {

void ReliabilityParams::check() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(min_path_purity) || !unit(min_label_confidence) || !unit(similarity_floor) ||
      !unit(threshold_band)) {
    throw Error(ErrorCode::invalid_argument, "reliability ratios must lie in [0,1]");
  }
}

PathSimilarity compare_paths(const DnfPath& template_path, const DnfPath& tree_path,
                             double threshold_band) {
  PathSimilarity out;
  const auto& stp = template_path.conditions;
  const auto& dtp = tree_path.conditions;
  out.length = std::max(stp.size(), dtp.size());
  for (std::size_t s = 0; s < stp.size(); ++s) {
    const auto& snode = stp[s];
    for (std::size_t d = 0; d < dtp.size(); ++d) {
      const auto& dnode = dtp[d];
      if (snode.sensor != dnode.sensor || snode.comparator != dnode.comparator) continue;
      if (snode.operand.kind != dnode.operand.kind) continue;
      const bool agree =
          snode.operand.kind == OperandKind::threshold
              ? std::fabs(snode.operand.value - dnode.operand.value) <= threshold_band + kBandTolerance
              : snode.operand.value == dnode.operand.value;
      if (agree) {
        ++out.matched;
        out.matches.push_back({s, d});
        break;
      }
    }
  }
  return out;
}

double similarity(const DnfPath& template_path, const DnfPath& tree_path, double threshold_band) {
  return compare_paths(template_path, tree_path, threshold_band).score();
}

std::vector<SimilarityEntry> build_similarity_set(const DnfTree& template_dnf, const DnfTree& tree_dnf,
                                                  const ReliabilityParams& params) {
  std::vector<std::size_t> pool(template_dnf.paths.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;

  std::vector<SimilarityEntry> out;
  out.reserve(tree_dnf.paths.size());
  for (std::size_t t = 0; t < tree_dnf.paths.size(); ++t) {
    SimilarityEntry entry;
    entry.tree_index = t;
    auto claimed = pool.end();
    for (auto it = pool.begin(); it != pool.end(); ++it) {
      auto detail = compare_paths(template_dnf.paths[*it], tree_dnf.paths[t], params.threshold_band);
      const double score = detail.score();
      if (score >= params.similarity_floor && score > entry.score) {
        entry.score = score;
        entry.template_index = *it;
        entry.detail = std::move(detail);
        claimed = it;
      }
    }
    if (claimed != pool.end()) pool.erase(claimed);
    out.push_back(std::move(entry));
  }
  return out;
}

bool path_reliable(const DnfPath& p, const ReliabilityParams& params) {
  if (!p.purity || !p.cardinality) {
    throw Error(ErrorCode::missing_annotation, "path " + to_string(p) + " has no purity/cardinality");
  }
  return !(*p.purity < params.min_path_purity || *p.cardinality < params.min_path_cardinality);
}

bool label_reliable(std::string_view label, const DnfTree& tree_dnf, const TrainingSet& data,
                    const ReliabilityParams& params) {
  auto conf = label_confidence(tree_dnf);
  if (!conf) return false;
  const auto card = label_cardinality(data, label);
  return !(*conf < params.min_label_confidence || card < params.min_label_cardinality);
}

std::string_view to_string(ChangeKind k) {
  switch (k) {
    case ChangeKind::add: return "ADD";
    case ChangeKind::remove: return "REMOVE";
    case ChangeKind::update: return "UPDATE";
  }
  return "?";
}

std::size_t ChangeLog::count(ChangeKind k) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [&](const Change& c) { return c.kind == k; }));
}

void ChangeLog::append(const ChangeLog& other) {
  entries.insert(entries.end(), other.entries.begin(), other.entries.end());
}

std::string ChangeLog::to_text() const {
  std::string out;
  for (const auto& c : entries) {
    out += to_string(c.kind);
    out += '\t';
    out += c.situation;
    out += "\tbefore=";
    out += c.before ? to_string(*c.before) : "-";
    out += "\tafter=";
    out += c.after ? to_string(*c.after) : "-";
    for (const auto& [k, v] : c.gates) {
      out += '\t';
      out += k;
      out += '=';
      out += v;
    }
    out += '\n';
  }
  return out;
}

MergeResult merge(const DnfTree& template_dnf, const DnfTree& tree_dnf, const TrainingSet& data,
                  const ReliabilityParams& params) {
  if (template_dnf.situation != tree_dnf.situation) {
    throw Error(ErrorCode::label_mismatch,
                "template '" + template_dnf.situation + "' vs tree '" + tree_dnf.situation + "'");
  }
  const auto& label = template_dnf.situation;
  const auto entries = build_similarity_set(template_dnf, tree_dnf, params);

  MergeResult result;
  auto& log = result.log;
  std::vector<DnfPath> paths = template_dnf.paths;
  std::vector<bool> keep(paths.size(), true);
  std::vector<DnfPath> added;

  // ADD: reliable tree paths without a template counterpart.
  for (const auto& e : entries) {
    if (e.template_index) continue;
    const auto& tp = tree_dnf.paths[e.tree_index];
    if (!path_reliable(tp, params)) continue;
    DnfPath p = tp;
    p.rare = false;
    log.entries.push_back({ChangeKind::add, label, std::nullopt, p,
                           {{"purity", format_number(*tp.purity)},
                            {"cardinality", std::to_string(*tp.cardinality)}}});
    added.push_back(std::move(p));
  }

  // REMOVE: template paths absent from every entry, only for a reliable
  // label, never when rare-flagged.
  std::set<std::size_t> matched;
  for (const auto& e : entries) {
    if (e.template_index) matched.insert(*e.template_index);
  }
  if (label_reliable(label, tree_dnf, data, params)) {
    const double conf = *label_confidence(tree_dnf);
    const auto card = label_cardinality(data, label);
    for (std::size_t i = 0; i < paths.size(); ++i) {
      if (matched.count(i) || paths[i].rare) continue;
      keep[i] = false;
      log.entries.push_back({ChangeKind::remove, label, paths[i], std::nullopt,
                             {{"label_confidence", format_number(conf)},
                              {"label_cardinality", std::to_string(card)}}});
    }
  }

  // UPDATE: matched threshold leaves take the tree path's operand.
  for (const auto& e : entries) {
    if (!e.template_index) continue;
    const auto& tp = tree_dnf.paths[e.tree_index];
    if (!path_reliable(tp, params)) continue;
    auto& target = paths[*e.template_index];
    DnfPath before = target;
    bool changed = false;
    for (const auto& m : e.detail.matches) {
      auto& cond = target.conditions[m.template_leaf];
      const auto& src = tp.conditions[m.tree_leaf];
      if (cond.operand.kind != OperandKind::threshold) continue;
      if (cond.operand.value != src.operand.value) {
        cond.operand.value = src.operand.value;
        changed = true;
      }
    }
    if (!changed) continue;
    target.purity = tp.purity;
    target.cardinality = tp.cardinality;
    if (auto normalized = normalize_path(target)) target = std::move(*normalized);
    log.entries.push_back({ChangeKind::update, label, before, target,
                           {{"purity", format_number(*tp.purity)},
                            {"cardinality", std::to_string(*tp.cardinality)},
                            {"similarity", format_number(e.score)}}});
  }

  result.dnf.situation = label;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (keep[i]) result.dnf.paths.push_back(std::move(paths[i]));
  }
  for (auto& p : added) result.dnf.paths.push_back(std::move(p));

  // Collapse duplicates produced by updates or additions.
  std::vector<DnfPath> unique;
  for (auto& p : result.dnf.paths) {
    auto dup = std::find_if(unique.begin(), unique.end(),
                            [&](const DnfPath& q) { return q.conditions == p.conditions; });
    if (dup == unique.end()) {
      unique.push_back(std::move(p));
    } else {
      dup->rare = dup->rare || p.rare;
    }
  }
  result.dnf.paths = std::move(unique);
  sort_paths(result.dnf.paths);
  return result;
}

EnhanceResult enhance_repository(const TemplateDocument& repo, const DecisionTree& tree,
                                 const TrainingSet& data, const EnhanceOptions& options) {
  options.reliability.check();
  const auto n = static_cast<std::ptrdiff_t>(repo.templates.size());
  std::vector<SituationTemplate> templates(repo.templates.size());
  std::vector<ChangeLog> logs(repo.templates.size());
  std::vector<std::exception_ptr> errors(repo.templates.size());

#pragma omp parallel for schedule(dynamic, 1) if (options.parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      const auto& original = repo.templates[idx];
      auto template_dnf = template_to_dnf(original, options.dnf);
      auto tree_dnf = decision_tree_to_dnf(tree, original.situation);
      auto merged = merge(template_dnf, tree_dnf, data, options.reliability);
      if (merged.log.empty() || merged.dnf.paths.empty()) {
        // An empty result can only come from removals alone; those are
        // withheld so a situation never loses its whole template.
        templates[idx] = original;
      } else {
        templates[idx] = dnf_to_template(merged.dnf);
        logs[idx] = std::move(merged.log);
      }
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  EnhanceResult out;
  out.repository.version = repo.version;
  out.repository.templates = std::move(templates);
  for (const auto& l : logs) out.log.append(l);
  return out;
}

}  // namespace sitrec
