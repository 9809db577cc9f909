#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sitrec/core.hpp"
#include "sitrec/decision_tree.hpp"

namespace sitrec {

struct DnfOptions {
  std::size_t expansion_limit = 4096;
};

/// Canonical form of one conjunction: exact `s NE v` rewritten as
/// `s EQ 1-v`, duplicates dropped, only the tightest lower and upper
/// threshold bound per sensor kept, conditions sorted. Empty result when
/// two exact conditions on one sensor contradict.
std::optional<DnfPath> normalize_path(DnfPath path);

/// Canonical path order: condition count, then conditions lexicographically.
bool path_less(const DnfPath& a, const DnfPath& b);
void sort_paths(std::vector<DnfPath>& paths);
/// Order-insensitive comparison of the condition sets (annotations ignored).
bool same_path_set(const DnfTree& a, const DnfTree& b);

/// Distributes AND over OR. A path is rare iff every AND node that
/// contributed to it carries the flag (and at least one did).
DnfTree template_to_dnf(const SituationTemplate& t, const DnfOptions& options = {},
                        std::vector<std::string>* warnings = nullptr);

/// One path per root-to-leaf branch ending in `label`; fail edges negate
/// the split test. A tree without splits yields no paths.
DnfTree decision_tree_to_dnf(const DecisionTree& tree, std::string_view label,
                             std::vector<std::string>* warnings = nullptr);

/// OR over AND nodes, or a bare AND root for a single path. Annotations
/// other than the rare flag are dropped.
SituationTemplate dnf_to_template(const DnfTree& d);

}  // namespace sitrec
