#pragma once

// Merge engine: matches decision-tree paths against template paths by
// leaf similarity, then applies reliability-gated ADD / REMOVE / UPDATE
// changes to the template DNFs.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sitrec/core.hpp"
#include "sitrec/decision_tree.hpp"
#include "sitrec/dnf.hpp"
#include "sitrec/template_io.hpp"

namespace sitrec {

struct ReliabilityParams {
  double min_path_purity = 0.65;
  std::size_t min_path_cardinality = 10;
  double min_label_confidence = 0.8;
  std::size_t min_label_cardinality = 100;
  double similarity_floor = 0.6;
  double threshold_band = 0.25;

  /// Throws Error(invalid_argument) when a value is outside its range.
  void check() const;
};

/// Absolute slack on the threshold-band comparison so that decimal
/// thresholds such as 0.4 and 0.65 count as 0.25 apart.
inline constexpr double kBandTolerance = 1e-9;

struct LeafMatch {
  std::size_t template_leaf = 0;
  std::size_t tree_leaf = 0;
};

struct PathSimilarity {
  std::size_t matched = 0;
  std::size_t length = 0;  ///< max of both path lengths
  std::vector<LeafMatch> matches;

  double score() const {
    return length == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(length);
  }
};

/// Each template leaf takes the first tree leaf with the same sensor and
/// comparator whose operand agrees: both thresholds within the band, or
/// both exact and equal. Tree leaves may be reused.
PathSimilarity compare_paths(const DnfPath& template_path, const DnfPath& tree_path,
                             double threshold_band = 0.25);
double similarity(const DnfPath& template_path, const DnfPath& tree_path, double threshold_band = 0.25);

struct SimilarityEntry {
  std::optional<std::size_t> template_index;  ///< into the template DNF's paths
  std::size_t tree_index = 0;                 ///< into the tree DNF's paths
  double score = 0.0;
  PathSimilarity detail;
};

/// Greedy matching in tree-path order; a claimed template path leaves the
/// pool. Ties go to the earliest template path.
std::vector<SimilarityEntry> build_similarity_set(const DnfTree& template_dnf, const DnfTree& tree_dnf,
                                                  const ReliabilityParams& params = {});

bool path_reliable(const DnfPath& p, const ReliabilityParams& params = {});
bool label_reliable(std::string_view label, const DnfTree& tree_dnf, const TrainingSet& data,
                    const ReliabilityParams& params = {});

enum class ChangeKind { add, remove, update };

std::string_view to_string(ChangeKind k);

struct Change {
  ChangeKind kind = ChangeKind::add;
  std::string situation;
  std::optional<DnfPath> before;
  std::optional<DnfPath> after;
  /// Gate values that allowed the change, e.g. {"purity", "0.9"}.
  std::vector<std::pair<std::string, std::string>> gates;

  bool operator==(const Change&) const = default;
};

struct ChangeLog {
  std::vector<Change> entries;

  bool empty() const { return entries.empty(); }
  std::size_t count(ChangeKind k) const;
  void append(const ChangeLog& other);
  /// One tab-separated line per change.
  std::string to_text() const;
};

struct MergeResult {
  DnfTree dnf;
  ChangeLog log;
};

MergeResult merge(const DnfTree& template_dnf, const DnfTree& tree_dnf, const TrainingSet& data,
                  const ReliabilityParams& params = {});

struct EnhanceOptions {
  ReliabilityParams reliability;
  DnfOptions dnf;
  bool parallel = true;
};

struct EnhanceResult {
  TemplateDocument repository;
  ChangeLog log;
};

/// Templates whose merge changed nothing are passed through verbatim.
EnhanceResult enhance_repository(const TemplateDocument& repo, const DecisionTree& tree,
                                 const TrainingSet& data, const EnhanceOptions& options = {});

}  // namespace sitrec
