#pragma once

// Incremental experiment: each step trains on one more part, enhances the
// repository, and scores the initial templates, the updated templates and
// the tree on the held-out test part.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sitrec/core.hpp"
#include "sitrec/decision_tree.hpp"
#include "sitrec/enhancer.hpp"
#include "sitrec/recognizer.hpp"
#include "sitrec/simulator.hpp"

namespace sitrec {

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  bool operator==(const Metrics&) const = default;
};

/// One-vs-rest scores for `situation`. Zero denominators give 0 and set
/// the matching flag.
Metrics compute_metrics(std::span<const SituationSet> predictions, std::span<const std::string> truth,
                        std::string_view situation);

enum class EnhanceMode { cumulative, fresh };
std::string_view to_string(EnhanceMode m);
std::optional<EnhanceMode> parse_enhance_mode(std::string_view s);

struct ExperimentConfig {
  LearnerParams learner;
  EnhanceOptions enhance;
  EnhanceMode mode = EnhanceMode::cumulative;
};

struct StepRecord {
  int step = 0;
  std::size_t training_size = 0;
  bool trained = false;  ///< false when no training data has arrived yet
  TemplateDocument repository;
  ChangeLog log;
  DecisionTree tree;
};

struct ExperimentResult {
  /// Ordered by situation (environment order), step, source.
  std::vector<MetricsRow> rows;
  std::vector<StepRecord> steps;
};

ExperimentResult run_experiment(const TemplateDocument& start_repo, const EnvironmentSpec& env,
                                const Dataset& data, const ExperimentConfig& config = {});
/// Generates the dataset from `sim` first.
ExperimentResult run_experiment(const TemplateDocument& start_repo, const Simulation& sim,
                                const GenerationParams& generation, const ExperimentConfig& config = {});

/// Header `step,source,accuracy,precision,recall,precision_undefined,recall_undefined`.
std::string report_csv(std::span<const MetricsRow> rows, std::string_view situation);
std::vector<MetricsRow> parse_report_csv(std::string_view text, std::string_view situation);

/// Writes `<situation>.csv` per situation, and with `plots` an SVG line
/// chart per situation and metric. Returns the written paths.
std::vector<std::filesystem::path> write_report(std::span<const MetricsRow> rows,
                                                const std::filesystem::path& dir, bool plots = false);

std::string plot_svg(std::span<const MetricsRow> rows, std::string_view situation, std::string_view metric);

}  // namespace sitrec
