#pragma once

// On-disk forms: dataset CSV (sensor ids, timestamp, label), recognition
// CSV (timestamp, situations), decision trees and run parameters as JSON.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sitrec/core.hpp"
#include "sitrec/decision_tree.hpp"
#include "sitrec/enhancer.hpp"
#include "sitrec/recognizer.hpp"
#include "sitrec/simulator.hpp"

namespace sitrec {

/// Header: feature ids in order, then `timestamp`, then `label`. An absent
/// reading is an empty field.
std::string write_dataset_csv(const TrainingSet& data);

struct CsvImages {
  std::vector<SensorImage> images;
  std::vector<std::string> labels;  ///< empty when the file has no label column
};

/// Columns may come in any order; every column other than timestamp and
/// label must be a declared sensor, and each row must validate against env.
CsvImages read_images_csv(std::string_view text, const EnvironmentSpec& env);
TrainingSet read_dataset_csv(std::string_view text, const EnvironmentSpec& env);

/// `timestamp,situations` with situations joined by '|'.
std::string write_recognition_csv(const std::vector<StreamResult>& results);

std::string tree_to_json(const DecisionTree& tree);
DecisionTree tree_from_json(std::string_view text);

struct RunParams {
  GenerationParams generation;
  LearnerParams learner;
  ReliabilityParams reliability;
};

/// Sections "generation", "learner", "reliability"; missing keys keep defaults.
RunParams parse_run_params(std::string_view json_text);
std::string run_params_to_json(const RunParams& params);

}  // namespace sitrec
