#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sitrec/core.hpp"
#include "sitrec/dnf.hpp"
#include "sitrec/kernels.hpp"
#include "sitrec/template_io.hpp"

namespace sitrec {

using SituationSet = std::set<std::string>;

bool eval_path(const DnfPath& path, const SensorImage& image);

/// Direct evaluation of the expert tree, without DNF conversion.
bool eval_template(const SituationTemplate& t, const SensorImage& image);

/// Immutable snapshot of a repository compiled to DNF paths over sensor
/// columns. Safe to share between threads.
class Recognizer {
 public:
  explicit Recognizer(const TemplateDocument& repo, const DnfOptions& options = {});

  SituationSet recognize(const SensorImage& image) const;
  std::vector<SituationSet> recognize_batch(std::span<const SensorImage> images,
                                            bool parallel = true) const;

  const std::vector<DnfTree>& dnfs() const { return dnfs_; }
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  kernels::FeatureMatrix to_matrix(std::span<const SensorImage> images) const;
  [[noreturn]] void raise_missing(const SensorImage& image, std::size_t situation) const;

  std::vector<DnfTree> dnfs_;
  std::vector<std::string> columns_;
  std::vector<kernels::CompiledSituation> compiled_;
};

SituationSet recognize(const TemplateDocument& repo, const SensorImage& image);

struct StreamResult {
  std::int64_t timestamp = 0;
  SituationSet situations;

  bool operator==(const StreamResult&) const = default;
};

/// Throws OutOfOrderTimestamp when a timestamp decreases.
std::vector<StreamResult> recognize_stream(const TemplateDocument& repo,
                                           std::span<const SensorImage> images);

}  // namespace sitrec
