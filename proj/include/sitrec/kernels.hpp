#pragma once

// Data-parallel inner loops. Every kernel has a serial reference twin with
// the same signature; the OpenMP versions must return identical results
// (tests/test_kernels.cpp compares them, bench/ times them).

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "sitrec/core.hpp"

namespace sitrec::kernels {

/// Row-major dense matrix of readings; NaN marks an absent reading.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c)
      : rows(r), cols(c), values(r * c, std::numeric_limits<double>::quiet_NaN()) {}

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
};

double entropy(std::span<const std::size_t> counts);

struct SplitScore {
  double gain = 0.0;
  double split_info = 0.0;
  double gain_ratio = 0.0;
};

/// Information gain and gain ratio of a binary partition given per-class
/// counts on each side.
SplitScore score_binary_split(std::span<const std::size_t> pass_counts,
                              std::span<const std::size_t> fail_counts);

/// Best binary test found on one feature for a node's rows. Continuous
/// features test `value <= threshold`, boolean ones `value == 1`.
struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  SplitScore score;
  bool valid = false;  ///< false when the feature is constant on the rows
};

struct SplitProblem {
  const FeatureMatrix* matrix = nullptr;
  std::span<const ValueKind> kinds;
  std::span<const std::uint32_t> labels;  ///< class id per matrix row
  std::size_t num_classes = 0;
};

/// One candidate per feature (index = feature), highest gain threshold
/// per feature, lower threshold on ties.
std::vector<SplitCandidate> split_candidates_serial(const SplitProblem& problem,
                                                    std::span<const std::size_t> rows);
std::vector<SplitCandidate> split_candidates_parallel(const SplitProblem& problem,
                                                      std::span<const std::size_t> rows);

struct CompiledCondition {
  std::size_t column = 0;
  Comparator comparator = Comparator::EQ;
  double operand = 0.0;
};

using CompiledPath = std::vector<CompiledCondition>;

struct CompiledSituation {
  std::vector<CompiledPath> paths;
};

enum class Hit : std::uint8_t { no = 0, yes = 1, missing = 2 };

/// result[row * situations.size() + s]. `missing` means some path of the
/// situation tests a column that is NaN on that row.
std::vector<Hit> recognize_rows_serial(const FeatureMatrix& images,
                                       std::span<const CompiledSituation> situations);
std::vector<Hit> recognize_rows_parallel(const FeatureMatrix& images,
                                         std::span<const CompiledSituation> situations);

}  // namespace sitrec::kernels
