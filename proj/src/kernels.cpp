#include "sitrec/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sitrec::kernels {

double entropy(std::span<const std::size_t> counts) {
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  if (total == 0.0) return 0.0;
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

SplitScore score_binary_split(std::span<const std::size_t> pass_counts,
                              std::span<const std::size_t> fail_counts) {
  std::vector<std::size_t> all(pass_counts.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = pass_counts[i] + fail_counts[i];
  const double n_pass = static_cast<double>(std::accumulate(pass_counts.begin(), pass_counts.end(), std::size_t{0}));
  const double n_fail = static_cast<double>(std::accumulate(fail_counts.begin(), fail_counts.end(), std::size_t{0}));
  const double n = n_pass + n_fail;
  SplitScore s;
  if (n == 0.0) return s;
  const std::size_t sides[2] = {static_cast<std::size_t>(n_pass), static_cast<std::size_t>(n_fail)};
  s.gain = entropy(all) - (n_pass / n) * entropy(pass_counts) - (n_fail / n) * entropy(fail_counts);
  s.split_info = entropy(sides);
  s.gain_ratio = s.split_info > 0.0 ? s.gain / s.split_info : 0.0;
  return s;
}

namespace {

SplitCandidate best_for_feature(const SplitProblem& problem, std::span<const std::size_t> rows,
                                std::size_t feature) {
  SplitCandidate best;
  best.feature = feature;
  const auto& m = *problem.matrix;
  const std::size_t k = problem.num_classes;

  if (problem.kinds[feature] == ValueKind::boolean) {
    std::vector<std::size_t> pass(k, 0), fail(k, 0);
    for (auto r : rows) {
      (m.at(r, feature) == 1.0 ? pass : fail)[problem.labels[r]]++;
    }
    const auto n_pass = std::accumulate(pass.begin(), pass.end(), std::size_t{0});
    if (n_pass == 0 || n_pass == rows.size()) return best;
    best.threshold = 0.5;
    best.score = score_binary_split(pass, fail);
    best.valid = true;
    return best;
  }

  std::vector<std::pair<double, std::uint32_t>> column;
  column.reserve(rows.size());
  for (auto r : rows) column.emplace_back(m.at(r, feature), problem.labels[r]);
  std::sort(column.begin(), column.end());

  std::vector<std::size_t> pass(k, 0), fail(k, 0);
  for (const auto& [v, label] : column) fail[label]++;
  for (std::size_t i = 0; i + 1 < column.size(); ++i) {
    pass[column[i].second]++;
    fail[column[i].second]--;
    const double lo = column[i].first;
    const double hi = column[i + 1].first;
    if (lo == hi) continue;
    double mid = lo + (hi - lo) / 2.0;
    if (!(mid < hi)) mid = lo;
    const auto score = score_binary_split(pass, fail);
    if (!best.valid || score.gain > best.score.gain + 1e-12) {
      best.valid = true;
      best.threshold = mid;
      best.score = score;
    }
  }
  return best;
}

}  // namespace

std::vector<SplitCandidate> split_candidates_serial(const SplitProblem& problem,
                                                    std::span<const std::size_t> rows) {
  std::vector<SplitCandidate> out(problem.kinds.size());
  for (std::size_t f = 0; f < out.size(); ++f) out[f] = best_for_feature(problem, rows, f);
  return out;
}

std::vector<SplitCandidate> split_candidates_parallel(const SplitProblem& problem,
                                                      std::span<const std::size_t> rows) {
  const auto features = static_cast<std::ptrdiff_t>(problem.kinds.size());
  std::vector<SplitCandidate> out(problem.kinds.size());
#pragma omp parallel for schedule(dynamic, 1) if (rows.size() > 256)
  for (std::ptrdiff_t f = 0; f < features; ++f) {
    out[static_cast<std::size_t>(f)] = best_for_feature(problem, rows, static_cast<std::size_t>(f));
  }
  return out;
}

namespace {

Hit eval_situation(const FeatureMatrix& images, std::size_t row, const CompiledSituation& s) {
  const double* values = images.values.data() + row * images.cols;
  bool hit = false;
  for (const auto& path : s.paths) {
    bool all = true;
    for (const auto& c : path) {
      const double v = values[c.column];
      if (std::isnan(v)) return Hit::missing;
      if (all && !holds(c.comparator, v, c.operand)) all = false;
    }
    hit = hit || all;
  }
  return hit ? Hit::yes : Hit::no;
}

}  // namespace

std::vector<Hit> recognize_rows_serial(const FeatureMatrix& images,
                                       std::span<const CompiledSituation> situations) {
  std::vector<Hit> out(images.rows * situations.size(), Hit::no);
  for (std::size_t r = 0; r < images.rows; ++r) {
    for (std::size_t s = 0; s < situations.size(); ++s) {
      out[r * situations.size() + s] = eval_situation(images, r, situations[s]);
    }
  }
  return out;
}

std::vector<Hit> recognize_rows_parallel(const FeatureMatrix& images,
                                         std::span<const CompiledSituation> situations) {
  std::vector<Hit> out(images.rows * situations.size(), Hit::no);
  const auto rows = static_cast<std::ptrdiff_t>(images.rows);
#pragma omp parallel for schedule(static) if (images.rows > 512)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const auto row = static_cast<std::size_t>(r);
    for (std::size_t s = 0; s < situations.size(); ++s) {
      out[row * situations.size() + s] = eval_situation(images, row, situations[s]);
    }
  }
  return out;
}

}  // namespace sitrec::kernels
