#pragma once

// Company smart-environment simulator: three rooms, typed sensors, a
// derived previous-lights pseudo-sensor, ground-truth labeling rules and
// feasibility rules (both in the template XML format), scenario-driven
// random images, controlled label noise and optional sensor faults.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sitrec/core.hpp"
#include "sitrec/decision_tree.hpp"
#include "sitrec/template_io.hpp"

namespace sitrec {

struct SensorDistribution {
  enum class Kind { bernoulli, uniform, constant };
  Kind kind = Kind::uniform;
  double p = 0.5;   ///< bernoulli probability of 1
  double lo = 0.0;  ///< uniform bounds, or the constant in `lo`
  double hi = 1.0;
};

/// A latent activity shaping the distribution of one image. Which label
/// the image gets is decided by the ground-truth rules, not the scenario.
struct Scenario {
  std::string name;
  double weight = 1.0;
  std::map<std::string, SensorDistribution> sensors;
};

enum class FaultMode { none, still_humans, outside_noise };

struct Simulation {
  EnvironmentSpec env;
  /// Evaluated in document order; the first matching situation labels the image.
  TemplateDocument ground_truth;
  /// Each template describes images that cannot happen.
  TemplateDocument feasibility;
  std::vector<Scenario> scenarios;
  std::map<std::string, FaultMode> fault_modes;
};

/// The shipped company environment (built into the library).
Simulation company_simulation();
TemplateDocument good_start_repository();
TemplateDocument bad_start_repository();

/// Reads `<dir>/<file>.env.json` and the XML files it names, relative to it.
Simulation load_simulation(const std::filesystem::path& config);
TemplateDocument load_repository(const std::filesystem::path& path, const EnvironmentSpec* env);

struct PinnedFault {
  std::string sensor;
  std::optional<double> value;  ///< empty: uniform random reading
};

struct FaultConfig {
  /// Probability that a motion sensor reads 0 while someone is present.
  double still_humans_rate = 0.0;
  /// Probability that a noise sensor picks up outside noise (high reading).
  double outside_noise_rate = 0.0;
  std::vector<PinnedFault> pinned;
};

struct GenerationParams {
  std::uint64_t seed = 42;
  std::size_t parts = 7;
  std::size_t min_part_size = 200;
  std::size_t max_part_size = 250;
  /// Overrides the random part sizes when nonempty (size must equal parts).
  std::vector<std::size_t> part_sizes;
  double error_rate = 0.02;
  std::int64_t start_timestamp = 1'500'000'000;
  FaultConfig faults;
  std::size_t max_attempts = 10'000;

  void check() const;
};

struct Dataset {
  std::vector<TrainingSet> parts;  ///< training parts, oldest first
  TrainingSet test;                ///< the last generated part
  /// Per generated part (training parts then test): indices whose label
  /// was reassigned, and the labels the ground truth gave.
  std::vector<std::vector<std::size_t>> corrupted;
  std::vector<std::vector<std::string>> true_labels;

  TrainingSet training_upto(std::size_t k) const;  ///< parts [0, k)
};

/// Sets every derived sensor from the previous image (0 without one).
void apply_derived(SensorImage& image, const SensorImage* previous, const EnvironmentSpec& env);

std::string ground_truth(const SensorImage& image, const TemplateDocument& rules);
/// Derives the previous-state sensors from `previous` first.
std::string ground_truth(SensorImage image, const SensorImage* previous, const Simulation& sim);
bool feasible(const SensorImage& image, const TemplateDocument& feasibility);

Dataset generate(const GenerationParams& params, const Simulation& sim);

/// Deterministic draws from a standard engine (portable across standard
/// libraries, unlike the std distributions).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sitrec
