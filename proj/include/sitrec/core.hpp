#pragma once

// Domain types shared by every module: sensors, images, conditions,
// situation templates, DNF trees and metric rows. All are plain value
// types; nothing here mutates after construction.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sitrec/error.hpp"

namespace sitrec {

/// Reserved label for images in which no situation occurs.
inline constexpr std::string_view kNoneLabel = "none";

enum class ValueKind { boolean, continuous };

struct SensorType {
  std::string id;
  ValueKind kind = ValueKind::continuous;

  bool operator==(const SensorType&) const = default;
};

enum class Comparator { LT, LE, GT, GE, EQ, NE };

std::string_view to_string(Comparator c);
std::optional<Comparator> parse_comparator(std::string_view s);
/// Logical negation expressed as a comparator: GT<->LE, GE<->LT, EQ<->NE.
Comparator negate(Comparator c);
bool holds(Comparator c, double reading, double operand);

enum class OperandKind { threshold, exact };

std::string_view to_string(OperandKind k);

struct Operand {
  OperandKind kind = OperandKind::threshold;
  double value = 0.0;

  auto operator<=>(const Operand&) const = default;
};

struct Condition {
  std::string sensor;
  Comparator comparator = Comparator::EQ;
  Operand operand;

  static Condition threshold(std::string sensor, Comparator c, double value) {
    return {std::move(sensor), c, {OperandKind::threshold, value}};
  }
  static Condition exact(std::string sensor, Comparator c, double value) {
    return {std::move(sensor), c, {OperandKind::exact, value}};
  }

  bool holds(double reading) const { return sitrec::holds(comparator, reading, operand.value); }

  auto operator<=>(const Condition&) const = default;
};

std::string to_string(const Condition& c);

/// One snapshot of every sensor of an environment. A sensor that did not
/// report is present as a key with an empty value.
struct SensorImage {
  std::int64_t timestamp = 0;
  std::map<std::string, std::optional<double>> readings;

  std::optional<double> value(const std::string& sensor) const;

  bool operator==(const SensorImage&) const = default;
};

struct LabeledImage {
  SensorImage image;
  std::string label;

  bool operator==(const LabeledImage&) const = default;
};

enum class NodeKind { condition, all_of, any_of };

/// Node of an expert situation template. Operator nodes (AND = all_of,
/// OR = any_of) own their children; condition nodes are leaves. The rare
/// flag is only meaningful on AND nodes.
struct TemplateNode {
  NodeKind kind = NodeKind::condition;
  Condition condition;
  std::vector<TemplateNode> children;
  bool rare = false;

  static TemplateNode leaf(Condition c);
  static TemplateNode all_of(std::vector<TemplateNode> children, bool rare = false);
  static TemplateNode any_of(std::vector<TemplateNode> children);

  bool is_operator() const { return kind != NodeKind::condition; }
  bool operator==(const TemplateNode&) const = default;
};

struct SituationTemplate {
  std::string situation;
  TemplateNode root;

  bool operator==(const SituationTemplate&) const = default;
};

/// Returns a description of the first structural violation, if any:
/// operator root, OR nodes with >= 2 children, AND nodes with >= 1 child
/// (a single child only when it is a condition), rare only on AND.
std::optional<std::string> template_problem(const SituationTemplate& t);

/// One conjunction of a DNF tree. purity/cardinality are set only for
/// paths that came from (or were updated by) the decision tree.
struct DnfPath {
  std::vector<Condition> conditions;
  std::optional<double> purity;
  std::optional<std::size_t> cardinality;
  bool rare = false;

  bool operator==(const DnfPath&) const = default;
};

std::string to_string(const DnfPath& p);

/// situation -> OR -> AND* -> Condition*. The OR node is implicit in the
/// paths list.
struct DnfTree {
  std::string situation;
  std::vector<DnfPath> paths;

  bool operator==(const DnfTree&) const = default;
};

/// Checks the root/OR/AND/condition shape plus the path invariants
/// (nonempty paths, no contradictory exact values on one sensor, situation
/// is not the reserved label).
std::optional<std::string> dnf_problem(const DnfTree& d);

struct Room {
  std::string name;
  std::vector<std::string> sensors;

  bool operator==(const Room&) const = default;
};

/// Pseudo-sensor whose value at tick t is 1 iff `rule` held on the image
/// of tick t-1 (0 for the first image).
struct DerivedSensor {
  std::string sensor;
  SituationTemplate rule;

  bool operator==(const DerivedSensor&) const = default;
};

struct EnvironmentSpec {
  std::string name;
  std::vector<Room> rooms;
  std::vector<SensorType> sensors;
  std::vector<DerivedSensor> derived;
  std::vector<std::string> situations;
  int tick_seconds = 1;

  const SensorType* find_sensor(std::string_view id) const;
  std::vector<std::string> sensor_ids() const;
  /// Declared situations plus the reserved "none" label.
  std::vector<std::string> labels() const;
  bool is_label(std::string_view label) const;
};

/// Throws Error(invalid_argument) when ids are empty/duplicated, a room
/// names an undeclared sensor, or a situation reuses the reserved label.
void check_environment(const EnvironmentSpec& env);

struct ValidationIssue {
  ErrorCode code;
  std::string sensor;
  std::string message;
};

struct ValidationResult {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
};

ValidationResult validate_image(const SensorImage& image, const EnvironmentSpec& env);

enum class MetricSource { initial_template, updated_template, decision_tree };

std::string_view to_string(MetricSource s);
std::optional<MetricSource> parse_metric_source(std::string_view s);

struct MetricsRow {
  std::string situation;
  int step = 0;
  MetricSource source = MetricSource::initial_template;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;

  bool operator==(const MetricsRow&) const = default;
};

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);
std::optional<double> parse_number(std::string_view s);

}  // namespace sitrec
