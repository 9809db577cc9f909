#include "sitrec/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace sitrec {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::unknown_sensor: return "UnknownSensor";
    case ErrorCode::out_of_range: return "OutOfRange";
    case ErrorCode::missing_sensor: return "MissingSensor";
    case ErrorCode::syntax: return "SyntaxError";
    case ErrorCode::schema: return "SchemaError";
    case ErrorCode::semantic: return "SemanticError";
    case ErrorCode::io: return "IoError";
    case ErrorCode::concurrent_modification: return "ConcurrentModification";
    case ErrorCode::empty_training_set: return "EmptyTrainingSet";
    case ErrorCode::missing_feature: return "MissingFeature";
    case ErrorCode::expansion_limit: return "ExpansionLimit";
    case ErrorCode::empty_dnf: return "EmptyDnf";
    case ErrorCode::missing_annotation: return "MissingAnnotation";
    case ErrorCode::label_mismatch: return "LabelMismatch";
    case ErrorCode::missing_sensor_value: return "MissingSensorValue";
    case ErrorCode::out_of_order_timestamp: return "OutOfOrderTimestamp";
    case ErrorCode::infeasible_rule_set: return "InfeasibleRuleSet";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

std::string_view to_string(Comparator c) {
  switch (c) {
    case Comparator::LT: return "LT";
    case Comparator::LE: return "LE";
    case Comparator::GT: return "GT";
    case Comparator::GE: return "GE";
    case Comparator::EQ: return "EQ";
    case Comparator::NE: return "NE";
  }
  return "?";
}

std::optional<Comparator> parse_comparator(std::string_view s) {
  for (auto c : {Comparator::LT, Comparator::LE, Comparator::GT, Comparator::GE, Comparator::EQ,
                 Comparator::NE}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

Comparator negate(Comparator c) {
  switch (c) {
    case Comparator::LT: return Comparator::GE;
    case Comparator::LE: return Comparator::GT;
    case Comparator::GT: return Comparator::LE;
    case Comparator::GE: return Comparator::LT;
    case Comparator::EQ: return Comparator::NE;
    case Comparator::NE: return Comparator::EQ;
  }
  return c;
}

bool holds(Comparator c, double reading, double operand) {
  switch (c) {
    case Comparator::LT: return reading < operand;
    case Comparator::LE: return reading <= operand;
    case Comparator::GT: return reading > operand;
    case Comparator::GE: return reading >= operand;
    case Comparator::EQ: return reading == operand;
    case Comparator::NE: return reading != operand;
  }
  return false;
}

std::string_view to_string(OperandKind k) {
  return k == OperandKind::threshold ? "threshold" : "exact";
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return {buf, end};
}

std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string to_string(const Condition& c) {
  return c.sensor + " " + std::string(to_string(c.comparator)) + " " +
         format_number(c.operand.value);
}

std::string to_string(const DnfPath& p) {
  std::string out = "[";
  for (std::size_t i = 0; i < p.conditions.size(); ++i) {
    if (i) out += " & ";
    out += to_string(p.conditions[i]);
  }
  out += "]";
  if (p.rare) out += " rare";
  return out;
}

std::optional<double> SensorImage::value(const std::string& sensor) const {
  auto it = readings.find(sensor);
  if (it == readings.end()) return std::nullopt;
  return it->second;
}

TemplateNode TemplateNode::leaf(Condition c) {
  TemplateNode n;
  n.kind = NodeKind::condition;
  n.condition = std::move(c);
  return n;
}

TemplateNode TemplateNode::all_of(std::vector<TemplateNode> children, bool rare) {
  TemplateNode n;
  n.kind = NodeKind::all_of;
  n.children = std::move(children);
  n.rare = rare;
  return n;
}

TemplateNode TemplateNode::any_of(std::vector<TemplateNode> children) {
  TemplateNode n;
  n.kind = NodeKind::any_of;
  n.children = std::move(children);
  return n;
}

namespace {

std::optional<std::string> node_problem(const TemplateNode& n, const std::string& where) {
  switch (n.kind) {
    case NodeKind::condition:
      if (!n.children.empty()) return where + ": condition node has children";
      if (n.rare) return where + ": rare flag on a condition";
      if (n.condition.sensor.empty()) return where + ": condition without sensor";
      if (n.condition.operand.kind == OperandKind::exact &&
          n.condition.comparator != Comparator::EQ && n.condition.comparator != Comparator::NE) {
        return where + ": exact operand requires EQ or NE";
      }
      return std::nullopt;
    case NodeKind::any_of:
      if (n.rare) return where + ": rare flag on an OR node";
      if (n.children.size() < 2) return where + ": OR node needs at least two children";
      break;
    case NodeKind::all_of:
      if (n.children.empty()) return where + ": AND node without children";
      if (n.children.size() == 1 && n.children.front().is_operator()) {
        return where + ": single-child AND over an operator";
      }
      break;
  }
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    auto child = where + "/" + (n.children[i].kind == NodeKind::condition ? "condition"
                                : n.children[i].kind == NodeKind::all_of  ? "and"
                                                                         : "or") +
                 "[" + std::to_string(i) + "]";
    if (auto p = node_problem(n.children[i], child)) return p;
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> template_problem(const SituationTemplate& t) {
  if (t.situation.empty()) return "template without situation name";
  if (t.situation == kNoneLabel) return "template uses the reserved label 'none'";
  if (!t.root.is_operator()) return t.situation + ": root must be an operator node";
  return node_problem(t.root, t.situation);
}

std::optional<std::string> dnf_problem(const DnfTree& d) {
  if (d.situation.empty()) return "DNF tree without situation";
  if (d.situation == kNoneLabel) return "DNF tree uses the reserved label 'none'";
  for (std::size_t i = 0; i < d.paths.size(); ++i) {
    const auto& p = d.paths[i];
    auto where = d.situation + " path " + std::to_string(i);
    if (p.conditions.empty()) return where + ": empty path";
    if (p.purity && (*p.purity < 0.0 || *p.purity > 1.0)) return where + ": purity out of [0,1]";
    if (p.purity.has_value() != p.cardinality.has_value()) {
      return where + ": purity and cardinality must be set together";
    }
    std::map<std::string, double> eq;
    for (const auto& c : p.conditions) {
      if (c.sensor.empty()) return where + ": condition without sensor";
      if (c.operand.kind != OperandKind::exact || c.comparator != Comparator::EQ) continue;
      auto [it, inserted] = eq.emplace(c.sensor, c.operand.value);
      if (!inserted && it->second != c.operand.value) {
        return where + ": contradictory exact values on " + c.sensor;
      }
    }
    for (const auto& c : p.conditions) {
      if (c.operand.kind != OperandKind::exact || c.comparator != Comparator::NE) continue;
      auto it = eq.find(c.sensor);
      if (it != eq.end() && it->second == c.operand.value) {
        return where + ": contradictory exact values on " + c.sensor;
      }
    }
  }
  return std::nullopt;
}

const SensorType* EnvironmentSpec::find_sensor(std::string_view id) const {
  for (const auto& s : sensors) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::vector<std::string> EnvironmentSpec::sensor_ids() const {
  std::vector<std::string> ids;
  ids.reserve(sensors.size());
  for (const auto& s : sensors) ids.push_back(s.id);
  return ids;
}

std::vector<std::string> EnvironmentSpec::labels() const {
  auto out = situations;
  out.emplace_back(kNoneLabel);
  return out;
}

bool EnvironmentSpec::is_label(std::string_view label) const {
  if (label == kNoneLabel) return true;
  return std::find(situations.begin(), situations.end(), label) != situations.end();
}

void check_environment(const EnvironmentSpec& env) {
  std::set<std::string> ids;
  for (const auto& s : env.sensors) {
    if (s.id.empty()) throw Error(ErrorCode::invalid_argument, "sensor with empty id");
    if (!ids.insert(s.id).second) {
      throw Error(ErrorCode::invalid_argument, "duplicate sensor id '" + s.id + "'");
    }
  }
  for (const auto& r : env.rooms) {
    for (const auto& s : r.sensors) {
      if (!ids.count(s)) {
        throw Error(ErrorCode::invalid_argument,
                    "room '" + r.name + "' lists undeclared sensor '" + s + "'");
      }
    }
  }
  for (const auto& d : env.derived) {
    const auto* s = env.find_sensor(d.sensor);
    if (!s || s->kind != ValueKind::boolean) {
      throw Error(ErrorCode::invalid_argument,
                  "derived sensor '" + d.sensor + "' must be a declared boolean sensor");
    }
  }
  std::set<std::string> names;
  for (const auto& s : env.situations) {
    if (s.empty() || s == kNoneLabel || !names.insert(s).second) {
      throw Error(ErrorCode::invalid_argument, "bad or duplicate situation name '" + s + "'");
    }
  }
  if (env.tick_seconds <= 0) throw Error(ErrorCode::invalid_argument, "tick must be positive");
}

ValidationResult validate_image(const SensorImage& image, const EnvironmentSpec& env) {
  ValidationResult result;
  for (const auto& [id, value] : image.readings) {
    const auto* sensor = env.find_sensor(id);
    if (!sensor) {
      result.issues.push_back({ErrorCode::unknown_sensor, id, "sensor '" + id + "' is not declared"});
      continue;
    }
    if (!value) continue;
    const double v = *value;
    const bool ok = sensor->kind == ValueKind::boolean ? (v == 0.0 || v == 1.0)
                                                       : (v >= 0.0 && v <= 1.0);
    if (!ok) {
      result.issues.push_back({ErrorCode::out_of_range, id,
                               "sensor '" + id + "' value " + format_number(v) + " out of range"});
    }
  }
  for (const auto& s : env.sensors) {
    auto it = image.readings.find(s.id);
    if (it == image.readings.end() || !it->second) {
      result.issues.push_back({ErrorCode::missing_sensor, s.id, "sensor '" + s.id + "' missing"});
    }
  }
  return result;
}

std::string_view to_string(MetricSource s) {
  switch (s) {
    case MetricSource::initial_template: return "initial_template";
    case MetricSource::updated_template: return "updated_template";
    case MetricSource::decision_tree: return "decision_tree";
  }
  return "?";
}

std::optional<MetricSource> parse_metric_source(std::string_view s) {
  for (auto m : {MetricSource::initial_template, MetricSource::updated_template,
                 MetricSource::decision_tree}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

}  // namespace sitrec
