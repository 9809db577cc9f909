#pragma once

#include <random>
#include <string>
#include <vector>

#include "sitrec/core.hpp"
#include "sitrec/decision_tree.hpp"
#include "sitrec/template_io.hpp"

namespace testing_support {

using namespace sitrec;

inline EnvironmentSpec boolean_env(int sensors, std::vector<std::string> situations = {"S"}) {
  EnvironmentSpec env;
  env.name = "bool";
  for (int i = 0; i < sensors; ++i) env.sensors.push_back({"b" + std::to_string(i), ValueKind::boolean});
  env.situations = std::move(situations);
  return env;
}

/// Working room of the shipped environment without the derived sensor.
inline EnvironmentSpec working_room_env() {
  EnvironmentSpec env;
  env.name = "working";
  env.sensors = {{"work_motion", ValueKind::boolean},
                 {"work_light", ValueKind::continuous},
                 {"work_noise", ValueKind::continuous},
                 {"work_tv", ValueKind::boolean}};
  env.rooms = {{"working_room", {"work_motion", "work_light", "work_noise", "work_tv"}}};
  env.situations = {"Working", "Educating"};
  return env;
}

inline SensorImage image(std::int64_t ts, std::vector<std::pair<std::string, double>> values) {
  SensorImage img;
  img.timestamp = ts;
  for (auto& [k, v] : values) img.readings[k] = v;
  return img;
}

inline DnfPath path(std::vector<Condition> conditions, std::optional<double> purity = std::nullopt,
                    std::optional<std::size_t> cardinality = std::nullopt, bool rare = false) {
  return {std::move(conditions), purity, cardinality, rare};
}

inline Condition th(const std::string& s, Comparator c, double v) { return Condition::threshold(s, c, v); }
inline Condition ex(const std::string& s, double v) { return Condition::exact(s, Comparator::EQ, v); }

/// Direct recursive evaluation, written independently of the library.
inline bool eval_tree(const TemplateNode& n, const std::vector<int>& bits) {
  if (n.kind == NodeKind::condition) {
    const int idx = std::stoi(n.condition.sensor.substr(1));
    const bool eq = bits[idx] == static_cast<int>(n.condition.operand.value);
    return n.condition.comparator == Comparator::EQ ? eq : !eq;
  }
  if (n.kind == NodeKind::all_of) {
    for (const auto& c : n.children) {
      if (!eval_tree(c, bits)) return false;
    }
    return true;
  }
  for (const auto& c : n.children) {
    if (eval_tree(c, bits)) return true;
  }
  return false;
}

/// Random valid template over boolean sensors b0..b{sensors-1}.
class TemplateGen {
 public:
  TemplateGen(std::uint64_t seed, int sensors) : rng_(seed), sensors_(sensors) {}

  SituationTemplate make(const std::string& name = "S", int max_depth = 3) {
    return {name, op(max_depth, rng_() % 2 == 0)};
  }

 private:
  TemplateNode leaf() {
    const auto s = "b" + std::to_string(rng_() % sensors_);
    const auto cmp = rng_() % 3 == 0 ? Comparator::NE : Comparator::EQ;
    return TemplateNode::leaf(Condition::exact(s, cmp, static_cast<double>(rng_() % 2)));
  }

  TemplateNode op(int depth, bool is_and) {
    const int n = 2 + static_cast<int>(rng_() % 2);
    std::vector<TemplateNode> children;
    for (int i = 0; i < n; ++i) {
      if (depth > 1 && rng_() % 3 == 0) children.push_back(op(depth - 1, !is_and));
      else children.push_back(leaf());
    }
    if (is_and) return TemplateNode::all_of(std::move(children), rng_() % 4 == 0);
    return TemplateNode::any_of(std::move(children));
  }

  std::mt19937_64 rng_;
  int sensors_;
};

}  // namespace testing_support
