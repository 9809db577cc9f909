#include "sitrec/simulator.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>

#include "shipped_data.hpp"
#include "sitrec/recognizer.hpp"

namespace sitrec {

using nlohmann::json;

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

namespace {

SensorDistribution parse_distribution(const std::string& sensor, const json& j) {
  SensorDistribution d;
  if (j.contains("bernoulli")) {
    d.kind = SensorDistribution::Kind::bernoulli;
    d.p = j.at("bernoulli").get<double>();
  } else if (j.contains("uniform")) {
    d.kind = SensorDistribution::Kind::uniform;
    d.lo = j.at("uniform").at(0).get<double>();
    d.hi = j.at("uniform").at(1).get<double>();
  } else if (j.contains("constant")) {
    d.kind = SensorDistribution::Kind::constant;
    d.lo = d.hi = j.at("constant").get<double>();
  } else {
    throw Error(ErrorCode::invalid_argument, "sensor '" + sensor + "': unknown distribution");
  }
  if (d.p < 0.0 || d.p > 1.0 || d.lo < 0.0 || d.hi > 1.0 || d.lo > d.hi) {
    throw Error(ErrorCode::invalid_argument, "sensor '" + sensor + "': distribution out of [0,1]");
  }
  return d;
}

Simulation simulation_from_json(std::string_view text,
                                const std::function<std::string(const std::string&)>& load) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::syntax, std::string("environment config: ") + e.what());
  }
  Simulation sim;
  try {
    auto& env = sim.env;
    env.name = j.value("name", "environment");
    env.tick_seconds = j.value("tick_seconds", 1);
    for (const auto& s : j.at("sensors")) {
      SensorType t;
      t.id = s.at("id").get<std::string>();
      const auto kind = s.at("kind").get<std::string>();
      if (kind == "boolean") t.kind = ValueKind::boolean;
      else if (kind == "continuous") t.kind = ValueKind::continuous;
      else throw Error(ErrorCode::invalid_argument, "sensor '" + t.id + "': unknown kind '" + kind + "'");
      const auto fault = s.value("fault", std::string("none"));
      if (fault == "still_humans") sim.fault_modes[t.id] = FaultMode::still_humans;
      else if (fault == "outside_noise") sim.fault_modes[t.id] = FaultMode::outside_noise;
      else if (fault != "none") throw Error(ErrorCode::invalid_argument, "unknown fault mode '" + fault + "'");
      env.sensors.push_back(std::move(t));
    }
    for (const auto& r : j.at("rooms")) {
      env.rooms.push_back({r.at("name").get<std::string>(), r.at("sensors").get<std::vector<std::string>>()});
    }
    env.situations = j.at("situations").get<std::vector<std::string>>();

    const auto& files = j.at("files");
    if (files.contains("derived")) {
      auto derived = parse_templates(load(files.at("derived").get<std::string>()));
      for (auto& t : derived.templates) env.derived.push_back({t.situation, std::move(t)});
    }
    check_environment(env);
    sim.ground_truth = parse_templates(load(files.at("ground_truth").get<std::string>()), &env);
    if (files.contains("feasibility")) {
      // Feasibility rules name forbidden image classes, not situations.
      sim.feasibility = parse_templates(load(files.at("feasibility").get<std::string>()));
    }
    for (const auto& s : j.at("scenarios")) {
      Scenario sc;
      sc.name = s.at("name").get<std::string>();
      sc.weight = s.value("weight", 1.0);
      if (!(sc.weight > 0.0)) throw Error(ErrorCode::invalid_argument, "scenario weight must be positive");
      for (const auto& [sensor, dist] : s.at("sensors").items()) {
        if (!env.find_sensor(sensor)) {
          throw Error(ErrorCode::invalid_argument, "scenario '" + sc.name + "' names unknown sensor '" + sensor + "'");
        }
        sc.sensors[sensor] = parse_distribution(sensor, dist);
      }
      sim.scenarios.push_back(std::move(sc));
    }
    if (sim.scenarios.empty()) throw Error(ErrorCode::invalid_argument, "no scenarios");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema, std::string("environment config: ") + e.what());
  }
  return sim;
}

}  // namespace

Simulation company_simulation() {
  return simulation_from_json(shipped::company_env_json, [](const std::string& name) -> std::string {
    if (name == "company.derived.stpl.xml") return std::string(shipped::company_derived_xml);
    if (name == "company.truth.stpl.xml") return std::string(shipped::company_truth_xml);
    if (name == "company.feasibility.stpl.xml") return std::string(shipped::company_feasibility_xml);
    throw Error(ErrorCode::io, "no built-in file '" + name + "'");
  });
}

TemplateDocument good_start_repository() {
  auto sim = company_simulation();
  return parse_templates(shipped::good_start_xml, &sim.env);
}

TemplateDocument bad_start_repository() {
  auto sim = company_simulation();
  return parse_templates(shipped::bad_start_xml, &sim.env);
}

Simulation load_simulation(const std::filesystem::path& config) {
  const auto dir = config.parent_path();
  return simulation_from_json(read_file(config),
                              [&](const std::string& name) { return read_file(dir / name); });
}

TemplateDocument load_repository(const std::filesystem::path& path, const EnvironmentSpec* env) {
  return parse_templates(read_file(path), env);
}

void GenerationParams::check() const {
  if (parts < 2) throw Error(ErrorCode::invalid_argument, "need at least one training part and a test part");
  if (part_sizes.empty() && (min_part_size > max_part_size || max_part_size == 0)) {
    throw Error(ErrorCode::invalid_argument, "bad part size range");
  }
  if (!part_sizes.empty() && part_sizes.size() != parts) {
    throw Error(ErrorCode::invalid_argument, "part_sizes must list every part");
  }
  if (error_rate < 0.0 || error_rate > 1.0) throw Error(ErrorCode::invalid_argument, "error_rate outside [0,1]");
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(faults.still_humans_rate) || !unit(faults.outside_noise_rate)) {
    throw Error(ErrorCode::invalid_argument, "fault rates outside [0,1]");
  }
}

TrainingSet Dataset::training_upto(std::size_t k) const {
  TrainingSet out;
  out.features = test.features;
  for (std::size_t i = 0; i < k && i < parts.size(); ++i) {
    out.items.insert(out.items.end(), parts[i].items.begin(), parts[i].items.end());
  }
  return out;
}

void apply_derived(SensorImage& image, const SensorImage* previous, const EnvironmentSpec& env) {
  for (const auto& d : env.derived) {
    image.readings[d.sensor] = previous && eval_template(d.rule, *previous) ? 1.0 : 0.0;
  }
}

std::string ground_truth(const SensorImage& image, const TemplateDocument& rules) {
  for (const auto& t : rules.templates) {
    if (eval_template(t, image)) return t.situation;
  }
  return std::string(kNoneLabel);
}

std::string ground_truth(SensorImage image, const SensorImage* previous, const Simulation& sim) {
  apply_derived(image, previous, sim.env);
  return ground_truth(image, sim.ground_truth);
}

bool feasible(const SensorImage& image, const TemplateDocument& feasibility) {
  return std::none_of(feasibility.templates.begin(), feasibility.templates.end(),
                      [&](const SituationTemplate& t) { return eval_template(t, image); });
}

namespace {

double quantize(double v) {
  return std::clamp(std::round(v * 1000.0), 0.0, 1000.0) / 1000.0;
}

double draw(Rng& rng, const SensorType& sensor, const SensorDistribution* dist) {
  if (!dist) {
    return sensor.kind == ValueKind::boolean ? (rng.bernoulli(0.5) ? 1.0 : 0.0) : quantize(rng.uniform01());
  }
  switch (dist->kind) {
    case SensorDistribution::Kind::bernoulli:
      return rng.bernoulli(dist->p) ? 1.0 : 0.0;
    case SensorDistribution::Kind::constant:
      return sensor.kind == ValueKind::boolean ? (dist->lo >= 0.5 ? 1.0 : 0.0) : quantize(dist->lo);
    case SensorDistribution::Kind::uniform: {
      const double v = rng.uniform(dist->lo, dist->hi);
      return sensor.kind == ValueKind::boolean ? (v >= 0.5 ? 1.0 : 0.0) : quantize(v);
    }
  }
  return 0.0;
}

const Scenario& pick_scenario(Rng& rng, const std::vector<Scenario>& scenarios) {
  double total = 0.0;
  for (const auto& s : scenarios) total += s.weight;
  double u = rng.uniform01() * total;
  for (const auto& s : scenarios) {
    if (u < s.weight) return s;
    u -= s.weight;
  }
  return scenarios.back();
}

bool is_derived(const EnvironmentSpec& env, const std::string& id) {
  return std::any_of(env.derived.begin(), env.derived.end(),
                     [&](const DerivedSensor& d) { return d.sensor == id; });
}

SensorImage observe(Rng& rng, const SensorImage& truth, const Simulation& sim, const FaultConfig& faults) {
  SensorImage seen = truth;
  for (const auto& [id, mode] : sim.fault_modes) {
    auto it = seen.readings.find(id);
    if (it == seen.readings.end() || !it->second) continue;
    if (mode == FaultMode::still_humans && *it->second == 1.0 && faults.still_humans_rate > 0.0 &&
        rng.bernoulli(faults.still_humans_rate)) {
      it->second = 0.0;
    } else if (mode == FaultMode::outside_noise && faults.outside_noise_rate > 0.0 &&
               rng.bernoulli(faults.outside_noise_rate)) {
      it->second = quantize(rng.uniform(0.6, 1.0));
    }
  }
  for (const auto& pin : faults.pinned) {
    const auto* sensor = sim.env.find_sensor(pin.sensor);
    if (!sensor) throw Error(ErrorCode::unknown_sensor, "pinned fault on unknown sensor '" + pin.sensor + "'");
    seen.readings[pin.sensor] = pin.value ? *pin.value : draw(rng, *sensor, nullptr);
  }
  return seen;
}

}  // namespace

Dataset generate(const GenerationParams& params, const Simulation& sim) {
  params.check();
  check_environment(sim.env);
  if (sim.scenarios.empty()) throw Error(ErrorCode::invalid_argument, "simulation has no scenarios");
  Rng rng(params.seed);

  std::vector<std::size_t> sizes = params.part_sizes;
  if (sizes.empty()) {
    for (std::size_t i = 0; i < params.parts; ++i) {
      sizes.push_back(params.min_part_size + rng.below(params.max_part_size - params.min_part_size + 1));
    }
  }

  const auto labels = sim.env.labels();
  Dataset out;
  std::optional<SensorImage> prev_truth, prev_seen;
  std::int64_t tick = 0;

  for (std::size_t part = 0; part < params.parts; ++part) {
    TrainingSet set = TrainingSet::for_environment(sim.env);
    std::vector<std::string> truth_labels;
    for (std::size_t n = 0; n < sizes[part]; ++n) {
      SensorImage truth, seen;
      std::size_t attempts = 0;
      for (;;) {
        if (++attempts > params.max_attempts) {
          throw Error(ErrorCode::infeasible_rule_set,
                      "no feasible image after " + std::to_string(params.max_attempts) + " draws");
        }
        const auto& scenario = pick_scenario(rng, sim.scenarios);
        truth = SensorImage{};
        truth.timestamp = params.start_timestamp + tick * sim.env.tick_seconds;
        for (const auto& sensor : sim.env.sensors) {
          if (is_derived(sim.env, sensor.id)) continue;
          auto it = scenario.sensors.find(sensor.id);
          truth.readings[sensor.id] = draw(rng, sensor, it == scenario.sensors.end() ? nullptr : &it->second);
        }
        seen = observe(rng, truth, sim, params.faults);
        apply_derived(truth, prev_truth ? &*prev_truth : nullptr, sim.env);
        apply_derived(seen, prev_seen ? &*prev_seen : nullptr, sim.env);
        if (feasible(truth, sim.feasibility) && feasible(seen, sim.feasibility)) break;
      }
      truth_labels.push_back(ground_truth(truth, sim.ground_truth));
      set.items.push_back({seen, truth_labels.back()});
      prev_truth = truth;
      prev_seen = seen;
      ++tick;
    }

    // Label noise: exactly round(rate * N) distinct items get a different label.
    const auto count = static_cast<std::size_t>(
        std::llround(params.error_rate * static_cast<double>(set.items.size())));
    std::vector<std::size_t> order(set.items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
      std::swap(order[i], order[i + rng.below(order.size() - i)]);
    }
    std::vector<std::size_t> corrupted(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(corrupted.begin(), corrupted.end());
    for (auto i : corrupted) {
      std::vector<std::string> others;
      for (const auto& l : labels) {
        if (l != set.items[i].label) others.push_back(l);
      }
      if (!others.empty()) set.items[i].label = others[rng.below(others.size())];
    }

    out.corrupted.push_back(std::move(corrupted));
    out.true_labels.push_back(std::move(truth_labels));
    if (part + 1 == params.parts) out.test = std::move(set);
    else out.parts.push_back(std::move(set));
  }
  return out;
}

}  // namespace sitrec
