#include "sitrec/dataset_io.hpp"

#include <json.hpp>

#include <algorithm>

namespace sitrec {

using nlohmann::json;

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> lines(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto l : split(text, '\n')) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    if (!l.empty()) out.push_back(l);
  }
  return out;
}

}  // namespace

std::string write_dataset_csv(const TrainingSet& data) {
  std::string out;
  for (const auto& f : data.features) {
    out += f.id;
    out += ',';
  }
  out += "timestamp,label\n";
  for (const auto& item : data.items) {
    for (const auto& f : data.features) {
      if (auto v = item.image.value(f.id)) out += format_number(*v);
      out += ',';
    }
    out += std::to_string(item.image.timestamp);
    out += ',';
    out += item.label;
    out += '\n';
  }
  return out;
}

CsvImages read_images_csv(std::string_view text, const EnvironmentSpec& env) {
  auto rows = lines(text);
  if (rows.empty()) throw Error(ErrorCode::schema, "CSV without header");
  auto header = split(rows.front(), ',');
  std::optional<std::size_t> ts_col, label_col;
  std::vector<std::string> columns;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string name(header[i]);
    if (name == "timestamp") ts_col = i;
    else if (name == "label") label_col = i;
    else if (!env.find_sensor(name)) throw Error(ErrorCode::unknown_sensor, "CSV column '" + name + "' is not a sensor");
    columns.push_back(std::move(name));
  }
  if (!ts_col) throw Error(ErrorCode::schema, "CSV lacks a timestamp column");

  CsvImages out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto fields = split(rows[r], ',');
    const auto where = "CSV line " + std::to_string(r + 1);
    if (fields.size() != header.size()) throw Error(ErrorCode::schema, where + ": wrong field count");
    SensorImage image;
    for (const auto& s : env.sensors) image.readings[s.id] = std::nullopt;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c == *ts_col) {
        auto ts = parse_number(fields[c]);
        if (!ts || *ts != static_cast<double>(static_cast<std::int64_t>(*ts))) {
          throw Error(ErrorCode::schema, where + ": bad timestamp");
        }
        image.timestamp = static_cast<std::int64_t>(*ts);
      } else if (label_col && c == *label_col) {
        std::string label(fields[c]);
        if (!env.is_label(label)) throw Error(ErrorCode::schema, where + ": unknown label '" + label + "'");
        out.labels.push_back(std::move(label));
      } else if (!fields[c].empty()) {
        auto v = parse_number(fields[c]);
        if (!v) throw Error(ErrorCode::schema, where + ": '" + std::string(fields[c]) + "' is not a number");
        image.readings[columns[c]] = *v;
      }
    }
    auto check = validate_image(image, env);
    for (const auto& issue : check.issues) {
      if (issue.code != ErrorCode::missing_sensor) throw Error(issue.code, where + ": " + issue.message);
    }
    out.images.push_back(std::move(image));
  }
  return out;
}

TrainingSet read_dataset_csv(std::string_view text, const EnvironmentSpec& env) {
  auto csv = read_images_csv(text, env);
  if (csv.labels.size() != csv.images.size()) throw Error(ErrorCode::schema, "dataset CSV lacks a label column");
  TrainingSet out = TrainingSet::for_environment(env);
  for (std::size_t i = 0; i < csv.images.size(); ++i) {
    out.items.push_back({std::move(csv.images[i]), std::move(csv.labels[i])});
  }
  return out;
}

std::string write_recognition_csv(const std::vector<StreamResult>& results) {
  std::string out = "timestamp,situations\n";
  for (const auto& r : results) {
    out += std::to_string(r.timestamp);
    out += ',';
    bool first = true;
    for (const auto& s : r.situations) {
      if (!first) out += '|';
      out += s;
      first = false;
    }
    out += '\n';
  }
  return out;
}

std::string tree_to_json(const DecisionTree& tree) {
  json j;
  j["features"] = json::array();
  for (const auto& f : tree.features) {
    j["features"].push_back({{"id", f.id}, {"kind", f.kind == ValueKind::boolean ? "boolean" : "continuous"}});
  }
  j["nodes"] = json::array();
  for (const auto& n : tree.nodes) {
    json node;
    if (n.is_leaf) {
      node["label"] = n.label;
      node["purity"] = n.purity;
      node["cardinality"] = n.cardinality;
      node["majority_count"] = n.majority_count;
      node["class_counts"] = n.class_counts;
    } else {
      node["feature"] = n.feature;
      node["sensor"] = n.test.sensor;
      node["comparator"] = std::string(to_string(n.test.comparator));
      node["value"] = n.test.operand.value;
      node["kind"] = std::string(to_string(n.test.operand.kind));
      node["pass"] = n.pass;
      node["fail"] = n.fail;
      node["class_counts"] = n.class_counts;
      node["label"] = n.label;
      node["purity"] = n.purity;
      node["cardinality"] = n.cardinality;
      node["majority_count"] = n.majority_count;
    }
    j["nodes"].push_back(std::move(node));
  }
  return j.dump(1) + "\n";
}

DecisionTree tree_from_json(std::string_view text) {
  DecisionTree tree;
  try {
    auto j = json::parse(text);
    for (const auto& f : j.at("features")) {
      tree.features.push_back({f.at("id").get<std::string>(),
                               f.at("kind").get<std::string>() == "boolean" ? ValueKind::boolean
                                                                            : ValueKind::continuous});
    }
    for (const auto& node : j.at("nodes")) {
      TreeNode n;
      n.label = node.at("label").get<std::string>();
      n.purity = node.at("purity").get<double>();
      n.cardinality = node.at("cardinality").get<std::size_t>();
      n.majority_count = node.at("majority_count").get<std::size_t>();
      n.class_counts = node.at("class_counts").get<std::map<std::string, std::size_t>>();
      if (node.contains("sensor")) {
        n.is_leaf = false;
        n.feature = node.at("feature").get<std::size_t>();
        auto cmp = parse_comparator(node.at("comparator").get<std::string>());
        if (!cmp) throw Error(ErrorCode::schema, "tree: bad comparator");
        n.test = Condition{node.at("sensor").get<std::string>(), *cmp,
                           {node.at("kind").get<std::string>() == "exact" ? OperandKind::exact
                                                                          : OperandKind::threshold,
                            node.at("value").get<double>()}};
        n.pass = node.at("pass").get<int>();
        n.fail = node.at("fail").get<int>();
      }
      tree.nodes.push_back(std::move(n));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema, std::string("tree JSON: ") + e.what());
  }
  const auto n = static_cast<int>(tree.nodes.size());
  if (n == 0) throw Error(ErrorCode::schema, "tree JSON: no nodes");
  for (const auto& node : tree.nodes) {
    if (!node.is_leaf && (node.pass <= 0 || node.pass >= n || node.fail <= 0 || node.fail >= n)) {
      throw Error(ErrorCode::schema, "tree JSON: child index out of range");
    }
  }
  return tree;
}

RunParams parse_run_params(std::string_view json_text) {
  RunParams p;
  try {
    auto j = json::parse(json_text);
    if (j.contains("generation")) {
      const auto& g = j.at("generation");
      auto& o = p.generation;
      o.seed = g.value("seed", o.seed);
      o.parts = g.value("parts", o.parts);
      o.min_part_size = g.value("min_part_size", o.min_part_size);
      o.max_part_size = g.value("max_part_size", o.max_part_size);
      o.part_sizes = g.value("part_sizes", o.part_sizes);
      o.error_rate = g.value("error_rate", o.error_rate);
      o.start_timestamp = g.value("start_timestamp", o.start_timestamp);
      if (g.contains("faults")) {
        const auto& f = g.at("faults");
        o.faults.still_humans_rate = f.value("still_humans_rate", 0.0);
        o.faults.outside_noise_rate = f.value("outside_noise_rate", 0.0);
        for (const auto& pin : f.value("pinned", json::array())) {
          PinnedFault pf;
          pf.sensor = pin.at("sensor").get<std::string>();
          if (pin.contains("value")) pf.value = pin.at("value").get<double>();
          o.faults.pinned.push_back(std::move(pf));
        }
      }
    }
    if (j.contains("learner")) {
      const auto& l = j.at("learner");
      p.learner.min_leaf = l.value("min_leaf", p.learner.min_leaf);
      p.learner.pruning = l.value("pruning", p.learner.pruning);
      p.learner.confidence_factor = l.value("confidence_factor", p.learner.confidence_factor);
    }
    if (j.contains("reliability")) {
      const auto& r = j.at("reliability");
      auto& o = p.reliability;
      o.min_path_purity = r.value("min_path_purity", o.min_path_purity);
      o.min_path_cardinality = r.value("min_path_cardinality", o.min_path_cardinality);
      o.min_label_confidence = r.value("min_label_confidence", o.min_label_confidence);
      o.min_label_cardinality = r.value("min_label_cardinality", o.min_label_cardinality);
      o.similarity_floor = r.value("similarity_floor", o.similarity_floor);
      o.threshold_band = r.value("threshold_band", o.threshold_band);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema, std::string("params JSON: ") + e.what());
  }
  p.generation.check();
  p.reliability.check();
  return p;
}

std::string run_params_to_json(const RunParams& p) {
  json faults = {{"still_humans_rate", p.generation.faults.still_humans_rate},
                 {"outside_noise_rate", p.generation.faults.outside_noise_rate},
                 {"pinned", json::array()}};
  for (const auto& pin : p.generation.faults.pinned) {
    json j = {{"sensor", pin.sensor}};
    if (pin.value) j["value"] = *pin.value;
    faults["pinned"].push_back(std::move(j));
  }
  json j = {
      {"generation",
       {{"seed", p.generation.seed},
        {"parts", p.generation.parts},
        {"min_part_size", p.generation.min_part_size},
        {"max_part_size", p.generation.max_part_size},
        {"part_sizes", p.generation.part_sizes},
        {"error_rate", p.generation.error_rate},
        {"start_timestamp", p.generation.start_timestamp},
        {"faults", faults}}},
      {"learner",
       {{"min_leaf", p.learner.min_leaf},
        {"pruning", p.learner.pruning},
        {"confidence_factor", p.learner.confidence_factor}}},
      {"reliability",
       {{"min_path_purity", p.reliability.min_path_purity},
        {"min_path_cardinality", p.reliability.min_path_cardinality},
        {"min_label_confidence", p.reliability.min_label_confidence},
        {"min_label_cardinality", p.reliability.min_label_cardinality},
        {"similarity_floor", p.reliability.similarity_floor},
        {"threshold_band", p.reliability.threshold_band}}}};
  return j.dump(2) + "\n";
}

}  // namespace sitrec
