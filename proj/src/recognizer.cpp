#include "sitrec/recognizer.hpp"

#include <algorithm>

namespace sitrec {

namespace {

double reading(const SensorImage& image, const std::string& sensor, const std::string& context) {
  auto v = image.value(sensor);
  if (!v) {
    throw Error(ErrorCode::missing_sensor_value,
                "sensor '" + sensor + "' has no value" + (context.empty() ? "" : " (" + context + ")"));
  }
  return *v;
}

bool eval_node(const TemplateNode& n, const SensorImage& image, const std::string& situation) {
  switch (n.kind) {
    case NodeKind::condition:
      return n.condition.holds(reading(image, n.condition.sensor, "situation '" + situation + "'"));
    case NodeKind::all_of: {
      bool all = true;
      for (const auto& c : n.children) all = eval_node(c, image, situation) && all;
      return all;
    }
    case NodeKind::any_of: {
      bool any = false;
      for (const auto& c : n.children) any = eval_node(c, image, situation) || any;
      return any;
    }
  }
  return false;
}

}  // namespace

bool eval_path(const DnfPath& path, const SensorImage& image) {
  if (path.conditions.empty()) throw Error(ErrorCode::invalid_argument, "empty DNF path");
  bool all = true;
  for (const auto& c : path.conditions) all = c.holds(reading(image, c.sensor, "")) && all;
  return all;
}

bool eval_template(const SituationTemplate& t, const SensorImage& image) {
  return eval_node(t.root, image, t.situation);
}

Recognizer::Recognizer(const TemplateDocument& repo, const DnfOptions& options) {
  std::set<std::string> sensors;
  for (const auto& t : repo.templates) {
    dnfs_.push_back(template_to_dnf(t, options));
    for (const auto& p : dnfs_.back().paths) {
      for (const auto& c : p.conditions) sensors.insert(c.sensor);
    }
  }
  columns_.assign(sensors.begin(), sensors.end());
  for (const auto& d : dnfs_) {
    kernels::CompiledSituation cs;
    for (const auto& p : d.paths) {
      kernels::CompiledPath cp;
      for (const auto& c : p.conditions) {
        auto col = static_cast<std::size_t>(
            std::lower_bound(columns_.begin(), columns_.end(), c.sensor) - columns_.begin());
        cp.push_back({col, c.comparator, c.operand.value});
      }
      cs.paths.push_back(std::move(cp));
    }
    compiled_.push_back(std::move(cs));
  }
}

kernels::FeatureMatrix Recognizer::to_matrix(std::span<const SensorImage> images) const {
  kernels::FeatureMatrix m(images.size(), columns_.size());
  for (std::size_t r = 0; r < images.size(); ++r) {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (auto v = images[r].value(columns_[c])) m.at(r, c) = *v;
    }
  }
  return m;
}

void Recognizer::raise_missing(const SensorImage& image, std::size_t situation) const {
  for (const auto& p : dnfs_[situation].paths) {
    for (const auto& c : p.conditions) {
      if (!image.value(c.sensor)) {
        throw Error(ErrorCode::missing_sensor_value, "sensor '" + c.sensor + "' has no value (situation '" +
                                                         dnfs_[situation].situation + "')");
      }
    }
  }
  throw Error(ErrorCode::missing_sensor_value, "situation '" + dnfs_[situation].situation + "'");
}

SituationSet Recognizer::recognize(const SensorImage& image) const {
  return recognize_batch(std::span<const SensorImage>(&image, 1), false).front();
}

std::vector<SituationSet> Recognizer::recognize_batch(std::span<const SensorImage> images,
                                                      bool parallel) const {
  const auto matrix = to_matrix(images);
  const auto hits = parallel ? kernels::recognize_rows_parallel(matrix, compiled_)
                             : kernels::recognize_rows_serial(matrix, compiled_);
  std::vector<SituationSet> out(images.size());
  const std::size_t k = compiled_.size();
  for (std::size_t r = 0; r < images.size(); ++r) {
    for (std::size_t s = 0; s < k; ++s) {
      switch (hits[r * k + s]) {
        case kernels::Hit::yes: out[r].insert(dnfs_[s].situation); break;
        case kernels::Hit::missing: raise_missing(images[r], s);
        case kernels::Hit::no: break;
      }
    }
  }
  return out;
}

SituationSet recognize(const TemplateDocument& repo, const SensorImage& image) {
  return Recognizer(repo).recognize(image);
}

std::vector<StreamResult> recognize_stream(const TemplateDocument& repo,
                                           std::span<const SensorImage> images) {
  for (std::size_t i = 1; i < images.size(); ++i) {
    if (images[i].timestamp < images[i - 1].timestamp) {
      throw Error(ErrorCode::out_of_order_timestamp,
                  "image " + std::to_string(i) + " at t=" + std::to_string(images[i].timestamp) +
                      " precedes t=" + std::to_string(images[i - 1].timestamp));
    }
  }
  Recognizer recognizer(repo);
  auto sets = recognizer.recognize_batch(images);
  std::vector<StreamResult> out;
  out.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) out.push_back({images[i].timestamp, std::move(sets[i])});
  return out;
}

}  // namespace sitrec
