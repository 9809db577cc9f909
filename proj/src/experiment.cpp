#include "sitrec/experiment.hpp"

#include <algorithm>
#include <cstdio>

#include "sitrec/template_io.hpp"

namespace sitrec {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::vector<SituationSet> tree_predictions(const DecisionTree& tree, std::span<const LabeledImage> items) {
  std::vector<SituationSet> out(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto label = tree.classify(items[i].image).label;
    if (label != kNoneLabel) out[i].insert(std::move(label));
  }
  return out;
}

MetricsRow make_row(const std::string& situation, int step, MetricSource source, const Metrics& m) {
  return {situation, step, source, m.accuracy, m.precision, m.recall, m.precision_undefined, m.recall_undefined};
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (auto pos = s.find(sep); pos != std::string_view::npos; pos = s.find(sep, start)) {
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  out.push_back(s.substr(start));
  return out;
}

constexpr std::string_view kReportHeader =
    "step,source,accuracy,precision,recall,precision_undefined,recall_undefined";

}  // namespace

Metrics compute_metrics(std::span<const SituationSet> predictions, std::span<const std::string> truth,
                        std::string_view situation) {
  if (predictions.size() != truth.size()) {
    throw Error(ErrorCode::length_mismatch, std::to_string(predictions.size()) + " predictions for " +
                                                std::to_string(truth.size()) + " labels");
  }
  Metrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool actual = truth[i] == situation;
    const bool predicted = predictions[i].contains(std::string(situation));
    if (actual && predicted) ++m.tp;
    else if (actual) ++m.fn;
    else if (predicted) ++m.fp;
    else ++m.tn;
  }
  m.accuracy = ratio(m.tp + m.tn, truth.size());
  m.precision = ratio(m.tp, m.tp + m.fp);
  m.recall = ratio(m.tp, m.tp + m.fn);
  m.precision_undefined = m.tp + m.fp == 0;
  m.recall_undefined = m.tp + m.fn == 0;
  return m;
}

std::string_view to_string(EnhanceMode m) { return m == EnhanceMode::cumulative ? "cumulative" : "fresh"; }

std::optional<EnhanceMode> parse_enhance_mode(std::string_view s) {
  if (s == "cumulative") return EnhanceMode::cumulative;
  if (s == "fresh") return EnhanceMode::fresh;
  return std::nullopt;
}

ExperimentResult run_experiment(const TemplateDocument& start_repo, const EnvironmentSpec& env,
                                const Dataset& data, const ExperimentConfig& config) {
  ExperimentResult result;
  const auto& test = data.test.items;
  std::vector<std::string> truth;
  std::vector<SensorImage> images;
  for (const auto& item : test) {
    truth.push_back(item.label);
    images.push_back(item.image);
  }
  const auto initial_predictions = Recognizer(start_repo, config.enhance.dnf).recognize_batch(images);

  // Per step: predictions of the updated repository and of the tree.
  std::vector<std::vector<SituationSet>> updated_predictions, tree_preds;
  for (std::size_t k = 1; k <= data.parts.size(); ++k) {
    StepRecord rec;
    rec.step = static_cast<int>(k);
    const TrainingSet training = data.training_upto(k);
    rec.training_size = training.size();
    const bool part_empty = data.parts[k - 1].empty();
    if (part_empty && !result.steps.empty()) {
      rec = result.steps.back();
      rec.step = static_cast<int>(k);
      rec.log = {};
      updated_predictions.push_back(updated_predictions.back());
      tree_preds.push_back(tree_preds.back());
      result.steps.push_back(std::move(rec));
      continue;
    }
    const TemplateDocument& base = config.mode == EnhanceMode::cumulative && !result.steps.empty()
                                       ? result.steps.back().repository
                                       : start_repo;
    if (training.empty()) {
      rec.repository = base;
      tree_preds.emplace_back(test.size());
    } else {
      rec.trained = true;
      rec.tree = train(training, config.learner);
      auto enhanced = enhance_repository(base, rec.tree, training, config.enhance);
      rec.repository = std::move(enhanced.repository);
      rec.log = std::move(enhanced.log);
      tree_preds.push_back(tree_predictions(rec.tree, test));
    }
    updated_predictions.push_back(Recognizer(rec.repository, config.enhance.dnf).recognize_batch(images));
    result.steps.push_back(std::move(rec));
  }

  for (const auto& situation : env.situations) {
    const auto initial = compute_metrics(initial_predictions, truth, situation);
    for (std::size_t s = 0; s < result.steps.size(); ++s) {
      const int step = result.steps[s].step;
      result.rows.push_back(make_row(situation, step, MetricSource::initial_template, initial));
      result.rows.push_back(make_row(situation, step, MetricSource::updated_template,
                                     compute_metrics(updated_predictions[s], truth, situation)));
      result.rows.push_back(make_row(situation, step, MetricSource::decision_tree,
                                     compute_metrics(tree_preds[s], truth, situation)));
    }
  }
  return result;
}

ExperimentResult run_experiment(const TemplateDocument& start_repo, const Simulation& sim,
                                const GenerationParams& generation, const ExperimentConfig& config) {
  return run_experiment(start_repo, sim.env, generate(generation, sim), config);
}

std::string report_csv(std::span<const MetricsRow> rows, std::string_view situation) {
  std::string out(kReportHeader);
  out += '\n';
  for (const auto& r : rows) {
    if (r.situation != situation) continue;
    out += std::to_string(r.step) + ',' + std::string(to_string(r.source)) + ',' + format_number(r.accuracy) +
           ',' + format_number(r.precision) + ',' + format_number(r.recall) + ',' +
           (r.precision_undefined ? "1" : "0") + ',' + (r.recall_undefined ? "1" : "0") + '\n';
  }
  return out;
}

std::vector<MetricsRow> parse_report_csv(std::string_view text, std::string_view situation) {
  auto lines = split(text, '\n');
  if (lines.empty() || lines.front() != kReportHeader) throw Error(ErrorCode::schema, "report CSV: bad header");
  std::vector<MetricsRow> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto where = "report CSV line " + std::to_string(i + 1);
    auto f = split(lines[i], ',');
    if (f.size() != 7) throw Error(ErrorCode::schema, where + ": wrong field count");
    MetricsRow r;
    r.situation = std::string(situation);
    auto step = parse_number(f[0]);
    auto source = parse_metric_source(f[1]);
    auto acc = parse_number(f[2]), prec = parse_number(f[3]), rec = parse_number(f[4]);
    if (!step || !source || !acc || !prec || !rec || (f[5] != "0" && f[5] != "1") || (f[6] != "0" && f[6] != "1")) {
      throw Error(ErrorCode::schema, where + ": bad field");
    }
    r.step = static_cast<int>(*step);
    r.source = *source;
    r.accuracy = *acc;
    r.precision = *prec;
    r.recall = *rec;
    r.precision_undefined = f[5] == "1";
    r.recall_undefined = f[6] == "1";
    out.push_back(std::move(r));
  }
  return out;
}

std::string plot_svg(std::span<const MetricsRow> rows, std::string_view situation, std::string_view metric) {
  constexpr double width = 480, height = 320, left = 50, right = 130, top = 30, bottom = 40;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  int max_step = 1;
  for (const auto& r : rows) {
    if (r.situation == situation) max_step = std::max(max_step, r.step);
  }
  auto value = [&](const MetricsRow& r) {
    if (metric == "accuracy") return r.accuracy;
    if (metric == "precision") return r.precision;
    return r.recall;
  };
  auto px = [&](int step) { return left + (max_step == 1 ? 0.0 : plot_w * (step - 1) / (max_step - 1)); };
  auto py = [&](double v) { return top + plot_h * (1.0 - v); };
  char buf[160];
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"320\">\n";
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"18\" font-size=\"13\">%s %s</text>\n", left,
                std::string(situation).c_str(), std::string(metric).c_str());
  out += buf;
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"#888\"/>\n", left, top,
                plot_w, plot_h);
  out += buf;
  for (int t = 0; t <= 4; ++t) {
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"10\" text-anchor=\"end\">%.2f</text>\n",
                  left - 4, py(t / 4.0) + 3, t / 4.0);
    out += buf;
  }
  for (int s = 1; s <= max_step; ++s) {
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"10\" text-anchor=\"middle\">%d</text>\n",
                  px(s), top + plot_h + 14, s);
    out += buf;
  }
  const MetricSource sources[] = {MetricSource::initial_template, MetricSource::updated_template,
                                  MetricSource::decision_tree};
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c"};
  for (int i = 0; i < 3; ++i) {
    std::string points;
    for (const auto& r : rows) {
      if (r.situation != situation || r.source != sources[i]) continue;
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", points.empty() ? "" : " ", px(r.step), py(value(r)));
      points += buf;
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(colors[i]) + "\" stroke-width=\"2\" points=\"" +
           points + "\"/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"11\" fill=\"%s\">%s</text>\n",
                  left + plot_w + 8, top + 14.0 + 16.0 * i, colors[i], std::string(to_string(sources[i])).c_str());
    out += buf;
  }
  out += "</svg>\n";
  return out;
}

std::vector<std::filesystem::path> write_report(std::span<const MetricsRow> rows,
                                                const std::filesystem::path& dir, bool plots) {
  if (rows.empty()) throw Error(ErrorCode::invalid_argument, "no metric rows to report");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create '" + dir.string() + "': " + ec.message());
  std::vector<std::string> situations;
  for (const auto& r : rows) {
    if (std::find(situations.begin(), situations.end(), r.situation) == situations.end()) {
      situations.push_back(r.situation);
    }
  }
  std::vector<std::filesystem::path> written;
  for (const auto& s : situations) {
    auto path = dir / (s + ".csv");
    write_file_atomic(path, report_csv(rows, s));
    written.push_back(path);
    if (!plots) continue;
    for (const char* metric : {"accuracy", "precision", "recall"}) {
      auto svg = dir / (s + "." + metric + ".svg");
      write_file_atomic(svg, plot_svg(rows, s, metric));
      written.push_back(svg);
    }
  }
  return written;
}

}  // namespace sitrec
