// sitrec: command-line front end for simulation, learning, enhancement,
// recognition and the incremental experiment.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sitrec/dataset_io.hpp"
#include "sitrec/dnf.hpp"
#include "sitrec/experiment.hpp"
#include "sitrec/template_io.hpp"

namespace fs = std::filesystem;
using namespace sitrec;

namespace {

struct Common {
  std::string config;  // environment .env.json; shipped company environment when empty
  std::string params;
  std::optional<std::uint64_t> seed;
};

Simulation load_sim(const Common& c) {
  return c.config.empty() ? company_simulation() : load_simulation(c.config);
}

RunParams load_params(const Common& c) {
  RunParams p = c.params.empty() ? RunParams{} : parse_run_params(read_file(c.params));
  if (c.seed) p.generation.seed = *c.seed;
  return p;
}

TemplateDocument load_repo(const std::string& which, const Simulation& sim) {
  if (which == "good") return parse_templates(serialize_templates(good_start_repository()), &sim.env);
  if (which == "bad") return parse_templates(serialize_templates(bad_start_repository()), &sim.env);
  return load_repository(which, &sim.env);
}

TrainingSet load_training(const std::vector<std::string>& files, const EnvironmentSpec& env) {
  TrainingSet all = TrainingSet::for_environment(env);
  for (const auto& f : files) {
    auto part = read_dataset_csv(read_file(f), env);
    all.items.insert(all.items.end(), part.items.begin(), part.items.end());
  }
  return all;
}

void add_common(CLI::App* cmd, Common& c, bool with_seed) {
  cmd->add_option("--config", c.config, "Environment config (.env.json)")->check(CLI::ExistingFile);
  cmd->add_option("--params", c.params, "Run parameters (JSON)")->check(CLI::ExistingFile);
  if (with_seed) cmd->add_option("--seed", c.seed, "Random seed");
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Situation recognition with expert templates and a learned decision tree"};
  app.require_subcommand(1);
  Common common;

  // simulate
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Generate labeled dataset parts");
  add_common(simulate, common, true);
  simulate->add_option("--out", sim_out, "Output directory")->required();

  // learn
  std::vector<std::string> learn_data;
  std::string learn_out;
  bool learn_dnf = false;
  auto* learn = app.add_subcommand("learn", "Train a decision tree on dataset CSV files");
  add_common(learn, common, false);
  learn->add_option("--data", learn_data, "Dataset CSV files")->required()->check(CLI::ExistingFile);
  learn->add_option("--out", learn_out, "Tree JSON output (stdout when omitted)");
  learn->add_flag("--dnf", learn_dnf, "Print the tree's DNF per situation on stderr");

  // enhance
  std::string enh_start = "good", enh_tree, enh_out, enh_log;
  std::vector<std::string> enh_data;
  auto* enhance = app.add_subcommand("enhance", "Merge a learned tree into a template repository");
  add_common(enhance, common, false);
  enhance->add_option("--start", enh_start, "Repository: good, bad or a .stpl.xml path");
  enhance->add_option("--data", enh_data, "Training dataset CSV files")->required()->check(CLI::ExistingFile);
  enhance->add_option("--tree", enh_tree, "Tree JSON (trained from --data when omitted)")
      ->check(CLI::ExistingFile);
  enhance->add_option("--out", enh_out, "Enhanced repository output")->required();
  enhance->add_option("--log", enh_log, "Change log output (stdout when omitted)");

  // recognize
  std::string rec_repo = "good", rec_images, rec_out;
  auto* recognize_cmd = app.add_subcommand("recognize", "Recognize situations in an image CSV");
  add_common(recognize_cmd, common, false);
  recognize_cmd->add_option("--repo", rec_repo, "Repository: good, bad or a .stpl.xml path");
  recognize_cmd->add_option("--images", rec_images, "Image CSV")->required()->check(CLI::ExistingFile);
  recognize_cmd->add_option("--out", rec_out, "Output CSV (stdout when omitted)");

  // evaluate
  std::string ev_repo = "good", ev_data, ev_tree, ev_out;
  auto* evaluate = app.add_subcommand("evaluate", "Score a repository (and optionally a tree) on labeled data");
  add_common(evaluate, common, false);
  evaluate->add_option("--repo", ev_repo, "Repository: good, bad or a .stpl.xml path");
  evaluate->add_option("--data", ev_data, "Labeled dataset CSV")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--tree", ev_tree, "Tree JSON to score as well")->check(CLI::ExistingFile);
  evaluate->add_option("--out", ev_out, "Output CSV (stdout when omitted)");

  // experiment
  std::string ex_start = "good", ex_out, ex_mode = "cumulative";
  bool ex_plots = false;
  auto* experiment = app.add_subcommand("experiment", "Run the incremental experiment");
  add_common(experiment, common, true);
  experiment->add_option("--start", ex_start, "Repository: good, bad or a .stpl.xml path");
  experiment->add_option("--mode", ex_mode, "Enhancement mode")->check(CLI::IsMember({"cumulative", "fresh"}));
  experiment->add_option("--out", ex_out, "Report directory")->required();
  experiment->add_flag("--plots", ex_plots, "Also write SVG plots");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto sim = load_sim(common);
    const auto params = load_params(common);
    EnhanceOptions enhance_options;
    enhance_options.reliability = params.reliability;

    if (*simulate) {
      auto data = generate(params.generation, sim);
      fs::create_directories(sim_out);
      for (std::size_t i = 0; i < data.parts.size(); ++i) {
        write_file_atomic(fs::path(sim_out) / ("part" + std::to_string(i + 1) + ".csv"),
                          write_dataset_csv(data.parts[i]));
      }
      write_file_atomic(fs::path(sim_out) / ("part" + std::to_string(data.parts.size() + 1) + ".csv"),
                        write_dataset_csv(data.test));
      write_file_atomic(fs::path(sim_out) / "params.json", run_params_to_json(params));
      std::cerr << "wrote " << data.parts.size() + 1 << " parts to " << sim_out << "\n";
    } else if (*learn) {
      auto data = load_training(learn_data, sim.env);
      std::vector<std::string> warnings;
      auto tree = train(data, params.learner, &warnings);
      print_warnings(warnings);
      auto text = tree_to_json(tree);
      if (learn_out.empty()) std::cout << text;
      else write_file_atomic(learn_out, text);
      if (learn_dnf) {
        for (const auto& s : sim.env.situations) {
          auto dnf = decision_tree_to_dnf(tree, s);
          if (dnf.paths.empty()) continue;
          std::cerr << serialize_templates({"1", {dnf_to_template(dnf)}});
        }
      }
    } else if (*enhance) {
      auto repo = load_repo(enh_start, sim);
      auto data = load_training(enh_data, sim.env);
      auto tree = enh_tree.empty() ? train(data, params.learner) : tree_from_json(read_file(enh_tree));
      auto result = enhance_repository(repo, tree, data, enhance_options);
      RepositoryFile out{enh_out, &sim.env};
      if (fs::exists(enh_out)) out.load();
      out.store(result.repository);
      if (enh_log.empty()) std::cout << result.log.to_text();
      else write_file_atomic(enh_log, result.log.to_text());
    } else if (*recognize_cmd) {
      auto repo = load_repo(rec_repo, sim);
      auto csv = read_images_csv(read_file(rec_images), sim.env);
      auto text = write_recognition_csv(recognize_stream(repo, csv.images));
      if (rec_out.empty()) std::cout << text;
      else write_file_atomic(rec_out, text);
    } else if (*evaluate) {
      auto repo = load_repo(ev_repo, sim);
      auto data = read_dataset_csv(read_file(ev_data), sim.env);
      std::vector<SensorImage> images;
      std::vector<std::string> truth;
      for (const auto& item : data.items) {
        images.push_back(item.image);
        truth.push_back(item.label);
      }
      auto predicted = Recognizer(repo).recognize_batch(images);
      std::optional<DecisionTree> tree;
      std::vector<SituationSet> tree_predicted;
      if (!ev_tree.empty()) {
        tree = tree_from_json(read_file(ev_tree));
        for (const auto& image : images) {
          auto label = tree->classify(image).label;
          tree_predicted.push_back(label == kNoneLabel ? SituationSet{} : SituationSet{label});
        }
      }
      std::string text = "situation,source,accuracy,precision,recall\n";
      auto line = [&](const std::string& s, std::string_view source, const Metrics& m) {
        text += s + ',' + std::string(source) + ',' + format_number(m.accuracy) + ',' + format_number(m.precision) +
                ',' + format_number(m.recall) + '\n';
      };
      for (const auto& s : sim.env.situations) {
        line(s, "templates", compute_metrics(predicted, truth, s));
        if (tree) line(s, "decision_tree", compute_metrics(tree_predicted, truth, s));
      }
      if (ev_out.empty()) std::cout << text;
      else write_file_atomic(ev_out, text);
    } else if (*experiment) {
      auto repo = load_repo(ex_start, sim);
      ExperimentConfig config;
      config.learner = params.learner;
      config.enhance = enhance_options;
      config.mode = *parse_enhance_mode(ex_mode);
      auto result = run_experiment(repo, sim, params.generation, config);
      auto written = write_report(result.rows, ex_out, ex_plots);
      ChangeLog all;
      for (const auto& step : result.steps) {
        write_file_atomic(fs::path(ex_out) / ("step" + std::to_string(step.step) + ".stpl.xml"),
                          serialize_templates(step.repository));
        all.append(step.log);
        write_file_atomic(fs::path(ex_out) / ("step" + std::to_string(step.step) + ".changes.txt"),
                          step.log.to_text());
      }
      std::cerr << "wrote " << written.size() << " report files and " << all.entries.size()
                << " changes to " << ex_out << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "sitrec: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "sitrec: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
