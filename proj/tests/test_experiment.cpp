#include <gtest/gtest.h>

#include <filesystem>

#include "sitrec/experiment.hpp"
#include "support.hpp"

using namespace sitrec;
using namespace testing_support;

namespace fs = std::filesystem;

namespace {

const fs::path kGolden = SITREC_SOURCE_DIR "/tests/golden";

const ExperimentResult& bad_run() {
  static const ExperimentResult r = run_experiment(bad_start_repository(), company_simulation(), {});
  return r;
}

const ExperimentResult& good_run() {
  static const ExperimentResult r = run_experiment(good_start_repository(), company_simulation(), {});
  return r;
}

const MetricsRow& row(const ExperimentResult& r, const std::string& sit, int step, MetricSource src) {
  for (const auto& x : r.rows) {
    if (x.situation == sit && x.step == step && x.source == src) return x;
  }
  throw std::runtime_error("row not found");
}

}  // namespace

TEST(Metrics, AllCorrect) {
  std::vector<SituationSet> pred{{"A"}, {}, {"A"}};
  std::vector<std::string> truth{"A", "none", "A"};
  auto m = compute_metrics(pred, truth, "A");
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_FALSE(m.precision_undefined || m.recall_undefined);
}

TEST(Metrics, ZeroDenominators) {
  std::vector<SituationSet> pred{{}, {"B"}};
  std::vector<std::string> truth{"none", "B"};
  auto m = compute_metrics(pred, truth, "A");
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_TRUE(m.precision_undefined);
  EXPECT_TRUE(m.recall_undefined);
}

TEST(Metrics, HandBuiltConfusion) {
  std::vector<SituationSet> pred{{"A"}, {"A"}, {}, {"A", "B"}, {"A"}, {}, {}, {"B"}, {"A"}, {}};
  std::vector<std::string> truth{"A", "A", "A", "A", "none", "none", "none", "B", "B", "none"};
  auto a = compute_metrics(pred, truth, "A");
  EXPECT_EQ(a.tp, 3u);
  EXPECT_EQ(a.fn, 1u);
  EXPECT_EQ(a.fp, 2u);
  EXPECT_EQ(a.tn, 4u);
  EXPECT_EQ(a.accuracy, 0.7);
  EXPECT_EQ(a.precision, 0.6);
  EXPECT_EQ(a.recall, 0.75);
  auto b = compute_metrics(pred, truth, "B");
  EXPECT_EQ(b.tp, 1u);
  EXPECT_EQ(b.fp, 1u);
  EXPECT_EQ(b.fn, 1u);
  EXPECT_EQ(b.accuracy, 0.8);
  EXPECT_EQ(b.precision, 0.5);
  EXPECT_EQ(b.recall, 0.5);
}

TEST(Metrics, LengthMismatch) {
  std::vector<SituationSet> pred{{}};
  std::vector<std::string> truth{};
  try {
    compute_metrics(pred, truth, "A");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::length_mismatch);
  }
}

TEST(Experiment, RowShape) {
  const auto& r = bad_run();
  EXPECT_EQ(r.rows.size(), 4u * 6u * 3u);
  EXPECT_EQ(r.steps.size(), 6u);
  EXPECT_EQ(r.rows.front().situation, "Opening");
  EXPECT_EQ(r.rows.back().situation, "Educating");
}

TEST(Experiment, InitialMetricsConstantAcrossSteps) {
  for (const auto* r : {&bad_run(), &good_run()}) {
    for (const auto& sit : company_simulation().env.situations) {
      const auto& first = row(*r, sit, 1, MetricSource::initial_template);
      for (int k = 2; k <= 6; ++k) {
        auto x = row(*r, sit, k, MetricSource::initial_template);
        x.step = 1;
        EXPECT_EQ(x, first);
      }
    }
  }
}

TEST(Experiment, TrainingSizeIsCumulative) {
  auto data = generate({}, company_simulation());
  auto r = run_experiment(bad_start_repository(), company_simulation().env, data);
  std::size_t total = 0;
  for (std::size_t k = 0; k < 6; ++k) {
    total += data.parts[k].items.size();
    EXPECT_EQ(r.steps[k].training_size, total);
    std::size_t root = r.steps[k].tree.root().cardinality;
    EXPECT_EQ(root, total);
  }
}

TEST(Experiment, GoldenReports) {
  for (const auto& [dir, result] : {std::pair{"bad-start", &bad_run()}, {"good-start", &good_run()}}) {
    for (const auto& sit : company_simulation().env.situations) {
      const auto golden = read_file(kGolden / dir / (sit + ".csv"));
      EXPECT_EQ(report_csv(result->rows, sit), golden) << dir << "/" << sit;
    }
  }
}

TEST(Experiment, GoldenBadStartMergeLog) {
  auto data = generate({}, company_simulation());
  auto training = data.training_upto(6);
  auto out = enhance_repository(bad_start_repository(), train(training), training);
  EXPECT_EQ(out.log.to_text(), read_file(kGolden / "bad-start-step6-merge.changes.txt"));
  ExperimentConfig fresh;
  fresh.mode = EnhanceMode::fresh;
  auto r = run_experiment(bad_start_repository(), company_simulation().env, data, fresh);
  EXPECT_EQ(r.steps.back().log.to_text(), out.log.to_text());
  EXPECT_EQ(r.steps.back().repository, out.repository);
}

TEST(Experiment, GoodStartNeverWorse) {
  const auto& r = good_run();
  for (const auto& sit : company_simulation().env.situations) {
    for (int k = 1; k <= 6; ++k) {
      EXPECT_GE(row(r, sit, k, MetricSource::updated_template).accuracy,
                row(r, sit, k, MetricSource::initial_template).accuracy)
          << sit << " step " << k;
    }
  }
}

TEST(Experiment, BadStartImproves) {
  const auto& r = bad_run();
  int improved = 0;
  for (const auto& sit : company_simulation().env.situations) {
    improved += row(r, sit, 6, MetricSource::updated_template).accuracy >
                        row(r, sit, 6, MetricSource::initial_template).accuracy
                    ? 1
                    : 0;
  }
  EXPECT_GE(improved, 1);
}

TEST(Experiment, EmptyAddedPartRepeatsPreviousStep) {
  GenerationParams gp;
  gp.part_sizes = {220, 0, 230, 210, 0, 240, 225};
  auto r = run_experiment(bad_start_repository(), company_simulation(), gp);
  for (int step : {2, 5}) {
    EXPECT_TRUE(r.steps[static_cast<std::size_t>(step - 1)].log.empty());
    for (const auto& sit : company_simulation().env.situations) {
      for (auto src : {MetricSource::initial_template, MetricSource::updated_template, MetricSource::decision_tree}) {
        auto x = row(r, sit, step, src);
        x.step = step - 1;
        EXPECT_EQ(x, row(r, sit, step - 1, src)) << sit << " " << step;
      }
    }
  }
}

TEST(Experiment, NoTrainingDataYet) {
  GenerationParams gp;
  gp.part_sizes = {0, 200, 200, 200, 200, 200, 200};
  auto r = run_experiment(good_start_repository(), company_simulation(), gp);
  EXPECT_FALSE(r.steps[0].trained);
  EXPECT_EQ(r.steps[0].repository, good_start_repository());
  for (const auto& sit : company_simulation().env.situations) {
    auto x = row(r, sit, 1, MetricSource::updated_template);
    x.source = MetricSource::initial_template;
    EXPECT_EQ(x, row(r, sit, 1, MetricSource::initial_template));
    EXPECT_EQ(row(r, sit, 1, MetricSource::decision_tree).recall, 0.0);
  }
}

TEST(Experiment, FreshModeStartsFromInitialEachStep) {
  auto data = generate({}, company_simulation());
  ExperimentConfig fresh;
  fresh.mode = EnhanceMode::fresh;
  auto r = run_experiment(bad_start_repository(), company_simulation().env, data, fresh);
  for (std::size_t k = 0; k < 6; ++k) {
    auto training = data.training_upto(k + 1);
    auto expect = enhance_repository(bad_start_repository(), train(training), training);
    EXPECT_EQ(r.steps[k].repository, expect.repository) << k;
  }
  EXPECT_EQ(parse_enhance_mode("fresh"), EnhanceMode::fresh);
  EXPECT_EQ(parse_enhance_mode("cumulative"), EnhanceMode::cumulative);
  EXPECT_FALSE(parse_enhance_mode("rotating"));
  EXPECT_EQ(to_string(EnhanceMode::fresh), "fresh");
}

TEST(Experiment, Deterministic) {
  auto again = run_experiment(bad_start_repository(), company_simulation(), {});
  EXPECT_EQ(again.rows, bad_run().rows);
}

TEST(Report, FilesAndRoundTrip) {
  auto dir = fs::temp_directory_path() / "sitrec_report_test";
  fs::remove_all(dir);
  const auto& rows = bad_run().rows;
  auto files = write_report(rows, dir);
  ASSERT_EQ(files.size(), 4u);
  std::size_t total = 0;
  for (const auto& sit : company_simulation().env.situations) {
    const auto text = read_file(dir / (sit + ".csv"));
    auto back = parse_report_csv(text, sit);
    EXPECT_EQ(back.size(), 18u);
    total += back.size();
    std::vector<MetricsRow> mine;
    for (const auto& r : rows) {
      if (r.situation == sit) mine.push_back(r);
    }
    EXPECT_EQ(back, mine);
  }
  EXPECT_EQ(total, rows.size());
}

TEST(Report, Plots) {
  auto dir = fs::temp_directory_path() / "sitrec_report_plots";
  fs::remove_all(dir);
  auto files = write_report(bad_run().rows, dir, true);
  EXPECT_EQ(files.size(), 4u + 4u * 3u);
  const auto svg = read_file(dir / "Working.accuracy.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("polyline"), std::string::npos);
}

TEST(Report, Errors) {
  EXPECT_THROW(write_report({}, fs::temp_directory_path() / "sitrec_empty_report"), Error);
  auto blocker = fs::temp_directory_path() / "sitrec_report_blocker";
  fs::remove_all(blocker);
  write_file_atomic(blocker, "x");
  try {
    write_report(bad_run().rows, blocker / "sub");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io);
  }
  EXPECT_THROW(parse_report_csv("step,source\n1,tree\n", "A"), Error);
}
