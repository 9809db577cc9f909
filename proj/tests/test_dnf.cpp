#include <gtest/gtest.h>

#include <random>

#include "sitrec/dnf.hpp"
#include "sitrec/recognizer.hpp"
#include "sitrec/simulator.hpp"
#include "support.hpp"

using namespace sitrec;
using namespace testing_support;

namespace {

TemplateNode L(Condition c) { return TemplateNode::leaf(std::move(c)); }

bool eval_dnf(const DnfTree& d, const std::vector<int>& bits) {
  for (const auto& p : d.paths) {
    bool all = true;
    for (const auto& c : p.conditions) {
      const int idx = std::stoi(c.sensor.substr(1));
      const bool eq = bits[idx] == static_cast<int>(c.operand.value);
      all = all && (c.comparator == Comparator::EQ ? eq : !eq);
    }
    if (all) return true;
  }
  return false;
}

std::vector<std::vector<Condition>> condition_sets(const DnfTree& d) {
  std::vector<std::vector<Condition>> out;
  for (const auto& p : d.paths) out.push_back(p.conditions);
  return out;
}

}  // namespace

TEST(TemplateToDnf, ConjunctionIsOnePath) {
  auto d = template_to_dnf({"S", TemplateNode::all_of({L(ex("b0", 1)), L(ex("b1", 1))})});
  ASSERT_EQ(d.paths.size(), 1u);
  EXPECT_EQ(d.paths[0].conditions, (std::vector<Condition>{ex("b0", 1), ex("b1", 1)}));
  EXPECT_FALSE(d.paths[0].purity);
  EXPECT_FALSE(dnf_problem(d));
}

TEST(TemplateToDnf, DistributesOneStep) {
  auto d = template_to_dnf(
      {"S", TemplateNode::all_of({L(ex("a", 1)), TemplateNode::any_of({L(ex("b", 1)), L(ex("c", 1))})})});
  EXPECT_EQ(condition_sets(d),
            (std::vector<std::vector<Condition>>{{ex("a", 1), ex("b", 1)}, {ex("a", 1), ex("c", 1)}}));
}

TEST(TemplateToDnf, ContradictionDroppedWithWarning) {
  std::vector<std::string> warnings;
  auto d = template_to_dnf(
      {"S", TemplateNode::all_of({L(ex("a", 1)), TemplateNode::any_of({L(ex("a", 0)), L(ex("b", 1))})})}, {},
      &warnings);
  EXPECT_EQ(condition_sets(d), (std::vector<std::vector<Condition>>{{ex("a", 1), ex("b", 1)}}));
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(TemplateToDnf, DuplicatesRemoved) {
  auto d = template_to_dnf({"S", TemplateNode::any_of({TemplateNode::all_of({L(ex("a", 1)), L(ex("b", 1))}),
                                                       TemplateNode::all_of({L(ex("b", 1)), L(ex("a", 1))})})});
  EXPECT_EQ(d.paths.size(), 1u);
}

TEST(TemplateToDnf, ExpansionLimit) {
  std::vector<TemplateNode> ors;
  for (int i = 0; i < 13; ++i) {
    ors.push_back(TemplateNode::any_of({L(ex("x" + std::to_string(i), 1)), L(ex("y" + std::to_string(i), 1))}));
  }
  SituationTemplate t{"S", TemplateNode::all_of(ors)};
  try {
    template_to_dnf(t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::expansion_limit);
  }
  EXPECT_EQ(template_to_dnf(t, {10000}).paths.size(), 8192u);
}

TEST(TemplateToDnf, RareFlagNeedsEveryContributingAnd) {
  auto inner_rare = TemplateNode::all_of(
      {L(ex("a", 1)), TemplateNode::any_of({TemplateNode::all_of({L(ex("b", 1)), L(ex("c", 1))}, true), L(ex("d", 1))})},
      true);
  auto d = template_to_dnf({"S", inner_rare});
  ASSERT_EQ(d.paths.size(), 2u);
  EXPECT_TRUE(d.paths[0].rare);  // {a, d}
  EXPECT_TRUE(d.paths[1].rare);  // {a, b, c}

  auto inner_plain = TemplateNode::all_of(
      {L(ex("a", 1)), TemplateNode::any_of({TemplateNode::all_of({L(ex("b", 1)), L(ex("c", 1))}), L(ex("d", 1))})},
      true);
  d = template_to_dnf({"S", inner_plain});
  EXPECT_TRUE(d.paths[0].rare);
  EXPECT_FALSE(d.paths[1].rare);

  d = template_to_dnf({"S", TemplateNode::any_of({L(ex("a", 1)), L(ex("b", 1))})});
  EXPECT_FALSE(d.paths[0].rare);
}

TEST(TemplateToDnf, TruthTableEquivalenceOnRandomTemplates) {
  TemplateGen gen(2024, 6);
  for (int i = 0; i < 300; ++i) {
    auto t = gen.make();
    auto d = template_to_dnf(t);
    EXPECT_FALSE(dnf_problem(d));
    for (int mask = 0; mask < 64; ++mask) {
      std::vector<int> bits(6);
      for (int b = 0; b < 6; ++b) bits[b] = (mask >> b) & 1;
      ASSERT_EQ(eval_tree(t.root, bits), eval_dnf(d, bits)) << serialize_templates({"1", {t}});
    }
  }
}

TEST(TemplateToDnf, SampledEquivalenceWithThresholds) {
  auto truth = company_simulation().ground_truth;
  std::mt19937_64 rng(9);
  for (const auto& t : truth.templates) {
    auto d = template_to_dnf(t);
    for (int i = 0; i < 10000; ++i) {
      SensorImage img;
      for (const char* s : {"work_light", "mgmt_light", "work_noise"}) img.readings[s] = (rng() % 1001) / 1000.0;
      for (const char* s : {"prev_lights", "rest_light", "work_tv", "work_motion", "mgmt_motion", "rest_motion"}) {
        img.readings[s] = static_cast<double>(rng() % 2);
      }
      bool any = false;
      for (const auto& p : d.paths) any = any || eval_path(p, img);
      ASSERT_EQ(eval_template(t, img), any) << t.situation;
    }
  }
}

TEST(NormalizePath, CanonicalConjunction) {
  auto p = normalize_path(path({th("l", Comparator::GT, 0.3), Condition::exact("m", Comparator::NE, 0),
                                th("l", Comparator::GT, 0.5), th("l", Comparator::LE, 0.9), ex("m", 1)}));
  ASSERT_TRUE(p);
  EXPECT_EQ(p->conditions,
            (std::vector<Condition>{th("l", Comparator::LE, 0.9), th("l", Comparator::GT, 0.5), ex("m", 1)}));
  EXPECT_FALSE(normalize_path(path({ex("m", 1), Condition::exact("m", Comparator::NE, 1)})));
}

TEST(NormalizePath, CanonicalOrder) {
  std::vector<DnfPath> ps{path({ex("b", 1), ex("c", 1)}), path({ex("z", 1)}), path({ex("a", 1), ex("c", 1)})};
  sort_paths(ps);
  EXPECT_EQ(ps[0].conditions[0].sensor, "z");
  EXPECT_EQ(ps[1].conditions[0].sensor, "a");
  EXPECT_EQ(ps[2].conditions[0].sensor, "b");
}

TEST(TreeToDnf, NoSplitTreeYieldsNoPaths) {
  TrainingSet t;
  t.features = {{"m", ValueKind::boolean}};
  for (int i = 0; i < 4; ++i) t.items.push_back({image(i, {{"m", i % 2}}), "Working"});
  auto tree = train(t);
  std::vector<std::string> warnings;
  auto d = decision_tree_to_dnf(tree, "Working", &warnings);
  EXPECT_TRUE(d.paths.empty());
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("NoSplitTree"), std::string::npos);
  EXPECT_THROW(decision_tree_to_dnf(tree, "none"), Error);
}

TEST(TreeToDnf, HandBuiltDepthTwoTree) {
  // l <= 0.5 ? Closing : (m == 1 ? Closing : none)
  DecisionTree tree;
  tree.features = {{"l", ValueKind::continuous}, {"m", ValueKind::boolean}};
  auto leaf = [](std::string label, std::size_t card, std::size_t major) {
    TreeNode n;
    n.label = std::move(label);
    n.cardinality = card;
    n.majority_count = major;
    n.purity = static_cast<double>(major) / static_cast<double>(card);
    n.class_counts[n.label] = major;
    return n;
  };
  TreeNode root;
  root.is_leaf = false;
  root.test = th("l", Comparator::LE, 0.5);
  root.pass = 1;
  root.fail = 2;
  TreeNode inner;
  inner.is_leaf = false;
  inner.feature = 1;
  inner.test = ex("m", 1);
  inner.pass = 3;
  inner.fail = 4;
  tree.nodes = {root, leaf("Closing", 40, 36), inner, leaf("Closing", 20, 20), leaf("none", 30, 30)};

  auto d = decision_tree_to_dnf(tree, "Closing");
  ASSERT_EQ(d.paths.size(), 2u);
  EXPECT_EQ(d.paths[0].conditions, (std::vector<Condition>{th("l", Comparator::LE, 0.5)}));
  EXPECT_EQ(d.paths[0].purity, 0.9);
  EXPECT_EQ(d.paths[0].cardinality, 40u);
  EXPECT_EQ(d.paths[1].conditions, (std::vector<Condition>{th("l", Comparator::GT, 0.5), ex("m", 1)}));
  auto none_paths = decision_tree_to_dnf(tree, "Working");
  EXPECT_TRUE(none_paths.paths.empty());
}

TEST(TreeToDnf, BranchExtractionSoundness) {
  auto sim = company_simulation();
  GenerationParams gp;
  gp.error_rate = 0.03;
  auto data = generate(gp, sim);
  auto training = data.training_upto(3);
  auto tree = train(training);
  std::vector<DnfTree> dnfs;
  for (const auto& s : sim.env.situations) dnfs.push_back(decision_tree_to_dnf(tree, s));
  auto check = [&](const SensorImage& img) {
    const auto label = tree.classify(img).label;
    for (std::size_t s = 0; s < dnfs.size(); ++s) {
      bool any = false;
      for (const auto& p : dnfs[s].paths) any = any || eval_path(p, img);
      ASSERT_EQ(any, label == sim.env.situations[s]);
    }
  };
  for (const auto& item : training.items) check(item.image);
  for (const auto& item : data.test.items) check(item.image);
  for (const auto& s : sim.env.situations) {
    for (const auto& item : training.items) {
      if (item.label != s || tree.classify(item.image).label != s) continue;
      bool any = false;
      for (const auto& p : dnfs[&s - sim.env.situations.data()].paths) any = any || eval_path(p, item.image);
      EXPECT_TRUE(any);
    }
  }
}

TEST(DnfToTemplate, ShapesAndRoundTrip) {
  DnfTree one{"S", {path({ex("a", 1), ex("b", 1)}, 0.9, 20)}};
  auto t = dnf_to_template(one);
  EXPECT_EQ(t.root, TemplateNode::all_of({L(ex("a", 1)), L(ex("b", 1))}));

  DnfTree two{"S", {path({ex("a", 1)}, std::nullopt, std::nullopt, true), path({ex("b", 1), ex("c", 0)})}};
  t = dnf_to_template(two);
  ASSERT_EQ(t.root.kind, NodeKind::any_of);
  ASSERT_EQ(t.root.children.size(), 2u);
  EXPECT_TRUE(t.root.children[0].rare);
  EXPECT_EQ(t.root.children[0].kind, NodeKind::all_of);
  auto again = template_to_dnf(t);
  EXPECT_EQ(again, two);

  try {
    dnf_to_template({"S", {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_dnf);
  }
}

TEST(DnfToTemplate, FixedPointOnRandomTemplates) {
  TemplateGen gen(77, 6);
  for (int i = 0; i < 300; ++i) {
    auto d = template_to_dnf(gen.make());
    if (d.paths.empty()) continue;
    auto back = template_to_dnf(dnf_to_template(d));
    EXPECT_TRUE(same_path_set(back, d));
    EXPECT_EQ(back, d);
  }
}
