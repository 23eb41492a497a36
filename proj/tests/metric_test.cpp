#include <gtest/gtest.h>

#include "pipeforge/interpreter.hpp"
#include "pipeforge/metric.hpp"
#include "support/support.hpp"

namespace pf = pipeforge;
using testing_support::registry;

namespace {

pf::SerializedGraph compiled(const std::string& source) { return pf::compile(source, registry()).graph; }

pf::SerializedGraph fixture(const std::string& name) { return compiled(testing_support::pipeline_source(name)); }

void expect_proof(const pf::SerializedGraph& g, const pf::SerializedGraph& t, const pf::InteractionReport& r) {
  EXPECT_EQ(r.script.size(), r.count);
  const auto result = pf::apply_script(g, r.script);
  EXPECT_TRUE(pf::isomorphic_under(result, t, r.target_to_result)) << pf::to_json(r);
}

} // namespace

TEST(Metric, IdentityIsFree) {
  for (const auto& name : testing_support::pipeline_names()) {
    const auto g = fixture(name);
    const auto r = pf::interactions(g, g, registry());
    EXPECT_EQ(r.count, 0u) << name;
    EXPECT_EQ(r.ratio, 0.0) << name;
    EXPECT_TRUE(r.script.empty()) << name;
  }
}

TEST(Metric, FromScratch) {
  const auto target = testing_support::golden("sunglasses");
  const auto r = pf::interactions({}, target, registry());
  EXPECT_EQ(r.count, 12u);
  EXPECT_EQ(r.from_scratch, 12u);
  EXPECT_EQ(r.ratio, 1.0);
  expect_proof({}, target, r);
}

TEST(Metric, ThirtyPercent) {
  // poster_mix has 5 nodes and 5 edges. Leave out the viewer and the text
  // edge into the mixer: add_node + 2 add_edge.
  const auto target = fixture("poster_mix");
  ASSERT_EQ(target.nodes.size() + target.edge_count(), 10u);
  const auto generated = compiled(
      "live_camera_1: live_camera()\n"
      "input_text_1: input_text(text=\"a retro travel poster of the Alps\")\n"
      "imagen_1_out = imagen_1: imagen(prompt=input_text_1)\n"
      "image_mixer_1_out = image_mixer_1: image_mixer(image1=live_camera_1, image2=imagen_1_out)\n");
  const auto r = pf::interactions(generated, target, registry());
  EXPECT_EQ(r.count, 3u);
  EXPECT_DOUBLE_EQ(r.ratio, 0.30);
  expect_proof(generated, target, r);
}

TEST(Metric, NewsPipelineMissingTwoNodesMatchesOracle) {
  const auto target = fixture("news_summary");
  const auto generated = compiled(
      "input_text_1: input_text(text=\"latest news about New York\")\n"
      "input_text_2: input_text(text=\"Compile a high-level summary of this news article:\")\n"
      "google_search_1_out = google_search_1: google_search(query=input_text_1)\n"
      "string_picker_1_out = string_picker_1: string_picker(strings=google_search_1_out)\n"
      "text_processor_1_out = text_processor_1: text_processor(text1=input_text_2, text2=string_picker_1_out)\n"
      "markdown_viewer_1: markdown_viewer(markdown=text_processor_1_out)\n");
  const auto r = pf::interactions(generated, target, registry());
  EXPECT_EQ(r.count, pf::oracle_interactions(generated, target));
  // By hand: 2 add_node, 2 delete_edge (rewired sockets), 4 add_edge.
  EXPECT_EQ(r.count, 8u);
  expect_proof(generated, target, r);
}

TEST(Metric, SingleNodes) {
  pf::SerializedGraph a, b;
  a.nodes.push_back({"pali_1", "pali", {}, {}, {}});
  b.nodes.push_back({"pali_7", "pali", {}, {}, {}});
  EXPECT_EQ(pf::interactions(a, b).count, 0u);
  EXPECT_EQ(pf::oracle_interactions(a, b), 0u);
  b.nodes[0].node_spec_id = "imagen";
  EXPECT_EQ(pf::interactions(a, b).count, 2u);
  EXPECT_EQ(pf::oracle_interactions(a, b), 2u);
}

TEST(Metric, ParamsAreFree) {
  auto g = fixture("sunglasses");
  auto t = g;
  t.nodes[1].params["text"] = std::string("aviators");
  t.nodes[0].position = {999, 999};
  EXPECT_EQ(pf::interactions(g, t).count, 0u);
}

TEST(Metric, CascadeVersusStrict) {
  // Deleting a node with two incident edges.
  const auto target = compiled("input_image_1: input_image()\nimage_viewer_1: image_viewer(image=input_image_1)\n");
  const auto generated = compiled(
      "input_image_1: input_image()\n"
      "body_segmentation_1_out = body_segmentation_1: body_segmentation(image=input_image_1)\n"
      "pose_landmark_1_out = pose_landmark_1: pose_landmark(image=input_image_1)\n"
      "image_viewer_1: image_viewer(image=input_image_1)\n"
      "mask_visualizer_1_out = mask_visualizer_1: mask_visualizer(image=input_image_1, masks=body_segmentation_1_out)\n");
  auto cascade = pf::interactions(generated, target);
  EXPECT_EQ(cascade.count, 3u);
  EXPECT_EQ(cascade.count, pf::oracle_interactions(generated, target, true));
  auto strict = pf::interactions(generated, target, {.cascade = false});
  EXPECT_EQ(strict.count, 7u);
  EXPECT_EQ(strict.count, pf::oracle_interactions(generated, target, false));
  expect_proof(generated, target, cascade);
  expect_proof(generated, target, strict);
}

TEST(ApplyScript, DeleteNodeRemovesIncidentEdges) {
  const auto g = compiled(
      "input_image_1: input_image()\n"
      "i_out = image_processor_1: image_processor(image=input_image_1)\n"
      "image_viewer_1: image_viewer(image=i_out)\n");
  const auto out = pf::apply_script(g, {pf::EditOp::delete_node("image_processor_1", "image_processor")});
  EXPECT_EQ(out.nodes.size(), 2u);
  EXPECT_EQ(out.edge_count(), 0u);
  EXPECT_EQ(pf::apply_script(g, {}), g);
}

TEST(ApplyScript, InapplicableOpNamesItsIndex) {
  const auto g = fixture("image_question");
  try {
    pf::apply_script(g, {pf::EditOp::add_node("pali_9", "pali"), pf::EditOp::delete_node("nope_1", "pali")});
    FAIL();
  } catch (const pf::ScriptError& e) {
    EXPECT_EQ(e.op_index(), 1u);
  }
  EXPECT_THROW(pf::apply_script(g, {pf::EditOp::add_node("pali_1", "pali")}), pf::ScriptError);
  EXPECT_THROW(pf::apply_script(g, {pf::EditOp::delete_edge({"pali_1", "text", "input_text_1", "x"})}),
               pf::ScriptError);
}

TEST(Metric, RandomPairsAgreeWithOracle) {
  testing_support::Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto g = testing_support::random_valid_graph(rng);
    const auto t = testing_support::random_valid_graph(rng);
    for (bool cascade : {true, false}) {
      const auto r = pf::interactions(g, t, registry(), {.cascade = cascade});
      ASSERT_EQ(r.count, pf::oracle_interactions(g, t, cascade)) << pf::to_json(g) << pf::to_json(t);
      expect_proof(g, t, r);
    }
  }
}

TEST(Metric, ScriptsAreReproducible) {
  testing_support::Rng rng(5);
  const auto g = testing_support::random_valid_graph(rng);
  const auto t = testing_support::random_valid_graph(rng);
  EXPECT_EQ(pf::to_json(pf::interactions(g, t)), pf::to_json(pf::interactions(g, t)));
}

TEST(Metric, BudgetAndValidation) {
  pf::SerializedGraph big;
  for (int i = 1; i <= 16; ++i) big.nodes.push_back({"input_image_" + std::to_string(i), "input_image", {}, {}, {}});
  EXPECT_THROW(pf::interactions(big, big), pf::BudgetExceeded);
  pf::MetricOptions tiny;
  tiny.max_expansions = 2;
  const auto g = fixture("news_summary");
  EXPECT_THROW(pf::interactions(g, g, tiny), pf::BudgetExceeded);

  pf::SerializedGraph bad;
  bad.nodes.push_back({"x_1", "warp_drive", {}, {}, {}});
  try {
    pf::interactions(bad, g, registry());
    FAIL();
  } catch (const pf::InvalidGraph& e) {
    EXPECT_EQ(e.which(), "generated");
    EXPECT_FALSE(e.violations().empty());
  }
  EXPECT_THROW(pf::oracle_interactions(big, {}), pf::BudgetExceeded);
}

TEST(Metric, Ratio) {
  EXPECT_EQ(pf::interaction_ratio(0, 0), 0.0);
  EXPECT_EQ(pf::interaction_ratio(3, 0), 1.0);
  EXPECT_DOUBLE_EQ(pf::interaction_ratio(3, 10), 0.3);
}
