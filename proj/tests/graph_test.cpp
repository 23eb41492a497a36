#include <gtest/gtest.h>

#include <algorithm>

#include <json.hpp>

#include "pipeforge/error.hpp"
#include "pipeforge/graph.hpp"
#include "pipeforge/interpreter.hpp"
#include "pipeforge/layout.hpp"
#include "support/support.hpp"

namespace pf = pipeforge;
using testing_support::registry;

TEST(Interpret, ImageQuestionMatchesGolden) {
  const auto report = pf::compile(testing_support::pipeline_source("image_question"), registry());
  EXPECT_TRUE(report.dropped_lines.empty());
  EXPECT_TRUE(report.diagnostics.empty());
  ASSERT_EQ(report.graph.nodes.size(), 3u);
  const auto* pali = report.graph.find("pali_1");
  ASSERT_NE(pali, nullptr);
  EXPECT_EQ(pali->incoming_edges.at("image"), (std::vector<pf::IncomingEdge>{{"input_image_1", "image"}}));
  EXPECT_EQ(pali->incoming_edges.at("prompt"), (std::vector<pf::IncomingEdge>{{"input_text_1", "text"}}));
  EXPECT_EQ(pf::optimize_layout(report.graph), testing_support::golden("image_question"));
}

TEST(Interpret, UnknownNodeLineIsDropped) {
  const std::string source =
      "input_image_1: input_image()\n"
      "super_resolution_1_out = super_resolution_1: super_resolution(image=input_image_1)\n"
      "image_viewer_1: image_viewer(image=input_image_1)\n";
  const auto report = pf::compile(source, registry());
  ASSERT_EQ(report.dropped_lines.size(), 1u);
  EXPECT_EQ(report.dropped_lines[0], (pf::DroppedLine{2, "unknown node type super_resolution"}));
  EXPECT_EQ(report.graph.nodes.size(), 2u);
  EXPECT_TRUE(pf::validate(report.graph, registry()).empty());
}

TEST(Interpret, DanglingArgumentKeepsNode) {
  const std::string source =
      "input_image_1: input_image()\n"
      "input_text_1: input_text(text=\"what is this?\")\n"
      "pali_1_out = pali_1: pali(image=input_image_1, prompt=ghost_1)\n";
  const auto report = pf::compile(source, registry());
  EXPECT_TRUE(report.dropped_lines.empty());
  ASSERT_EQ(report.dangling_args.size(), 1u);
  EXPECT_EQ(report.dangling_args[0], (pf::DanglingArg{"pali_1", "prompt"}));
  const auto* pali = report.graph.find("pali_1");
  ASSERT_NE(pali, nullptr);
  EXPECT_EQ(pali->edge_count(), 1u);
  EXPECT_EQ(pali->incoming_edges.count("prompt"), 0u);
  EXPECT_EQ(report.graph.edge_count(), 1u);
}

TEST(Interpret, CascadeModeDropsDependents) {
  const std::string source =
      "a_out = pali_1: pali(image=ghost_1)\n"
      "markdown_viewer_1: markdown_viewer(markdown=a_out)\n";
  const auto report = pf::compile(source, registry(), {.cascade_dangling = true});
  EXPECT_TRUE(report.graph.nodes.empty());
  EXPECT_EQ(report.dropped_lines.size(), 2u);
}

TEST(Interpret, DuplicateIdKeepsFirst) {
  const std::string source =
      "input_text_1: input_text(text=\"first\")\n"
      "input_text_1: input_text(text=\"second\")\n";
  const auto report = pf::compile(source, registry());
  ASSERT_EQ(report.graph.nodes.size(), 1u);
  EXPECT_EQ(std::get<std::string>(report.graph.nodes[0].params.at("text")), "first");
  ASSERT_EQ(report.dropped_lines.size(), 1u);
  EXPECT_EQ(report.dropped_lines[0].line, 2u);
}

TEST(Interpret, DefaultsMergeWithLiterals) {
  const auto report = pf::compile("google_search_1: google_search(numResults=\"3\")\n"
                                   "palm_textgen_1: palm_textgen()\n",
                                   registry());
  ASSERT_EQ(report.graph.nodes.size(), 2u);
  EXPECT_EQ(std::get<std::int64_t>(report.graph.nodes[0].params.at("numResults")), 3);
  const auto& palm = report.graph.nodes[1].params;
  EXPECT_EQ(std::get<double>(palm.at("temperature")), 0.5);
  EXPECT_EQ(std::get<std::int64_t>(palm.at("maxOutputTokens")), 256);
}

TEST(Interpret, TypeIncompatibleEdgeIsNotEmitted) {
  const auto report = pf::compile("input_text_1: input_text()\n"
                                  "image_viewer_1: image_viewer(image=input_text_1)\n",
                                  registry());
  EXPECT_EQ(report.graph.nodes.size(), 2u);
  EXPECT_EQ(report.graph.edge_count(), 0u);
  EXPECT_FALSE(report.diagnostics.empty());
  EXPECT_TRUE(pf::validate(report.graph, registry()).empty());
}

TEST(Interpret, FixturesCompileCleanAndValidate) {
  for (const auto& name : testing_support::pipeline_names()) {
    const auto source = testing_support::pipeline_source(name);
    const auto report = pf::compile(source, registry());
    EXPECT_TRUE(report.dropped_lines.empty()) << name;
    EXPECT_TRUE(report.dangling_args.empty()) << name;
    EXPECT_TRUE(report.diagnostics.empty()) << name;
    EXPECT_TRUE(pf::validate(report.graph, registry()).empty()) << name;
    EXPECT_EQ(report, pf::compile(source, registry())) << name << " is not deterministic";
  }
}

TEST(Interpret, RemovingAHallucinatedLineChangesNothing) {
  const std::string with =
      "input_image_1: input_image()\n"
      "s_1_out = super_resolution_1: super_resolution(image=input_image_1)\n"
      "image_viewer_1: image_viewer(image=input_image_1)\n";
  const std::string without =
      "input_image_1: input_image()\n"
      "image_viewer_1: image_viewer(image=input_image_1)\n";
  EXPECT_EQ(pf::compile(with, registry()).graph, pf::compile(without, registry()).graph);
}

TEST(Validate, TwoNodeCycle) {
  pf::SerializedGraph g;
  g.nodes.push_back({"a_1", "image_processor", {{"image", {{"b_1", "image"}}}}, {}, {}});
  g.nodes.push_back({"b_1", "image_processor", {{"image", {{"a_1", "image"}}}}, {}, {}});
  const auto violations = pf::validate(g, registry());
  ASSERT_EQ(violations.size(), 1u);
  EXPECT_EQ(violations[0].kind, pf::ViolationKind::cycle);
  auto ids = violations[0].node_ids;
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(ids, (std::vector<std::string>{"a_1", "b_1"}));
}

TEST(Validate, TypeMismatch) {
  // text output into an image input, both sockets taken from the registry.
  const auto* text = registry().find("input_text");
  const auto* viewer = registry().find("image_viewer");
  ASSERT_FALSE(viewer->input_specs[0].accepts_any_of(text->output_specs[0].data_types));
  pf::SerializedGraph g;
  g.nodes.push_back({"input_text_1", "input_text", {}, {}, {}});
  g.nodes.push_back({"image_viewer_1", "image_viewer", {{"image", {{"input_text_1", "text"}}}}, {}, {}});
  const auto violations = pf::validate(g, registry());
  ASSERT_EQ(violations.size(), 1u);
  EXPECT_EQ(violations[0].kind, pf::ViolationKind::type_mismatch);
}

TEST(Validate, ReferenceErrors) {
  pf::SerializedGraph g;
  g.nodes.push_back({"a_1", "image_processor", {{"pixels", {{"zz_1", "image"}}}}, {}, {}});
  g.nodes.push_back({"a_1", "warp_drive", {}, {}, {}});
  const auto violations = pf::validate(g, registry());
  auto has = [&](pf::ViolationKind kind) {
    return std::any_of(violations.begin(), violations.end(), [&](const auto& v) { return v.kind == kind; });
  };
  EXPECT_TRUE(has(pf::ViolationKind::duplicate_id));
  EXPECT_TRUE(has(pf::ViolationKind::unknown_spec));
  EXPECT_TRUE(has(pf::ViolationKind::unknown_input));
}

TEST(GraphJson, FieldNamesAndRoundTrip) {
  pf::SerializedGraph one;
  one.nodes.push_back({"pali_1", "pali", {}, {}, {}});
  const auto doc = nlohmann::json::parse(pf::to_json(one));
  EXPECT_EQ(doc["nodes"][0]["nodeSpecId"], "pali");

  const auto question = nlohmann::json::parse(pf::to_json(testing_support::golden("image_question")));
  ASSERT_EQ(question["nodes"].size(), 3u);
  EXPECT_EQ(question["nodes"][2]["incomingEdges"].size(), 2u);

  const auto sunglasses = testing_support::golden("sunglasses");
  EXPECT_EQ(sunglasses.nodes.size(), 6u);
  EXPECT_EQ(sunglasses.edge_count(), 6u);
  EXPECT_EQ(pf::from_json(pf::to_json(sunglasses)), sunglasses);
}

TEST(GraphJson, ErrorsCarryAPath) {
  EXPECT_THROW(pf::from_json("[1,"), pf::ParseError);
  try {
    pf::from_json(R"({"nodes":[{"id":"a_1","nodeSpecId":"pali","incomingEdges":{"image":[{"sourceNodeId":1}]}}]})");
    FAIL();
  } catch (const pf::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("$.nodes[0]"), std::string::npos) << e.what();
  }
}
