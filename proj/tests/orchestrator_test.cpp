#include <gtest/gtest.h>

#include <cstdlib>
#include <functional>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "pipeforge/llm_backend.hpp"
#include "pipeforge/orchestrator.hpp"
#include "support/support.hpp"

namespace pf = pipeforge;
using testing_support::registry;

namespace {

const pf::FewShotLibrary& fewshot() {
  static const auto lib = pf::FewShotLibrary::load(testing_support::kDataDir / "fewshot.json");
  return lib;
}

pf::ReplayBackend replay() { return pf::ReplayBackend(testing_support::kFixturesDir / "replay"); }

// Answers by stage; a reply handler may also throw or sleep.
class ScriptedBackend : public pf::LlmBackend {
public:
  std::function<std::string(const pf::CompletionRequest&)> reply;
  std::vector<pf::PromptStage> calls;
  std::string complete(const pf::CompletionRequest& request) override {
    calls.push_back(request.stage);
    return reply(request);
  }
  std::string name() const override { return "scripted"; }
};

const std::string kSunglasses = "Create a virtual sunglasses try-on experience using your web camera.";
const std::string kNews =
    "Get the latest news about New York using Google Search and compile a high-level summary of one of the results.";
const std::string kHallucination = "Highlight people in an upscaled version of my photo.";

} // namespace

TEST(Generate, SunglassesReplayMatchesGolden) {
  auto backend = replay();
  const auto result = pf::generate(kSunglasses, pf::PipelineTag::multimodal, backend, registry(), fewshot());
  EXPECT_EQ(result.graph.nodes.size(), 6u);
  EXPECT_EQ(result.graph.edge_count(), 6u);
  EXPECT_TRUE(pf::same_structure(result.graph, testing_support::golden("sunglasses")));
  EXPECT_EQ(result.graph, testing_support::golden("sunglasses"));
  EXPECT_TRUE(result.report.dropped_lines.empty());
}

TEST(Generate, NewsReplayMatchesGolden) {
  auto backend = replay();
  const auto result = pf::generate(kNews, pf::PipelineTag::language, backend, registry(), fewshot());
  EXPECT_EQ(result.graph, testing_support::golden("news_summary"));
  EXPECT_EQ(result.selected_nodes.size(), 7u);
}

TEST(Generate, HallucinatedLineIsReported) {
  auto backend = replay();
  const auto result = pf::generate(kHallucination, pf::PipelineTag::visual, backend, registry(), fewshot());
  ASSERT_EQ(result.report.dropped_lines.size(), 1u);
  EXPECT_EQ(result.report.dropped_lines[0].reason, "unknown node type super_resolution");
  EXPECT_EQ(result.graph.nodes.size(), 5u);
  EXPECT_TRUE(pf::validate(result.graph, registry()).empty());
}

TEST(Generate, ReplayIsDeterministic) {
  auto a = replay();
  auto b = replay();
  EXPECT_EQ(pf::to_json(pf::generate(kNews, pf::PipelineTag::language, a, registry(), fewshot())),
            pf::to_json(pf::generate(kNews, pf::PipelineTag::language, b, registry(), fewshot())));
}

TEST(Generate, ResultJsonShape) {
  auto backend = replay();
  const auto doc = nlohmann::json::parse(
      pf::to_json(pf::generate(kSunglasses, pf::PipelineTag::multimodal, backend, registry(), fewshot())));
  for (const char* key : {"selectedNodes", "pseudocode", "droppedLines", "graph"}) EXPECT_TRUE(doc.contains(key)) << key;
  EXPECT_FALSE(doc.contains("timings"));
}

TEST(Generate, EmptySelectorWithoutFallback) {
  ScriptedBackend backend;
  backend.reply = [](const auto&) { return std::string(); };
  pf::GenerateOptions options;
  options.selector_fallback = false;
  try {
    pf::generate("x", pf::PipelineTag::visual, backend, registry(), fewshot(), options);
    FAIL();
  } catch (const pf::StageError& e) {
    EXPECT_EQ(e.stage(), "selector");
    EXPECT_EQ(e.kind(), pf::StageError::Kind::empty);
    EXPECT_NE(std::string(e.what()).find("selector produced no nodes"), std::string::npos);
  }
  EXPECT_EQ(backend.calls.size(), 1u);
}

TEST(Generate, EmptySelectorFallsBack) {
  ScriptedBackend backend;
  backend.reply = [](const pf::CompletionRequest& r) {
    return r.stage == pf::PromptStage::selector ? std::string("nothing useful")
                                                : std::string("live_camera_1: live_camera()\n");
  };
  const auto result = pf::generate("x", pf::PipelineTag::visual, backend, registry(), fewshot());
  EXPECT_TRUE(result.fallback_used);
  EXPECT_EQ(result.graph.nodes.size(), 1u);
}

TEST(Generate, EmptyWriterOutput) {
  ScriptedBackend backend;
  backend.reply = [](const pf::CompletionRequest& r) {
    return r.stage == pf::PromptStage::selector ? std::string("pali") : std::string("```\n\n```");
  };
  try {
    pf::generate("x", pf::PipelineTag::visual, backend, registry(), fewshot());
    FAIL();
  } catch (const pf::StageError& e) {
    EXPECT_EQ(e.stage(), "writer");
    EXPECT_NE(std::string(e.what()).find("no pseudocode produced"), std::string::npos);
  }
}

TEST(Generate, BackendFailuresNameTheStage) {
  ScriptedBackend backend;
  backend.reply = [](const pf::CompletionRequest& r) -> std::string {
    if (r.stage == pf::PromptStage::writer) throw pf::BackendTimeout("slow");
    return "pali";
  };
  try {
    pf::generate("x", pf::PipelineTag::visual, backend, registry(), fewshot());
    FAIL();
  } catch (const pf::StageError& e) {
    EXPECT_EQ(e.stage(), "writer");
    EXPECT_EQ(e.kind(), pf::StageError::Kind::timeout);
  }
  backend.reply = [](const pf::CompletionRequest&) -> std::string { throw pf::BackendError("down"); };
  try {
    pf::generate("x", pf::PipelineTag::visual, backend, registry(), fewshot());
    FAIL();
  } catch (const pf::StageError& e) {
    EXPECT_EQ(e.stage(), "selector");
    EXPECT_EQ(e.kind(), pf::StageError::Kind::failure);
  }
}

TEST(Generate, SlowStageTimesOut) {
  ScriptedBackend backend;
  backend.reply = [](const pf::CompletionRequest&) {
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    return std::string("pali");
  };
  pf::GenerateOptions options;
  options.stage_timeout = std::chrono::milliseconds(5);
  try {
    pf::generate("x", pf::PipelineTag::visual, backend, registry(), fewshot(), options);
    FAIL();
  } catch (const pf::StageError& e) {
    EXPECT_EQ(e.kind(), pf::StageError::Kind::timeout);
  }
}

TEST(Generate, RequestsUseConfiguredTemperature) {
  ScriptedBackend backend;
  std::vector<double> temps;
  backend.reply = [&](const pf::CompletionRequest& r) {
    temps.push_back(r.temperature);
    return std::string(r.stage == pf::PromptStage::selector ? "input_text" : "input_text_1: input_text()");
  };
  pf::generate("x", pf::PipelineTag::language, backend, registry(), fewshot());
  EXPECT_EQ(temps, (std::vector<double>{0.0, 0.0}));
}

TEST(ExtractPseudocode, Fences) {
  EXPECT_EQ(pf::extract_pseudocode("  a_1: a()\n"), "a_1: a()");
  EXPECT_EQ(pf::extract_pseudocode("Here you go:\n```text\na_1: a()\n```\nDone."), "a_1: a()");
  EXPECT_EQ(pf::extract_pseudocode("```\na_1: a()\n"), "a_1: a()");
}

TEST(Replay, HashAndRecord) {
  EXPECT_EQ(pf::prompt_hash("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const auto dir = std::filesystem::temp_directory_path() / ("pipeforge-replay-" + std::to_string(::getpid()));
  pf::ReplayBackend backend(dir);
  EXPECT_THROW(backend.complete({"hello"}), pf::BackendError);
  backend.record("hello", "world");
  EXPECT_EQ(backend.complete({"hello"}), "world");
  std::filesystem::remove_all(dir);
}

TEST(Backends, Selection) {
  ::unsetenv("PIPEFORGE_LLM_URL");
  ::unsetenv("PIPEFORGE_LLM_BACKEND");
  EXPECT_THROW(pf::make_backend("http", "."), pf::BackendConfigError);
  EXPECT_THROW(pf::make_backend("carrier_pigeon", "."), pf::BackendConfigError);
  EXPECT_EQ(pf::make_backend("", ".")->name(), "replay");
  ::setenv("PIPEFORGE_LLM_BACKEND", "http", 1);
  EXPECT_THROW(pf::make_backend("", "."), pf::BackendConfigError);
  ::unsetenv("PIPEFORGE_LLM_BACKEND");
}

TEST(Backends, HttpChatCompletion) {
  httplib::Server server;
  nlohmann::json seen;
  std::string auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"pali, markdown_viewer"}}]})",
                    "application/json");
  });
  server.Post("/broken", [](const auto&, httplib::Response& res) { res.status = 500; });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  pf::HttpBackend backend({base + "/v1/chat/completions", "test-model", "secret"});
  EXPECT_EQ(backend.complete({"prompt text", 0, std::chrono::seconds(5)}), "pali, markdown_viewer");
  EXPECT_EQ(seen["model"], "test-model");
  EXPECT_EQ(seen["temperature"], 0);
  EXPECT_EQ(seen["messages"][0]["content"], "prompt text");
  EXPECT_EQ(auth, "Bearer secret");

  pf::HttpBackend broken({base + "/broken", "", ""});
  EXPECT_THROW(broken.complete({"x"}), pf::BackendError);
  server.stop();
  t.join();

  pf::HttpBackend down({base + "/v1/chat/completions", "", ""});
  EXPECT_THROW(down.complete({"x", 0, std::chrono::seconds(1)}), pf::BackendError);
}
