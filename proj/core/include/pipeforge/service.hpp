#pragma once

// JSON-over-HTTP front end:
//   GET  /api/nodes      registry JSON, ETag / If-None-Match
//   POST /api/generate   {instruction, tag}              -> generation result
//   POST /api/compile    {pseudocode}                    -> compile report, laid out
//   POST /api/evaluate   {generated, target, cascade?}   -> interaction report
//   POST /api/layout     {graph}                         -> laid-out graph
// Every error body is {error, detail} (plus stage for generation failures).

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>

#include "pipeforge/llm_backend.hpp"
#include "pipeforge/metric.hpp"
#include "pipeforge/orchestrator.hpp"
#include "pipeforge/prompts.hpp"
#include "pipeforge/registry.hpp"

namespace pipeforge {

struct ServiceConfig {
  GenerateOptions generate;
  MetricOptions metric;
  std::size_t eval_workers = 2; // concurrent /api/evaluate searches
  std::size_t max_compile_bytes = 100 * 1024;
  std::size_t max_instruction_chars = 2000;
  std::filesystem::path save_dir; // appends generations.jsonl when set
  std::string cors_origin;        // Access-Control-Allow-Origin when set
};

class Service {
public:
  Service(Registry registry, FewShotLibrary fewshot, std::unique_ptr<LlmBackend> backend, ServiceConfig config = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket; port 0 picks a free port. Returns the bound
  /// port. Throws Error when the address is unavailable.
  int bind(const std::string& host, int port);

  /// Serves until stop(); in-flight requests finish first.
  void run();
  void stop();
  bool running() const;

  const std::string& etag() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace pipeforge
