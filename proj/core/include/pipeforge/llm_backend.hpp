#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "pipeforge/error.hpp"
#include "pipeforge/prompts.hpp"

namespace pipeforge {

struct CompletionRequest {
  std::string prompt;
  double temperature = 0;
  std::chrono::milliseconds timeout{60'000};
  PromptStage stage = PromptStage::selector;
};

/// The backend could not produce a completion (transport, HTTP status,
/// missing replay file, malformed response).
class BackendError : public Error {
public:
  using Error::Error;
};

class BackendTimeout : public BackendError {
public:
  using BackendError::BackendError;
};

/// Missing or invalid backend configuration (e.g. no endpoint URL).
class BackendConfigError : public BackendError {
public:
  using BackendError::BackendError;
};

/// Text completion service. Implementations must tolerate concurrent calls.
class LlmBackend {
public:
  virtual ~LlmBackend() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual std::string name() const = 0;
};

/// Lowercase hex SHA-256 of the prompt bytes.
std::string prompt_hash(std::string_view prompt);

/// Answers from <dir>/<prompt_hash(prompt)>.txt, read verbatim.
class ReplayBackend : public LlmBackend {
public:
  explicit ReplayBackend(std::filesystem::path dir);
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "replay"; }

  /// Writes the file complete() would read for this prompt; returns its path.
  std::filesystem::path record(std::string_view prompt, std::string_view response) const;
  const std::filesystem::path& dir() const { return dir_; }

private:
  std::filesystem::path dir_;
};

/// OpenAI-style chat completion endpoint: POST {model, temperature,
/// messages:[{role:"user", content}]} to the URL, answer taken from
/// choices[0].message.content.
struct HttpBackendConfig {
  std::string url; // e.g. http://localhost:8000/v1/chat/completions
  std::string model;
  std::string api_key; // sent as a bearer token when non-empty
};

class HttpBackend : public LlmBackend {
public:
  explicit HttpBackend(HttpBackendConfig config);
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "http"; }

private:
  HttpBackendConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

/// Reads PIPEFORGE_LLM_URL / PIPEFORGE_LLM_MODEL / PIPEFORGE_LLM_KEY.
/// Throws BackendConfigError when the URL is unset.
HttpBackendConfig http_config_from_env();

/// kind is "http" or "replay"; empty means PIPEFORGE_LLM_BACKEND, then
/// "replay". Throws BackendConfigError for other names.
std::unique_ptr<LlmBackend> make_backend(std::string_view kind, const std::filesystem::path& replay_dir);

} // namespace pipeforge
