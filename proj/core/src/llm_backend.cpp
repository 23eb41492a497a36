#include "pipeforge/llm_backend.hpp"

#include <array>
#include <cstdlib>
#include <fstream>

#include <httplib.h>
#include <openssl/evp.h>

#include "json_support.hpp"

namespace pipeforge {

namespace {

std::string env_or_empty(const char* name) {
  const char* value = std::getenv(name);
  return value == nullptr ? std::string() : std::string(value);
}

} // namespace

std::string prompt_hash(std::string_view prompt) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(prompt.data(), prompt.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw BackendError("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xf];
  }
  return hex;
}

ReplayBackend::ReplayBackend(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::string ReplayBackend::complete(const CompletionRequest& request) {
  const auto path = dir_ / (prompt_hash(request.prompt) + ".txt");
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw BackendError("no replay response for " + std::string(to_string(request.stage)) + " prompt (" +
                       path.filename().string() + ")");
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path ReplayBackend::record(std::string_view prompt, std::string_view response) const {
  std::filesystem::create_directories(dir_);
  const auto path = dir_ / (prompt_hash(prompt) + ".txt");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(response.data(), static_cast<std::streamsize>(response.size()));
  if (!out) throw BackendError("cannot write " + path.string());
  return path;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const auto scheme = config_.url.find("://");
  if (scheme == std::string::npos) throw BackendConfigError("LLM url must start with http:// or https://");
  const auto slash = config_.url.find('/', scheme + 3);
  scheme_host_port_ = config_.url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : config_.url.substr(slash);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (config_.url.starts_with("https://")) throw BackendConfigError("https is not supported in this build");
#endif
}

std::string HttpBackend::complete(const CompletionRequest& request) {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(request.timeout);
  client.set_read_timeout(request.timeout);
  client.set_write_timeout(request.timeout);
  if (!config_.api_key.empty()) client.set_bearer_token_auth(config_.api_key);

  detail::ordered_json body;
  if (!config_.model.empty()) body["model"] = config_.model;
  body["temperature"] = request.temperature;
  body["messages"] = detail::ordered_json::array({{{"role", "user"}, {"content", request.prompt}}});

  auto result = client.Post(path_, body.dump(), "application/json");
  if (!result) {
    const auto err = result.error();
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
      throw BackendTimeout("LLM request timed out (" + httplib::to_string(err) + ")");
    }
    throw BackendError("LLM request failed: " + httplib::to_string(err));
  }
  if (result->status != 200) {
    throw BackendError("LLM endpoint answered HTTP " + std::to_string(result->status));
  }
  try {
    const auto reply = detail::json::parse(result->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const detail::json::exception& e) {
    throw BackendError(std::string("malformed LLM response: ") + e.what());
  }
}

HttpBackendConfig http_config_from_env() {
  HttpBackendConfig config{env_or_empty("PIPEFORGE_LLM_URL"), env_or_empty("PIPEFORGE_LLM_MODEL"),
                           env_or_empty("PIPEFORGE_LLM_KEY")};
  if (config.url.empty()) throw BackendConfigError("PIPEFORGE_LLM_URL is not set");
  return config;
}

std::unique_ptr<LlmBackend> make_backend(std::string_view kind, const std::filesystem::path& replay_dir) {
  std::string chosen(kind);
  if (chosen.empty()) chosen = env_or_empty("PIPEFORGE_LLM_BACKEND");
  if (chosen.empty()) chosen = "replay";
  if (chosen == "replay") return std::make_unique<ReplayBackend>(replay_dir);
  if (chosen == "http") return std::make_unique<HttpBackend>(http_config_from_env());
  throw BackendConfigError("unknown backend '" + chosen + "' (expected http or replay)");
}

} // namespace pipeforge
