#include "pipeforge/service.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <semaphore>

#include <httplib.h>

#include "json_support.hpp"
#include "pipeforge/interpreter.hpp"
#include "pipeforge/layout.hpp"

namespace pipeforge {

namespace {

using detail::json;
using detail::ordered_json;

constexpr const char* kJson = "application/json";

void send_error(httplib::Response& res, int status, std::string_view error, std::string_view detail,
                ordered_json extra = ordered_json::object()) {
  ordered_json body;
  body["error"] = std::string(error);
  body["detail"] = std::string(detail);
  for (auto& [key, value] : extra.items()) body[key] = value;
  res.status = status;
  res.set_content(body.dump(), kJson);
}

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    std::uint32_t min = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1, min = 0x80;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2, min = 0x800;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3, min = 0x10000;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    std::uint32_t cp = c & (0x3F >> extra);
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += extra + 1;
  }
  return true;
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

ordered_json violations_value(const std::vector<Violation>& violations) {
  ordered_json out = ordered_json::array();
  for (const auto& v : violations) {
    out.push_back({{"kind", std::string(to_string(v.kind))}, {"nodeIds", v.node_ids}, {"message", v.message}});
  }
  return out;
}

} // namespace

struct Service::Impl {
  Registry registry;
  FewShotLibrary fewshot;
  std::unique_ptr<LlmBackend> backend;
  ServiceConfig config;
  std::string registry_json;
  std::string etag;
  std::counting_semaphore<> eval_slots;
  std::mutex save_mutex;
  httplib::Server server;
  std::atomic<bool> bound{false};

  Impl(Registry reg, FewShotLibrary shots, std::unique_ptr<LlmBackend> llm, ServiceConfig cfg)
      : registry(std::move(reg)), fewshot(std::move(shots)), backend(std::move(llm)), config(std::move(cfg)),
        eval_slots(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, config.eval_workers))) {
    registry_json = registry.to_json();
    etag = "\"v" + std::to_string(registry.version()) + "-" + prompt_hash(registry_json).substr(0, 16) + "\"";
    routes();
  }

  // Parses a JSON object body; sends 400 and returns false otherwise.
  bool read_object(const httplib::Request& req, httplib::Response& res, json& out) {
    if (req.body.empty()) {
      send_error(res, 400, "bad_request", "request body is empty");
      return false;
    }
    if (!valid_utf8(req.body)) {
      send_error(res, 400, "bad_request", "request body is not valid UTF-8");
      return false;
    }
    try {
      out = json::parse(req.body);
    } catch (const json::exception& e) {
      send_error(res, 400, "bad_request", std::string("malformed JSON: ") + e.what());
      return false;
    }
    if (!out.is_object()) {
      send_error(res, 400, "bad_request", "request body must be a JSON object");
      return false;
    }
    return true;
  }

  void save(const std::string& line) {
    if (config.save_dir.empty()) return;
    std::lock_guard lock(save_mutex);
    std::filesystem::create_directories(config.save_dir);
    std::ofstream out(config.save_dir / "generations.jsonl", std::ios::app);
    out << line << '\n';
  }

  void handle_nodes(const httplib::Request& req, httplib::Response& res) {
    res.set_header("ETag", etag);
    if (req.get_header_value("If-None-Match") == etag) {
      res.status = 304;
      return;
    }
    res.set_content(registry_json, kJson);
  }

  void handle_generate(const httplib::Request& req, httplib::Response& res) {
    json body;
    if (!read_object(req, res, body)) return;
    const auto instruction = body.value("instruction", json()).is_string() ? body["instruction"].get<std::string>() : "";
    const auto tag_text = body.value("tag", json()).is_string() ? body["tag"].get<std::string>() : "";
    const auto tag = parse_tag(tag_text);
    if (!tag) {
      send_error(res, 400, "bad_request", "tag must be one of language, visual, multimodal");
      return;
    }
    if (instruction.find_first_not_of(" \t\r\n") == std::string::npos) {
      send_error(res, 400, "bad_request", "instruction is empty");
      return;
    }
    if (utf8_length(instruction) > config.max_instruction_chars) {
      send_error(res, 400, "bad_request",
                 "instruction exceeds " + std::to_string(config.max_instruction_chars) + " characters");
      return;
    }
    try {
      const auto result = generate(instruction, *tag, *backend, registry, fewshot, config.generate);
      const std::string text = to_json(result, -1);
      save(text);
      res.set_content(text, kJson);
    } catch (const StageError& e) {
      const bool timeout = e.kind() == StageError::Kind::timeout;
      send_error(res, timeout ? 504 : 502, timeout ? "stage_timeout" : "backend_failure", e.what(),
                 {{"stage", e.stage()}});
    }
  }

  void handle_compile(const httplib::Request& req, httplib::Response& res) {
    if (req.body.size() > config.max_compile_bytes) {
      send_error(res, 413, "payload_too_large",
                 "pseudocode bodies are limited to " + std::to_string(config.max_compile_bytes) + " bytes");
      return;
    }
    std::string source;
    if (req.get_header_value("Content-Type").starts_with("text/plain")) {
      if (!valid_utf8(req.body)) {
        send_error(res, 400, "bad_request", "request body is not valid UTF-8");
        return;
      }
      source = req.body;
    } else {
      json body;
      if (!read_object(req, res, body)) return;
      if (!body.contains("pseudocode") || !body["pseudocode"].is_string()) {
        send_error(res, 400, "bad_request", "field 'pseudocode' must be a string");
        return;
      }
      source = body["pseudocode"].get<std::string>();
    }
    if (source.find_first_not_of(" \t\r\n") == std::string::npos) {
      send_error(res, 400, "bad_request", "pseudocode is empty");
      return;
    }
    CompileReport report = compile(source, registry);
    report.graph = optimize_layout(report.graph);
    res.set_content(to_json(report, -1), kJson);
  }

  void handle_evaluate(const httplib::Request& req, httplib::Response& res) {
    json body;
    if (!read_object(req, res, body)) return;
    SerializedGraph generated, target;
    try {
      generated = detail::graph_from_value(detail::require(body, "generated", "$"), "$.generated");
      target = detail::graph_from_value(detail::require(body, "target", "$"), "$.target");
    } catch (const Error& e) {
      send_error(res, 400, "bad_request", e.what());
      return;
    }
    MetricOptions options = config.metric;
    if (body.contains("cascade")) {
      if (!body["cascade"].is_boolean()) {
        send_error(res, 400, "bad_request", "$.cascade must be a boolean");
        return;
      }
      options.cascade = body["cascade"].get<bool>();
    }
    eval_slots.acquire();
    try {
      const auto report = interactions(generated, target, registry, options);
      eval_slots.release();
      res.set_content(to_json(report, -1), kJson);
    } catch (const InvalidGraph& e) {
      eval_slots.release();
      send_error(res, 422, "invalid_graph", e.what(),
                 {{"graph", e.which()}, {"violations", violations_value(e.violations())}});
    } catch (const BudgetExceeded& e) {
      eval_slots.release();
      send_error(res, 409, "budget_exceeded", e.what());
    } catch (const ValidationError& e) {
      eval_slots.release();
      send_error(res, 422, "invalid_graph", e.what(), {{"violations", ordered_json::array()}});
    } catch (...) {
      eval_slots.release();
      throw;
    }
  }

  void handle_layout(const httplib::Request& req, httplib::Response& res) {
    json body;
    if (!read_object(req, res, body)) return;
    SerializedGraph graph;
    try {
      graph = detail::graph_from_value(body.contains("graph") ? body["graph"] : body,
                                       body.contains("graph") ? "$.graph" : "$");
    } catch (const Error& e) {
      send_error(res, 400, "bad_request", e.what());
      return;
    }
    try {
      res.set_content(to_json(optimize_layout(graph), -1), kJson);
    } catch (const CycleError& e) {
      send_error(res, 422, "invalid_graph", e.what());
    }
  }

  void routes() {
    server.set_payload_max_length(8 * 1024 * 1024);
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    server.Get("/api/nodes", [this](const auto& req, auto& res) { handle_nodes(req, res); });
    server.Post("/api/generate", [this](const auto& req, auto& res) { handle_generate(req, res); });
    server.Post("/api/compile", [this](const auto& req, auto& res) { handle_compile(req, res); });
    server.Post("/api/evaluate", [this](const auto& req, auto& res) { handle_evaluate(req, res); });
    server.Post("/api/layout", [this](const auto& req, auto& res) { handle_layout(req, res); });
    server.Options(R"(/api/.*)", [](const auto&, auto& res) { res.status = 204; });

    server.set_post_routing_handler([this](const auto&, auto& res) {
      if (!config.cors_origin.empty()) {
        res.set_header("Access-Control-Allow-Origin", config.cors_origin);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type, If-None-Match");
        res.set_header("Access-Control-Expose-Headers", "ETag");
      }
    });
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
      switch (res.status) {
      case 404: send_error(res, 404, "not_found", "no route for " + req.method + " " + req.path); break;
      case 413: send_error(res, 413, "payload_too_large", "request body too large"); break;
      default: send_error(res, res.status, "http_error", httplib::status_message(res.status)); break;
      }
      return httplib::Server::HandlerResponse::Handled;
    });
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string what = "unknown error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      send_error(res, 500, "internal_error", what);
    });
  }
};

Service::Service(Registry registry, FewShotLibrary fewshot, std::unique_ptr<LlmBackend> backend, ServiceConfig config)
    : impl_(std::make_unique<Impl>(std::move(registry), std::move(fewshot), std::move(backend), std::move(config))) {}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind " + host + ": no free port");
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw Error("cannot bind " + host + ":" + std::to_string(port) + ": address unavailable");
  }
  impl_->bound = true;
  return bound;
}

void Service::run() {
  if (!impl_->bound) throw Error("Service::run called before bind");
  impl_->server.listen_after_bind();
}

void Service::stop() {
  if (impl_ && impl_->bound) impl_->server.stop();
}

bool Service::running() const { return impl_->server.is_running(); }

const std::string& Service::etag() const { return impl_->etag; }

} // namespace pipeforge
