// pipeforge command-line tool.
// Exit codes: 0 ok, 1 usage or I/O error, 2 LLM backend failure, 3 metric
// budget exceeded.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <sstream>
#include <thread>
#include <unistd.h>

#include <CLI11.hpp>

#include "pipeforge/corpus.hpp"
#include "pipeforge/dsl.hpp"
#include "pipeforge/interpreter.hpp"
#include "pipeforge/layout.hpp"
#include "pipeforge/llm_backend.hpp"
#include "pipeforge/metric.hpp"
#include "pipeforge/orchestrator.hpp"
#include "pipeforge/paths.hpp"
#include "pipeforge/service.hpp"

namespace pf = pipeforge;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kBackend = 2;
constexpr int kBudget = 3;

struct Global {
  std::string registry;
  std::string fewshot;
  bool json = false;
};

struct Style {
  bool color = false;
  std::string warn(const std::string& s) const { return color ? "\033[33m" + s + "\033[0m" : s; }
  std::string bad(const std::string& s) const { return color ? "\033[31m" + s + "\033[0m" : s; }
  std::string bold(const std::string& s) const { return color ? "\033[1m" + s + "\033[0m" : s; }
};

Style stderr_style() {
  const char* no_color = std::getenv("NO_COLOR");
  return {(no_color == nullptr || *no_color == '\0') && isatty(STDERR_FILENO) != 0};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw pf::ParseError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw pf::ParseError("cannot write " + path);
}

pf::Registry load_registry(const Global& g) {
  return pf::Registry::load(g.registry.empty() ? pf::default_registry_path() : std::filesystem::path(g.registry));
}

pf::FewShotLibrary load_fewshot(const Global& g) {
  return pf::FewShotLibrary::load(g.fewshot.empty() ? pf::default_fewshot_path() : std::filesystem::path(g.fewshot));
}

pf::PipelineTag require_tag(const std::string& text) {
  auto tag = pf::parse_tag(text);
  if (!tag) throw CLI::ValidationError("--tag", "must be one of language, visual, multimodal");
  return *tag;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) out += (out.empty() ? "" : ", ") + item;
  return out;
}

void print_violations(const pf::InvalidGraph& e, const Style& style) {
  std::cerr << style.bad("error: ") << e.what() << '\n';
  for (const auto& v : e.violations()) std::cerr << "  " << pf::to_string(v.kind) << ": " << v.message << '\n';
}

struct GenerateArgs {
  std::string instruction, tag, backend, replay_dir, out;
  long timeout_ms = 60'000;
};

int run_generate(const Global& g, const GenerateArgs& a) {
  const Style style = stderr_style();
  const auto tag = require_tag(a.tag);
  const auto registry = load_registry(g);
  const auto fewshot = load_fewshot(g);
  std::unique_ptr<pf::LlmBackend> backend;
  try {
    const auto dir = a.replay_dir.empty() ? pf::default_replay_dir() : std::filesystem::path(a.replay_dir);
    backend = pf::make_backend(a.backend, dir);
  } catch (const pf::BackendError& e) {
    std::cerr << style.bad("backend error: ") << e.what() << '\n';
    return kBackend;
  }
  pf::GenerateOptions options;
  options.stage_timeout = std::chrono::milliseconds(a.timeout_ms);
  pf::GenerationResult result;
  try {
    result = pf::generate(a.instruction, tag, *backend, registry, fewshot, options);
  } catch (const pf::StageError& e) {
    std::cerr << style.bad("backend error: ") << e.what() << '\n';
    return kBackend;
  }

  const std::string graph_json = pf::to_json(result.graph);
  if (!a.out.empty()) write_file(a.out, graph_json);
  if (g.json) {
    std::cout << pf::to_json(result);
  } else if (a.out.empty()) {
    std::cout << graph_json;
  }
  std::ostream& summary = (g.json || a.out.empty()) ? std::cerr : std::cout;
  summary << style.bold("selected nodes: ") << join(result.selected_nodes)
          << (result.fallback_used ? " (fallback)" : "") << '\n';
  summary << style.bold("graph: ") << result.graph.nodes.size() << " nodes, " << result.graph.edge_count()
          << " edges\n";
  summary << style.bold("dropped lines: ") << result.report.dropped_lines.size() << '\n';
  for (const auto& d : result.report.dropped_lines) {
    summary << "  " << style.warn("line " + std::to_string(d.line) + ": " + d.reason) << '\n';
  }
  if (!a.out.empty()) summary << "wrote " << a.out << '\n';
  return kOk;
}

struct CompileArgs {
  std::string file;
  bool no_layout = false;
  bool report = false;
};

int run_compile(const Global& g, const CompileArgs& a) {
  const Style style = stderr_style();
  const auto registry = load_registry(g);
  const std::string source = read_file(a.file);
  pf::CompileReport report;
  if (source.find_first_not_of(" \t\r\n") == std::string::npos) {
    std::cerr << style.warn("warning: ") << a.file << " is empty\n";
  } else {
    report = pf::compile(source, registry);
  }
  if (!a.no_layout) report.graph = pf::optimize_layout(report.graph);
  if (report.graph.nodes.empty()) std::cerr << style.warn("warning: ") << "no statements found; graph is empty\n";
  for (const auto& d : report.dropped_lines) {
    std::cerr << style.warn("dropped ") << "line " << d.line << ": " << d.reason << '\n';
  }
  for (const auto& d : report.dangling_args) {
    std::cerr << style.warn("dangling ") << d.node_id << "." << d.arg << '\n';
  }
  for (const auto& d : report.diagnostics) std::cerr << style.warn("note: ") << d << '\n';
  std::cout << (a.report || g.json ? pf::to_json(report) : pf::to_json(report.graph));
  return kOk;
}

struct EvalArgs {
  std::string generated, target, corpus, csv;
  bool no_cascade = false;
};

int run_eval(const Global& g, const EvalArgs& a) {
  const Style style = stderr_style();
  const auto registry = load_registry(g);
  pf::MetricOptions options;
  options.cascade = !a.no_cascade;
  try {
    if (!a.corpus.empty()) {
      const auto entries = pf::load_corpus(a.corpus);
      const auto report = pf::evaluate_corpus(entries, options, &registry);
      if (!a.csv.empty()) write_file(a.csv, pf::to_csv(report));
      if (g.json) {
        std::cout << pf::to_json(report);
      } else {
        if (a.csv.empty()) std::cout << pf::to_csv(report) << '\n';
        std::cout << pf::to_table(report);
      }
      return kOk;
    }
    if (a.generated.empty() || a.target.empty()) {
      std::cerr << style.bad("error: ") << "eval needs --generated and --target, or --corpus\n";
      return kUsage;
    }
    const auto generated = pf::from_json(read_file(a.generated));
    const auto target = pf::from_json(read_file(a.target));
    const auto report = pf::interactions(generated, target, registry, options);
    if (g.json) {
      std::cout << pf::to_json(report);
    } else {
      std::printf("count: %zu\nfrom scratch: %zu\nratio: %.4f\n", report.count, report.from_scratch, report.ratio);
      for (const auto& op : report.script) {
        std::cout << "  " << pf::to_string(op.kind) << ' ';
        if (op.kind == pf::EditKind::add_node || op.kind == pf::EditKind::delete_node) {
          std::cout << op.node_id << " (" << op.node_spec_id << ")\n";
        } else {
          std::cout << op.edge.source << '.' << op.edge.output_id << " -> " << op.edge.target << '.'
                    << op.edge.input_id << '\n';
        }
      }
    }
    return kOk;
  } catch (const pf::BudgetExceeded& e) {
    std::cerr << style.bad("budget exceeded: ") << e.what() << '\n';
    return kBudget;
  } catch (const pf::InvalidGraph& e) {
    print_violations(e, style);
    return kUsage;
  }
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string backend, replay_dir, save_dir;
  std::size_t eval_workers = 2;
};

int run_serve(const Global& g, const ServeArgs& a) {
  const Style style = stderr_style();
  auto registry = load_registry(g);
  auto fewshot = load_fewshot(g);
  std::unique_ptr<pf::LlmBackend> backend;
  try {
    const auto dir = a.replay_dir.empty() ? pf::default_replay_dir() : std::filesystem::path(a.replay_dir);
    backend = pf::make_backend(a.backend, dir);
  } catch (const pf::BackendError& e) {
    std::cerr << style.bad("backend error: ") << e.what() << '\n';
    return kBackend;
  }
  pf::ServiceConfig config;
  config.eval_workers = a.eval_workers;
  config.save_dir = a.save_dir;
  if (const char* origin = std::getenv("PIPEFORGE_CORS_ORIGIN")) config.cors_origin = origin;

  // Signals are handled on a dedicated thread so the server can drain.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  pf::Service service(std::move(registry), std::move(fewshot), std::move(backend), config);
  int port = 0;
  try {
    port = service.bind(a.host, a.port);
  } catch (const pf::Error& e) {
    std::cerr << style.bad("error: ") << e.what() << '\n';
    return kUsage;
  }
  std::cout << "listening on " << a.host << ':' << port << std::endl;

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
  });
  service.run();
  // run() also returns if the server fails; wake the waiter either way.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  std::cout << "stopped" << std::endl;
  return kOk;
}

struct RecordArgs {
  std::string instruction, tag, selector_reply, writer_reply, replay_dir;
};

int run_record(const Global& g, const RecordArgs& a) {
  const auto tag = require_tag(a.tag);
  const auto registry = load_registry(g);
  const auto fewshot = load_fewshot(g);
  pf::ReplayBackend replay(a.replay_dir.empty() ? pf::default_replay_dir() : std::filesystem::path(a.replay_dir));
  const std::string selector_text = read_file(a.selector_reply);
  const auto selector = pf::build_selector_prompt(a.instruction, tag, registry, fewshot);
  std::cout << "selector " << replay.record(selector.text, selector_text).filename().string() << '\n';
  if (!a.writer_reply.empty()) {
    const auto picked = pf::parse_selector_output(selector_text, registry);
    const auto writer = pf::build_writer_prompt(a.instruction, tag, picked.nodes, registry, fewshot);
    std::cout << "writer " << replay.record(writer.text, read_file(a.writer_reply)).filename().string() << '\n';
  }
  return kOk;
}

struct PromptArgs {
  std::string stage = "selector", instruction, tag;
  std::vector<std::string> nodes;
};

int run_prompt(const Global& g, const PromptArgs& a) {
  const auto tag = require_tag(a.tag);
  const auto registry = load_registry(g);
  const auto fewshot = load_fewshot(g);
  const auto bundle = a.stage == "writer" ? pf::build_writer_prompt(a.instruction, tag, a.nodes, registry, fewshot)
                                          : pf::build_selector_prompt(a.instruction, tag, registry, fewshot);
  std::cout << bundle.text << '\n';
  std::cerr << "sha256 " << pf::prompt_hash(bundle.text) << ", " << pf::dsl::token_count(bundle.text) << " tokens\n";
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Natural-language to visual pipeline engine"};
  app.require_subcommand(1);
  Global global;
  app.add_option("--registry", global.registry, "Node library JSON (default: bundled registry)");
  app.add_option("--fewshot", global.fewshot, "Few-shot example JSON (default: bundled examples)");
  app.add_flag("--json", global.json, "Machine-readable JSON on stdout");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Instruction + tag -> laid-out pipeline JSON");
  generate->add_option("--instruction", gen.instruction, "What the pipeline should do")->required();
  generate->add_option("--tag", gen.tag, "language, visual or multimodal")->required();
  generate->add_option("--backend", gen.backend, "http or replay (default: PIPEFORGE_LLM_BACKEND, then replay)")
      ->check(CLI::IsMember({"http", "replay"}));
  generate->add_option("--replay-dir", gen.replay_dir, "Replay fixture directory");
  generate->add_option("--out", gen.out, "Write the pipeline JSON here");
  generate->add_option("--timeout-ms", gen.timeout_ms, "Per-stage timeout in milliseconds");

  CompileArgs comp;
  auto* compile = app.add_subcommand("compile", "Pseudocode file -> pipeline JSON");
  compile->add_option("file", comp.file, "Pseudocode (.ipc)")->required();
  compile->add_flag("--no-layout", comp.no_layout, "Keep interpreter positions");
  compile->add_flag("--report", comp.report, "Print the full compile report");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Count user interactions between pipelines");
  eval->add_option("--generated", ev.generated, "Generated pipeline JSON");
  eval->add_option("--target", ev.target, "Target pipeline JSON");
  eval->add_option("--corpus", ev.corpus, "Corpus JSON list of {instruction, tag, target, generated}");
  eval->add_option("--csv", ev.csv, "Write per-pair CSV here (corpus mode)");
  eval->add_flag("--no-cascade", ev.no_cascade, "Charge every edge of a deleted node separately");

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", sv.host, "Bind address")->capture_default_str();
  serve->add_option("--port", sv.port, "Port (0 picks a free one)")->capture_default_str();
  serve->add_option("--backend", sv.backend, "http or replay")->check(CLI::IsMember({"http", "replay"}));
  serve->add_option("--replay-dir", sv.replay_dir, "Replay fixture directory");
  serve->add_option("--save-dir", sv.save_dir, "Append every generation to <dir>/generations.jsonl");
  serve->add_option("--eval-workers", sv.eval_workers, "Concurrent evaluation searches")->check(CLI::PositiveNumber);

  RecordArgs rec;
  auto* record = app.add_subcommand("record", "Store canned LLM replies as replay fixtures");
  record->add_option("--instruction", rec.instruction, "Instruction")->required();
  record->add_option("--tag", rec.tag, "Pipeline tag")->required();
  record->add_option("--selector-reply", rec.selector_reply, "File with the selector reply")->required();
  record->add_option("--writer-reply", rec.writer_reply, "File with the writer reply");
  record->add_option("--replay-dir", rec.replay_dir, "Replay fixture directory");

  PromptArgs pr;
  auto* prompt = app.add_subcommand("prompt", "Print a rendered stage prompt");
  prompt->add_option("--stage", pr.stage, "selector or writer")->check(CLI::IsMember({"selector", "writer"}));
  prompt->add_option("--instruction", pr.instruction, "Instruction")->required();
  prompt->add_option("--tag", pr.tag, "Pipeline tag")->required();
  prompt->add_option("--nodes", pr.nodes, "Selected nodes (writer stage)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  const Style style = stderr_style();
  try {
    if (*generate) return run_generate(global, gen);
    if (*compile) return run_compile(global, comp);
    if (*eval) return run_eval(global, ev);
    if (*serve) return run_serve(global, sv);
    if (*record) return run_record(global, rec);
    if (*prompt) return run_prompt(global, pr);
  } catch (const CLI::Error& e) {
    std::cerr << style.bad("error: ") << e.what() << '\n';
    return kUsage;
  } catch (const pf::BudgetExceeded& e) {
    std::cerr << style.bad("budget exceeded: ") << e.what() << '\n';
    return kBudget;
  } catch (const pf::BackendError& e) {
    std::cerr << style.bad("backend error: ") << e.what() << '\n';
    return kBackend;
  } catch (const std::exception& e) {
    std::cerr << style.bad("error: ") << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
