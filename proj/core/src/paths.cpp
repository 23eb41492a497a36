#include "pipeforge/paths.hpp"

#include <cstdlib>

namespace pipeforge {

namespace {

std::filesystem::path from_env(const char* name) {
  const char* value = std::getenv(name);
  return value == nullptr ? std::filesystem::path() : std::filesystem::path(value);
}

} // namespace

std::filesystem::path data_dir() {
  if (auto dir = from_env("PIPEFORGE_DATA_DIR"); !dir.empty()) return dir;
  std::error_code ec;
  if (std::filesystem::is_directory(PIPEFORGE_SOURCE_DATA_DIR, ec)) return PIPEFORGE_SOURCE_DATA_DIR;
  return PIPEFORGE_INSTALL_DATA_DIR;
}

std::filesystem::path default_registry_path() {
  if (auto path = from_env("PIPEFORGE_REGISTRY"); !path.empty()) return path;
  return data_dir() / "registry.json";
}

std::filesystem::path default_fewshot_path() {
  if (auto path = from_env("PIPEFORGE_FEWSHOT"); !path.empty()) return path;
  return data_dir() / "fewshot.json";
}

std::filesystem::path default_replay_dir() {
  if (auto dir = from_env("PIPEFORGE_REPLAY_DIR"); !dir.empty()) return dir;
  std::error_code ec;
  if (std::filesystem::is_directory(PIPEFORGE_SOURCE_REPLAY_DIR, ec)) return PIPEFORGE_SOURCE_REPLAY_DIR;
  return std::filesystem::path("fixtures") / "replay";
}

} // namespace pipeforge
