#pragma once

#include <filesystem>

namespace pipeforge {

/// PIPEFORGE_DATA_DIR, else the source tree's data/ when it exists, else the
/// installed share directory.
std::filesystem::path data_dir();

/// PIPEFORGE_REGISTRY, else data_dir()/registry.json.
std::filesystem::path default_registry_path();

/// PIPEFORGE_FEWSHOT, else data_dir()/fewshot.json.
std::filesystem::path default_fewshot_path();

/// PIPEFORGE_REPLAY_DIR, else the source tree's fixtures/replay, else
/// ./fixtures/replay.
std::filesystem::path default_replay_dir();

} // namespace pipeforge
