#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "twentyq/engine.hpp"
#include "twentyq/game.hpp"

namespace twentyq {

/// Settings shared by the CLI and the service. Loaded from `key = value`
/// lines; '#' starts a comment.
struct AppConfig {
    std::filesystem::path manifest;
    std::optional<std::string> scorer_url;
    std::chrono::milliseconds scorer_timeout{2000};
    std::string bind = "127.0.0.1:8080";
    bool redact_evidence = true;
    std::optional<std::filesystem::path> transcript_dir;
    EngineOptions engine;
    GameConfig game;
};

/// Applies one setting; throws UsageError naming the key on an unknown key
/// or a bad value.
void apply_setting(AppConfig& config, std::string_view key, std::string_view value);

/// Throws DataError when the file cannot be read, UsageError (with line
/// number) on a bad line.
AppConfig load_config_file(const std::filesystem::path& path, AppConfig base = {});

}  // namespace twentyq
