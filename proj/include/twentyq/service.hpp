#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "twentyq/engine.hpp"
#include "twentyq/game.hpp"

namespace httplib {
class Server;
}

namespace twentyq {

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

struct ServiceOptions {
    GameConfig defaults;
    /// Mask the secret inside passage text of open-session debug payloads.
    bool redact_evidence = true;
    /// When set, each transcript is written here as <session_id>.jsonl on close.
    std::optional<std::filesystem::path> transcript_dir;
};

inline constexpr std::string_view kRedacted = "[secret]";

/// Replaces every word that starts with `secret` (any case) by "[secret]".
std::string redact(std::string_view text, std::string_view secret);

/// Session-oriented API. Every method is safe to call concurrently; turns of
/// one session are serialised.
class SessionService {
  public:
    SessionService(std::shared_ptr<const Engine> engine, ServiceOptions options = {});

    ApiResponse create_session(const nlohmann::json& request);
    ApiResponse post_question(const std::string& session_id, const nlohmann::json& request);
    ApiResponse post_guess(const std::string& session_id, const nlohmann::json& request);
    ApiResponse get_transcript(const std::string& session_id) const;
    ApiResponse health() const;

    std::size_t session_count() const;

  private:
    struct Entry {
        explicit Entry(GameSession s) : session(std::move(s)) {}
        mutable std::mutex mutex;
        GameSession session;
    };

    std::shared_ptr<Entry> find(const std::string& session_id) const;
    nlohmann::json secure(nlohmann::json body, const GameSession& session) const;
    void persist(const GameSession& session) const;

    std::shared_ptr<const Engine> engine_;
    ServiceOptions options_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

/// Registers the /v1 routes on `server`.
void register_routes(httplib::Server& server, SessionService& service);

/// Binds "host:port" and serves until the process is stopped. Returns false
/// when the address cannot be bound.
bool serve(SessionService& service, const std::string& bind);

}  // namespace twentyq
