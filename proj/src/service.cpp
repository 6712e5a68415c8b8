#include "twentyq/service.hpp"

#include <cctype>
#include <fstream>
#include <iostream>
#include <random>

#include <httplib.h>

#include "twentyq/errors.hpp"
#include "twentyq/text.hpp"

namespace twentyq {

namespace {

ApiResponse error(int status, const std::string& message, std::optional<std::string> field = std::nullopt) {
    nlohmann::json body = {{"error", message}};
    if (field) {
        body["field"] = *field;
    }
    return {status, std::move(body)};
}

// Validation messages are "field: reason".
std::string field_of(const std::string& message) {
    const auto colon = message.find(':');
    return colon == std::string::npos ? std::string() : message.substr(0, colon);
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

void redact_tree(nlohmann::json& node, std::string_view secret, bool redact_text) {
    if (node.is_string()) {
        node = redact(node.get_ref<const std::string&>(), secret);
    } else if (node.is_array()) {
        for (auto& child : node) {
            redact_tree(child, secret, redact_text);
        }
    } else if (node.is_object()) {
        for (auto it = node.begin(); it != node.end(); ++it) {
            if (it.key() == "text" && !redact_text) {
                continue;
            }
            redact_tree(it.value(), secret, redact_text);
        }
    }
}

nlohmann::json evidence_json(const std::vector<RankedPassage>& evidence) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : evidence) {
        out.push_back({
            {"entity", p.passage.entity},
            {"article", to_string(p.passage.article_kind)},
            {"text", p.passage.text},
            {"sparse", p.sparse_score},
            {"rerank", p.rerank_score.value_or(0.0)},
        });
    }
    return out;
}

bool is_non_negative_integer(const nlohmann::json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

void apply_overrides(GameConfig& config, const nlohmann::json& overrides) {
    if (!overrides.is_object()) {
        throw UsageError("config: must be an object");
    }
    for (const auto& [key, value] : overrides.items()) {
        auto size_field = [&](std::size_t& out) {
            if (!is_non_negative_integer(value)) {
                throw UsageError(key + ": expected a non-negative integer");
            }
            out = value.get<std::size_t>();
        };
        auto real_field = [&](double& out) {
            if (!value.is_number()) {
                throw UsageError(key + ": expected a number");
            }
            out = value.get<double>();
        };
        if (key == "n1") {
            size_field(config.n1);
        } else if (key == "n2") {
            size_field(config.n2);
        } else if (key == "w") {
            size_field(config.w);
        } else if (key == "n_p") {
            size_field(config.n_p);
        } else if (key == "max_questions") {
            size_field(config.max_questions);
        } else if (key == "theta_a") {
            real_field(config.theta_a);
        } else if (key == "theta_d") {
            real_field(config.theta_d);
        } else if (key == "seed") {
            if (!is_non_negative_integer(value)) {
                throw UsageError("seed: expected a non-negative integer");
            }
            config.seed = value.get<std::uint64_t>();
        } else {
            throw UsageError(key + ": unknown config field");
        }
    }
    config.validate();
}

}  // namespace

std::string redact(std::string_view text, std::string_view secret) {
    if (secret.empty()) {
        return std::string(text);
    }
    const std::string lowered = to_lower(text);
    const std::string needle = to_lower(secret);
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t hit = lowered.find(needle, pos);
        if (hit == std::string::npos) {
            break;
        }
        if (hit > 0 && is_word_char(text[hit - 1])) {
            out.append(text.substr(pos, hit + 1 - pos));
            pos = hit + 1;
            continue;
        }
        std::size_t end = hit + needle.size();
        while (end < text.size() && is_word_char(text[end])) {
            ++end;
        }
        out.append(text.substr(pos, hit - pos));
        out.append(kRedacted);
        pos = end;
    }
    if (pos < text.size()) {
        out.append(text.substr(pos));
    }
    return out;
}

SessionService::SessionService(std::shared_ptr<const Engine> engine, ServiceOptions options)
    : engine_(std::move(engine)), options_(std::move(options)) {
    options_.defaults.validate();
}

std::shared_ptr<SessionService::Entry> SessionService::find(const std::string& session_id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(session_id);
    return it == sessions_.end() ? nullptr : it->second;
}

std::size_t SessionService::session_count() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

nlohmann::json SessionService::secure(nlohmann::json body, const GameSession& session) const {
    if (session.state() == SessionState::Open) {
        redact_tree(body, session.target().name, options_.redact_evidence);
    }
    return body;
}

void SessionService::persist(const GameSession& session) const {
    if (!options_.transcript_dir) {
        return;
    }
    std::error_code ec;
    std::filesystem::create_directories(*options_.transcript_dir, ec);
    std::ofstream out(*options_.transcript_dir / (session.id() + ".jsonl"), std::ios::binary);
    if (!out) {
        std::cerr << "service: cannot write transcript for session " << session.id() << "\n";
        return;
    }
    out << transcript_jsonl(session.transcript());
}

ApiResponse SessionService::create_session(const nlohmann::json& request) {
    if (!request.is_object()) {
        return error(400, "request body must be a JSON object");
    }
    auto entity = request.find("entity");
    if (entity == request.end() || !entity->is_string() || trim(entity->get<std::string>()).empty()) {
        return error(400, "entity: required string (a name or \"random\")", "entity");
    }

    GameConfig config = options_.defaults;
    const bool seeded = request.contains("config") && request["config"].is_object() &&
                        request["config"].contains("seed");
    if (!seeded) {
        std::random_device rd;
        config.seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();
    }
    try {
        if (auto overrides = request.find("config"); overrides != request.end()) {
            apply_overrides(config, *overrides);
        }
    } catch (const UsageError& e) {
        return error(400, e.what(), field_of(e.what()));
    }

    std::shared_ptr<Entry> entry;
    try {
        entry = std::make_shared<Entry>(new_session(*engine_, entity->get<std::string>(), config));
    } catch (const NotFoundError& e) {
        return error(404, e.what(), "entity");
    } catch (const DataError& e) {
        return error(422, e.what());
    }

    const std::string id = entry->session.id();
    {
        std::lock_guard lock(mutex_);
        sessions_.emplace(id, entry);
    }
    return {201, {{"session_id", id}, {"vocabulary_size", engine_->taxonomy().size()}}};
}

ApiResponse SessionService::post_question(const std::string& session_id, const nlohmann::json& request) {
    auto entry = find(session_id);
    if (!entry) {
        return error(404, "unknown session");
    }
    if (!request.is_object()) {
        return error(400, "request body must be a JSON object");
    }
    auto text = request.find("text");
    if (text == request.end() || !text->is_string()) {
        return error(400, "text: required string", "text");
    }
    bool debug = false;
    if (auto d = request.find("debug"); d != request.end()) {
        if (!d->is_boolean()) {
            return error(400, "debug: expected a boolean", "debug");
        }
        debug = d->get<bool>();
    }

    std::lock_guard lock(entry->mutex);
    auto& session = entry->session;
    try {
        const auto& turn = session.answer_question(text->get<std::string>());
        nlohmann::json body = {
            {"answer", to_string(turn.answer)},
            {"turn", turn.turn},
            {"state", to_string(session.state())},
        };
        if (debug) {
            nlohmann::json per_entity = nlohmann::json::object();
            for (const auto& [name, s] : turn.stats.per_entity_top) {
                per_entity[name] = s;
            }
            body["debug"] = {
                {"spoiler", true},
                {"resolved", turn.question.resolved},
                {"rule", to_string(turn.rule_fired)},
                {"detour", turn.detour_reported},
                {"recovery", turn.recovery_applied},
                {"fallback", turn.scorer_fallback},
                {"evidence", evidence_json(turn.evidence)},
                {"stats",
                 {{"mean", turn.stats.mean},
                  {"stddev", turn.stats.stddev},
                  {"best", turn.stats.best},
                  {"per_entity_top", std::move(per_entity)}}},
            };
            if (turn.verdict) {
                body["debug"]["verdict"] = {{"label", to_string(turn.verdict->label)},
                                            {"confidence", turn.verdict->confidence}};
            }
        }
        if (session.state() != SessionState::Open) {
            persist(session);
        }
        return {200, secure(std::move(body), session)};
    } catch (const UsageError& e) {
        return error(400, e.what(), "text");
    } catch (const StateError& e) {
        return error(409, e.what());
    }
}

ApiResponse SessionService::post_guess(const std::string& session_id, const nlohmann::json& request) {
    auto entry = find(session_id);
    if (!entry) {
        return error(404, "unknown session");
    }
    if (!request.is_object()) {
        return error(400, "request body must be a JSON object");
    }
    auto guess = request.find("entity");
    if (guess == request.end() || !guess->is_string()) {
        return error(400, "entity: required string", "entity");
    }

    std::lock_guard lock(entry->mutex);
    auto& session = entry->session;
    if (session.state() != SessionState::Open) {
        return error(409, "session already closed (" + std::string(to_string(session.state())) + ")");
    }
    const bool correct = to_lower(trim(guess->get<std::string>())) == session.target().name;
    session.end_session(correct ? SessionState::Won : SessionState::Lost);
    persist(session);
    return {200, {{"correct", correct}, {"target_revealed", session.target().name}, {"state", to_string(session.state())}}};
}

ApiResponse SessionService::get_transcript(const std::string& session_id) const {
    auto entry = find(session_id);
    if (!entry) {
        return error(404, "unknown session");
    }
    std::lock_guard lock(entry->mutex);
    const auto& session = entry->session;
    nlohmann::json turns = nlohmann::json::array();
    for (const auto& t : session.transcript()) {
        turns.push_back(turn_to_json(t));
    }
    nlohmann::json body = {
        {"session_id", session.id()},
        {"state", to_string(session.state())},
        {"turn", session.turn()},
        {"turns", std::move(turns)},
    };
    if (session.state() != SessionState::Open) {
        body["target"] = session.target().name;
    }
    return {200, secure(std::move(body), session)};
}

ApiResponse SessionService::health() const {
    return {200, {{"status", "ok"}, {"entities", engine_->taxonomy().size()}, {"sessions", session_count()}}};
}

void register_routes(httplib::Server& server, SessionService& service) {
    auto reply = [](httplib::Response& res, const ApiResponse& api) {
        res.status = api.status;
        res.set_content(api.body.dump(), "application/json");
    };
    auto parse = [](const httplib::Request& req) {
        return nlohmann::json::parse(req.body, nullptr, false);
    };
    auto bad_json = ApiResponse{400, {{"error", "request body is not valid JSON"}}};

    server.Get("/v1/health", [&service, reply](const httplib::Request&, httplib::Response& res) {
        reply(res, service.health());
    });
    server.Post("/v1/sessions", [&service, reply, parse, bad_json](const httplib::Request& req, httplib::Response& res) {
        auto body = parse(req);
        reply(res, body.is_discarded() ? bad_json : service.create_session(body));
    });
    server.Post(R"(/v1/sessions/([0-9a-zA-Z_-]+)/question)",
                [&service, reply, parse, bad_json](const httplib::Request& req, httplib::Response& res) {
                    auto body = parse(req);
                    reply(res, body.is_discarded() ? bad_json : service.post_question(req.matches[1], body));
                });
    server.Post(R"(/v1/sessions/([0-9a-zA-Z_-]+)/guess)",
                [&service, reply, parse, bad_json](const httplib::Request& req, httplib::Response& res) {
                    auto body = parse(req);
                    reply(res, body.is_discarded() ? bad_json : service.post_guess(req.matches[1], body));
                });
    server.Get(R"(/v1/sessions/([0-9a-zA-Z_-]+)/transcript)",
               [&service, reply](const httplib::Request& req, httplib::Response& res) {
                   reply(res, service.get_transcript(req.matches[1]));
               });
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        res.status = 500;
        res.set_content(nlohmann::json{{"error", what}}.dump(), "application/json");
    });
}

bool serve(SessionService& service, const std::string& bind) {
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos) {
        throw UsageError("bind: expected host:port, got '" + bind + "'");
    }
    const std::string host = bind.substr(0, colon);
    int port = 0;
    try {
        port = std::stoi(bind.substr(colon + 1));
    } catch (const std::exception&) {
        throw UsageError("bind: bad port in '" + bind + "'");
    }
    httplib::Server server;
    register_routes(server, service);
    std::cerr << "serving on " << host << ":" << port << "\n";
    return server.listen(host, port);
}

}  // namespace twentyq
