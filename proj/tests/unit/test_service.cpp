#include <doctest.h>

#include <httplib.h>

#include <future>
#include <regex>
#include <thread>

#include "support.hpp"
#include "twentyq/errors.hpp"
#include "twentyq/scorer_client.hpp"
#include "twentyq/service.hpp"
#include "twentyq/text.hpp"

using namespace twentyq;
using nlohmann::json;

namespace {

/// httplib server on an ephemeral local port, stopped on destruction.
class LocalServer {
  public:
    LocalServer() = default;
    LocalServer(const LocalServer&) = delete;
    LocalServer& operator=(const LocalServer&) = delete;
    ~LocalServer() {
        server.stop();
        if (thread_.joinable()) {
            thread_.join();
        }
    }

    void start() {
        port_ = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port_ > 0);
        thread_ = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
    int port() const { return port_; }

    httplib::Server server;

  private:
    int port_ = 0;
    std::thread thread_;
};

const std::vector<std::string> kQuestions = {
    "Is it a mammal?",        "Does your animal have feathers?", "Can it fly?",
    "Is your animal a predator?", "Does it lay eggs?",           "Is it smaller than a human?",
    "Does it have spots?",    "Is your animal aquatic?",         "Does its body have scales?",
    "Is it from Africa?",     "Is your animal venomous?",        "Does it have a tail?"};

SessionService make_service(ServiceOptions options = {}) {
    return SessionService(testing::bundled_engine(), std::move(options));
}

std::string open_session(SessionService& svc, const std::string& entity, std::uint64_t seed = 1) {
    const auto r = svc.create_session({{"entity", entity}, {"config", {{"seed", seed}}}});
    REQUIRE(r.status == 201);
    return r.body["session_id"];
}

/// Case-insensitive search for a word starting with `secret`.
bool leaks(const json& body, const std::string& secret, bool skip_text) {
    json copy = body;
    if (skip_text) {
        std::function<void(json&)> strip = [&](json& n) {
            if (n.is_object()) {
                n.erase("text");
                for (auto& [k, v] : n.items()) {
                    strip(v);
                }
            } else if (n.is_array()) {
                for (auto& v : n) {
                    strip(v);
                }
            }
        };
        strip(copy);
    }
    const std::regex word("(^|[^a-z0-9])" + secret);
    return std::regex_search(to_lower(copy.dump()), word);
}

}  // namespace

TEST_CASE("redaction replaces words starting with the secret") {
    CHECK(redact("The Cheetah and cheetahs run.", "cheetah") == "The [secret] and [secret] run.");
    CHECK(redact("A bobcat is not a cat; catfish are fish.", "cat") == "A bobcat is not a [secret]; [secret] are fish.");
    CHECK(redact("nothing here", "wolf") == "nothing here");
    CHECK(redact("x", "") == "x");
}

TEST_CASE("create session") {
    auto svc = make_service();
    const auto ok = svc.create_session({{"entity", "cheetah"}});
    CHECK(ok.status == 201);
    CHECK(ok.body["vocabulary_size"] == 20);
    CHECK(ok.body["session_id"].get<std::string>().size() == 32);
    CHECK_FALSE(leaks(ok.body, "cheetah", false));
    CHECK(ok.body.size() == 2);

    const auto missing = svc.create_session({{"entity", "unicorn"}});
    CHECK(missing.status == 404);
    CHECK(missing.body["field"] == "entity");

    CHECK(svc.create_session(json::object()).status == 400);
    CHECK(svc.create_session({{"entity", 5}}).body["field"] == "entity");

    const auto bad_n2 = svc.create_session({{"entity", "cheetah"}, {"config", {{"n1", 3}, {"n2", 4}}}});
    CHECK(bad_n2.status == 400);
    CHECK(bad_n2.body["field"] == "n2");
    const auto bad_type = svc.create_session({{"entity", "cheetah"}, {"config", {{"theta_a", "high"}}}});
    CHECK(bad_type.body["field"] == "theta_a");
    const auto unknown = svc.create_session({{"entity", "cheetah"}, {"config", {{"colour", 1}}}});
    CHECK(unknown.status == 400);
    CHECK(unknown.body["field"] == "colour");

    CHECK(svc.health().body["sessions"] == 1);
    CHECK(svc.health().body["status"] == "ok");
}

TEST_CASE("vocabulary size on a fifteen-entity corpus") {
    // five categories hold two entities, the other five hold one
    std::vector<EntityRecord> records;
    std::vector<Passage> passages;
    for (int i = 0; i < 15; ++i) {
        const std::string name = "e" + std::string(i < 10 ? "0" : "") + std::to_string(i);
        records.push_back(testing::record(name, kAllCategories[static_cast<std::size_t>(i % 10)], "1"));
        passages.push_back(Passage{name, ArticleKind::Full, 0, std::nullopt, name + " zzz"});
    }
    auto engine = std::make_shared<Engine>(Corpus(Taxonomy(std::move(records)), std::move(passages)));
    SessionService svc(engine);
    int created = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto r = svc.create_session({{"entity", "random"}, {"config", {{"seed", seed}}}});
        if (r.status == 201) {
            ++created;
            CHECK(r.body["vocabulary_size"] == 15);
        } else {
            // a target alone in its category leaves that category without a decoy
            CHECK(r.status == 422);
        }
    }
    CHECK(created > 0);
    CHECK(created < 30);
}

TEST_CASE("questions") {
    auto svc = make_service();
    const auto id = open_session(svc, "cheetah");
    const auto mammal = svc.post_question(id, {{"text", "Is it a mammal?"}});
    CHECK(mammal.status == 200);
    CHECK(mammal.body["answer"] == "yes");
    CHECK(mammal.body["turn"] == 1);
    CHECK(mammal.body["state"] == "open");
    CHECK_FALSE(mammal.body.contains("debug"));

    const auto cmp = svc.post_question(id, {{"text", "Is your animal smaller than a human?"}, {"debug", true}});
    CHECK(cmp.body["answer"] == "idk");
    CHECK(cmp.body["debug"]["rule"] == "R1");
    CHECK(cmp.body["debug"]["spoiler"] == true);
    CHECK(cmp.body["debug"]["resolved"] == "Is [secret] smaller than a human?");

    const auto dbg = svc.post_question(id, {{"text", "Does it have spots?"}, {"debug", true}});
    for (const char* key : {"resolved", "rule", "detour", "recovery", "fallback", "evidence", "stats"}) {
        CHECK(dbg.body["debug"].contains(key));
    }
    CHECK(dbg.body["debug"]["stats"]["per_entity_top"].size() == kAllCategories.size());

    CHECK(svc.post_question(id, {{"text", "   "}}).status == 400);
    CHECK(svc.post_question(id, {{"text", 3}}).body["field"] == "text");
    CHECK(svc.post_question(id, {{"text", "Is it big?"}, {"debug", "yes"}}).body["field"] == "debug");
    CHECK(svc.post_question("nope", {{"text", "Is it big?"}}).status == 404);
}

TEST_CASE("question cap") {
    auto svc = make_service();
    const auto id = open_session(svc, "frog");
    for (int i = 1; i <= 80; ++i) {
        const auto r = svc.post_question(id, {{"text", kQuestions[static_cast<std::size_t>(i) % kQuestions.size()]}});
        REQUIRE(r.status == 200);
        CHECK(r.body["state"] == (i == 80 ? "exhausted" : "open"));
    }
    const auto over = svc.post_question(id, {{"text", "Is it green?"}});
    CHECK(over.status == 409);
    CHECK(over.body["error"].get<std::string>().find("80") != std::string::npos);
    CHECK(svc.get_transcript(id).body["target"] == "frog");
    CHECK(svc.post_guess(id, {{"entity", "frog"}}).status == 409);
}

TEST_CASE("guesses and transcripts") {
    testing::TempDir dir;
    ServiceOptions opts;
    opts.transcript_dir = dir.path();
    auto svc = make_service(opts);

    const auto id = open_session(svc, "cheetah");
    for (int i = 0; i < 3; ++i) {
        svc.post_question(id, {{"text", kQuestions[static_cast<std::size_t>(i)]}});
    }
    const auto open = svc.get_transcript(id);
    CHECK(open.body["turns"].size() == 3);
    CHECK(open.body["turns"][1]["turn"] == 2);
    CHECK_FALSE(open.body.contains("target"));

    const auto right = svc.post_guess(id, {{"entity", "Cheetah"}});
    CHECK(right.body["correct"] == true);
    CHECK(right.body["state"] == "won");
    CHECK(right.body["target_revealed"] == "cheetah");
    CHECK(svc.get_transcript(id).body["target"] == "cheetah");
    CHECK(svc.post_guess(id, {{"entity", "cheetah"}}).status == 409);
    CHECK(svc.post_question(id, {{"text", "Is it fast?"}}).status == 409);
    const auto saved = testing::read_file(dir.path() / (id + ".jsonl"));
    CHECK(std::count(saved.begin(), saved.end(), '\n') == 3);

    const auto other = open_session(svc, "cheetah");
    const auto wrong = svc.post_guess(other, {{"entity", "leopard"}});
    CHECK(wrong.body["correct"] == false);
    CHECK(wrong.body["target_revealed"] == "cheetah");
    CHECK(wrong.body["state"] == "lost");
    CHECK(svc.post_guess("missing", {{"entity", "x"}}).status == 404);
    CHECK(svc.get_transcript("missing").status == 404);
}

TEST_CASE("open sessions never reveal the target") {
    for (bool redact_text : {true, false}) {
        ServiceOptions opts;
        opts.redact_evidence = redact_text;
        auto svc = make_service(opts);
        for (const char* target : {"cheetah", "dog", "cat", "bat", "frog", "snake"}) {
            const auto created = svc.create_session({{"entity", target}, {"config", {{"seed", 5}}}});
            CHECK_FALSE(leaks(created.body, target, false));
            const std::string id = created.body["session_id"];
            bool text_mentions_target = false;
            for (const auto& q : kQuestions) {
                const auto r = svc.post_question(id, {{"text", q}, {"debug", true}});
                CHECK_FALSE(leaks(r.body, target, !redact_text));
                text_mentions_target = text_mentions_target || leaks(r.body, target, false);
            }
            // the toggle only affects passage text
            CHECK(text_mentions_target == !redact_text);
            CHECK_FALSE(leaks(svc.get_transcript(id).body, target, !redact_text));
            CHECK_FALSE(leaks(svc.health().body, target, false));
        }
    }
}

TEST_CASE("concurrent sessions match serial play") {
    const std::vector<std::pair<std::string, std::uint64_t>> games = {
        {"cheetah", 1}, {"penguin", 2}, {"octopus", 3}, {"wolf", 4}, {"shark", 5}, {"gorilla", 6}};

    auto serial_svc = make_service();
    std::vector<json> serial;
    for (const auto& [target, seed] : games) {
        const auto id = open_session(serial_svc, target, seed);
        for (const auto& q : kQuestions) {
            serial_svc.post_question(id, {{"text", q}});
        }
        serial_svc.post_guess(id, {{"entity", target}});
        serial.push_back(serial_svc.get_transcript(id).body["turns"]);
    }

    auto svc = make_service();
    std::vector<std::string> ids;
    for (const auto& [target, seed] : games) {
        ids.push_back(open_session(svc, target, seed));
    }
    std::vector<std::future<void>> workers;
    for (const auto& id : ids) {
        workers.push_back(std::async(std::launch::async, [&svc, id] {
            for (const auto& q : kQuestions) {
                svc.post_question(id, {{"text", q}});
            }
        }));
    }
    for (auto& w : workers) {
        w.get();
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
        svc.post_guess(ids[i], {{"entity", games[i].first}});
        CHECK(svc.get_transcript(ids[i]).body["turns"] == serial[i]);
    }
}

TEST_CASE("HTTP routes") {
    auto svc = make_service();
    LocalServer srv;
    register_routes(srv.server, svc);
    srv.start();
    httplib::Client client(srv.url());

    auto health = client.Get("/v1/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    CHECK(json::parse(health->body)["status"] == "ok");

    auto created = client.Post("/v1/sessions", R"({"entity":"cheetah","config":{"seed":3}})", "application/json");
    REQUIRE(created);
    CHECK(created->status == 201);
    const std::string id = json::parse(created->body)["session_id"];

    auto q = client.Post("/v1/sessions/" + id + "/question", R"({"text":"Is it a mammal?"})", "application/json");
    REQUIRE(q);
    CHECK(q->status == 200);
    CHECK(json::parse(q->body)["answer"] == "yes");

    auto bad = client.Post("/v1/sessions/" + id + "/question", "{not json", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    CHECK(json::parse(bad->body).contains("error"));

    auto t = client.Get("/v1/sessions/" + id + "/transcript");
    REQUIRE(t);
    CHECK(json::parse(t->body)["turns"].size() == 1);

    auto g = client.Post("/v1/sessions/" + id + "/guess", R"({"entity":"wolf"})", "application/json");
    REQUIRE(g);
    CHECK(json::parse(g->body)["target_revealed"] == "cheetah");

    auto unknown = client.Post("/v1/sessions", R"({"entity":"unicorn"})", "application/json");
    REQUIRE(unknown);
    CHECK(unknown->status == 404);

    CHECK_THROWS_AS(serve(svc, "no-port-here"), UsageError);
}

TEST_CASE("classify response parsing") {
    CHECK(parse_classify_response(R"({"label":"no","confidence":0.9})") == BoolVerdict{BoolLabel::No, 0.9});
    CHECK(parse_classify_response(R"({"label":"yes","confidence":1})") == BoolVerdict{BoolLabel::Yes, 1.0});
    CHECK_FALSE(parse_classify_response(R"({"label":"maybe","confidence":0.5})"));
    CHECK_FALSE(parse_classify_response(R"({"label":"yes","confidence":1.5})"));
    CHECK_FALSE(parse_classify_response(R"({"label":"yes"})"));
    CHECK_FALSE(parse_classify_response("[1,2]"));
    CHECK_FALSE(parse_classify_response("<html>"));
    const auto req = make_classify_request(resolve_pronouns("Can it roar?", "lion"), "Lions roar.");
    CHECK(req == json{{"question", "Can lion roar?"}, {"passage", "Lions roar."}});
}

TEST_CASE("remote scorer") {
    LocalServer stub;
    std::atomic<int> calls{0};
    json last_request;
    std::mutex m;
    stub.server.Post("/v1/classify", [&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        {
            std::lock_guard lock(m);
            last_request = json::parse(req.body);
        }
        res.set_content(R"({"label":"no","confidence":0.9})", "application/json");
    });
    stub.server.Post("/bad/v1/classify", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"label":"perhaps"})", "application/json");
    });
    stub.server.Post("/slow/v1/classify", [](const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(std::chrono::milliseconds(600));
        res.set_content(R"({"label":"yes","confidence":0.9})", "application/json");
    });
    stub.server.Post("/down/v1/classify", [](const httplib::Request&, httplib::Response& res) {
        res.status = 503;
    });
    stub.start();

    const auto q = resolve_pronouns("Can it roar?", "cheetah");
    const RemoteScorer good(stub.url() + "/");
    CHECK(good.classify(q, "The cheetah cannot roar.") == BoolVerdict{BoolLabel::No, 0.9});
    CHECK(last_request["question"] == "Can cheetah roar?");
    CHECK(last_request["passage"] == "The cheetah cannot roar.");

    CHECK_FALSE(RemoteScorer(stub.url() + "/bad").classify(q, "x"));
    CHECK_FALSE(RemoteScorer(stub.url() + "/down").classify(q, "x"));
    CHECK_FALSE(RemoteScorer(stub.url() + "/slow", std::chrono::milliseconds(100)).classify(q, "x"));

    // engine-level fallback shows up in transcripts
    const auto& corpus = testing::bundled_engine()->corpus();
    auto engine = std::make_shared<Engine>(
        corpus, EngineOptions{}, nullptr,
        std::make_shared<RemoteScorer>(stub.url() + "/slow", std::chrono::milliseconds(50)));
    SessionService svc(engine);
    const auto id = open_session(svc, "cheetah");
    const auto r = svc.post_question(id, {{"text", "Is it a mammal?"}, {"debug", true}});
    CHECK(r.body["debug"]["fallback"] == true);
    CHECK(svc.get_transcript(id).body["turns"][0]["fallback"] == true);

    auto passthrough = std::make_shared<Engine>(corpus, EngineOptions{}, nullptr, std::make_shared<RemoteScorer>(stub.url()));
    SessionService svc2(passthrough);
    const auto id2 = open_session(svc2, "cheetah");
    const auto r2 = svc2.post_question(id2, {{"text", "Is it a mammal?"}, {"debug", true}});
    CHECK(r2.body["debug"]["fallback"] == false);
    CHECK(r2.body["debug"]["verdict"]["label"] == "no");
    CHECK(r2.body["debug"]["verdict"]["confidence"] == 0.9);
    CHECK(calls > 1);
}
