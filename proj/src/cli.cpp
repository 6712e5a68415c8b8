#include "twentyq/cli.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "twentyq/config.hpp"
#include "twentyq/engine.hpp"
#include "twentyq/errors.hpp"
#include "twentyq/game.hpp"
#include "twentyq/questioner.hpp"
#include "twentyq/scorer_client.hpp"
#include "twentyq/service.hpp"
#include "twentyq/text.hpp"

#ifndef TWENTYQ_DEFAULT_MANIFEST
#define TWENTYQ_DEFAULT_MANIFEST "data/corpus/manifest.csv"
#endif

namespace twentyq {

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
    std::string manifest;
    std::string config_file;
    std::vector<std::string> settings;
    std::string scorer_url;
};

void add_common(CLI::App& cmd, CommonFlags& flags) {
    cmd.add_option("--manifest", flags.manifest, "Corpus manifest CSV");
    cmd.add_option("--config", flags.config_file, "Config file of key = value lines");
    cmd.add_option("--set", flags.settings, "Override one setting, KEY=VALUE (repeatable)");
    cmd.add_option("--scorer-url", flags.scorer_url, "Base URL of an external boolean scorer");
}

AppConfig resolve_config(const CommonFlags& flags) {
    AppConfig config;
    config.manifest = TWENTYQ_DEFAULT_MANIFEST;
    if (const char* env = std::getenv("TWENTYQ_MANIFEST"); env && *env) {
        config.manifest = env;
    }
    if (!flags.config_file.empty()) {
        config = load_config_file(flags.config_file, config);
    }
    for (const auto& kv : flags.settings) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw UsageError("--set expects KEY=VALUE, got '" + kv + "'");
        }
        apply_setting(config, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    if (!flags.manifest.empty()) {
        config.manifest = flags.manifest;
    }
    if (!flags.scorer_url.empty()) {
        config.scorer_url = flags.scorer_url;
    }
    config.game.validate();
    return config;
}

std::shared_ptr<Engine> build_engine(const AppConfig& config) {
    std::shared_ptr<const ScorerProvider> scorer;
    if (config.scorer_url) {
        scorer = std::make_shared<RemoteScorer>(*config.scorer_url, config.scorer_timeout);
    }
    return std::make_shared<Engine>(ingest_corpus(config.manifest), config.engine, nullptr, std::move(scorer));
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    return out;
}

std::vector<std::string> read_targets(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot read targets file " + path.string());
    }
    std::vector<std::string> targets;
    std::string line;
    while (std::getline(in, line)) {
        const auto name = to_lower(trim(line));
        if (!name.empty() && name.front() != '#') {
            targets.push_back(name);
        }
    }
    if (targets.empty()) {
        throw DataError("targets file " + path.string() + " lists no entity");
    }
    return targets;
}

SimulationResult simulate_one(const Engine& engine, const GameConfig& game, const std::string& answerer_kind,
                              const std::string& target_name, std::uint64_t seed) {
    GameConfig cfg = game;
    cfg.seed = seed;
    const std::string target =
        target_name == "random" ? pick_random_target(engine.taxonomy(), seed).name : target_name;
    const auto& record = engine.taxonomy().at(target);
    if (answerer_kind == "oracle") {
        OracleAnswerer answerer(record);
        return simulate_game(answerer, target, engine.taxonomy());
    }
    if (answerer_kind == "random") {
        RandomAnswerer answerer(seed);
        return simulate_game(answerer, target, engine.taxonomy());
    }
    auto session = new_session(engine, target, cfg, "sim-" + std::to_string(seed));
    EngineAnswerer answerer(session);
    return simulate_game(answerer, target, engine.taxonomy());
}

int cmd_ingest(const AppConfig& config, const std::string& out_path, std::ostream& out) {
    const Corpus corpus = ingest_corpus(config.manifest);
    std::size_t simple = 0;
    for (const auto& r : corpus.taxonomy().records()) {
        simple += r.simple_article ? 1 : 0;
    }
    if (!out_path.empty()) {
        auto file = open_output(out_path);
        for (const auto& p : corpus.passages()) {
            nlohmann::json row = {{"entity", p.entity},
                                  {"article", to_string(p.article_kind)},
                                  {"paragraph", p.paragraph_index},
                                  {"text", p.text}};
            if (p.sentence_index) {
                row["sentence"] = *p.sentence_index;
            }
            file << row.dump() << '\n';
        }
    }
    out << "entities " << corpus.taxonomy().size() << "\n"
        << "simple_articles " << simple << "\n"
        << "passages " << corpus.passages().size() << "\n";
    return kExitOk;
}

int cmd_index(const AppConfig& config, const fs::path& out_dir, std::ostream& out) {
    const auto engine = build_engine(config);
    fs::create_directories(out_dir);
    nlohmann::json listing = nlohmann::json::array();
    for (const auto& r : engine->taxonomy().records()) {
        for (auto kind : {ArticleKind::Full, ArticleKind::Simple}) {
            const auto* index = engine->index_for(r.name, kind);
            if (index == nullptr) {
                continue;
            }
            const std::string file = r.name + "." + std::string(to_string(kind)) + ".json";
            open_output(out_dir / file) << index->index().to_json().dump() << '\n';
            listing.push_back({{"entity", r.name}, {"article", to_string(kind)}, {"file", file},
                               {"passages", index->size()}});
        }
    }
    open_output(out_dir / "indexes.json") << listing.dump(2) << '\n';
    out << "wrote " << listing.size() << " indexes to " << out_dir.string() << "\n";
    return kExitOk;
}

int cmd_play(const AppConfig& config, const std::string& entity, bool debug, std::istream& in,
             std::ostream& out, std::ostream& err) {
    const auto engine = build_engine(config);
    auto session = new_session(*engine, entity, config.game);
    err << "I have picked an animal. Ask yes/no questions, or type 'guess: NAME'.\n";
    std::string line;
    while (session.state() == SessionState::Open && std::getline(in, line)) {
        const std::string text = trim(line);
        if (text.empty()) {
            continue;
        }
        const std::string lowered = to_lower(text);
        if (lowered.rfind("guess:", 0) == 0) {
            const std::string guess = trim(lowered.substr(6));
            const bool correct = guess == session.target().name;
            session.end_session(correct ? SessionState::Won : SessionState::Lost);
            out << (correct ? "correct" : "wrong") << ", it was " << session.target().name << "\n";
            return kExitOk;
        }
        if (lowered == "quit" || lowered == "exit") {
            break;
        }
        const auto& turn = session.answer_question(text);
        out << to_string(turn.answer);
        if (debug) {
            out << " [" << to_string(turn.rule_fired) << "]";
            if (turn.detour_reported) {
                out << " [detour]";
            }
            if (turn.recovery_applied) {
                out << " [recovery]";
            }
        }
        out << "\n";
        out.flush();
    }
    if (session.state() == SessionState::Exhausted) {
        out << "question limit reached, it was " << session.target().name << "\n";
    }
    return kExitOk;
}

int cmd_simulate(const AppConfig& config, const std::string& answerer, const std::string& target,
                 std::uint64_t seed, const std::string& out_dir, std::ostream& out) {
    const auto engine = build_engine(config);
    const auto result = simulate_one(*engine, config.game, answerer, to_lower(trim(target)), seed);

    std::string transcript;
    for (const auto& t : result.turns) {
        transcript += simulated_turn_to_json(t, result.target).dump() + "\n";
    }
    nlohmann::json metrics = metrics_to_json(result.metrics);
    metrics["target"] = result.target;
    metrics["seed"] = seed;
    metrics["answerer"] = answerer;
    metrics["guess"] = result.guess ? nlohmann::json(*result.guess) : nlohmann::json(nullptr);
    metrics["anomalies"] = result.anomalies;

    if (out_dir.empty()) {
        out << transcript << metrics.dump() << "\n";
    } else {
        open_output(fs::path(out_dir) / "transcript.jsonl") << transcript;
        open_output(fs::path(out_dir) / "metrics.json") << metrics.dump(2) << "\n";
        out << "wrote " << result.turns.size() << " turns to " << out_dir << "\n";
    }
    return kExitOk;
}

int cmd_eval(const AppConfig& config, const std::string& targets_file, const std::vector<std::uint64_t>& seeds,
             const std::string& out_path, std::size_t jobs, const std::string& answerer, bool estimate_accuracy,
             std::ostream& out, std::ostream& err) {
    const auto targets = read_targets(targets_file);
    const auto engine = build_engine(config);
    for (const auto& t : targets) {
        engine->taxonomy().at(t);
    }

    struct Job {
        std::string target;
        std::uint64_t seed;
        std::optional<SimulationResult> result;
        std::string error;
    };
    std::vector<Job> work;
    for (const auto& t : targets) {
        for (auto s : seeds) {
            work.push_back(Job{t, s, std::nullopt, {}});
        }
    }
    std::sort(work.begin(), work.end(),
              [](const Job& a, const Job& b) { return std::tie(a.target, a.seed) < std::tie(b.target, b.seed); });

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < work.size(); i = next++) {
            try {
                work[i].result = simulate_one(*engine, config.game, answerer, work[i].target, work[i].seed);
            } catch (const std::exception& e) {
                work[i].error = e.what();
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(work.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < threads; ++i) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }

    for (const auto& j : work) {
        if (!j.result) {
            throw DataError("eval run " + j.target + "/" + std::to_string(j.seed) + " failed: " + j.error);
        }
    }

    std::ostringstream csv;
    csv << kEvalCsvHeader << "\n";
    std::size_t won = 0;
    double accuracy_sum = 0.0;
    std::size_t accuracy_runs = 0;
    for (const auto& j : work) {
        csv << eval_csv_row(j.target, j.seed, j.result->metrics) << "\n";
        won += j.result->metrics.won ? 1 : 0;
        if (j.result->estimated_accuracy) {
            accuracy_sum += *j.result->estimated_accuracy;
            ++accuracy_runs;
        }
    }
    if (out_path.empty() || out_path == "-") {
        out << csv.str();
    } else {
        open_output(out_path) << csv.str();
    }
    err << "runs " << work.size() << ", won " << won << "\n";

    if (estimate_accuracy) {
        nlohmann::json meta = {
            {"answerer", answerer},
            {"runs", work.size()},
            {"runs_with_estimate", accuracy_runs},
            {"estimated_accuracy", accuracy_runs ? nlohmann::json(accuracy_sum / accuracy_runs) : nlohmann::json(nullptr)},
            {"caveat",
             "an answer counts as correct when the target's probability rose after it; this is a noisy proxy, "
             "not ground truth"},
        };
        if (out_path.empty() || out_path == "-") {
            err << meta.dump() << "\n";
        } else {
            open_output(out_path + ".meta.json") << meta.dump(2) << "\n";
        }
    }
    return kExitOk;
}

int cmd_serve(const AppConfig& config, std::ostream& err) {
    const auto engine = build_engine(config);
    ServiceOptions options;
    options.defaults = config.game;
    options.redact_evidence = config.redact_evidence;
    options.transcript_dir = config.transcript_dir;
    SessionService service(engine, options);
    if (!serve(service, config.bind)) {
        err << "serve: cannot bind " << config.bind << "\n";
        return kExitUsage;
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"twentyq: a twenty-questions answerer over an animal corpus", "twentyq"};
    app.require_subcommand(1, 1);

    CommonFlags common;

    auto* ingest = app.add_subcommand("ingest", "Load the corpus and report passage counts");
    add_common(*ingest, common);
    std::string ingest_out;
    ingest->add_option("--out", ingest_out, "Write the passage store as JSON lines");

    auto* index = app.add_subcommand("index", "Build and persist the per-entity BM25 indexes");
    add_common(*index, common);
    std::string index_out;
    index->add_option("--out", index_out, "Output directory")->required();

    auto* play = app.add_subcommand("play", "Interactive game in the terminal");
    add_common(*play, common);
    std::string play_entity = "random";
    std::optional<std::uint64_t> play_seed;
    bool play_debug = false;
    play->add_option("--entity", play_entity, "Secret entity name, or 'random'");
    play->add_option("--seed", play_seed, "Seed for target and sample selection");
    play->add_flag("--debug", play_debug, "Print the rule behind every answer");

    auto* simulate = app.add_subcommand("simulate", "Self-play with the automated questioner");
    add_common(*simulate, common);
    std::string sim_answerer = "engine";
    std::string sim_target = "random";
    std::uint64_t sim_seed = 0;
    std::string sim_out;
    simulate->add_option("--answerer", sim_answerer, "Who answers")
        ->check(CLI::IsMember({"engine", "random", "oracle"}));
    simulate->add_option("--target", sim_target, "Secret entity name, or 'random'");
    simulate->add_option("--seed", sim_seed, "Seed");
    simulate->add_option("--out", sim_out, "Directory for transcript.jsonl and metrics.json");

    auto* eval = app.add_subcommand("eval", "Batch metrics over targets and seeds");
    add_common(*eval, common);
    std::string eval_targets;
    std::size_t eval_seed_count = 0;
    std::vector<std::uint64_t> eval_seed_list;
    std::string eval_out;
    std::size_t eval_jobs = 1;
    std::string eval_answerer = "engine";
    bool eval_estimate = false;
    eval->add_option("--targets", eval_targets, "File with one entity per line")->required();
    auto* seeds_opt = eval->add_option("--seeds", eval_seed_count, "Run seeds 1..N for every target");
    auto* seed_list_opt = eval->add_option("--seed-list", eval_seed_list, "Explicit seeds")->delimiter(',');
    seeds_opt->excludes(seed_list_opt);
    eval->add_option("--out", eval_out, "CSV path ('-' for stdout)");
    eval->add_option("--jobs", eval_jobs, "Parallel runs")->check(CLI::PositiveNumber);
    eval->add_option("--answerer", eval_answerer, "Who answers")->check(CLI::IsMember({"engine", "random", "oracle"}));
    eval->add_flag("--estimate-accuracy", eval_estimate, "Also write mean estimated answer accuracy");

    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
    add_common(*serve_cmd, common);
    std::string bind;
    std::string transcripts;
    bool no_redact = false;
    serve_cmd->add_option("--bind", bind, "host:port");
    serve_cmd->add_option("--transcripts", transcripts, "Directory for transcripts of closed sessions");
    serve_cmd->add_flag("--no-redact", no_redact, "Leave the secret visible inside debug passage text");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        AppConfig config = resolve_config(common);
        if (*ingest) {
            return cmd_ingest(config, ingest_out, out);
        }
        if (*index) {
            return cmd_index(config, index_out, out);
        }
        if (*play) {
            if (play_seed) {
                config.game.seed = *play_seed;
            }
            return cmd_play(config, play_entity, play_debug, in, out, err);
        }
        if (*simulate) {
            return cmd_simulate(config, sim_answerer, sim_target, sim_seed, sim_out, out);
        }
        if (*eval) {
            std::vector<std::uint64_t> seeds = eval_seed_list;
            if (seeds.empty()) {
                for (std::uint64_t s = 1; s <= std::max<std::size_t>(eval_seed_count, 1); ++s) {
                    seeds.push_back(s);
                }
            }
            return cmd_eval(config, eval_targets, seeds, eval_out, eval_jobs, eval_answerer, eval_estimate, out, err);
        }
        if (*serve_cmd) {
            if (!bind.empty()) {
                config.bind = bind;
            }
            if (!transcripts.empty()) {
                config.transcript_dir = transcripts;
            }
            if (no_redact) {
                config.redact_evidence = false;
            }
            return cmd_serve(config, err);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const StateError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NotFoundError& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace twentyq
