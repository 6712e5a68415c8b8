#include "twentyq/game.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>

#include "twentyq/errors.hpp"
#include "twentyq/random.hpp"
#include "twentyq/text.hpp"

namespace twentyq {

namespace {

constexpr std::array<std::string_view, 4> kStateNames = {"open", "won", "lost", "exhausted"};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finaliser
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::string joined_text(const std::vector<RankedPassage>& top_full, const std::vector<RankedPassage>& top_simple) {
    std::string text;
    for (const auto* list : {&top_full, &top_simple}) {
        if (list->empty()) {
            continue;
        }
        if (!text.empty()) {
            text += "\n\n";
        }
        text += list->front().passage.text;
    }
    return text;
}

}  // namespace

void GameConfig::validate() const {
    if (n1 == 0) {
        throw UsageError("n1: must be positive");
    }
    if (n2 == 0) {
        throw UsageError("n2: must be positive");
    }
    if (n2 > n1) {
        throw UsageError("n2: must not exceed n1");
    }
    if (!(theta_a > 0.0 && theta_a <= 1.0)) {
        throw UsageError("theta_a: must lie in (0, 1]");
    }
    if (!(theta_d >= 0.0 && theta_d <= 1.0)) {
        throw UsageError("theta_d: must lie in [0, 1]");
    }
    if (w == 0) {
        throw UsageError("w: must be at least 1");
    }
    if (n_p == 0) {
        throw UsageError("n_p: must be positive");
    }
    if (max_questions == 0) {
        throw UsageError("max_questions: must be at least 1");
    }
}

std::string_view to_string(SessionState s) {
    return kStateNames[static_cast<std::size_t>(s)];
}

void AnswerHistory::record(const std::string& entity, std::uint32_t turn, BoolLabel label) {
    auto& buf = buffers_[entity];
    buf.push_back(HistoryEntry{turn, label});
    while (buf.size() > window_) {
        buf.pop_front();
    }
}

const std::deque<HistoryEntry>& AnswerHistory::buffer(const std::string& entity) const {
    static const std::deque<HistoryEntry> empty;
    auto it = buffers_.find(entity);
    return it == buffers_.end() ? empty : it->second;
}

bool detect_detour(const AnswerHistory& history, const EntityRecord& target,
                   const std::vector<const EntityRecord*>& negatives, double theta_a, double theta_d) {
    const std::size_t w = history.window();
    const auto& mine = history.buffer(target.name);
    if (mine.size() != w) {
        return false;
    }
    const auto needed = static_cast<std::size_t>(std::ceil(theta_a * static_cast<double>(w) - 1e-9));
    for (const auto* g : negatives) {
        if (entity_similarity(*g, target) >= theta_d) {
            continue;
        }
        const auto& theirs = history.buffer(g->name);
        std::size_t comparable = 0;
        std::size_t agree = 0;
        for (const auto& entry : mine) {
            auto it = std::find_if(theirs.begin(), theirs.end(),
                                   [&](const HistoryEntry& e) { return e.turn == entry.turn; });
            if (it == theirs.end()) {
                continue;
            }
            ++comparable;
            agree += it->label == entry.label ? 1 : 0;
        }
        if (comparable >= w && agree >= needed) {
            return true;
        }
    }
    return false;
}

nlohmann::json turn_to_json(const TurnRecord& turn) {
    nlohmann::json evidence = nlohmann::json::array();
    for (const auto& p : turn.evidence) {
        evidence.push_back({
            {"entity", p.passage.entity},
            {"text", p.passage.text},
            {"sparse", p.sparse_score},
            {"rerank", p.rerank_score.value_or(0.0)},
        });
    }
    return {
        {"turn", turn.turn},
        {"question", turn.question.original},
        {"resolved", turn.question.resolved},
        {"answer", to_string(turn.answer)},
        {"rule", to_string(turn.rule_fired)},
        {"detour", turn.detour_reported},
        {"recovery", turn.recovery_applied},
        {"fallback", turn.scorer_fallback},
        {"evidence", std::move(evidence)},
    };
}

std::string transcript_jsonl(const std::vector<TurnRecord>& turns) {
    std::string out;
    for (const auto& t : turns) {
        out += turn_to_json(t).dump();
        out += '\n';
    }
    return out;
}

std::string generate_session_id() {
    std::random_device rd;
    std::array<std::uint32_t, 4> words{};
    for (auto& w : words) {
        w = rd();
    }
    char buf[33];
    std::snprintf(buf, sizeof buf, "%08x%08x%08x%08x", words[0], words[1], words[2], words[3]);
    return buf;
}

const EntityRecord& pick_random_target(const Taxonomy& taxonomy, std::uint64_t seed) {
    if (taxonomy.size() == 0) {
        throw UsageError("pick_random_target: empty taxonomy");
    }
    Rng rng(mix_seed(seed, 0));
    return taxonomy.records()[uniform_index(rng, taxonomy.size())];
}

GameSession::GameSession(const Engine& engine, const EntityRecord& target, GameConfig config,
                         NegativeSampleSet negatives, std::string id)
    : engine_(&engine),
      target_(&target),
      config_(config),
      negatives_(std::move(negatives)),
      id_(std::move(id)),
      history_(config.w) {
    config_.validate();
    for (const auto& name : negatives_.entities) {
        negative_records_.push_back(&engine.taxonomy().at(name));
    }
}

bool GameSession::detect_detour() const {
    return twentyq::detect_detour(history_, *target_, negative_records_, config_.theta_a, config_.theta_d);
}

const TurnRecord& GameSession::answer_question(std::string_view question_text) {
    if (turn() >= config_.max_questions) {
        throw StateError("question limit of " + std::to_string(config_.max_questions) + " reached");
    }
    if (state_ != SessionState::Open) {
        throw StateError("session is closed (" + std::string(to_string(state_)) + ")");
    }
    if (trim(question_text).empty()) {
        throw UsageError("empty question");
    }

    const Engine& engine = *engine_;
    TurnRecord rec;
    rec.turn = turn() + 1;
    rec.question = resolve_pronouns(question_text, target_->name);

    auto full = engine.retrieve(target_->name, ArticleKind::Full, rec.question.resolved, config_.n1, config_.n2);
    std::vector<RankedPassage> simple;
    TargetScores scores;
    scores.full = full.empty() ? 0.0 : full.front().rerank_score.value_or(0.0);
    if (engine.index_for(target_->name, ArticleKind::Simple) != nullptr) {
        simple = engine.retrieve(target_->name, ArticleKind::Simple, rec.question.resolved, config_.n1, config_.n2);
        scores.simple = simple.empty() ? 0.0 : simple.front().rerank_score.value_or(0.0);
    }

    std::vector<SampleProbe> probes;
    std::map<std::string, double> tops;
    for (const auto& name : negatives_.entities) {
        probes.push_back(engine.probe(question_text, name, config_.n1));
        tops[name] = probes.back().top_score;
    }
    rec.stats = stats_from_scores(std::move(tops));

    const auto classification = engine.classify(rec.question, joined_text(full, simple));
    rec.scorer_fallback = classification.fallback;
    for (const auto& p : probes) {
        rec.scorer_fallback = rec.scorer_fallback || p.classification.fallback;
    }

    std::vector<RankedPassage> evidence = std::move(full);
    evidence.insert(evidence.end(), std::make_move_iterator(simple.begin()), std::make_move_iterator(simple.end()));
    auto decision = decide_answer(rec.question, scores, rec.stats, classification.verdict, negatives_, std::move(evidence));
    rec.answer = decision.label;
    rec.rule_fired = decision.rule_fired;
    rec.evidence = std::move(decision.evidence);
    rec.verdict = decision.verdict;

    if (recovery_pending_) {
        std::vector<BoolVerdict> votes;
        for (const auto& name : positive_samples(engine.taxonomy(), target_->name, config_.n_p)) {
            auto probe = engine.probe(question_text, name, config_.n1);
            rec.scorer_fallback = rec.scorer_fallback || probe.classification.fallback;
            votes.push_back(probe.classification.verdict);
        }
        const auto vote = majority_vote(votes);
        rec.answer = to_answer(vote.label);
        rec.verdict = vote;
        rec.recovery_applied = true;
        recovery_pending_ = false;
        history_.clear();
    } else {
        if (rec.answer == AnswerLabel::Yes || rec.answer == AnswerLabel::No) {
            history_.record(target_->name, rec.turn,
                            rec.answer == AnswerLabel::Yes ? BoolLabel::Yes : BoolLabel::No);
        }
        for (const auto& p : probes) {
            history_.record(p.entity, rec.turn, p.classification.verdict.label);
        }
        rec.detour_reported = detect_detour();
        recovery_pending_ = rec.detour_reported;
    }

    transcript_.push_back(std::move(rec));
    if (turn() >= config_.max_questions) {
        state_ = SessionState::Exhausted;
    }
    return transcript_.back();
}

const std::vector<TurnRecord>& GameSession::end_session(SessionState outcome) {
    if (state_ != SessionState::Open) {
        throw StateError("session already closed (" + std::string(to_string(state_)) + ")");
    }
    if (outcome == SessionState::Open) {
        throw UsageError("end_session: outcome must be won, lost or exhausted");
    }
    state_ = outcome;
    return transcript_;
}

GameSession new_session(const Engine& engine, std::string_view target, const GameConfig& config,
                        std::optional<std::string> id) {
    config.validate();
    const std::string wanted = to_lower(trim(target));
    const EntityRecord& record =
        wanted == "random" ? pick_random_target(engine.taxonomy(), config.seed) : engine.taxonomy().at(wanted);
    auto negatives = draw_negative_samples(engine.taxonomy(), record.name, mix_seed(config.seed, 1));
    return GameSession(engine, record, config, std::move(negatives), id ? std::move(*id) : generate_session_id());
}

}  // namespace twentyq
