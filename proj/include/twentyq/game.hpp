#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "twentyq/decision.hpp"
#include "twentyq/engine.hpp"

namespace twentyq {

struct GameConfig {
    std::size_t n1 = kDefaultN1;
    std::size_t n2 = kDefaultN2;
    std::size_t w = 5;         // answer-history window
    double theta_a = 0.8;      // agreement needed to call a detour
    double theta_d = 0.5;      // a negative is "dissimilar" below this
    std::size_t n_p = 3;       // positive samples used for recovery
    std::size_t max_questions = 80;
    std::uint64_t seed = 0;

    /// Throws UsageError naming the offending field.
    void validate() const;
};

enum class SessionState { Open, Won, Lost, Exhausted };

std::string_view to_string(SessionState s);

struct HistoryEntry {
    std::uint32_t turn = 0;
    BoolLabel label = BoolLabel::No;

    bool operator==(const HistoryEntry&) const = default;
};

/// Last-w definite answers per entity, each tagged with its turn.
class AnswerHistory {
  public:
    explicit AnswerHistory(std::size_t window) : window_(window) {}

    void record(const std::string& entity, std::uint32_t turn, BoolLabel label);
    const std::deque<HistoryEntry>& buffer(const std::string& entity) const;
    void clear() { buffers_.clear(); }
    std::size_t window() const { return window_; }

  private:
    std::size_t window_;
    std::map<std::string, std::deque<HistoryEntry>> buffers_;
};

/// True when the target's buffer is full and some negative less similar to
/// the target than theta_d agreed with it on at least ceil(theta_a * w) of
/// the target's recorded turns. Negatives with fewer than w comparable
/// turns are skipped.
bool detect_detour(const AnswerHistory& history, const EntityRecord& target,
                   const std::vector<const EntityRecord*>& negatives, double theta_a, double theta_d);

struct TurnRecord {
    std::uint32_t turn = 0;
    ResolvedQuestion question;
    AnswerLabel answer = AnswerLabel::Idk;
    Rule rule_fired = Rule::R1;
    std::vector<RankedPassage> evidence;
    std::optional<BoolVerdict> verdict;
    ScoreStats stats;
    bool detour_reported = false;
    bool recovery_applied = false;
    bool scorer_fallback = false;
};

/// One line of the JSONL transcript.
nlohmann::json turn_to_json(const TurnRecord& turn);
std::string transcript_jsonl(const std::vector<TurnRecord>& turns);

std::string generate_session_id();

/// Uniform pick over the taxonomy, deterministic in `seed`.
const EntityRecord& pick_random_target(const Taxonomy& taxonomy, std::uint64_t seed);

class GameSession {
  public:
    GameSession(const Engine& engine, const EntityRecord& target, GameConfig config, NegativeSampleSet negatives,
                std::string id);

    const std::string& id() const { return id_; }
    const EntityRecord& target() const { return *target_; }
    const GameConfig& config() const { return config_; }
    const NegativeSampleSet& negatives() const { return negatives_; }
    const AnswerHistory& history() const { return history_; }
    const std::vector<TurnRecord>& transcript() const { return transcript_; }
    SessionState state() const { return state_; }
    std::uint32_t turn() const { return static_cast<std::uint32_t>(transcript_.size()); }
    bool recovery_pending() const { return recovery_pending_; }

    /// Runs the answering pipeline for one question. Throws StateError when
    /// the session is closed or the question cap is reached, UsageError on an
    /// empty question. Reaching the cap closes the session as EXHAUSTED.
    const TurnRecord& answer_question(std::string_view question_text);

    bool detect_detour() const;

    /// Closes the session. Throws StateError if it is already closed.
    const std::vector<TurnRecord>& end_session(SessionState outcome);

  private:
    const Engine* engine_;
    const EntityRecord* target_;
    GameConfig config_;
    NegativeSampleSet negatives_;
    std::vector<const EntityRecord*> negative_records_;
    std::string id_;
    AnswerHistory history_;
    std::vector<TurnRecord> transcript_;
    SessionState state_ = SessionState::Open;
    bool recovery_pending_ = false;
};

/// `target` is an entity name or "random" (any case). Throws NotFoundError
/// for an unknown entity.
GameSession new_session(const Engine& engine, std::string_view target, const GameConfig& config,
                        std::optional<std::string> id = std::nullopt);

}  // namespace twentyq
