#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "twentyq/corpus.hpp"
#include "twentyq/decision.hpp"
#include "twentyq/random.hpp"

namespace twentyq {

class GameSession;

inline constexpr std::uint32_t kQuestionerTurnLimit = 80;
inline constexpr double kGuessThreshold = 0.8;
inline constexpr std::size_t kGuessListSize = 10;
inline constexpr double kGuessListFloor = 0.01;

struct FeatureInfo {
    std::string_view name;
    std::string_view phrase;  // completes "Is your animal ...?"
};

/// Meaning of manifest columns f1..f16.
const std::array<FeatureInfo, kFeatureCount>& feature_catalog();

std::string question_for_feature(std::size_t feature);

/// P(answer | the entity has / lacks the asked feature).
struct AnswerLikelihoods {
    double yes_given_true = 0.9;
    double probably_given_true = 0.65;
    double idk = 0.5;

    double operator()(AnswerLabel answer, bool feature_value) const;
};

struct GuessDistribution {
    std::vector<std::string> entities;
    std::vector<double> probabilities;

    double probability(std::string_view entity) const;
    /// Top entries (at most 10, each >= 0.01), most probable first; ties by
    /// name.
    std::vector<std::pair<std::string, double>> guess_list() const;
    bool in_guess_list(std::string_view entity) const;
    std::pair<std::string, double> argmax() const;
};

struct QuestionerState {
    GuessDistribution distribution;
    std::set<std::size_t> asked;
    std::uint32_t turn = 0;
    AnswerLikelihoods likelihoods;
    double lambda = 0.02;  // recency mix toward uniform
    std::size_t anomalies = 0;
};

QuestionerState make_questioner(const Taxonomy& taxonomy, double lambda = 0.02, AnswerLikelihoods likelihoods = {});

struct QuestionChoice {
    std::size_t feature = 0;
    std::string text;
};

/// Expected entropy reduction of asking `feature` under the yes/no rows of
/// the likelihood table.
double expected_information_gain(const QuestionerState& state, const Taxonomy& taxonomy, std::size_t feature);

/// Unasked feature with the largest expected information gain, lowest index
/// on ties. Throws StateError when every feature has been asked or the turn
/// limit is reached.
QuestionChoice next_question(const QuestionerState& state, const Taxonomy& taxonomy);

/// Bayesian update on the answer, renormalisation, then the recency mix.
QuestionerState update(QuestionerState state, const Taxonomy& taxonomy, std::size_t feature, AnswerLabel answer);

std::optional<std::string> should_guess(const QuestionerState& state);

/// YES / NO with probability 0.425 each, the other three 0.05 each.
AnswerLabel random_answerer(Rng& rng);

class Answerer {
  public:
    virtual ~Answerer() = default;
    virtual AnswerLabel answer(std::size_t feature, const std::string& question) = 0;
    virtual std::string_view name() const = 0;
};

/// Answers from the target's feature row.
class OracleAnswerer final : public Answerer {
  public:
    explicit OracleAnswerer(const EntityRecord& target) : target_(target) {}
    AnswerLabel answer(std::size_t feature, const std::string& question) override;
    std::string_view name() const override { return "oracle"; }

  private:
    EntityRecord target_;
};

class RandomAnswerer final : public Answerer {
  public:
    explicit RandomAnswerer(std::uint64_t seed) : rng_(seed) {}
    AnswerLabel answer(std::size_t feature, const std::string& question) override;
    std::string_view name() const override { return "random"; }

  private:
    Rng rng_;
};

/// Routes questions through a game session.
class EngineAnswerer final : public Answerer {
  public:
    explicit EngineAnswerer(GameSession& session) : session_(session) {}
    AnswerLabel answer(std::size_t feature, const std::string& question) override;
    std::string_view name() const override { return "engine"; }

  private:
    GameSession& session_;
};

struct TraceEntry {
    std::uint32_t turn = 0;
    GuessDistribution distribution;
};

struct MetricsReport {
    double best_guess_probability = 0.0;
    std::vector<std::uint32_t> detour_recovery_times;
    double mean_recovery = 0.0;
    double convergence_rate = 0.0;
    bool won = false;
    std::uint32_t turns = 0;
};

MetricsReport compute_metrics(const std::vector<TraceEntry>& trace, std::string_view target);

struct SimulationOptions {
    double lambda = 0.02;
    AnswerLikelihoods likelihoods;
};

struct SimulatedTurn {
    std::uint32_t turn = 0;
    std::size_t feature = 0;
    std::string question;
    AnswerLabel answer = AnswerLabel::Idk;
    GuessDistribution distribution;
};

struct SimulationResult {
    std::string target;
    std::vector<SimulatedTurn> turns;
    std::optional<std::string> guess;
    MetricsReport metrics;
    std::size_t anomalies = 0;
    /// Fraction of answers judged correct by the probability-increase rule;
    /// unset when no answer qualified.
    std::optional<double> estimated_accuracy;
};

/// Questioner self-play until a guess or the turn limit. When every feature
/// has been asked without crossing the threshold, the questioner guesses its
/// current favourite.
SimulationResult simulate_game(Answerer& answerer, std::string_view target, const Taxonomy& taxonomy,
                               const SimulationOptions& options = {});

nlohmann::json simulated_turn_to_json(const SimulatedTurn& turn, std::string_view target);
nlohmann::json metrics_to_json(const MetricsReport& m);

/// Header row of the batch evaluation CSV.
inline constexpr std::string_view kEvalCsvHeader =
    "target,seed,won,turns,best_guess_probability,mean_recovery,convergence_rate";

std::string eval_csv_row(std::string_view target, std::uint64_t seed, const MetricsReport& m);

}  // namespace twentyq
