#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace twentyq {

struct ResolvedQuestion {
    std::string original;
    std::string resolved;
    std::string entity;
    bool has_comparison = false;
};

enum class BoolLabel { Yes, No };

std::string_view to_string(BoolLabel l);

struct BoolVerdict {
    BoolLabel label = BoolLabel::No;
    double confidence = 0.0;

    bool operator==(const BoolVerdict&) const = default;
};

/// Replaces "it", "its", "your animal", "this animal", "the animal" and
/// "your character" (whole words, any case) with the entity name. "its"
/// becomes "<entity>'s".
ResolvedQuestion resolve_pronouns(std::string_view question, std::string_view entity);

bool detect_comparison(std::string_view question);

const std::vector<std::string>& default_negation_cues();

struct EntailmentParams {
    double overlap_threshold = 0.5;
    std::vector<std::string> negation_cues = default_negation_cues();
};

/// Lexical yes/no heuristic: term overlap between the question (entity
/// words removed) and the passage, flipped by an odd number of negation
/// cues in the question and in passage sentences that share a term with it.
BoolVerdict score_entailment(const ResolvedQuestion& question, std::string_view passage,
                             const EntailmentParams& params = {});

/// A boolean scorer backend. `classify` returns nullopt when the backend is
/// unavailable or answers with something unusable.
class ScorerProvider {
  public:
    virtual ~ScorerProvider() = default;
    virtual std::optional<BoolVerdict> classify(const ResolvedQuestion& question,
                                                std::string_view passage) const = 0;
    virtual std::string_view name() const = 0;
};

class HeuristicScorer final : public ScorerProvider {
  public:
    explicit HeuristicScorer(EntailmentParams params = {}) : params_(std::move(params)) {}

    std::optional<BoolVerdict> classify(const ResolvedQuestion& question,
                                        std::string_view passage) const override;
    std::string_view name() const override { return "heuristic"; }

    const EntailmentParams& params() const { return params_; }

  private:
    EntailmentParams params_;
};

struct Classification {
    BoolVerdict verdict;
    bool fallback = false;
    std::string scorer;
};

/// Uses `external` when given and it answers; otherwise the heuristic. The
/// `fallback` flag is set only when an external scorer was configured and
/// failed.
Classification classify(const ResolvedQuestion& question, std::string_view passage,
                        const ScorerProvider* external, const HeuristicScorer& heuristic);

}  // namespace twentyq
