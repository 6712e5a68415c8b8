#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twentyq/corpus.hpp"
#include "twentyq/question.hpp"
#include "twentyq/retrieval.hpp"

namespace twentyq {

enum class AnswerLabel { Yes, No, Probably, ProbablyNot, Idk };

std::string_view to_string(AnswerLabel l);
std::optional<AnswerLabel> parse_answer_label(std::string_view s);

inline AnswerLabel to_answer(BoolLabel l) {
    return l == BoolLabel::Yes ? AnswerLabel::Yes : AnswerLabel::No;
}

/// Which row of the decision table produced the answer.
enum class Rule { R1, R2, R3, R4a, R4b };

std::string_view to_string(Rule r);

/// One decoy entity per taxonomy category, fixed for a whole game.
struct NegativeSampleSet {
    std::vector<std::string> entities;

    bool operator==(const NegativeSampleSet&) const = default;
};

/// Throws DataError naming the first category without an eligible entity.
NegativeSampleSet draw_negative_samples(const Taxonomy& taxonomy, std::string_view target, std::uint64_t seed);

struct ScoreStats {
    std::map<std::string, double> per_entity_top;
    double mean = 0.0;
    double stddev = 0.0;  // population form
    double best = 0.0;
};

/// Mean, population standard deviation and maximum of the per-entity scores.
/// An empty map gives all zeros.
ScoreStats stats_from_scores(std::map<std::string, double> per_entity_top);

struct TargetScores {
    double full = 0.0;
    std::optional<double> simple;
};

struct Decision {
    AnswerLabel label = AnswerLabel::Idk;
    Rule rule_fired = Rule::R1;
    std::vector<RankedPassage> evidence;
    std::optional<BoolVerdict> verdict;
};

/// Ordered decision table:
///   R1  comparison question                      -> IDK
///   R2  mean target score < mu - sigma           -> IDK
///   R3  best target score >= best negative - sigma -> verdict
///   R4a best target score > mu                   -> PROBABLY / PROBABLY_NOT
///   R4b otherwise                                -> IDK
/// Throws UsageError when `stats` was not computed over `samples`.
Decision decide_answer(const ResolvedQuestion& question, const TargetScores& scores, const ScoreStats& stats,
                       const BoolVerdict& verdict, const NegativeSampleSet& samples,
                       std::vector<RankedPassage> evidence);

/// The n_p entities most similar to the target, ties by name.
std::vector<std::string> positive_samples(const Taxonomy& taxonomy, std::string_view target, std::size_t n_p);

/// Strict majority; an exact tie goes to YES. Confidence is the mean over
/// the winning side.
BoolVerdict majority_vote(const std::vector<BoolVerdict>& verdicts);

}  // namespace twentyq
