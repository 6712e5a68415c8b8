#include "twentyq/decision.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "twentyq/errors.hpp"
#include "twentyq/random.hpp"

namespace twentyq {

namespace {

constexpr std::array<std::string_view, 5> kAnswerLabels = {"yes", "no", "probably", "probably not", "idk"};
constexpr std::array<std::string_view, 5> kRuleIds = {"R1", "R2", "R3", "R4a", "R4b"};

}  // namespace

std::string_view to_string(AnswerLabel l) {
    return kAnswerLabels[static_cast<std::size_t>(l)];
}

std::optional<AnswerLabel> parse_answer_label(std::string_view s) {
    for (std::size_t i = 0; i < kAnswerLabels.size(); ++i) {
        if (kAnswerLabels[i] == s) {
            return static_cast<AnswerLabel>(i);
        }
    }
    return std::nullopt;
}

std::string_view to_string(Rule r) {
    return kRuleIds[static_cast<std::size_t>(r)];
}

NegativeSampleSet draw_negative_samples(const Taxonomy& taxonomy, std::string_view target, std::uint64_t seed) {
    Rng rng(seed);
    NegativeSampleSet set;
    for (const Category c : kAllCategories) {
        std::vector<const EntityRecord*> eligible;
        for (const auto* r : taxonomy.in_category(c)) {
            if (r->name != target) {
                eligible.push_back(r);
            }
        }
        if (eligible.empty()) {
            throw DataError("negative sampling: category '" + std::string(to_string(c)) +
                            "' has no entity other than the target");
        }
        set.entities.push_back(eligible[uniform_index(rng, eligible.size())]->name);
    }
    return set;
}

ScoreStats stats_from_scores(std::map<std::string, double> per_entity_top) {
    ScoreStats stats;
    stats.per_entity_top = std::move(per_entity_top);
    if (stats.per_entity_top.empty()) {
        return stats;
    }
    const double n = static_cast<double>(stats.per_entity_top.size());
    double sum = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& [name, s] : stats.per_entity_top) {
        sum += s;
        best = std::max(best, s);
    }
    stats.mean = sum / n;
    double sq = 0.0;
    for (const auto& [name, s] : stats.per_entity_top) {
        sq += (s - stats.mean) * (s - stats.mean);
    }
    stats.stddev = std::sqrt(sq / n);
    stats.best = best;
    return stats;
}

Decision decide_answer(const ResolvedQuestion& question, const TargetScores& scores, const ScoreStats& stats,
                       const BoolVerdict& verdict, const NegativeSampleSet& samples,
                       std::vector<RankedPassage> evidence) {
    {
        std::vector<std::string> expected = samples.entities;
        std::sort(expected.begin(), expected.end());
        expected.erase(std::unique(expected.begin(), expected.end()), expected.end());
        std::vector<std::string> actual;
        for (const auto& [name, s] : stats.per_entity_top) {
            actual.push_back(name);
        }
        if (expected != actual) {
            throw UsageError("decide_answer: score stats were computed over a different negative sample set");
        }
    }

    Decision d;
    d.evidence = std::move(evidence);
    if (question.has_comparison) {
        d.label = AnswerLabel::Idk;
        d.rule_fired = Rule::R1;
        return d;
    }
    d.verdict = verdict;

    const double best = scores.simple ? std::max(scores.full, *scores.simple) : scores.full;
    const double average = scores.simple ? (scores.full + *scores.simple) / 2.0 : scores.full;
    const double mu = stats.mean;
    const double sigma = stats.stddev;

    if (average < mu - sigma) {
        d.label = AnswerLabel::Idk;
        d.rule_fired = Rule::R2;
    } else if (best >= stats.best - sigma) {
        d.label = to_answer(verdict.label);
        d.rule_fired = Rule::R3;
    } else if (best > mu) {
        d.label = verdict.label == BoolLabel::Yes ? AnswerLabel::Probably : AnswerLabel::ProbablyNot;
        d.rule_fired = Rule::R4a;
    } else {
        d.label = AnswerLabel::Idk;
        d.rule_fired = Rule::R4b;
    }
    return d;
}

std::vector<std::string> positive_samples(const Taxonomy& taxonomy, std::string_view target, std::size_t n_p) {
    if (n_p == 0) {
        throw UsageError("positive_samples: n_p must be positive");
    }
    if (n_p >= taxonomy.size()) {
        throw UsageError("positive_samples: n_p (" + std::to_string(n_p) + ") must be smaller than the taxonomy (" +
                         std::to_string(taxonomy.size()) + ")");
    }
    const auto& t = taxonomy.at(target);
    std::vector<std::pair<double, std::string>> scored;
    for (const auto& r : taxonomy.records()) {
        if (r.name != t.name) {
            scored.emplace_back(entity_similarity(t, r), r.name);
        }
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first > b.first;
        }
        return a.second < b.second;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n_p; ++i) {
        out.push_back(scored[i].second);
    }
    return out;
}

BoolVerdict majority_vote(const std::vector<BoolVerdict>& verdicts) {
    if (verdicts.empty()) {
        throw UsageError("majority_vote: no verdicts");
    }
    std::size_t yes = 0;
    double yes_conf = 0.0;
    double no_conf = 0.0;
    for (const auto& v : verdicts) {
        if (v.label == BoolLabel::Yes) {
            ++yes;
            yes_conf += v.confidence;
        } else {
            no_conf += v.confidence;
        }
    }
    const std::size_t no = verdicts.size() - yes;
    if (yes >= no) {
        return BoolVerdict{BoolLabel::Yes, yes_conf / static_cast<double>(yes)};
    }
    return BoolVerdict{BoolLabel::No, no_conf / static_cast<double>(no)};
}

}  // namespace twentyq
