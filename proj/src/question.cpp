#include "twentyq/question.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include "twentyq/text.hpp"

namespace twentyq {

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

struct Substitution {
    std::string_view phrase;
    bool possessive;
};

// Longer phrases first so "your animal" wins over a bare "it" scan.
constexpr std::array<Substitution, 6> kSubstitutions = {{
    {"your character", false},
    {"your animal", false},
    {"this animal", false},
    {"the animal", false},
    {"its", true},
    {"it", false},
}};

std::string replace_phrase(const std::string& text, std::string_view phrase, const std::string& with) {
    const std::string lowered = to_lower(text);
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t hit = lowered.find(phrase, pos);
        if (hit == std::string::npos) {
            break;
        }
        const std::size_t end = hit + phrase.size();
        const bool left_ok = hit == 0 || !is_word_char(text[hit - 1]);
        const bool right_ok = end >= text.size() || !is_word_char(text[end]);
        if (left_ok && right_ok) {
            out.append(text, pos, hit - pos);
            out.append(with);
            pos = end;
        } else {
            out.append(text, pos, hit + 1 - pos);
            pos = hit + 1;
        }
    }
    out.append(text, std::min(pos, text.size()), std::string::npos);
    return out;
}

constexpr std::array<std::string_view, 11> kComparisonWords = {
    "smaller", "bigger", "larger", "shorter", "taller", "longer",
    "heavier", "lighter", "faster", "slower", "than",
};

}  // namespace

std::string_view to_string(BoolLabel l) {
    return l == BoolLabel::Yes ? "yes" : "no";
}

ResolvedQuestion resolve_pronouns(std::string_view question, std::string_view entity) {
    ResolvedQuestion out;
    out.original = std::string(question);
    out.entity = std::string(entity);
    out.has_comparison = detect_comparison(question);

    std::string text = out.original;
    for (const auto& sub : kSubstitutions) {
        const std::string replacement = sub.possessive ? out.entity + "'s" : out.entity;
        text = replace_phrase(text, sub.phrase, replacement);
    }
    out.resolved = std::move(text);
    return out;
}

bool detect_comparison(std::string_view question) {
    const auto words = split_words(question);
    for (std::size_t i = 0; i < words.size(); ++i) {
        const auto& w = words[i];
        if (std::find(kComparisonWords.begin(), kComparisonWords.end(), w) != kComparisonWords.end()) {
            return true;
        }
        if ((w == "more" || w == "less") && i + 1 < words.size() && words[i + 1] == "than") {
            return true;
        }
    }
    return false;
}

const std::vector<std::string>& default_negation_cues() {
    static const std::vector<std::string> cues = {
        "not", "no", "never", "none", "neither", "nor", "without", "cannot", "nt",
    };
    return cues;
}

BoolVerdict score_entailment(const ResolvedQuestion& question, std::string_view passage,
                             const EntailmentParams& params) {
    const auto question_tokens = tokenize(question.resolved).tokens;
    const auto entity_tokens = tokenize(question.entity).tokens;
    const std::set<std::string> entity_set(entity_tokens.begin(), entity_tokens.end());

    std::set<std::string> content;
    for (const auto& t : question_tokens) {
        if (!entity_set.contains(t)) {
            content.insert(t);
        }
    }
    if (content.empty()) {
        return BoolVerdict{BoolLabel::No, 0.0};
    }

    const auto passage_tokens = tokenize(passage).tokens;
    const std::set<std::string> passage_set(passage_tokens.begin(), passage_tokens.end());
    std::size_t shared = 0;
    for (const auto& t : content) {
        shared += passage_set.contains(t) ? 1 : 0;
    }
    const double overlap = static_cast<double>(shared) / static_cast<double>(content.size());

    auto is_cue = [&](const std::string& t) {
        return std::find(params.negation_cues.begin(), params.negation_cues.end(), t) !=
               params.negation_cues.end();
    };

    std::size_t negations = static_cast<std::size_t>(
        std::count_if(question_tokens.begin(), question_tokens.end(), is_cue));
    for (const auto& paragraph : segment_paragraphs(passage)) {
        for (const auto& sentence : segment_sentences(paragraph)) {
            const auto tokens = tokenize(sentence).tokens;
            const bool relevant = std::any_of(tokens.begin(), tokens.end(),
                                              [&](const std::string& t) { return content.contains(t); });
            if (relevant) {
                negations += static_cast<std::size_t>(std::count_if(tokens.begin(), tokens.end(), is_cue));
            }
        }
    }

    const bool yes = overlap >= params.overlap_threshold && negations % 2 == 0;
    return BoolVerdict{yes ? BoolLabel::Yes : BoolLabel::No, overlap};
}

std::optional<BoolVerdict> HeuristicScorer::classify(const ResolvedQuestion& question,
                                                     std::string_view passage) const {
    return score_entailment(question, passage, params_);
}

Classification classify(const ResolvedQuestion& question, std::string_view passage,
                        const ScorerProvider* external, const HeuristicScorer& heuristic) {
    if (external != nullptr) {
        if (auto v = external->classify(question, passage)) {
            return Classification{*v, false, std::string(external->name())};
        }
        return Classification{*heuristic.classify(question, passage), true, std::string(heuristic.name())};
    }
    return Classification{*heuristic.classify(question, passage), false, std::string(heuristic.name())};
}

}  // namespace twentyq
