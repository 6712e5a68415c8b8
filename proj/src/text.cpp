#include "twentyq/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

namespace twentyq {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_alnum(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

char lower(char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

bool is_blank_line(std::string_view line) {
    return std::all_of(line.begin(), line.end(), is_space);
}

// Abbreviations that never terminate a sentence, compared lowercase.
constexpr std::array<std::string_view, 18> kAbbreviations = {
    "mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "mt.", "jr.", "sr.",
    "e.g.", "i.e.", "vs.", "approx.", "ca.", "fig.", "no.", "u.s.", "cf.",
};

bool ends_with_abbreviation(std::string_view text, std::size_t period_pos) {
    std::size_t start = period_pos;
    while (start > 0 && !is_space(text[start - 1])) {
        --start;
    }
    // Skip opening punctuation such as '(' or '"'.
    while (start < period_pos && !is_alnum(text[start])) {
        ++start;
    }
    const std::string word = to_lower(text.substr(start, period_pos - start + 1));
    return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) != kAbbreviations.end();
}

const std::unordered_set<std::string_view>& stopwords() {
    // Negation cues and comparison words are deliberately absent.
    static const std::unordered_set<std::string_view> words = {
        "a",       "about",   "above",  "after",  "again",   "all",     "also",   "am",
        "an",      "and",     "any",    "are",    "aren",    "as",      "at",     "be",
        "because", "been",    "before", "being",  "below",   "between", "both",   "but",
        "by",      "ca",      "can",    "could",  "couldn",  "d",       "did",    "didn",
        "do",      "does",    "doesn",  "doing",  "don",     "down",    "during", "each",
        "few",     "for",     "from",   "further", "had",    "hadn",    "has",    "hasn",
        "have",    "haven",   "having", "he",     "her",     "here",    "hers",   "herself",
        "him",     "himself", "his",    "how",    "i",       "if",      "in",     "into",
        "is",      "isn",     "it",     "its",    "itself",  "just",    "ll",     "m",
        "may",     "me",      "might",  "must",   "my",      "myself",  "of",     "off",
        "on",      "once",    "only",   "or",     "other",   "our",     "ours",   "out",
        "over",    "own",     "re",     "s",      "same",    "shall",   "she",    "should",
        "shouldn", "so",      "some",   "such",   "t",       "that",    "the",    "their",
        "theirs",  "them",    "then",   "there",  "these",   "they",    "this",   "those",
        "through", "to",      "too",    "under",  "until",   "up",      "ve",     "very",
        "was",     "wasn",    "we",     "were",   "weren",   "what",    "when",   "where",
        "which",   "while",   "who",    "whom",   "why",     "will",    "with",   "won",
        "would",   "wouldn",  "you",    "your",   "yours",   "yourself",
    };
    return words;
}

}  // namespace

std::string trim(std::string_view s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && is_space(s[begin])) {
        ++begin;
    }
    while (end > begin && is_space(s[end - 1])) {
        --end;
    }
    return std::string(s.substr(begin, end - begin));
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), lower);
    return out;
}

std::vector<std::string> segment_paragraphs(std::string_view article) {
    std::vector<std::string> paragraphs;
    std::string current;
    auto flush = [&] {
        std::string p = trim(current);
        if (!p.empty()) {
            paragraphs.push_back(std::move(p));
        }
        current.clear();
    };

    std::size_t pos = 0;
    while (pos <= article.size()) {
        std::size_t nl = article.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = article.size();
        }
        std::string_view line = article.substr(pos, nl - pos);
        if (is_blank_line(line)) {
            flush();
        } else {
            if (!current.empty()) {
                current.push_back('\n');
            }
            current.append(line);
        }
        pos = nl + 1;
    }
    flush();
    return paragraphs;
}

std::vector<std::string> segment_sentences(std::string_view paragraph) {
    std::vector<std::string> sentences;
    std::size_t start = 0;
    const std::size_t n = paragraph.size();

    for (std::size_t i = 0; i < n; ++i) {
        const char c = paragraph[i];
        if (c != '.' && c != '?' && c != '!') {
            continue;
        }
        std::size_t j = i + 1;
        while (j < n && is_space(paragraph[j])) {
            ++j;
        }
        const bool at_end = j == n;
        const bool before_capital =
            j > i + 1 && j < n && std::isupper(static_cast<unsigned char>(paragraph[j])) != 0;
        if (!at_end && !before_capital) {
            continue;
        }
        if (c == '.' && ends_with_abbreviation(paragraph, i)) {
            continue;
        }
        std::string s = trim(paragraph.substr(start, i + 1 - start));
        if (!s.empty()) {
            sentences.push_back(std::move(s));
        }
        start = i + 1;
    }
    std::string tail = trim(paragraph.substr(std::min(start, n)));
    if (!tail.empty()) {
        sentences.push_back(std::move(tail));
    }
    return sentences;
}

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::string current;
    const std::size_t n = text.size();

    auto flush = [&] {
        if (!current.empty()) {
            words.push_back(std::move(current));
            current.clear();
        }
    };

    for (std::size_t i = 0; i < n; ++i) {
        const char c = text[i];
        if (is_alnum(c)) {
            current.push_back(lower(c));
            continue;
        }
        // "n't" contractions: ASCII apostrophe or U+2019 (E2 80 99) then 't'
        // closing the word.
        std::size_t apostrophe_len = 0;
        if (c == '\'') {
            apostrophe_len = 1;
        } else if (static_cast<unsigned char>(c) == 0xE2 && i + 2 < n &&
                   static_cast<unsigned char>(text[i + 1]) == 0x80 &&
                   static_cast<unsigned char>(text[i + 2]) == 0x99) {
            apostrophe_len = 3;
        }
        if (apostrophe_len > 0 && !current.empty()) {
            const std::size_t t_pos = i + apostrophe_len;
            const bool t_follows = t_pos < n && lower(text[t_pos]) == 't';
            const bool word_closes = t_pos + 1 >= n || !is_alnum(text[t_pos + 1]);
            if (t_follows && word_closes) {
                flush();
                words.emplace_back("nt");
                i = t_pos;
                continue;
            }
        }
        flush();
    }
    flush();
    return words;
}

bool is_stopword(std::string_view word) {
    return stopwords().contains(word);
}

std::string strip_plural(std::string word) {
    if (word.size() <= 3) {
        return word;
    }
    if (word.ends_with("es")) {
        word.resize(word.size() - 2);
    } else if (word.ends_with('s')) {
        word.pop_back();
    }
    return word;
}

TokenStream tokenize(std::string_view text) {
    TokenStream out;
    for (auto& w : split_words(text)) {
        if (is_stopword(w)) {
            continue;
        }
        out.tokens.push_back(strip_plural(std::move(w)));
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace twentyq
