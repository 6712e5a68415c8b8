#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace twentyq {

/// Splits article text into paragraphs. A paragraph is a maximal run of
/// lines separated from its neighbours by at least one blank line; each
/// paragraph is trimmed and empty ones are dropped.
std::vector<std::string> segment_paragraphs(std::string_view article);

/// Rule-based sentence splitter. A boundary is placed after '.', '?' or '!'
/// when followed by whitespace and then an uppercase letter (or the end of
/// the text). Known abbreviations ("Dr.", "e.g.", ...) never end a sentence.
std::vector<std::string> segment_sentences(std::string_view paragraph);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Lowercased alphanumeric words. Apostrophe-t suffixes ("can't", "isn’t")
/// become a separate "nt" word. No stopword removal, no stemming.
std::vector<std::string> split_words(std::string_view text);

struct TokenStream {
    std::vector<std::string> tokens;

    bool empty() const { return tokens.empty(); }
    std::size_t size() const { return tokens.size(); }
    bool operator==(const TokenStream&) const = default;
};

bool is_stopword(std::string_view word);

/// Strips a trailing "es", or failing that a trailing "s", from words longer
/// than three characters.
std::string strip_plural(std::string word);

/// split_words, then stopword removal, then plural stripping.
TokenStream tokenize(std::string_view text);

/// 64-bit FNV-1a over the raw bytes.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace twentyq
