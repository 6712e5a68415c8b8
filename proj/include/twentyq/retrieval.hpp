#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "twentyq/corpus.hpp"
#include "twentyq/text.hpp"

namespace twentyq {

using DocId = std::uint32_t;

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct Posting {
    DocId doc = 0;
    std::uint32_t tf = 0;

    bool operator==(const Posting&) const = default;
};

/// Term statistics over a fixed set of documents numbered 0..N-1.
class InvertedIndex {
  public:
    static InvertedIndex build(std::span<const TokenStream> docs, Bm25Params params = {});
    static InvertedIndex build(std::span<const Passage> passages, Bm25Params params = {});

    /// Validates invariants; throws DataError on any inconsistency.
    static InvertedIndex from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;

    std::size_t doc_count() const { return doc_lengths_.size(); }
    double avgdl() const { return avgdl_; }
    const Bm25Params& params() const { return params_; }
    std::uint32_t doc_length(DocId id) const;
    const std::map<std::string, std::vector<Posting>, std::less<>>& postings() const { return postings_; }

    /// Number of documents containing the term.
    std::size_t document_frequency(std::string_view term) const;

    /// ln(1 + (N - n + 0.5) / (n + 0.5)); n = 0 for unseen terms.
    double idf(std::string_view term) const;

    /// Okapi BM25 over the distinct query terms. Throws NotFoundError for an
    /// unknown document.
    double score(const TokenStream& query, DocId doc) const;

    /// Scores of every document with at least one query term, accumulated
    /// from the posting lists.
    std::vector<std::pair<DocId, double>> score_all(const TokenStream& query) const;

  private:
    InvertedIndex() = default;
    void finalize();

    std::map<std::string, std::vector<Posting>, std::less<>> postings_;
    std::vector<std::uint32_t> doc_lengths_;
    double avgdl_ = 0.0;
    Bm25Params params_;
};

struct RankedPassage {
    DocId id = 0;
    Passage passage;
    double sparse_score = 0.0;
    std::optional<double> rerank_score;
};

/// Passages paired with the index built over them; passage i is document i.
class PassageIndex {
  public:
    PassageIndex(std::vector<Passage> passages, Bm25Params params = {});

    const InvertedIndex& index() const { return index_; }
    const std::vector<Passage>& passages() const { return passages_; }
    std::size_t size() const { return passages_.size(); }

  private:
    std::vector<Passage> passages_;
    InvertedIndex index_;
};

/// BM25 top-k: positive scores only, descending, ties by ascending id.
std::vector<RankedPassage> retrieve_topk(const PassageIndex& index, const TokenStream& query, std::size_t k);

class EmbeddingProvider;

inline constexpr std::size_t kDefaultN1 = 100;
inline constexpr std::size_t kDefaultN2 = 5;

/// Sparse-first retrieval: BM25 top-n1, then cosine rerank of the candidates
/// against the query embedding, keeping the best n2.
std::vector<RankedPassage> hybrid_retrieve(const PassageIndex& index, std::string_view query_text,
                                           std::size_t n1, std::size_t n2,
                                           const EmbeddingProvider& reranker);

}  // namespace twentyq
