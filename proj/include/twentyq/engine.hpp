#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "twentyq/corpus.hpp"
#include "twentyq/decision.hpp"
#include "twentyq/embedding.hpp"
#include "twentyq/question.hpp"
#include "twentyq/retrieval.hpp"

namespace twentyq {

enum class Granularity { Paragraph, Sentence };

struct EngineOptions {
    Granularity granularity = Granularity::Paragraph;
    Bm25Params bm25;
    EntailmentParams entailment;
};

/// Best passage of one entity's full article for a question, plus the
/// scorer's verdict on it.
struct SampleProbe {
    std::string entity;
    double top_score = 0.0;
    std::optional<RankedPassage> top;
    Classification classification;
};

/// Ingested corpus with one passage index per (entity, article kind), and
/// the scorer / reranker used to answer questions. Immutable after
/// construction; every method is safe to call from several threads.
class Engine {
  public:
    explicit Engine(Corpus corpus, EngineOptions options = {},
                    std::shared_ptr<const EmbeddingProvider> reranker = nullptr,
                    std::shared_ptr<const ScorerProvider> external_scorer = nullptr);

    const Corpus& corpus() const { return corpus_; }
    const Taxonomy& taxonomy() const { return corpus_.taxonomy(); }
    const EngineOptions& options() const { return options_; }
    const EmbeddingProvider& reranker() const { return *reranker_; }

    /// nullptr when the entity has no article of that kind.
    const PassageIndex* index_for(std::string_view entity, ArticleKind kind) const;

    std::vector<RankedPassage> retrieve(std::string_view entity, ArticleKind kind, std::string_view query,
                                        std::size_t n1, std::size_t n2) const;

    Classification classify(const ResolvedQuestion& question, std::string_view passage) const;

    /// Resolves `question` against `entity`, retrieves the entity's best
    /// full-article passage and classifies it.
    SampleProbe probe(std::string_view question, std::string_view entity, std::size_t n1) const;

  private:
    Corpus corpus_;
    EngineOptions options_;
    std::shared_ptr<const EmbeddingProvider> reranker_;
    std::shared_ptr<const ScorerProvider> external_scorer_;
    HeuristicScorer heuristic_;
    std::map<std::pair<std::string, ArticleKind>, PassageIndex, std::less<>> indexes_;
};

/// Per-entity top rerank scores over the negative samples and their
/// summary statistics. Entities without a match score 0.
ScoreStats compute_stats(const ResolvedQuestion& question, const NegativeSampleSet& samples, const Engine& engine,
                         std::size_t n1);

}  // namespace twentyq
