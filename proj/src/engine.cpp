#include "twentyq/engine.hpp"

#include "twentyq/errors.hpp"

namespace twentyq {

Engine::Engine(Corpus corpus, EngineOptions options, std::shared_ptr<const EmbeddingProvider> reranker,
               std::shared_ptr<const ScorerProvider> external_scorer)
    : corpus_(std::move(corpus)),
      options_(std::move(options)),
      reranker_(reranker ? std::move(reranker) : std::make_shared<HashedEmbedding>()),
      external_scorer_(std::move(external_scorer)),
      heuristic_(options_.entailment) {
    for (const auto& record : corpus_.taxonomy().records()) {
        for (const ArticleKind kind : {ArticleKind::Full, ArticleKind::Simple}) {
            auto passages = corpus_.passages_for(record.name, kind);
            if (passages.empty()) {
                continue;
            }
            if (options_.granularity == Granularity::Sentence) {
                passages = split_into_sentences(passages);
            }
            indexes_.emplace(std::make_pair(record.name, kind), PassageIndex(std::move(passages), options_.bm25));
        }
    }
}

const PassageIndex* Engine::index_for(std::string_view entity, ArticleKind kind) const {
    auto it = indexes_.find(std::make_pair(std::string(entity), kind));
    return it == indexes_.end() ? nullptr : &it->second;
}

std::vector<RankedPassage> Engine::retrieve(std::string_view entity, ArticleKind kind, std::string_view query,
                                            std::size_t n1, std::size_t n2) const {
    const PassageIndex* index = index_for(entity, kind);
    if (index == nullptr) {
        if (!taxonomy().contains(entity)) {
            throw NotFoundError("unknown entity: " + std::string(entity));
        }
        return {};
    }
    return hybrid_retrieve(*index, query, n1, n2, *reranker_);
}

Classification Engine::classify(const ResolvedQuestion& question, std::string_view passage) const {
    return twentyq::classify(question, passage, external_scorer_.get(), heuristic_);
}

SampleProbe Engine::probe(std::string_view question, std::string_view entity, std::size_t n1) const {
    const auto resolved = resolve_pronouns(question, entity);
    SampleProbe probe;
    probe.entity = std::string(entity);
    auto hits = retrieve(entity, ArticleKind::Full, resolved.resolved, n1, 1);
    if (!hits.empty()) {
        probe.top_score = hits.front().rerank_score.value_or(0.0);
        probe.top = std::move(hits.front());
    }
    probe.classification = classify(resolved, probe.top ? std::string_view(probe.top->passage.text) : "");
    return probe;
}

ScoreStats compute_stats(const ResolvedQuestion& question, const NegativeSampleSet& samples, const Engine& engine,
                         std::size_t n1) {
    std::map<std::string, double> tops;
    for (const auto& entity : samples.entities) {
        const auto resolved = resolve_pronouns(question.original, entity);
        auto hits = engine.retrieve(entity, ArticleKind::Full, resolved.resolved, n1, 1);
        tops[entity] = hits.empty() ? 0.0 : hits.front().rerank_score.value_or(0.0);
    }
    return stats_from_scores(std::move(tops));
}

}  // namespace twentyq
