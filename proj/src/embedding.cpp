#include "twentyq/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "twentyq/errors.hpp"
#include "twentyq/retrieval.hpp"
#include "twentyq/text.hpp"

namespace twentyq {

HashedBucket hash_token(std::string_view token) {
    const std::uint64_t h = fnv1a64(token);
    return HashedBucket{static_cast<std::size_t>(h % kEmbeddingDim), (h >> 63) != 0 ? -1 : 1};
}

EmbeddingVector HashedEmbedding::embed(std::string_view text, const InvertedIndex& corpus_stats) const {
    EmbeddingVector v{std::vector<double>(kEmbeddingDim, 0.0)};
    for (const auto& token : tokenize(text).tokens) {
        const auto [bucket, sign] = hash_token(token);
        v.components[bucket] += sign * corpus_stats.idf(token);
    }
    double norm_sq = 0.0;
    for (const double c : v.components) {
        norm_sq += c * c;
    }
    if (norm_sq > 0.0) {
        const double norm = std::sqrt(norm_sq);
        for (double& c : v.components) {
            c /= norm;
        }
    }
    return v;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw UsageError("cosine: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()) + ")");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        dot += a.components[i] * b.components[i];
        na += a.components[i] * a.components[i];
        nb += b.components[i] * b.components[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace twentyq
