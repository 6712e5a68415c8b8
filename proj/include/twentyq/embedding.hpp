#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace twentyq {

class InvertedIndex;

inline constexpr std::size_t kEmbeddingDim = 1024;

struct EmbeddingVector {
    std::vector<double> components;

    std::size_t dim() const { return components.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

/// Dense text representation used by the rerank stage. Implementations must
/// be safe to call concurrently.
class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;
    virtual EmbeddingVector embed(std::string_view text, const InvertedIndex& corpus_stats) const = 0;
};

struct HashedBucket {
    std::size_t bucket = 0;
    int sign = 1;
};

/// FNV-1a bucket and sign for one token.
HashedBucket hash_token(std::string_view token);

/// Signed feature hashing of IDF-weighted tokens into 1024 buckets, L2
/// normalised. Bit-identical across platforms.
class HashedEmbedding final : public EmbeddingProvider {
  public:
    EmbeddingVector embed(std::string_view text, const InvertedIndex& corpus_stats) const override;
};

/// Throws UsageError on a dimension mismatch; 0 when either side is zero.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace twentyq
