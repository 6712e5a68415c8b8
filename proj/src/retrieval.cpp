#include "twentyq/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "twentyq/embedding.hpp"
#include "twentyq/errors.hpp"

namespace twentyq {

namespace {

void check_params(const Bm25Params& p) {
    if (!(p.k1 > 0.0) || !std::isfinite(p.k1)) {
        throw UsageError("bm25: k1 must be positive");
    }
    if (!(p.b >= 0.0 && p.b <= 1.0)) {
        throw UsageError("bm25: b must lie in [0, 1]");
    }
}

std::set<std::string, std::less<>> distinct_terms(const TokenStream& query) {
    return {query.tokens.begin(), query.tokens.end()};
}

bool rank_before(const RankedPassage& a, const RankedPassage& b) {
    if (a.sparse_score != b.sparse_score) {
        return a.sparse_score > b.sparse_score;
    }
    return a.id < b.id;
}

}  // namespace

InvertedIndex InvertedIndex::build(std::span<const TokenStream> docs, Bm25Params params) {
    check_params(params);
    if (docs.empty()) {
        throw UsageError("build_index: empty passage collection");
    }
    InvertedIndex idx;
    idx.params_ = params;
    idx.doc_lengths_.reserve(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        std::map<std::string_view, std::uint32_t> tf;
        for (const auto& t : docs[d].tokens) {
            ++tf[t];
        }
        for (const auto& [term, count] : tf) {
            auto it = idx.postings_.find(term);
            if (it == idx.postings_.end()) {
                it = idx.postings_.emplace(std::string(term), std::vector<Posting>{}).first;
            }
            it->second.push_back(Posting{static_cast<DocId>(d), count});
        }
        idx.doc_lengths_.push_back(static_cast<std::uint32_t>(docs[d].size()));
    }
    idx.finalize();
    return idx;
}

InvertedIndex InvertedIndex::build(std::span<const Passage> passages, Bm25Params params) {
    std::vector<TokenStream> docs;
    docs.reserve(passages.size());
    for (const auto& p : passages) {
        docs.push_back(tokenize(p.text));
    }
    return build(docs, params);
}

void InvertedIndex::finalize() {
    double total = 0.0;
    for (const auto len : doc_lengths_) {
        total += len;
    }
    avgdl_ = total / static_cast<double>(doc_lengths_.size());
}

std::uint32_t InvertedIndex::doc_length(DocId id) const {
    if (id >= doc_lengths_.size()) {
        throw NotFoundError("unknown passage id " + std::to_string(id));
    }
    return doc_lengths_[id];
}

std::size_t InvertedIndex::document_frequency(std::string_view term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
}

double InvertedIndex::idf(std::string_view term) const {
    const double n = static_cast<double>(document_frequency(term));
    const double N = static_cast<double>(doc_count());
    return std::log(1.0 + (N - n + 0.5) / (n + 0.5));
}

double InvertedIndex::score(const TokenStream& query, DocId doc) const {
    const double len = doc_length(doc);
    // avgdl is 0 only when every document is empty, in which case no term
    // matches and the length norm is never used.
    const double norm = avgdl_ > 0.0 ? len / avgdl_ : 0.0;
    double total = 0.0;
    for (const auto& term : distinct_terms(query)) {
        auto it = postings_.find(term);
        if (it == postings_.end()) {
            continue;
        }
        const auto& list = it->second;
        auto p = std::lower_bound(list.begin(), list.end(), doc,
                                  [](const Posting& post, DocId d) { return post.doc < d; });
        if (p == list.end() || p->doc != doc) {
            continue;
        }
        const double f = p->tf;
        const double k1 = params_.k1;
        total += idf(term) * f * (k1 + 1.0) / (f + k1 * (1.0 - params_.b + params_.b * norm));
    }
    return total;
}

std::vector<std::pair<DocId, double>> InvertedIndex::score_all(const TokenStream& query) const {
    std::unordered_map<DocId, double> acc;
    const double k1 = params_.k1;
    const double b = params_.b;
    for (const auto& term : distinct_terms(query)) {
        auto it = postings_.find(term);
        if (it == postings_.end()) {
            continue;
        }
        const double w = idf(term);
        for (const auto& post : it->second) {
            const double norm = doc_lengths_[post.doc] / avgdl_;
            const double f = post.tf;
            acc[post.doc] += w * f * (k1 + 1.0) / (f + k1 * (1.0 - b + b * norm));
        }
    }
    std::vector<std::pair<DocId, double>> out(acc.begin(), acc.end());
    std::sort(out.begin(), out.end());
    return out;
}

nlohmann::json InvertedIndex::to_json() const {
    nlohmann::json postings = nlohmann::json::object();
    for (const auto& [term, list] : postings_) {
        auto& arr = postings[term] = nlohmann::json::array();
        for (const auto& p : list) {
            arr.push_back({p.doc, p.tf});
        }
    }
    return {
        {"version", 1},
        {"params", {{"k1", params_.k1}, {"b", params_.b}}},
        {"doc_lengths", doc_lengths_},
        {"postings", std::move(postings)},
    };
}

InvertedIndex InvertedIndex::from_json(const nlohmann::json& doc) {
    try {
        if (!doc.is_object() || doc.value("version", 0) != 1) {
            throw DataError("index: unsupported or missing version");
        }
        InvertedIndex idx;
        const auto& params = doc.at("params");
        idx.params_.k1 = params.at("k1").get<double>();
        idx.params_.b = params.at("b").get<double>();
        try {
            check_params(idx.params_);
        } catch (const UsageError& e) {
            throw DataError(std::string("index: ") + e.what());
        }

        idx.doc_lengths_ = doc.at("doc_lengths").get<std::vector<std::uint32_t>>();
        if (idx.doc_lengths_.empty()) {
            throw DataError("index: no documents");
        }
        const std::size_t n = idx.doc_lengths_.size();
        std::vector<std::uint64_t> tf_sum(n, 0);

        for (const auto& [term, list] : doc.at("postings").items()) {
            if (term.empty() || !list.is_array() || list.empty()) {
                throw DataError("index: malformed posting list for '" + term + "'");
            }
            std::vector<Posting> postings;
            for (const auto& entry : list) {
                if (!entry.is_array() || entry.size() != 2) {
                    throw DataError("index: malformed posting in '" + term + "'");
                }
                Posting p{entry[0].get<DocId>(), entry[1].get<std::uint32_t>()};
                if (p.doc >= n) {
                    throw DataError("index: posting for '" + term + "' references unknown passage " +
                                    std::to_string(p.doc));
                }
                if (p.tf == 0 || (!postings.empty() && postings.back().doc >= p.doc)) {
                    throw DataError("index: posting list for '" + term + "' is not strictly increasing");
                }
                tf_sum[p.doc] += p.tf;
                postings.push_back(p);
            }
            idx.postings_.emplace(term, std::move(postings));
        }
        for (std::size_t d = 0; d < n; ++d) {
            if (tf_sum[d] != idx.doc_lengths_[d]) {
                throw DataError("index: doc_lengths[" + std::to_string(d) + "] disagrees with postings");
            }
        }
        idx.finalize();
        return idx;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("index: ") + e.what());
    }
}

PassageIndex::PassageIndex(std::vector<Passage> passages, Bm25Params params)
    : passages_(std::move(passages)), index_(InvertedIndex::build(std::span<const Passage>(passages_), params)) {}

std::vector<RankedPassage> retrieve_topk(const PassageIndex& index, const TokenStream& query, std::size_t k) {
    if (k == 0) {
        throw UsageError("retrieve_topk: k must be positive");
    }
    std::vector<RankedPassage> ranked;
    for (const auto& [id, s] : index.index().score_all(query)) {
        if (s > 0.0) {
            ranked.push_back(RankedPassage{id, index.passages()[id], s, std::nullopt});
        }
    }
    const std::size_t keep = std::min(k, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(),
                      rank_before);
    ranked.resize(keep);
    return ranked;
}

std::vector<RankedPassage> hybrid_retrieve(const PassageIndex& index, std::string_view query_text,
                                           std::size_t n1, std::size_t n2,
                                           const EmbeddingProvider& reranker) {
    if (n1 == 0 || n2 == 0) {
        throw UsageError("hybrid_retrieve: n1 and n2 must be positive");
    }
    if (n2 > n1) {
        throw UsageError("hybrid_retrieve: n2 must not exceed n1");
    }
    auto candidates = retrieve_topk(index, tokenize(query_text), n1);
    if (candidates.empty()) {
        return candidates;
    }
    const auto query_vec = reranker.embed(query_text, index.index());
    for (auto& c : candidates) {
        c.rerank_score = cosine(query_vec, reranker.embed(c.passage.text, index.index()));
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const RankedPassage& a, const RankedPassage& b) {
        if (*a.rerank_score != *b.rerank_score) {
            return *a.rerank_score > *b.rerank_score;
        }
        return rank_before(a, b);
    });
    candidates.resize(std::min(n2, candidates.size()));
    return candidates;
}

}  // namespace twentyq
