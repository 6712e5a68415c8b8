#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace twentyq {

inline constexpr std::size_t kFeatureCount = 16;
inline constexpr double kLegNormalizer = 8.0;

enum class Category {
    Amphibians,
    Birds,
    Carnivores,
    Domestic,
    Fish,
    Herbivores,
    Invertibrates,
    Mammals,
    Primates,
    Reptiles,
};

inline constexpr std::array<Category, 10> kAllCategories = {
    Category::Amphibians, Category::Birds,     Category::Carnivores,    Category::Domestic,
    Category::Fish,       Category::Herbivores, Category::Invertibrates, Category::Mammals,
    Category::Primates,   Category::Reptiles,
};

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view label);

enum class ArticleKind { Full, Simple };

std::string_view to_string(ArticleKind k);

using FeatureVector = std::array<bool, kFeatureCount>;

struct EntityRecord {
    std::string name;
    Category category = Category::Mammals;
    FeatureVector features{};
    std::uint32_t legs = 0;
    std::filesystem::path full_article;
    std::optional<std::filesystem::path> simple_article;

    bool operator==(const EntityRecord&) const = default;
};

struct Passage {
    std::string entity;
    ArticleKind article_kind = ArticleKind::Full;
    std::uint32_t paragraph_index = 0;
    std::optional<std::uint32_t> sentence_index;
    std::string text;

    bool operator==(const Passage&) const = default;
};

/// Entity records keyed by canonical (lowercase) name.
class Taxonomy {
  public:
    Taxonomy() = default;
    explicit Taxonomy(std::vector<EntityRecord> records);

    const EntityRecord& at(std::string_view name) const;
    const EntityRecord* find(std::string_view name) const;
    bool contains(std::string_view name) const { return find(name) != nullptr; }

    /// Records in name order.
    const std::vector<EntityRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    std::vector<std::string> names() const;
    std::vector<const EntityRecord*> in_category(Category c) const;

  private:
    std::vector<EntityRecord> records_;
};

/// Everything ingested from a manifest. Immutable once built.
class Corpus {
  public:
    Corpus(Taxonomy taxonomy, std::vector<Passage> passages);

    const Taxonomy& taxonomy() const { return taxonomy_; }
    const std::vector<Passage>& passages() const { return passages_; }

    /// Paragraph passages of one article, in document order.
    std::vector<Passage> passages_for(std::string_view entity, ArticleKind kind) const;
    bool has_article(std::string_view entity, ArticleKind kind) const;

  private:
    Taxonomy taxonomy_;
    std::vector<Passage> passages_;
    std::map<std::pair<std::string, ArticleKind>, std::pair<std::size_t, std::size_t>> ranges_;
};

/// Reads a manifest CSV (header `name,category,full_article,simple_article,
/// f1..f16,legs`) and the articles it references. Article paths are
/// resolved relative to the manifest's directory. Throws DataError.
Corpus ingest_corpus(const std::filesystem::path& manifest_path);

/// Passages of one article at paragraph granularity.
std::vector<Passage> passages_from_article(std::string_view entity, ArticleKind kind,
                                           std::string_view article_text);

/// Re-splits paragraph passages into one passage per sentence.
std::vector<Passage> split_into_sentences(const std::vector<Passage>& paragraphs);

/// Cosine over the 16 traits plus legs/8, clamped to [0, 1]. Zero vectors
/// give 0.
double entity_similarity(const EntityRecord& a, const EntityRecord& b);

}  // namespace twentyq
