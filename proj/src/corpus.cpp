#include "twentyq/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "twentyq/errors.hpp"
#include "twentyq/text.hpp"

namespace twentyq {

namespace {

constexpr std::array<std::string_view, 10> kCategoryLabels = {
    "amphibians", "birds",         "carnivores", "domestic", "fish",
    "herbivores", "invertibrates", "mammals",    "primates", "reptiles",
};

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        cells.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::array<double, kFeatureCount + 1> feature_point(const EntityRecord& r) {
    std::array<double, kFeatureCount + 1> v{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        v[i] = r.features[i] ? 1.0 : 0.0;
    }
    v[kFeatureCount] = static_cast<double>(r.legs) / kLegNormalizer;
    return v;
}

}  // namespace

std::string_view to_string(Category c) {
    return kCategoryLabels[static_cast<std::size_t>(c)];
}

std::optional<Category> parse_category(std::string_view label) {
    for (std::size_t i = 0; i < kCategoryLabels.size(); ++i) {
        if (kCategoryLabels[i] == label) {
            return static_cast<Category>(i);
        }
    }
    return std::nullopt;
}

std::string_view to_string(ArticleKind k) {
    return k == ArticleKind::Full ? "full" : "simple";
}

Taxonomy::Taxonomy(std::vector<EntityRecord> records) : records_(std::move(records)) {
    std::sort(records_.begin(), records_.end(),
              [](const EntityRecord& a, const EntityRecord& b) { return a.name < b.name; });
    for (std::size_t i = 0; i < records_.size(); ++i) {
        if (records_[i].name.empty()) {
            throw DataError("entity with empty name");
        }
        if (i > 0 && records_[i].name == records_[i - 1].name) {
            throw DataError("duplicate entity name: " + records_[i].name);
        }
    }
}

const EntityRecord* Taxonomy::find(std::string_view name) const {
    auto it = std::lower_bound(records_.begin(), records_.end(), name,
                               [](const EntityRecord& r, std::string_view n) { return r.name < n; });
    if (it == records_.end() || it->name != name) {
        return nullptr;
    }
    return &*it;
}

const EntityRecord& Taxonomy::at(std::string_view name) const {
    const EntityRecord* r = find(name);
    if (r == nullptr) {
        throw NotFoundError("unknown entity: " + std::string(name));
    }
    return *r;
}

std::vector<std::string> Taxonomy::names() const {
    std::vector<std::string> out;
    out.reserve(records_.size());
    for (const auto& r : records_) {
        out.push_back(r.name);
    }
    return out;
}

std::vector<const EntityRecord*> Taxonomy::in_category(Category c) const {
    std::vector<const EntityRecord*> out;
    for (const auto& r : records_) {
        if (r.category == c) {
            out.push_back(&r);
        }
    }
    return out;
}

Corpus::Corpus(Taxonomy taxonomy, std::vector<Passage> passages)
    : taxonomy_(std::move(taxonomy)), passages_(std::move(passages)) {
    std::stable_sort(passages_.begin(), passages_.end(), [](const Passage& a, const Passage& b) {
        return std::tie(a.entity, a.article_kind, a.paragraph_index) <
               std::tie(b.entity, b.article_kind, b.paragraph_index);
    });
    for (std::size_t i = 0; i < passages_.size(); ++i) {
        const auto key = std::make_pair(passages_[i].entity, passages_[i].article_kind);
        auto [it, inserted] = ranges_.try_emplace(key, i, i + 1);
        if (!inserted) {
            it->second.second = i + 1;
        }
    }
}

std::vector<Passage> Corpus::passages_for(std::string_view entity, ArticleKind kind) const {
    auto it = ranges_.find(std::make_pair(std::string(entity), kind));
    if (it == ranges_.end()) {
        return {};
    }
    return {passages_.begin() + static_cast<std::ptrdiff_t>(it->second.first),
            passages_.begin() + static_cast<std::ptrdiff_t>(it->second.second)};
}

bool Corpus::has_article(std::string_view entity, ArticleKind kind) const {
    return ranges_.contains(std::make_pair(std::string(entity), kind));
}

std::vector<Passage> passages_from_article(std::string_view entity, ArticleKind kind,
                                           std::string_view article_text) {
    std::vector<Passage> out;
    std::uint32_t index = 0;
    for (auto& paragraph : segment_paragraphs(article_text)) {
        out.push_back(Passage{std::string(entity), kind, index++, std::nullopt, std::move(paragraph)});
    }
    return out;
}

std::vector<Passage> split_into_sentences(const std::vector<Passage>& paragraphs) {
    std::vector<Passage> out;
    for (const auto& p : paragraphs) {
        std::uint32_t index = 0;
        for (auto& sentence : segment_sentences(p.text)) {
            out.push_back(Passage{p.entity, p.article_kind, p.paragraph_index, index++, std::move(sentence)});
        }
    }
    return out;
}

Corpus ingest_corpus(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) {
        throw DataError("cannot open manifest " + manifest_path.string());
    }
    const auto base = manifest_path.parent_path();

    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("manifest is empty: " + manifest_path.string());
    }
    const auto header = split_csv_row(trim(line));
    std::vector<std::string> expected = {"name", "category", "full_article", "simple_article"};
    for (std::size_t i = 1; i <= kFeatureCount; ++i) {
        expected.push_back("f" + std::to_string(i));
    }
    expected.emplace_back("legs");
    if (header != expected) {
        throw DataError("manifest line 1: unexpected header");
    }

    std::vector<EntityRecord> records;
    std::vector<Passage> passages;
    std::set<std::string> seen;
    std::size_t line_no = 1;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string row = trim(line);
        if (row.empty() || row.starts_with('#')) {
            continue;
        }
        const auto cells = split_csv_row(row);
        const auto where = "manifest line " + std::to_string(line_no) + ": ";
        if (cells.size() != expected.size()) {
            throw DataError(where + "expected " + std::to_string(expected.size()) + " columns, got " +
                            std::to_string(cells.size()));
        }

        EntityRecord rec;
        rec.name = to_lower(cells[0]);
        if (rec.name.empty()) {
            throw DataError(where + "empty entity name");
        }
        if (!seen.insert(rec.name).second) {
            throw DataError(where + "duplicate entity name '" + rec.name + "'");
        }
        auto category = parse_category(cells[1]);
        if (!category) {
            throw DataError(where + "unknown category '" + cells[1] + "'");
        }
        rec.category = *category;
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            const auto& bit = cells[4 + i];
            if (bit != "0" && bit != "1") {
                throw DataError(where + "feature f" + std::to_string(i + 1) + " must be 0 or 1, got '" +
                                bit + "'");
            }
            rec.features[i] = bit == "1";
        }
        const auto& legs = cells.back();
        if (legs.empty() || !std::all_of(legs.begin(), legs.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
            legs.size() > 3) {
            throw DataError(where + "legs must be a small non-negative integer, got '" + legs + "'");
        }
        rec.legs = static_cast<std::uint32_t>(std::stoul(legs));

        if (cells[2].empty()) {
            throw DataError(where + "entity '" + rec.name + "' has no full article");
        }
        rec.full_article = cells[2];
        if (!cells[3].empty()) {
            rec.simple_article = std::filesystem::path(cells[3]);
        }

        auto load = [&](const std::filesystem::path& rel, ArticleKind kind) {
            const auto path = base / rel;
            std::ifstream article(path, std::ios::binary);
            if (!article) {
                throw DataError("entity '" + rec.name + "': missing " + std::string(to_string(kind)) +
                                " article " + path.string());
            }
            auto ps = passages_from_article(rec.name, kind, read_file(path));
            if (ps.empty()) {
                throw DataError("entity '" + rec.name + "': " + std::string(to_string(kind)) +
                                " article is empty: " + path.string());
            }
            passages.insert(passages.end(), std::make_move_iterator(ps.begin()),
                            std::make_move_iterator(ps.end()));
        };
        load(rec.full_article, ArticleKind::Full);
        if (rec.simple_article) {
            load(*rec.simple_article, ArticleKind::Simple);
        }
        records.push_back(std::move(rec));
    }

    return Corpus(Taxonomy(std::move(records)), std::move(passages));
}

double entity_similarity(const EntityRecord& a, const EntityRecord& b) {
    const auto va = feature_point(a);
    const auto vb = feature_point(b);
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) {
        dot += va[i] * vb[i];
        na += va[i] * va[i];
        nb += vb[i] * vb[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

}  // namespace twentyq
