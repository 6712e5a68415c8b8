#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "twentyq/corpus.hpp"
#include "twentyq/engine.hpp"
#include "twentyq/question.hpp"

namespace testing {

inline const std::filesystem::path kDataDir = TWENTYQ_TEST_DATA_DIR;
inline const std::filesystem::path kManifest = kDataDir / "corpus" / "manifest.csv";

inline twentyq::FeatureVector bits(std::string_view s) {
    twentyq::FeatureVector f{};
    for (std::size_t i = 0; i < f.size() && i < s.size(); ++i) {
        f[i] = s[i] == '1';
    }
    return f;
}

inline twentyq::EntityRecord record(std::string name, twentyq::Category c, std::string_view feature_bits,
                                    std::uint32_t legs = 0) {
    twentyq::EntityRecord r;
    r.name = std::move(name);
    r.category = c;
    r.features = bits(feature_bits);
    r.legs = legs;
    r.full_article = r.name + ".txt";
    return r;
}

/// Temporary directory removed on destruction.
class TempDir {
  public:
    TempDir() {
        static std::atomic<int> counter{0};
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                ("twentyq-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path write(const std::string& rel, const std::string& content) const {
        const auto p = path_ / rel;
        std::filesystem::create_directories(p.parent_path());
        std::ofstream(p, std::ios::binary) << content;
        return p;
    }

  private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Two entities per category, all with a one-paragraph article
/// "<name> zzz". Every article scores the same for "Is it zzz?", so the
/// target is always competitive (rule R3).
inline twentyq::Corpus uniform_corpus(const std::map<std::string, std::string>& feature_rows) {
    std::vector<twentyq::EntityRecord> records;
    std::vector<twentyq::Passage> passages;
    std::size_t i = 0;
    for (const auto& [name, row] : feature_rows) {
        const auto category = twentyq::kAllCategories[(i++ / 2) % twentyq::kAllCategories.size()];
        records.push_back(record(name, category, row));
        passages.push_back(twentyq::Passage{name, twentyq::ArticleKind::Full, 0, std::nullopt, name + " zzz"});
    }
    return twentyq::Corpus(twentyq::Taxonomy(std::move(records)), std::move(passages));
}

/// Scorer answering from a per-entity script; entities not listed get NO.
class ScriptedScorer final : public twentyq::ScorerProvider {
  public:
    explicit ScriptedScorer(std::map<std::string, twentyq::BoolLabel> script) : script_(std::move(script)) {}

    std::optional<twentyq::BoolVerdict> classify(const twentyq::ResolvedQuestion& q,
                                                 std::string_view) const override {
        auto it = script_.find(q.entity);
        const auto label = it == script_.end() ? twentyq::BoolLabel::No : it->second;
        return twentyq::BoolVerdict{label, 1.0};
    }
    std::string_view name() const override { return "scripted"; }

  private:
    std::map<std::string, twentyq::BoolLabel> script_;
};

/// Loads the bundled corpus once per process.
inline std::shared_ptr<const twentyq::Engine> bundled_engine() {
    static auto engine = std::make_shared<const twentyq::Engine>(twentyq::ingest_corpus(kManifest));
    return engine;
}

}  // namespace testing
