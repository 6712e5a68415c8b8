#include "twentyq/config.hpp"

#include <charconv>
#include <fstream>

#include "twentyq/errors.hpp"
#include "twentyq/text.hpp"

namespace twentyq {

namespace {

std::size_t parse_size(std::string_view key, std::string_view v) {
    std::size_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw UsageError(std::string(key) + ": expected a non-negative integer, got '" + std::string(v) + "'");
    }
    return out;
}

double parse_real(std::string_view key, std::string_view v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(std::string(v), &used);
        if (used != v.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return d;
    } catch (const std::exception&) {
        throw UsageError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
    }
}

bool parse_bool(std::string_view key, std::string_view v) {
    const auto s = to_lower(v);
    if (s == "true" || s == "1" || s == "yes" || s == "on") {
        return true;
    }
    if (s == "false" || s == "0" || s == "no" || s == "off") {
        return false;
    }
    throw UsageError(std::string(key) + ": expected a boolean, got '" + std::string(v) + "'");
}

}  // namespace

void apply_setting(AppConfig& config, std::string_view key, std::string_view value) {
    auto& g = config.game;
    if (key == "n1") {
        g.n1 = parse_size(key, value);
    } else if (key == "n2") {
        g.n2 = parse_size(key, value);
    } else if (key == "w") {
        g.w = parse_size(key, value);
    } else if (key == "theta_a") {
        g.theta_a = parse_real(key, value);
    } else if (key == "theta_d") {
        g.theta_d = parse_real(key, value);
    } else if (key == "n_p") {
        g.n_p = parse_size(key, value);
    } else if (key == "max_questions") {
        g.max_questions = parse_size(key, value);
    } else if (key == "seed") {
        g.seed = parse_size(key, value);
    } else if (key == "corpus" || key == "manifest") {
        config.manifest = std::string(value);
    } else if (key == "scorer_url") {
        config.scorer_url = value.empty() ? std::nullopt : std::optional<std::string>(value);
    } else if (key == "scorer_timeout_ms") {
        config.scorer_timeout = std::chrono::milliseconds(parse_size(key, value));
    } else if (key == "bind") {
        config.bind = std::string(value);
    } else if (key == "redact_evidence") {
        config.redact_evidence = parse_bool(key, value);
    } else if (key == "transcript_dir") {
        config.transcript_dir = std::filesystem::path(std::string(value));
    } else if (key == "granularity") {
        if (value == "paragraph") {
            config.engine.granularity = Granularity::Paragraph;
        } else if (value == "sentence") {
            config.engine.granularity = Granularity::Sentence;
        } else {
            throw UsageError("granularity: expected 'paragraph' or 'sentence'");
        }
    } else if (key == "k1") {
        config.engine.bm25.k1 = parse_real(key, value);
    } else if (key == "b") {
        config.engine.bm25.b = parse_real(key, value);
    } else if (key == "overlap_threshold") {
        config.engine.entailment.overlap_threshold = parse_real(key, value);
    } else {
        throw UsageError("unknown setting '" + std::string(key) + "'");
    }
}

AppConfig load_config_file(const std::filesystem::path& path, AppConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open config file " + path.string());
    }
    const auto manifest_before = base.manifest;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }
        const auto stripped = trim(line);
        if (stripped.empty()) {
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path.string() + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        const auto key = trim(std::string_view(stripped).substr(0, eq));
        const auto value = trim(std::string_view(stripped).substr(eq + 1));
        try {
            apply_setting(base, key, value);
        } catch (const UsageError& e) {
            throw UsageError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    // Relative corpus paths are relative to the config file.
    if (base.manifest != manifest_before && base.manifest.is_relative()) {
        base.manifest = path.parent_path() / base.manifest;
    }
    return base;
}

}  // namespace twentyq
