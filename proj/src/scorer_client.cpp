#include "twentyq/scorer_client.hpp"

#include <cmath>
#include <iostream>

#include <httplib.h>

namespace twentyq {

std::optional<BoolVerdict> parse_classify_response(const std::string& body) {
    const auto doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        return std::nullopt;
    }
    auto label = doc.find("label");
    auto confidence = doc.find("confidence");
    if (label == doc.end() || !label->is_string() || confidence == doc.end() || !confidence->is_number()) {
        return std::nullopt;
    }
    const auto l = label->get<std::string>();
    const double c = confidence->get<double>();
    if ((l != "yes" && l != "no") || !std::isfinite(c) || c < 0.0 || c > 1.0) {
        return std::nullopt;
    }
    return BoolVerdict{l == "yes" ? BoolLabel::Yes : BoolLabel::No, c};
}

nlohmann::json make_classify_request(const ResolvedQuestion& question, std::string_view passage) {
    return {{"question", question.resolved}, {"passage", std::string(passage)}};
}

RemoteScorer::RemoteScorer(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
    while (!base_url_.empty() && base_url_.back() == '/') {
        base_url_.pop_back();
    }
    const auto scheme = base_url_.find("://");
    const auto path = base_url_.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    origin_ = base_url_.substr(0, path);
    prefix_ = path == std::string::npos ? std::string() : base_url_.substr(path);
}

std::optional<BoolVerdict> RemoteScorer::classify(const ResolvedQuestion& question, std::string_view passage) const {
    // One client per call keeps the scorer safe to share across threads.
    httplib::Client client(origin_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    const auto body = make_classify_request(question, passage).dump();
    auto res = client.Post(prefix_ + "/v1/classify", body, "application/json");
    if (!res) {
        std::cerr << "scorer: " << base_url_ << " unreachable (" << httplib::to_string(res.error())
                  << "), using heuristic\n";
        return std::nullopt;
    }
    if (res->status != 200) {
        std::cerr << "scorer: HTTP " << res->status << " from " << base_url_ << ", using heuristic\n";
        return std::nullopt;
    }
    auto verdict = parse_classify_response(res->body);
    if (!verdict) {
        std::cerr << "scorer: malformed response from " << base_url_ << ", using heuristic\n";
    }
    return verdict;
}

}  // namespace twentyq
