#pragma once

#include <chrono>
#include <optional>
#include <string>

#include <json.hpp>

#include "twentyq/question.hpp"

namespace twentyq {

/// Parses a classify response body ({"label": "yes"|"no", "confidence":
/// number in [0, 1]}). nullopt when the body does not match.
std::optional<BoolVerdict> parse_classify_response(const std::string& body);

nlohmann::json make_classify_request(const ResolvedQuestion& question, std::string_view passage);

/// Client for an external boolean scorer: POST {base_url}/v1/classify. The
/// base URL may carry a path prefix ("http://host:8000/scorer").
/// Any transport failure, timeout, non-200 status or malformed body yields
/// nullopt so the caller falls back to the heuristic.
class RemoteScorer final : public ScorerProvider {
  public:
    explicit RemoteScorer(std::string base_url,
                          std::chrono::milliseconds timeout = std::chrono::milliseconds(2000));

    std::optional<BoolVerdict> classify(const ResolvedQuestion& question, std::string_view passage) const override;
    std::string_view name() const override { return "remote"; }

    const std::string& base_url() const { return base_url_; }

  private:
    std::string base_url_;
    std::string origin_;  // scheme://host[:port]
    std::string prefix_;  // path before /v1/classify, no trailing slash
    std::chrono::milliseconds timeout_;
};

}  // namespace twentyq
