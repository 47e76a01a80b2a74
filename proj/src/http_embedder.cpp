#include <cmath>

#include "hoprag/corpus_index.hpp"
#include "hoprag/error.hpp"
#include "hoprag/jsonl.hpp"
#include "http_post.hpp"

namespace hoprag {

HttpEmbedder::HttpEmbedder(Options options) : options_(std::move(options)) {
    if (options_.url.empty()) throw Error(Errc::Config, "embedding endpoint URL is empty");
    if (options_.dimension == 0) throw Error(Errc::Config, "embedding endpoint needs a dimension");
}

std::string HttpEmbedder::spec() const {
    return "http:" + options_.model + ":" + std::to_string(options_.dimension);
}

EmbeddingVector HttpEmbedder::embed(std::string_view text) const {
    if (text.empty()) throw Error(Errc::EmptyText, "cannot embed empty text");
    Json body = {{"model", options_.model}, {"input", std::string(text)}};
    std::vector<std::pair<std::string, std::string>> headers;
    if (!options_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + options_.api_key);

    std::string last_error;
    for (int attempt = 0; attempt <= options_.retries; ++attempt) {
        auto res = detail::http_post_json(options_.url, body.dump(), headers, options_.timeout_s);
        if (res.status == 0) {
            last_error = res.transport_error;
            continue;
        }
        if (res.status != 200) {
            last_error = "HTTP " + std::to_string(res.status);
            if (res.status >= 400 && res.status < 500 && res.status != 429) break;
            continue;
        }
        try {
            auto parsed = Json::parse(res.body);
            EmbeddingVector v;
            v.values = parsed.at("data").at(0).at("embedding").get<std::vector<double>>();
            if (v.dimension() != options_.dimension) {
                throw Error(Errc::ProviderFailure, "endpoint returned dimension " + std::to_string(v.dimension()));
            }
            double n = v.norm();
            if (n == 0.0) throw Error(Errc::ProviderFailure, "endpoint returned a zero vector");
            for (double& x : v.values) x /= n;
            return v;
        } catch (const Json::exception& e) {
            last_error = e.what();
        }
    }
    throw Error(Errc::ProviderFailure, "embedding endpoint failed: " + last_error);
}

}  // namespace hoprag
