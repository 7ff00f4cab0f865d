#pragma once

// Client for an external embedding service.
//
// Wire contract (JSON over HTTP POST to the endpoint URL):
//   request   {"model": "<model name>", "input": "<text>"}
//   response  either {"embedding": [f0, f1, ...]}
//             or     {"data": [{"embedding": [f0, f1, ...]}, ...]}   (first element used)
// Any 2xx status is success. Vectors are re-normalized on receipt and must match the
// configured dimension when one is set.

#include "embedding.hpp"
#include "errors.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>

namespace agentmem {

struct RemoteEmbedderConfig {
    std::string endpoint; // http://host[:port]/path
    std::string model = "text-embedding-3-large";
    std::chrono::milliseconds timeout{10000};
    std::size_t dimension = 0; // 0 = accept whatever the provider returns
    unsigned retries = 0;

    /// Overrides fields from EMBED_ENDPOINT, EMBED_MODEL and EMBED_TIMEOUT_MS when set.
    void apply_environment()
    {
        if (const char* v = std::getenv("EMBED_ENDPOINT"); v && *v) endpoint = v;
        if (const char* v = std::getenv("EMBED_MODEL"); v && *v) model = v;
        if (const char* v = std::getenv("EMBED_TIMEOUT_MS"); v && *v) {
            char* end = nullptr;
            long long ms = std::strtoll(v, &end, 10);
            if (*end != '\0' || ms <= 0) throw ConfigError("EMBED_TIMEOUT_MS must be a positive integer");
            timeout = std::chrono::milliseconds(ms);
        }
    }
};

class RemoteEmbedder {
public:
    explicit RemoteEmbedder(RemoteEmbedderConfig config) : config_(std::move(config))
    {
        auto scheme_end = config_.endpoint.find("://");
        if (scheme_end == std::string::npos) throw ConfigError("embedding endpoint must be an absolute URL");
        auto path_start = config_.endpoint.find('/', scheme_end + 3);
        if (path_start == std::string::npos) {
            origin_ = config_.endpoint;
            path_ = "/";
        } else {
            origin_ = config_.endpoint.substr(0, path_start);
            path_ = config_.endpoint.substr(path_start);
        }
        if (config_.endpoint.compare(0, scheme_end, "http") != 0)
            throw ConfigError("only http:// embedding endpoints are supported");
    }

    const RemoteEmbedderConfig& config() const noexcept { return config_; }

    EmbeddingVector operator()(std::string_view text) const
    {
        for (unsigned attempt = 0;; ++attempt) {
            try {
                return request_once(text);
            } catch (const EmbeddingError& e) {
                bool transient = e.kind() == EmbeddingError::Kind::network || e.kind() == EmbeddingError::Kind::timeout;
                if (!transient || attempt >= config_.retries) throw;
            }
        }
    }

private:
    EmbeddingVector request_once(std::string_view text) const
    {
        httplib::Client client(origin_);
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
        auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());

        nlohmann::json body = {{"model", config_.model}, {"input", std::string(text)}};
        auto res = client.Post(path_, body.dump(), "application/json");
        if (!res) {
            auto err = res.error();
            auto kind = (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout)
                            ? EmbeddingError::Kind::timeout
                            : EmbeddingError::Kind::network;
            throw EmbeddingError(kind, "embedding request failed: " + httplib::to_string(err));
        }
        if (res->status < 200 || res->status >= 300)
            throw EmbeddingError(EmbeddingError::Kind::status,
                                 "embedding service returned HTTP " + std::to_string(res->status));

        std::vector<float> values;
        try {
            auto doc = nlohmann::json::parse(res->body);
            const nlohmann::json* arr = nullptr;
            if (doc.is_object() && doc.contains("embedding")) {
                arr = &doc["embedding"];
            } else if (doc.is_object() && doc.contains("data") && doc["data"].is_array() && !doc["data"].empty()) {
                arr = &doc["data"][0].at("embedding");
            }
            if (!arr || !arr->is_array()) throw EmbeddingError(EmbeddingError::Kind::malformed, "no embedding array in response");
            values.reserve(arr->size());
            for (const auto& v : *arr) {
                if (!v.is_number()) throw EmbeddingError(EmbeddingError::Kind::malformed, "non-numeric embedding entry");
                values.push_back(v.get<float>());
            }
        } catch (const nlohmann::json::exception& e) {
            throw EmbeddingError(EmbeddingError::Kind::malformed, std::string("malformed response body: ") + e.what());
        }
        if (config_.dimension && values.size() != config_.dimension)
            throw EmbeddingError(EmbeddingError::Kind::dimension, "expected dimension " + std::to_string(config_.dimension) +
                                                                      ", got " + std::to_string(values.size()));
        return EmbeddingVector::normalized(std::move(values));
    }

    RemoteEmbedderConfig config_;
    std::string origin_;
    std::string path_;
};

inline EmbeddingVector embed_remote(const std::string& endpoint, const std::string& model, std::string_view text)
{
    RemoteEmbedderConfig cfg;
    cfg.endpoint = endpoint;
    cfg.model = model;
    return RemoteEmbedder(cfg)(text);
}

} // namespace agentmem
