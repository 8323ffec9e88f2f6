#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qzero/embeddings.hpp"

namespace qzero {

/// Produces one embedding per input text, in input order.
class SentenceEmbedder {
public:
    virtual ~SentenceEmbedder() = default;
    virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const = 0;
};

struct RemoteEmbedderConfig {
    std::string base_url;  ///< e.g. "http://127.0.0.1:8080"; requests go to {base_url}/v1/embeddings
    std::string model_name;
    std::chrono::milliseconds timeout{30'000};
    std::size_t max_in_flight = 4;
    std::optional<std::string> auth_token;
    std::size_t batch_size = 64;
    std::size_t max_attempts = 3;
    std::chrono::milliseconds initial_backoff{200};
};

/// Embeds `texts` over the embeddings wire protocol.
///
/// Texts are sent in batches of `batch_size` with at most `max_in_flight`
/// requests outstanding. Responses are reassembled by their `index` field.
/// Transport failures and 5xx responses are retried up to `max_attempts`
/// times with exponential backoff; 4xx responses fail immediately.
std::vector<EmbeddingVector> embed_texts_remote(const RemoteEmbedderConfig& config, std::span<const std::string> texts);

class RemoteEmbedder final : public SentenceEmbedder {
public:
    explicit RemoteEmbedder(RemoteEmbedderConfig config);

    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override {
        return embed_texts_remote(config_, texts);
    }

    const RemoteEmbedderConfig& config() const noexcept { return config_; }

private:
    RemoteEmbedderConfig config_;
};

}  // namespace qzero
