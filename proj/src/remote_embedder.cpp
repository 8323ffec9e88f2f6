#include "qzero/remote_embedder.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace qzero {

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;    // prefix + /v1/embeddings
};

Endpoint parse_endpoint(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) throw ContractError("base_url needs a scheme: " + base_url);
    const auto scheme = base_url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw ContractError("unsupported URL scheme '" + scheme + "'");
    const auto path_start = base_url.find('/', scheme_end + 3);
    Endpoint ep;
    ep.origin = base_url.substr(0, path_start);
    std::string prefix = path_start == std::string::npos ? "" : base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    ep.path = prefix + "/v1/embeddings";
    if (ep.origin.size() <= scheme_end + 3) throw ContractError("base_url has no host: " + base_url);
    return ep;
}

bool retryable_status(int status) { return status >= 500; }

// Parses one response body into vectors ordered by the `index` field.
std::vector<EmbeddingVector> parse_response(const std::string& body, std::size_t expected) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw RemoteError(std::string("embedding response is not JSON: ") + e.what(), 200);
    }
    const auto data = doc.find("data");
    if (data == doc.end() || !data->is_array()) throw RemoteError("embedding response lacks a 'data' array", 200);
    if (data->size() != expected) {
        throw RemoteError("embedding response has " + std::to_string(data->size()) + " items for " +
                              std::to_string(expected) + " inputs",
                          200);
    }

    std::vector<EmbeddingVector> out(expected);
    std::vector<bool> filled(expected, false);
    Eigen::Index dim = -1;
    for (const auto& item : *data) {
        const auto index = item.find("index");
        const auto embedding = item.find("embedding");
        if (index == item.end() || !index->is_number_unsigned()) {
            throw RemoteError("embedding item lacks a non-negative integer 'index'", 200);
        }
        if (embedding == item.end() || !embedding->is_array() || embedding->empty()) {
            throw RemoteError("embedding item lacks a non-empty 'embedding' array", 200);
        }
        const auto i = index->get<std::size_t>();
        if (i >= expected || filled[i]) throw RemoteError("embedding index " + std::to_string(i) + " invalid or repeated", 200);
        const auto n = static_cast<Eigen::Index>(embedding->size());
        if (dim >= 0 && n != dim) {
            throw RemoteError("embedding dimensions disagree within response (" + std::to_string(dim) + " vs " +
                                  std::to_string(n) + ")",
                              200);
        }
        dim = n;
        EmbeddingVector v(n);
        for (Eigen::Index k = 0; k < n; ++k) {
            const auto& x = (*embedding)[static_cast<std::size_t>(k)];
            if (!x.is_number()) throw RemoteError("non-numeric embedding value", 200);
            v[k] = x.get<double>();
            if (!std::isfinite(v[k])) throw RemoteError("non-finite embedding value", 200);
        }
        out[i] = std::move(v);
        filled[i] = true;
    }
    return out;
}

std::vector<EmbeddingVector> post_batch(const RemoteEmbedderConfig& config, const Endpoint& ep,
                                        std::span<const std::string> batch) {
    httplib::Client client(ep.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (config.auth_token) headers.emplace("Authorization", "Bearer " + *config.auth_token);
    const nlohmann::json request = {{"model", config.model_name},
                                    {"input", std::vector<std::string>(batch.begin(), batch.end())}};
    const std::string body = request.dump();

    auto backoff = config.initial_backoff;
    std::string last_error;
    int last_status = 0;
    const std::size_t attempts = std::max<std::size_t>(1, config.max_attempts);
    for (std::size_t attempt = 1; attempt <= attempts; ++attempt) {
        auto res = client.Post(ep.path, headers, body, "application/json");
        if (!res) {
            last_status = 0;
            last_error = "transport error: " + httplib::to_string(res.error());
        } else if (res->status >= 200 && res->status < 300) {
            return parse_response(res->body, batch.size());
        } else if (!retryable_status(res->status)) {
            throw RemoteError("embedding request rejected with HTTP " + std::to_string(res->status) + ": " +
                                  res->body.substr(0, 512),
                              res->status);
        } else {
            last_status = res->status;
            last_error = "HTTP " + std::to_string(res->status);
        }
        if (attempt < attempts) {
            spdlog::warn("embedding request failed ({}), retrying in {} ms", last_error, backoff.count());
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw RemoteError("embedding request failed after " + std::to_string(attempts) + " attempts: " + last_error,
                      last_status);
}

}  // namespace

std::vector<EmbeddingVector> embed_texts_remote(const RemoteEmbedderConfig& config, std::span<const std::string> texts) {
    if (texts.empty()) throw ContractError("embed_texts_remote: no texts");
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (texts[i].empty()) throw ContractError("embed_texts_remote: text " + std::to_string(i) + " is empty");
    }
    if (config.max_in_flight < 1) throw ContractError("max_in_flight must be >= 1");
    const Endpoint ep = parse_endpoint(config.base_url);

    const std::size_t batch_size = std::max<std::size_t>(1, config.batch_size);
    const std::size_t num_batches = (texts.size() + batch_size - 1) / batch_size;
    std::vector<EmbeddingVector> out(texts.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    const auto worker = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= num_batches) return;
            {
                std::lock_guard lock(failure_mutex);
                if (failure) return;
            }
            const std::size_t begin = b * batch_size;
            const std::size_t len = std::min(batch_size, texts.size() - begin);
            try {
                auto vectors = post_batch(config, ep, texts.subspan(begin, len));
                std::move(vectors.begin(), vectors.end(), out.begin() + static_cast<std::ptrdiff_t>(begin));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    const std::size_t workers = std::min(config.max_in_flight, num_batches);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    const Eigen::Index dim = out.front().size();
    for (const auto& v : out) {
        if (v.size() != dim) throw RemoteError("embedding dimensions disagree across batches", 200);
    }
    return out;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config) : config_(std::move(config)) {
    if (config_.max_in_flight < 1) throw ContractError("max_in_flight must be >= 1");
    if (config_.model_name.empty()) throw ContractError("remote embedder needs a model name");
    parse_endpoint(config_.base_url);
}

}  // namespace qzero
