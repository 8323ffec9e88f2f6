#include <catch_amalgamated.hpp>

#include <atomic>
#include <mutex>
#include <set>

#include "qzero/error.hpp"
#include "qzero/remote_embedder.hpp"
#include "test_support.hpp"

using namespace qzero;
using qzero::testing::MockEmbeddingServer;
using Catch::Matchers::WithinAbs;

namespace {

RemoteEmbedderConfig config_for(const MockEmbeddingServer& server) {
    RemoteEmbedderConfig c;
    c.base_url = server.base_url();
    c.model_name = "mock-model";
    c.timeout = std::chrono::milliseconds(5000);
    c.initial_backoff = std::chrono::milliseconds(1);
    return c;
}

}  // namespace

TEST_CASE("responses are reordered by index", "[remote]") {
    MockEmbeddingServer server(MockEmbeddingServer::shuffled(6));
    const std::vector<std::string> texts = {"alpha", "beta", "gamma", "delta"};
    const auto out = embed_texts_remote(config_for(server), texts);
    REQUIRE(out.size() == texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const auto expected = MockEmbeddingServer::canned_vector(texts[i], 6);
        REQUIRE(out[i].size() == 6);
        for (int d = 0; d < 6; ++d) CHECK(out[i](d) == expected[d]);
        CHECK_THAT(cosine(out[i], out[i]), WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("batching and bounded concurrency keep input order", "[remote]") {
    std::atomic<int> in_flight{0}, peak{0};
    std::mutex m;
    std::multiset<std::size_t> batch_sizes;
    MockEmbeddingServer server([&](const nlohmann::json& req, httplib::Response& res) {
        const int now = ++in_flight;
        for (int p = peak; now > p && !peak.compare_exchange_weak(p, now);) {}
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        {
            std::lock_guard lock(m);
            batch_sizes.insert(req.at("input").size());
        }
        MockEmbeddingServer::shuffled(3)(req, res);
        --in_flight;
    });
    auto config = config_for(server);
    config.batch_size = 4;
    config.max_in_flight = 2;
    std::vector<std::string> texts;
    for (int i = 0; i < 18; ++i) texts.push_back("text number " + std::to_string(i));
    const auto out = embed_texts_remote(config, texts);
    REQUIRE(out.size() == 18);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        CHECK(out[i](0) == MockEmbeddingServer::canned_vector(texts[i], 3)[0]);
    }
    CHECK(server.requests() == 5);
    CHECK(peak <= 2);
    CHECK(batch_sizes == std::multiset<std::size_t>{2, 4, 4, 4, 4});
}

TEST_CASE("request body and auth header follow the wire format", "[remote]") {
    nlohmann::json seen;
    MockEmbeddingServer server([&](const nlohmann::json& req, httplib::Response& res) {
        seen = req;
        MockEmbeddingServer::shuffled(2)(req, res);
    });
    auto config = config_for(server);
    config.auth_token = "secret-token";
    embed_texts_remote(config, std::vector<std::string>{"a", "b"});
    CHECK(seen.at("model") == "mock-model");
    CHECK(seen.at("input") == nlohmann::json::array({"a", "b"}));
    CHECK(server.last_auth() == "Bearer secret-token");
}

TEST_CASE("empty texts are rejected before any request", "[remote]") {
    MockEmbeddingServer server(MockEmbeddingServer::shuffled(2));
    CHECK_THROWS_AS(embed_texts_remote(config_for(server), std::vector<std::string>{"ok", ""}), ContractError);
    CHECK_THROWS_AS(embed_texts_remote(config_for(server), std::vector<std::string>{}), ContractError);
    CHECK(server.requests() == 0);
}

TEST_CASE("4xx responses fail without retry", "[remote]") {
    MockEmbeddingServer server([](const nlohmann::json&, httplib::Response& res) {
        res.status = 400;
        res.set_content(R"({"error":"bad input"})", "application/json");
    });
    try {
        embed_texts_remote(config_for(server), std::vector<std::string>{"x"});
        FAIL("expected RemoteError");
    } catch (const RemoteError& e) {
        CHECK(e.status() == 400);
    }
    CHECK(server.requests() == 1);
}

TEST_CASE("5xx responses are retried", "[remote]") {
    std::atomic<int> calls{0};
    MockEmbeddingServer server([&](const nlohmann::json& req, httplib::Response& res) {
        if (++calls < 3) {
            res.status = 503;
            return;
        }
        MockEmbeddingServer::shuffled(2)(req, res);
    });
    CHECK(embed_texts_remote(config_for(server), std::vector<std::string>{"x"}).size() == 1);
    CHECK(server.requests() == 3);

    std::atomic<int> always{0};
    MockEmbeddingServer failing([&](const nlohmann::json&, httplib::Response& res) {
        ++always;
        res.status = 500;
    });
    CHECK_THROWS_AS(embed_texts_remote(config_for(failing), std::vector<std::string>{"x"}), RemoteError);
    CHECK(failing.requests() == 3);
}

TEST_CASE("transport failures are retried then reported", "[remote]") {
    RemoteEmbedderConfig c;
    c.base_url = "http://127.0.0.1:1";
    c.model_name = "m";
    c.timeout = std::chrono::milliseconds(200);
    c.initial_backoff = std::chrono::milliseconds(1);
    try {
        embed_texts_remote(c, std::vector<std::string>{"x"});
        FAIL("expected RemoteError");
    } catch (const RemoteError& e) {
        CHECK(e.status() == 0);
    }
}

TEST_CASE("malformed responses are protocol errors", "[remote]") {
    const auto respond = [](std::string body) {
        return [body](const nlohmann::json&, httplib::Response& res) { res.set_content(body, "application/json"); };
    };
    const std::vector<std::string> two = {"a", "b"};
    {
        MockEmbeddingServer s(respond(R"({"data":[{"index":0,"embedding":[1,2]},{"index":1,"embedding":[1,2,3]}]})"));
        CHECK_THROWS_AS(embed_texts_remote(config_for(s), two), RemoteError);
    }
    {
        MockEmbeddingServer s(respond(R"({"data":[{"index":0,"embedding":[1,2]},{"index":0,"embedding":[1,2]}]})"));
        CHECK_THROWS_AS(embed_texts_remote(config_for(s), two), RemoteError);
    }
    {
        MockEmbeddingServer s(respond(R"({"data":[{"index":0,"embedding":[1,2]}]})"));
        CHECK_THROWS_AS(embed_texts_remote(config_for(s), two), RemoteError);
    }
    {
        MockEmbeddingServer s(respond("not json"));
        CHECK_THROWS_AS(embed_texts_remote(config_for(s), two), RemoteError);
    }
    {
        MockEmbeddingServer s(respond(R"({"usage":{},"data":[{"index":1,"embedding":[0,1],"x":1},{"index":0,"embedding":[1,0]}]})"));
        const auto out = embed_texts_remote(config_for(s), two);
        CHECK(out[0](0) == 1.0);
        CHECK(out[1](1) == 1.0);
    }
}

TEST_CASE("RemoteEmbedder validates its configuration", "[remote]") {
    RemoteEmbedderConfig c;
    c.base_url = "http://127.0.0.1:9";
    c.model_name = "m";
    c.max_in_flight = 0;
    CHECK_THROWS_AS(RemoteEmbedder(c), ContractError);
}
