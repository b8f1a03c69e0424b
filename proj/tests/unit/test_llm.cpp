// SPDX-License-Identifier: Apache-2.0
#include "hems/error.hpp"
#include "hems/llm/embedding.hpp"
#include "hems/llm/remote.hpp"

#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

using namespace hems;
using namespace hems::llm;

namespace {

class MockServer {
public:
    MockServer()
    {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockServer()
    {
        server_.stop();
        thread_.join();
    }
    httplib::Server& server() { return server_; }
    RemoteConfig config(const std::string& style = "completions") const
    {
        RemoteConfig c;
        c.style = style;
        c.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
        c.retry_backoff_s = 0.0;
        c.timeout_s = 5.0;
        return c;
    }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

} // namespace

TEST_CASE("chat markup converts to messages")
{
    const auto m = chat_messages_from_markup("<|im_start|>system\nrules<|im_end|>\n<|im_start|>agent\ntask<|im_end|>\n"
                                             "<|im_start|>assistant\nThought: x\n");
    REQUIRE(m.size() == 3);
    CHECK(m[0].role == "system");
    CHECK(m[1].role == "user");
    CHECK(m[1].content == "task");
    CHECK(m[2].role == "assistant");
    CHECK(m[2].content == "Thought: x\n");

    const auto u = chat_messages_from_markup("<|im_start|>system\np<|im_end|>\n<|im_start|>agent\nq?<|im_end|>\n"
                                             "<|im_start|>user\n");
    REQUIRE(u.size() == 2);
    CHECK(u[1].role == "user");
    CHECK(u[1].content == "q?");

    CHECK(chat_messages_from_markup("plain").front().role == "user");
}

TEST_CASE("completions endpoint round trip")
{
    MockServer mock;
    nlohmann::json seen;
    std::string auth;
    mock.server().Post("/v1/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen = nlohmann::json::parse(req.body);
        auth = req.get_header_value("Authorization");
        res.set_content(R"({"choices":[{"text":"Action: hi\nObservation: no"}]})", "application/json");
    });
    ::setenv("HEMS_TEST_KEY", "secret", 1);
    auto config = mock.config();
    config.api_key_env = "HEMS_TEST_KEY";
    RemoteProvider provider(config);
    GenerationRequest request{"prompt text", {"Observation:"}, 64, {{"top_p", 0.5}}};
    CHECK(provider.generate(request) == "Action: hi\n");
    CHECK(seen["prompt"] == "prompt text");
    CHECK(seen["max_tokens"] == 64);
    CHECK(seen["top_p"] == 0.5);
    CHECK(seen["stop"] == nlohmann::json::array({"Observation:"}));
    CHECK(auth == "Bearer secret");
}

TEST_CASE("chat endpoint and retries")
{
    MockServer mock;
    std::atomic<int> calls = 0;
    mock.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        if (calls++ < 2) {
            res.status = 503;
            return;
        }
        const auto body = nlohmann::json::parse(req.body);
        res.set_content(nlohmann::json{{"choices", {{{"message", {{"role", "assistant"},
                                                                  {"content", body["messages"][0]["content"]}}}}}}}
                            .dump(),
                        "application/json");
    });
    RemoteProvider provider(mock.config("chat"));
    CHECK(provider.generate({"<|im_start|>system\necho<|im_end|>\n<|im_start|>user\n", {}}) == "echo");
    CHECK(calls == 3);

    auto strict = mock.config("chat");
    strict.max_retries = 0;
    calls = 0;
    try {
        RemoteProvider(strict).generate({"x", {}});
        FAIL("expected provider error");
    } catch (const ProviderError& e) {
        CHECK(e.attempts() == 1);
    }
}

TEST_CASE("client errors are not retried")
{
    MockServer mock;
    std::atomic<int> calls = 0;
    mock.server().Post("/v1/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 400;
        res.set_content("bad request", "text/plain");
    });
    CHECK_THROWS_AS(RemoteProvider(mock.config()).generate({"x", {}}), ProviderError);
    CHECK(calls == 1);
}

TEST_CASE("unreachable endpoint fails after the configured attempts")
{
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    RemoteConfig config;
    config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    config.retry_backoff_s = 0.0;
    config.timeout_s = 2.0;
    try {
        RemoteProvider(config).generate({"x", {}});
        FAIL("expected provider error");
    } catch (const ProviderError& e) {
        CHECK(e.attempts() == 3);
    }
    config.style = "grpc";
    CHECK_THROWS_AS(RemoteProvider{config}, ConfigError);
    config.style = "chat";
    config.base_url = "https://example.invalid";
    CHECK_THROWS_AS(RemoteProvider{config}, ConfigError);
}

TEST_CASE("embedding providers")
{
    ToyEmbedding toy;
    const auto a = toy.embed("I live in Oxford.");
    const auto b = toy.embed("i LIVE in oxford");
    double norm = 0.0;
    for (double x : a)
        norm += x * x;
    CHECK(a.size() == 256);
    CHECK(std::sqrt(norm) == doctest::Approx(1.0));
    CHECK(a == b);
    const auto empty = toy.embed("...");
    CHECK(std::all_of(empty.begin(), empty.end(), [](double x) { return x == 0.0; }));
    CHECK_THROWS_AS(ToyEmbedding(0), InvalidArgument);

    MockServer mock;
    mock.server().Post("/v1/embeddings", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"data":[{"embedding":[0.6,0.8]}]})", "application/json");
    });
    RemoteEmbedding remote(mock.config());
    CHECK(remote.embed("x") == EmbeddingVector{0.6, 0.8});
}
