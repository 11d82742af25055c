#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>

#include "support.hpp"
#include "tulukit/gateway.hpp"
#include "tulukit/rng.hpp"

using namespace tulu;
using testsupport::ScriptedTransport;
using testsupport::TempDir;

namespace {

ChatRequest sample_request(const std::string& msg = "encha?") {
    ChatRequest r;
    r.provider_id = "gemini";
    r.model_id = "gemini-2.0-flash";
    r.system_prompt = "Respond in Tulu.";
    r.user_message = msg;
    r.temperature = 0.3;
    r.top_p = 0.9;
    r.max_output_tokens = 128;
    return r;
}

void seed_fixture(FixtureStore& store, const ChatRequest& r, const std::string& text) {
    ResponseRecord rec;
    rec.request_hash = r.hash();
    rec.response_text = text;
    rec.latency_ms = 12;
    rec.timestamp = "2026-08-08T00:00:00Z";
    store.save(r, rec);
}

}  // namespace

TEST_CASE("replay returns the stored response and never touches the network") {
    TempDir dir("replay");
    FixtureStore store(dir.path());
    ChatRequest r = sample_request();
    seed_fixture(store, r, "yān pōpe");

    LlmGateway gateway(GatewayMode::replay, dir.str(),
                       std::make_shared<testsupport::FailTransport>());
    ResponseRecord rec = gateway.send(r);
    CHECK(rec.response_text == "yān pōpe");
    CHECK(rec.source == ResponseSource::replay);
    CHECK(rec.request_hash == r.hash());
    CHECK(rec.latency_ms == 12);
}

TEST_CASE("replay miss is a distinct error naming the hash") {
    TempDir dir("miss");
    LlmGateway gateway(GatewayMode::replay, dir.str());
    ChatRequest r = sample_request("never recorded");
    CHECK_THROWS_AS(gateway.send(r), GatewayError);
    try {
        gateway.send(r);
    } catch (const GatewayError& e) {
        CHECK(e.code() == GatewayErrorCode::replay_miss);
        CHECK(std::string(e.what()).find(r.hash()) != std::string::npos);
    }
}

TEST_CASE("record then replay returns the identical response") {
    TempDir dir("record");
    setenv("GEMINI_API_KEY", "test-key", 1);
    auto transport = std::make_shared<ScriptedTransport>();
    nlohmann::json body = {
        {"candidates",
         {{{"content", {{"parts", {{{"text", "yān illuḍa pōpe"}}}}}}}}}};
    transport->responses = {{200, body.dump()}};
    {
        LlmGateway recorder(GatewayMode::record, dir.str(), transport);
        ResponseRecord live = recorder.send(sample_request());
        CHECK(live.source == ResponseSource::live);
        CHECK(live.response_text == "yān illuḍa pōpe");
    }
    LlmGateway replayer(GatewayMode::replay, dir.str(),
                        std::make_shared<testsupport::FailTransport>());
    ResponseRecord replayed = replayer.send(sample_request());
    CHECK(replayed.response_text == "yān illuḍa pōpe");
    CHECK(replayed.source == ResponseSource::replay);
}

TEST_CASE("request hashing is stable and key-order independent") {
    nlohmann::json a = {
        {"provider_id", "gemini"}, {"model_id", "m"},   {"system_prompt", "s"},
        {"user_message", "u"},     {"temperature", 0.3}, {"top_p", 0.9},
        {"max_output_tokens", 64},
    };
    // same fields, permuted insertion order via parse of reordered text
    std::string reordered =
        R"({"top_p":0.9,"user_message":"u","max_output_tokens":64,"provider_id":"gemini",)"
        R"("temperature":0.3,"system_prompt":"s","model_id":"m"})";
    ChatRequest r1 = chat_request_from_json(a);
    ChatRequest r2 = chat_request_from_json(nlohmann::json::parse(reordered));
    CHECK(r1.hash() == r2.hash());

    // perturbing any field changes the hash
    SplitMix64 rng(41);
    for (int i = 0; i < 100; ++i) {
        ChatRequest base = sample_request();
        ChatRequest changed = base;
        switch (rng.bounded(6)) {
            case 0: changed.provider_id += "x"; break;
            case 1: changed.model_id += "x"; break;
            case 2: changed.system_prompt += " "; break;
            case 3: changed.user_message += "!"; break;
            case 4: changed.temperature += 0.1; break;
            default: changed.seed = static_cast<int64_t>(rng.bounded(1000)); break;
        }
        CHECK(base.hash() != changed.hash());
    }
}

TEST_CASE("request validation enforces the documented ranges") {
    ChatRequest r = sample_request();
    r.temperature = 2.5;
    CHECK_THROWS_AS(r.validate(), GatewayError);
    r = sample_request();
    r.top_p = 0.0;
    CHECK_THROWS_AS(r.validate(), GatewayError);
    r = sample_request();
    r.max_output_tokens = 0;
    CHECK_THROWS_AS(r.validate(), GatewayError);
}

TEST_CASE("batch results keep input order") {
    TempDir dir("batch");
    FixtureStore store(dir.path());
    std::vector<ChatRequest> requests;
    for (int i = 0; i < 3; ++i) {
        ChatRequest r = sample_request("q" + std::to_string(i));
        seed_fixture(store, r, "a" + std::to_string(i));
        requests.push_back(r);
    }
    LlmGateway gateway(GatewayMode::replay, dir.str());
    auto results = gateway.send_batch(requests, 4);
    REQUIRE(results.size() == 3);
    for (int i = 0; i < 3; ++i) {
        REQUIRE(results[i].record.has_value());
        CHECK(results[i].record->response_text == "a" + std::to_string(i));
    }
}

TEST_CASE("a batch collects per-item errors without aborting") {
    TempDir dir("batch_err");
    FixtureStore store(dir.path());
    std::vector<ChatRequest> requests;
    for (int i = 0; i < 5; ++i) {
        ChatRequest r = sample_request("q" + std::to_string(i));
        if (i != 2) seed_fixture(store, r, "a" + std::to_string(i));
        requests.push_back(r);
    }
    LlmGateway gateway(GatewayMode::replay, dir.str());
    auto results = gateway.send_batch(requests, 2);
    REQUIRE(results.size() == 5);
    for (int i = 0; i < 5; ++i) {
        if (i == 2) {
            REQUIRE(results[i].error.has_value());
            CHECK(results[i].error->code == GatewayErrorCode::replay_miss);
            CHECK_FALSE(results[i].record.has_value());
        } else {
            REQUIRE(results[i].record.has_value());
            CHECK(results[i].record->response_text == "a" + std::to_string(i));
        }
    }
}

TEST_CASE("max_in_flight one equals sequential results exactly") {
    TempDir dir("seq");
    FixtureStore store(dir.path());
    std::vector<ChatRequest> requests;
    for (int i = 0; i < 8; ++i) {
        ChatRequest r = sample_request("q" + std::to_string(i));
        seed_fixture(store, r, "a" + std::to_string(i));
        requests.push_back(r);
    }
    LlmGateway gateway(GatewayMode::replay, dir.str());
    auto sequential = gateway.send_batch(requests, 1);
    auto concurrent = gateway.send_batch(requests, 4);
    REQUIRE(sequential.size() == concurrent.size());
    for (size_t i = 0; i < sequential.size(); ++i)
        CHECK(sequential[i].record->response_text == concurrent[i].record->response_text);
    CHECK_THROWS_AS(gateway.send_batch(requests, 0), Error);
}

TEST_CASE("retries are bounded and use exponential delays") {
    setenv("GEMINI_API_KEY", "test-key", 1);
    auto transport = std::make_shared<ScriptedTransport>();
    transport->responses = {{429, "slow down"}};
    std::vector<double> delays;
    RetryPolicy retry;
    retry.attempts = 3;
    retry.base_delay_s = 1.0;
    retry.jitter_seed = 99;
    retry.sleep_fn = [&](double d) { delays.push_back(d); };
    LlmGateway gateway(GatewayMode::live, "", transport, retry);
    CHECK_THROWS_AS(gateway.send(sample_request()), GatewayError);
    CHECK(transport->calls.size() == 3);  // never exceeds the bound
    REQUIRE(delays.size() == 2);
    CHECK(delays[0] >= 1.0);
    CHECK(delays[0] <= 1.25);
    CHECK(delays[1] >= 2.0);
    CHECK(delays[1] <= 2.5);
    try {
        auto transport2 = std::make_shared<ScriptedTransport>();
        transport2->responses = {{429, ""}};
        LlmGateway g2(GatewayMode::live, "", transport2, retry);
        g2.send(sample_request());
    } catch (const GatewayError& e) {
        CHECK(e.code() == GatewayErrorCode::rate_limited);
    }
}

TEST_CASE("auth failures are not retried") {
    setenv("GEMINI_API_KEY", "test-key", 1);
    auto transport = std::make_shared<ScriptedTransport>();
    transport->responses = {{401, "no"}};
    LlmGateway gateway(GatewayMode::live, "", transport);
    try {
        gateway.send(sample_request());
        FAIL("expected auth error");
    } catch (const GatewayError& e) {
        CHECK(e.code() == GatewayErrorCode::auth);
    }
    CHECK(transport->calls.size() == 1);
}

TEST_CASE("openai-compatible wire format") {
    setenv("OPENAI_API_KEY", "sk-test", 1);
    unsetenv("OPENAI_BASE_URL");
    ChatRequest r = sample_request();
    r.provider_id = "openai";
    r.model_id = "gpt-4o";
    r.seed = 7;
    WireRequest wire = build_openai_request(r);
    CHECK(wire.url == "https://api.openai.com/v1/chat/completions");
    bool has_auth = false;
    for (const auto& [k, v] : wire.headers)
        if (k == "Authorization" && v == "Bearer sk-test") has_auth = true;
    CHECK(has_auth);
    auto body = nlohmann::json::parse(wire.body);
    CHECK(body.at("model") == "gpt-4o");
    CHECK(body.at("messages")[0].at("role") == "system");
    CHECK(body.at("messages")[0].at("content") == "Respond in Tulu.");
    CHECK(body.at("messages")[1].at("role") == "user");
    CHECK(body.at("temperature").get<double>() == doctest::Approx(0.3));
    CHECK(body.at("seed").get<int>() == 7);
    CHECK(parse_openai_response(testsupport::openai_body("hello")) == "hello");
}

TEST_CASE("gemini wire format") {
    setenv("GEMINI_API_KEY", "g-test", 1);
    unsetenv("GEMINI_BASE_URL");
    ChatRequest r = sample_request();
    WireRequest wire = build_gemini_request(r);
    CHECK(wire.url.find("models/gemini-2.0-flash:generateContent") != std::string::npos);
    CHECK(wire.url.find("key=g-test") != std::string::npos);
    auto body = nlohmann::json::parse(wire.body);
    CHECK(body.at("systemInstruction").at("parts")[0].at("text") == "Respond in Tulu.");
    CHECK(body.at("contents")[0].at("parts")[0].at("text") == "encha?");
    CHECK(body.at("generationConfig").at("temperature").get<double>() == doctest::Approx(0.3));
}

TEST_CASE("missing credentials are an auth error") {
    unsetenv("LLAMA_API_KEY");
    ChatRequest r = sample_request();
    r.provider_id = "llama";
    try {
        build_openai_request(r);
        FAIL("expected auth error");
    } catch (const GatewayError& e) {
        CHECK(e.code() == GatewayErrorCode::auth);
    }
}
