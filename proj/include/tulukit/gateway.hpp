#pragma once

// Provider-agnostic chat completion access with deterministic record/replay.
// Replay mode resolves every request from a fixture directory keyed by
// request hash and never touches the network; record mode persists live
// responses into the same store so runs become reproducible. Provider
// adapters are thin wire-format translators behind a Transport interface.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tulukit/errors.hpp"
#include "tulukit/hash.hpp"
#include "tulukit/rng.hpp"

#include "json.hpp"

namespace tulu {

enum class GatewayMode { live, record, replay };

inline std::string to_string(GatewayMode m) {
    switch (m) {
        case GatewayMode::live: return "live";
        case GatewayMode::record: return "record";
        case GatewayMode::replay: return "replay";
    }
    return "replay";
}

inline GatewayMode gateway_mode_from_string(const std::string& s) {
    if (s == "live") return GatewayMode::live;
    if (s == "record") return GatewayMode::record;
    if (s == "replay") return GatewayMode::replay;
    throw ParseError("unknown gateway mode: " + s);
}

enum class GatewayErrorCode {
    auth, rate_limited, timeout, network, replay_miss, bad_response, invalid_request
};

inline std::string to_string(GatewayErrorCode c) {
    switch (c) {
        case GatewayErrorCode::auth: return "auth";
        case GatewayErrorCode::rate_limited: return "rate_limited";
        case GatewayErrorCode::timeout: return "timeout";
        case GatewayErrorCode::network: return "network";
        case GatewayErrorCode::replay_miss: return "replay_miss";
        case GatewayErrorCode::bad_response: return "bad_response";
        case GatewayErrorCode::invalid_request: return "invalid_request";
    }
    return "network";
}

class GatewayError : public Error {
public:
    GatewayError(GatewayErrorCode code, const std::string& msg)
        : Error(to_string(code) + ": " + msg), code_(code) {}
    GatewayErrorCode code() const { return code_; }

private:
    GatewayErrorCode code_;
};

struct ChatRequest {
    std::string provider_id;
    std::string model_id;
    std::string system_prompt;
    std::string user_message;
    double temperature = 0.3;
    double top_p = 0.9;
    std::optional<int64_t> seed;
    int max_output_tokens = 1024;

    void validate() const {
        if (temperature < 0.0 || temperature > 2.0)
            throw GatewayError(GatewayErrorCode::invalid_request,
                               "temperature must be in [0, 2]");
        if (top_p <= 0.0 || top_p > 1.0)
            throw GatewayError(GatewayErrorCode::invalid_request, "top_p must be in (0, 1]");
        if (max_output_tokens <= 0)
            throw GatewayError(GatewayErrorCode::invalid_request,
                               "max_output_tokens must be positive");
    }

    // Stable digest over all fields in canonical order; independent of the
    // key order any JSON encoding happened to use.
    std::string hash() const {
        auto fmt = [](double v) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return std::string(buf);
        };
        uint64_t h = kFnvOffset;
        for (const std::string& field :
             {provider_id, model_id, system_prompt, user_message, fmt(temperature), fmt(top_p),
              seed ? std::to_string(*seed) : std::string("none"),
              std::to_string(max_output_tokens)}) {
            h = fnv1a(field, h);
            h = fnv1a("\x1f", h);
        }
        return to_hex(h);
    }

    bool operator==(const ChatRequest&) const = default;
};

inline nlohmann::json chat_request_to_json(const ChatRequest& r) {
    nlohmann::json j = {
        {"provider_id", r.provider_id},   {"model_id", r.model_id},
        {"system_prompt", r.system_prompt}, {"user_message", r.user_message},
        {"temperature", r.temperature},   {"top_p", r.top_p},
        {"max_output_tokens", r.max_output_tokens},
    };
    if (r.seed) j["seed"] = *r.seed;
    return j;
}

inline ChatRequest chat_request_from_json(const nlohmann::json& j) {
    ChatRequest r;
    r.provider_id = j.at("provider_id").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
    r.system_prompt = j.at("system_prompt").get<std::string>();
    r.user_message = j.at("user_message").get<std::string>();
    r.temperature = j.value("temperature", 0.3);
    r.top_p = j.value("top_p", 0.9);
    if (j.contains("seed")) r.seed = j.at("seed").get<int64_t>();
    r.max_output_tokens = j.value("max_output_tokens", 1024);
    return r;
}

enum class ResponseSource { live, replay };

struct ResponseRecord {
    std::string request_hash;
    std::string response_text;
    uint64_t latency_ms = 0;
    std::string timestamp;  // UTC, ISO 8601
    ResponseSource source = ResponseSource::replay;
};

// ---------------------------------------------------------------------------
// Transport: the only seam that touches the network.

struct HttpResponse {
    int status = 0;
    std::string body;
};

struct Transport {
    virtual ~Transport() = default;
    virtual HttpResponse post(const std::string& url,
                              const std::vector<std::pair<std::string, std::string>>& headers,
                              const std::string& body) = 0;
};

// ---------------------------------------------------------------------------
// Provider adapters (chat-completions style wire formats)

struct WireRequest {
    std::string url;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
};

namespace detail {

inline std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}

inline std::string upper_ascii(std::string s) {
    for (char& c : s)
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 32);
    return s;
}

}  // namespace detail

// Gemini generateContent wire format. Credentials: GEMINI_API_KEY.
inline WireRequest build_gemini_request(const ChatRequest& r) {
    std::string key = detail::env_or("GEMINI_API_KEY", "");
    if (key.empty())
        throw GatewayError(GatewayErrorCode::auth, "GEMINI_API_KEY is not set");
    std::string base =
        detail::env_or("GEMINI_BASE_URL", "https://generativelanguage.googleapis.com");
    nlohmann::json gen_config = {{"temperature", r.temperature},
                                 {"topP", r.top_p},
                                 {"maxOutputTokens", r.max_output_tokens}};
    if (r.seed) gen_config["seed"] = *r.seed;
    nlohmann::json body = {
        {"systemInstruction", {{"parts", {{{"text", r.system_prompt}}}}}},
        {"contents", {{{"role", "user"}, {"parts", {{{"text", r.user_message}}}}}}},
        {"generationConfig", gen_config},
    };
    return {base + "/v1beta/models/" + r.model_id + ":generateContent?key=" + key,
            {{"Content-Type", "application/json"}},
            body.dump()};
}

inline std::string parse_gemini_response(const std::string& body) {
    try {
        auto j = nlohmann::json::parse(body);
        return j.at("candidates").at(0).at("content").at("parts").at(0).at("text")
            .get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw GatewayError(GatewayErrorCode::bad_response,
                           std::string("unexpected provider response: ") + e.what());
    }
}

// OpenAI-compatible chat completions; also serves hosted Llama endpoints.
// Credentials: {PROVIDER}_API_KEY, optional {PROVIDER}_BASE_URL.
inline WireRequest build_openai_request(const ChatRequest& r) {
    std::string prefix = detail::upper_ascii(r.provider_id);
    std::string key = detail::env_or((prefix + "_API_KEY").c_str(), "");
    if (key.empty())
        throw GatewayError(GatewayErrorCode::auth, prefix + "_API_KEY is not set");
    std::string base = detail::env_or((prefix + "_BASE_URL").c_str(), "https://api.openai.com");
    nlohmann::json body = {
        {"model", r.model_id},
        {"messages",
         {{{"role", "system"}, {"content", r.system_prompt}},
          {{"role", "user"}, {"content", r.user_message}}}},
        {"temperature", r.temperature},
        {"top_p", r.top_p},
        {"max_tokens", r.max_output_tokens},
    };
    if (r.seed) body["seed"] = *r.seed;
    return {base + "/v1/chat/completions",
            {{"Content-Type", "application/json"}, {"Authorization", "Bearer " + key}},
            body.dump()};
}

inline std::string parse_openai_response(const std::string& body) {
    try {
        auto j = nlohmann::json::parse(body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw GatewayError(GatewayErrorCode::bad_response,
                           std::string("unexpected provider response: ") + e.what());
    }
}

inline WireRequest build_wire_request(const ChatRequest& r) {
    if (r.provider_id == "gemini") return build_gemini_request(r);
    return build_openai_request(r);
}

inline std::string parse_wire_response(const std::string& provider_id, const std::string& body) {
    if (provider_id == "gemini") return parse_gemini_response(body);
    return parse_openai_response(body);
}

// ---------------------------------------------------------------------------
// Fixture store: one JSON file per request hash, diff-friendly, committable.

class FixtureStore {
public:
    explicit FixtureStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

    std::optional<ResponseRecord> load(const std::string& request_hash) const {
        std::filesystem::path path = dir_ / (request_hash + ".json");
        std::ifstream in(path, std::ios::binary);
        if (!in) return std::nullopt;
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("fixture " + path.string() + ": " + e.what());
        }
        ResponseRecord rec;
        rec.request_hash = request_hash;
        rec.response_text = doc.at("response_text").get<std::string>();
        rec.latency_ms = doc.value("latency_ms", 0ULL);
        rec.timestamp = doc.value("timestamp", std::string{});
        rec.source = ResponseSource::replay;
        return rec;
    }

    void save(const ChatRequest& request, const ResponseRecord& record) {
        std::lock_guard<std::mutex> lock(write_mutex_);
        std::filesystem::create_directories(dir_);
        std::filesystem::path path = dir_ / (record.request_hash + ".json");
        nlohmann::json doc = {
            {"request", chat_request_to_json(request)},
            {"response_text", record.response_text},
            {"latency_ms", record.latency_ms},
            {"timestamp", record.timestamp},
        };
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write fixture: " + path.string());
        out << doc.dump(2) << "\n";
    }

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::mutex write_mutex_;
};

// ---------------------------------------------------------------------------

struct RetryPolicy {
    int attempts = 3;
    double base_delay_s = 1.0;
    uint64_t jitter_seed = 0;  // 0: derive from the clock
    std::function<void(double)> sleep_fn;  // injectable for tests
};

struct GatewayErrorInfo {
    GatewayErrorCode code = GatewayErrorCode::network;
    std::string message;
};

struct BatchResult {
    std::optional<ResponseRecord> record;
    std::optional<GatewayErrorInfo> error;
};

inline std::string utc_timestamp_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class LlmGateway {
public:
    LlmGateway(GatewayMode mode, std::string fixture_dir = "",
               std::shared_ptr<Transport> transport = nullptr, RetryPolicy retry = {})
        : mode_(mode), transport_(std::move(transport)), retry_(retry) {
        if (mode != GatewayMode::live && fixture_dir.empty())
            throw Error("record/replay require a fixture directory");
        if (!fixture_dir.empty()) store_ = std::make_unique<FixtureStore>(fixture_dir);
    }

    GatewayMode mode() const { return mode_; }
    FixtureStore* store() { return store_.get(); }

    ResponseRecord send(const ChatRequest& request) {
        request.validate();
        std::string hash = request.hash();
        if (mode_ == GatewayMode::replay) {
            auto rec = store_->load(hash);
            if (!rec)
                throw GatewayError(GatewayErrorCode::replay_miss,
                                   "no fixture for request hash " + hash);
            return *rec;
        }
        ResponseRecord rec = send_live(request, hash);
        if (mode_ == GatewayMode::record) store_->save(request, rec);
        return rec;
    }

    // Results are ordered as the inputs regardless of completion order; at
    // most max_in_flight requests are outstanding at once. Per-item failures
    // are collected, never aborting the batch.
    std::vector<BatchResult> send_batch(const std::vector<ChatRequest>& requests,
                                        size_t max_in_flight) {
        if (max_in_flight == 0) throw Error("max_in_flight must be positive");
        std::vector<BatchResult> results(requests.size());
        auto run_one = [&](size_t i) {
            try {
                results[i].record = send(requests[i]);
            } catch (const GatewayError& e) {
                results[i].error = GatewayErrorInfo{e.code(), e.what()};
            } catch (const Error& e) {
                results[i].error = GatewayErrorInfo{GatewayErrorCode::network, e.what()};
            }
        };
        size_t workers = std::min(max_in_flight, requests.size());
        if (workers <= 1) {
            for (size_t i = 0; i < requests.size(); ++i) run_one(i);
            return results;
        }
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < requests.size(); i = next.fetch_add(1))
                    run_one(i);
            });
        }
        for (auto& t : pool) t.join();
        return results;
    }

private:
    ResponseRecord send_live(const ChatRequest& request, const std::string& hash) {
        if (!transport_)
            throw GatewayError(GatewayErrorCode::network, "no transport configured for live mode");
        WireRequest wire = build_wire_request(request);
        SplitMix64 jitter(retry_.jitter_seed
                              ? retry_.jitter_seed
                              : static_cast<uint64_t>(
                                    std::chrono::steady_clock::now().time_since_epoch().count()));
        GatewayErrorInfo last{GatewayErrorCode::network, "no attempt made"};
        for (int attempt = 1; attempt <= retry_.attempts; ++attempt) {
            auto started = std::chrono::steady_clock::now();
            HttpResponse resp;
            bool transport_failed = false;
            try {
                resp = transport_->post(wire.url, wire.headers, wire.body);
            } catch (const std::exception& e) {
                transport_failed = true;
                last = {GatewayErrorCode::network, e.what()};
            }
            if (!transport_failed) {
                if (resp.status == 200) {
                    ResponseRecord rec;
                    rec.request_hash = hash;
                    rec.response_text = parse_wire_response(request.provider_id, resp.body);
                    rec.latency_ms = static_cast<uint64_t>(
                        std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - started)
                            .count());
                    rec.timestamp = utc_timestamp_now();
                    rec.source = ResponseSource::live;
                    return rec;
                }
                if (resp.status == 401 || resp.status == 403)
                    throw GatewayError(GatewayErrorCode::auth,
                                       "provider rejected credentials (HTTP " +
                                           std::to_string(resp.status) + ")");
                if (resp.status == 429) {
                    last = {GatewayErrorCode::rate_limited, "HTTP 429"};
                } else if (resp.status == 408 || resp.status == 504) {
                    last = {GatewayErrorCode::timeout, "HTTP " + std::to_string(resp.status)};
                } else if (resp.status >= 500) {
                    last = {GatewayErrorCode::network, "HTTP " + std::to_string(resp.status)};
                } else {
                    throw GatewayError(GatewayErrorCode::bad_response,
                                       "HTTP " + std::to_string(resp.status) + ": " + resp.body);
                }
            }
            if (attempt < retry_.attempts) {
                double delay = retry_.base_delay_s * static_cast<double>(1 << (attempt - 1)) *
                               (1.0 + 0.25 * jitter.real());
                if (retry_.sleep_fn) retry_.sleep_fn(delay);
                else std::this_thread::sleep_for(std::chrono::duration<double>(delay));
            }
        }
        throw GatewayError(last.code, last.message + " (after " +
                                          std::to_string(retry_.attempts) + " attempts)");
    }

    GatewayMode mode_;
    std::shared_ptr<Transport> transport_;
    RetryPolicy retry_;
    std::unique_ptr<FixtureStore> store_;
};

}  // namespace tulu
