#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "itc/error.hpp"
#include "itc/serialize.hpp"
#include "itc/transports.hpp"

#include <spdlog/spdlog.h>

#include <cstdlib>
#include <thread>

namespace itc {

namespace {

std::string env_or_empty(const std::string& name) {
    const char* value = std::getenv(name.c_str());
    return value ? std::string(value) : std::string();
}

bool retryable_status(int status) {
    return status == 408 || status == 429 || status >= 500;
}

} // namespace

RemoteOptions RemoteOptions::from_environment(const std::string& base_url_env) {
    RemoteOptions options;
    options.base_url = env_or_empty(base_url_env);
    if (options.base_url.empty() && base_url_env != "ITC_BASE_URL") options.base_url = env_or_empty("ITC_BASE_URL");
    options.api_key = env_or_empty("ITC_API_KEY");
    return options;
}

RemoteTransport::RemoteTransport(RemoteOptions options) : options_(std::move(options)) {
    while (!options_.base_url.empty() && options_.base_url.back() == '/') options_.base_url.pop_back();
    if (options_.base_url.empty()) throw ValidationError("base_url", "remote backend needs a base URL");
}

std::string RemoteTransport::request_body(const CompletionRequest& request) {
    json messages = json::array();
    for (const auto& m : request.messages) messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    json body = {{"model", request.model_id},
                 {"messages", std::move(messages)},
                 {"temperature", request.params.temperature},
                 {"max_tokens", request.params.max_tokens},
                 {"seed", request.params.seed}};
    if (request.params.stop) body["stop"] = *request.params.stop;
    return body.dump();
}

TransportReply RemoteTransport::parse_body(const std::string& body) {
    json parsed;
    try {
        parsed = json::parse(body);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("response body is not JSON: ") + e.what());
    }
    try {
        TransportReply reply;
        reply.text = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
        if (parsed.contains("usage") && parsed["usage"].is_object()) {
            const auto& usage = parsed["usage"];
            if (usage.contains("prompt_tokens")) reply.prompt_tokens = usage["prompt_tokens"].get<std::int64_t>();
            if (usage.contains("completion_tokens"))
                reply.completion_tokens = usage["completion_tokens"].get<std::int64_t>();
        }
        return reply;
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed chat-completion response: ") + e.what());
    }
}

TransportReply RemoteTransport::complete(const CompletionRequest& request, const CacheKey& key) {
    httplib::Client client(options_.base_url);
    client.set_connection_timeout(std::chrono::seconds(30));
    client.set_read_timeout(options_.timeout);
    client.set_write_timeout(std::chrono::seconds(60));

    httplib::Headers headers;
    if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

    const auto body = request_body(request);
    std::string last_error;
    auto backoff = options_.initial_backoff;

    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
        if (attempt > 0) {
            spdlog::warn("request {} attempt {} failed ({}); retrying in {} ms", key.digest.substr(0, 12), attempt,
                         last_error, backoff.count());
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }

        auto started = std::chrono::steady_clock::now();
        auto result = client.Post("/v1/chat/completions", headers, body, "application/json");
        if (!result) {
            last_error = "connection error: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status == 200) {
            auto reply = parse_body(result->body);
            reply.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                   std::chrono::steady_clock::now() - started)
                                   .count();
            return reply;
        }
        last_error = "HTTP " + std::to_string(result->status);
        if (!retryable_status(result->status)) throw TransportError(last_error + ": " + result->body.substr(0, 500));
    }
    throw TransportError("giving up after " + std::to_string(options_.max_retries + 1) + " attempts: " + last_error);
}

} // namespace itc
