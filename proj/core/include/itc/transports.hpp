#pragma once

#include "itc/backend.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>

namespace itc {

// ---------------------------------------------------------------------------
// OpenAI-compatible HTTP endpoint

struct RemoteOptions {
    /// Scheme, host and optional port, e.g. "https://api.example.com". The
    /// request goes to <base_url>/v1/chat/completions.
    std::string base_url;
    std::string api_key;
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::seconds timeout{600};

    /// Fills base_url / api_key from ITC_BASE_URL / ITC_API_KEY (or the
    /// given variable for the URL) when not already set.
    static RemoteOptions from_environment(const std::string& base_url_env = "ITC_BASE_URL");
};

/// POSTs chat-completion requests. Connection failures, 429 and 5xx are
/// retried with exponential backoff; other HTTP errors and exhausted retries
/// raise TransportError; a body without choices[0].message.content raises
/// ProtocolError.
class RemoteTransport : public Transport {
public:
    explicit RemoteTransport(RemoteOptions options);
    TransportReply complete(const CompletionRequest& request, const CacheKey& key) override;

    /// The JSON body sent for a request (exposed for tests).
    static std::string request_body(const CompletionRequest& request);
    /// Parses a chat-completion response body; throws ProtocolError.
    static TransportReply parse_body(const std::string& body);

private:
    RemoteOptions options_;
};

// ---------------------------------------------------------------------------
// Fixtures: digest -> response text

/// A fixture set is a directory holding `responses.jsonl` (one
/// {"digest", "text"} object per line) and `manifest.tsv` (digest, role of
/// the last message, and a one-line prompt preview) for fixture authoring.
class FixtureSet {
public:
    static FixtureSet load(const std::filesystem::path& dir);
    void save(const std::filesystem::path& dir) const;

    std::optional<std::string> find(const std::string& digest) const;
    void add(const std::string& digest, std::string text, std::string preview);

    std::size_t size() const noexcept { return texts_.size(); }

private:
    std::map<std::string, std::string> texts_;
    std::map<std::string, std::string> previews_;
};

std::string prompt_preview(const CompletionRequest& request, std::size_t max_chars = 96);

/// Replays fixtures; a missing digest raises FixtureMissingError. Usage
/// counts are left to the backend's whitespace-token fallback.
class ScriptedTransport : public Transport {
public:
    explicit ScriptedTransport(FixtureSet fixtures) : fixtures_(std::move(fixtures)) {}
    TransportReply complete(const CompletionRequest& request, const CacheKey& key) override;

private:
    FixtureSet fixtures_;
};

/// Wraps another transport and records every reply as a fixture.
class RecordingTransport : public Transport {
public:
    RecordingTransport(std::unique_ptr<Transport> inner, std::shared_ptr<FixtureSet> sink)
        : inner_(std::move(inner)), sink_(std::move(sink)) {}
    TransportReply complete(const CompletionRequest& request, const CacheKey& key) override;

private:
    std::unique_ptr<Transport> inner_;
    std::shared_ptr<FixtureSet> sink_;
    std::mutex mutex_;
};

/// Adapter for tests and tools: any callable mapping a request to text.
class FunctionTransport : public Transport {
public:
    using Fn = std::function<std::string(const CompletionRequest&)>;
    explicit FunctionTransport(Fn fn) : fn_(std::move(fn)) {}
    TransportReply complete(const CompletionRequest& request, const CacheKey&) override {
        return {fn_(request), std::nullopt, std::nullopt, 0};
    }

private:
    Fn fn_;
};

} // namespace itc
