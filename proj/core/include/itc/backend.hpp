#pragma once

#include "itc/domain.hpp"

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

namespace itc {

enum class MessageRole { system, user, assistant };

std::string_view to_string(MessageRole role);

struct Message {
    MessageRole role = MessageRole::user;
    std::string content;

    bool operator==(const Message&) const = default;
};

struct CompletionRequest {
    std::string model_id;
    std::vector<Message> messages;
    GenerationParams params;
    /// Distinguishes repeated samples of the same prompt; part of the cache key.
    int sample_index = 0;

    void validate() const;
};

/// SHA-256 over a canonical JSON encoding of (model_id, messages, params,
/// sample_index), as 64 lowercase hex characters.
struct CacheKey {
    std::string digest;

    static CacheKey of(const CompletionRequest& request);
    bool operator==(const CacheKey&) const = default;
};

/// What a transport hands back. Usage counts are optional; when absent the
/// backend falls back to whitespace-token counts.
struct TransportReply {
    std::string text;
    std::optional<std::int64_t> prompt_tokens;
    std::optional<std::int64_t> completion_tokens;
    std::int64_t latency_ms = 0;
};

/// The thing that actually produces completions: an HTTP endpoint, a fixture
/// replay, or an in-process synthetic model.
class Transport {
public:
    virtual ~Transport() = default;
    virtual TransportReply complete(const CompletionRequest& request, const CacheKey& key) = 0;
};

/// Builds a ModelResponse from raw text: splits the think block and fills
/// usage, defaulting to whitespace-token counts.
ModelResponse make_response(const CompletionRequest& request, const TransportReply& reply);

/// Persistent response cache. One file per digest under
/// `<dir>/<first two hex chars>/<digest>`, written via rename so readers
/// never see a partial entry. Without a directory it is memory-only.
class ResponseCache {
public:
    explicit ResponseCache(std::optional<std::filesystem::path> dir = std::nullopt);

    std::optional<ModelResponse> get(const CacheKey& key);
    void put(const CacheKey& key, const ModelResponse& response);

    std::optional<std::filesystem::path> path_for(const CacheKey& key) const;

private:
    std::optional<std::filesystem::path> dir_;
    std::mutex mutex_;
    std::map<std::string, ModelResponse> memory_;
};

struct BackendOptions {
    std::optional<std::filesystem::path> cache_dir;
    std::ptrdiff_t max_in_flight = 8;
};

/// Uniform, thread-safe completion interface. Identical requests are served
/// from the cache; concurrent identical requests wait on a per-key lock so
/// at most one transport call is issued per key.
class Backend {
public:
    Backend(std::unique_ptr<Transport> transport, BackendOptions options = {});
    ~Backend();

    Backend(const Backend&) = delete;
    Backend& operator=(const Backend&) = delete;

    ModelResponse generate(const CompletionRequest& request);

    /// Number of requests that reached the transport (cache misses).
    std::size_t transport_calls() const noexcept { return transport_calls_.load(); }
    std::size_t cache_hits() const noexcept { return cache_hits_.load(); }

private:
    std::shared_ptr<std::mutex> key_lock(const std::string& digest);

    std::unique_ptr<Transport> transport_;
    ResponseCache cache_;
    std::counting_semaphore<> in_flight_;
    std::mutex locks_mutex_;
    std::map<std::string, std::weak_ptr<std::mutex>> key_locks_;
    std::atomic<std::size_t> transport_calls_{0};
    std::atomic<std::size_t> cache_hits_{0};
};

/// Keeps the first `budget_tokens` whitespace tokens of the reasoning, closes
/// the think block, and returns the original conversation extended with that
/// assistant prefix so the model completes the answer. Returns nullopt when
/// the budget covers the whole trace (the response passes through unchanged).
/// Throws NotReasoningResponseError if the response has no reasoning.
std::optional<CompletionRequest> truncate_reasoning(const CompletionRequest& original,
                                                    const ModelResponse& response,
                                                    std::size_t budget_tokens);

/// Text of the truncated assistant prefix: `<think>` + kept tokens + `</think>`.
std::string truncated_think_prefix(const std::string& reasoning, std::size_t budget_tokens);

struct Completion {
    std::string prompt_hash;
    ModelResponse response;
};

/// Binds a backend to one model and its generation parameters. The request
/// seed is the base seed plus the sample index.
class ModelClient {
public:
    ModelClient(Backend& backend, std::string model_id, GenerationParams params)
        : backend_(&backend), model_id_(std::move(model_id)), params_(std::move(params)) {}

    CompletionRequest request(std::vector<Message> messages, int sample_index) const;
    Completion complete(std::vector<Message> messages, int sample_index) const;
    Completion complete(const CompletionRequest& request) const;

    Backend& backend() const noexcept { return *backend_; }
    const std::string& model_id() const noexcept { return model_id_; }
    const GenerationParams& params() const noexcept { return params_; }

private:
    Backend* backend_;
    std::string model_id_;
    GenerationParams params_;
};

} // namespace itc
