#include "itc/backend.hpp"

#include "itc/answer.hpp"
#include "itc/error.hpp"
#include "itc/serialize.hpp"
#include "itc/text.hpp"

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <random>
#include <sstream>

namespace itc {

namespace fs = std::filesystem;

std::string_view to_string(MessageRole role) {
    switch (role) {
    case MessageRole::system: return "system";
    case MessageRole::user: return "user";
    case MessageRole::assistant: return "assistant";
    }
    return "user";
}

void CompletionRequest::validate() const {
    if (messages.empty()) throw ValidationError("messages", "must be non-empty");
    if (sample_index < 0) throw ValidationError("sample_index", "must be non-negative");
    params.validate();
}

namespace {

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1)
        throw Error("SHA-256 digest failed");

    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

} // namespace

CacheKey CacheKey::of(const CompletionRequest& request) {
    json messages = json::array();
    for (const auto& m : request.messages) messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    json canonical = {{"model_id", request.model_id},
                      {"messages", std::move(messages)},
                      {"params", request.params},
                      {"sample_index", request.sample_index}};
    return {sha256_hex(canonical.dump())};
}

ModelResponse make_response(const CompletionRequest& request, const TransportReply& reply) {
    ModelResponse response;
    response.text = reply.text;
    auto split = extract_think(reply.text);
    response.reasoning = std::move(split.reasoning);
    response.answer_text = std::move(split.answer_part);
    if (reply.prompt_tokens) {
        response.prompt_tokens = *reply.prompt_tokens;
    } else {
        std::int64_t prompt = 0;
        for (const auto& m : request.messages) prompt += static_cast<std::int64_t>(whitespace_token_count(m.content));
        response.prompt_tokens = prompt;
    }
    response.completion_tokens =
        reply.completion_tokens.value_or(static_cast<std::int64_t>(whitespace_token_count(reply.text)));
    response.latency_ms = reply.latency_ms;
    return response;
}

// ---------------------------------------------------------------------------

ResponseCache::ResponseCache(std::optional<fs::path> dir) : dir_(std::move(dir)) {
    if (dir_) fs::create_directories(*dir_);
}

std::optional<fs::path> ResponseCache::path_for(const CacheKey& key) const {
    if (!dir_) return std::nullopt;
    return *dir_ / key.digest.substr(0, 2) / key.digest;
}

std::optional<ModelResponse> ResponseCache::get(const CacheKey& key) {
    {
        std::lock_guard lock(mutex_);
        if (auto it = memory_.find(key.digest); it != memory_.end()) return it->second;
    }
    auto path = path_for(key);
    if (!path || !fs::exists(*path)) return std::nullopt;

    std::ifstream in(*path, std::ios::binary);
    try {
        auto response = json::parse(in).get<ModelResponse>();
        std::lock_guard lock(mutex_);
        memory_.emplace(key.digest, response);
        return response;
    } catch (const json::exception& e) {
        spdlog::warn("ignoring unreadable cache entry {}: {}", path->string(), e.what());
        return std::nullopt;
    }
}

void ResponseCache::put(const CacheKey& key, const ModelResponse& response) {
    if (auto path = path_for(key)) {
        fs::create_directories(path->parent_path());
        thread_local std::mt19937_64 rng{std::random_device{}()};
        auto tmp = path->parent_path() / (key.digest + ".tmp" + std::to_string(rng()));
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << json(response).dump();
            if (!out) throw Error("failed to write cache entry " + tmp.string());
        }
        fs::rename(tmp, *path);
    }
    std::lock_guard lock(mutex_);
    memory_.insert_or_assign(key.digest, response);
}

// ---------------------------------------------------------------------------

Backend::Backend(std::unique_ptr<Transport> transport, BackendOptions options)
    : transport_(std::move(transport)),
      cache_(std::move(options.cache_dir)),
      in_flight_(std::max<std::ptrdiff_t>(1, options.max_in_flight)) {}

Backend::~Backend() = default;

std::shared_ptr<std::mutex> Backend::key_lock(const std::string& digest) {
    std::lock_guard lock(locks_mutex_);
    auto& weak = key_locks_[digest];
    auto strong = weak.lock();
    if (!strong) {
        strong = std::make_shared<std::mutex>();
        weak = strong;
    }
    return strong;
}

ModelResponse Backend::generate(const CompletionRequest& request) {
    request.validate();
    const auto key = CacheKey::of(request);

    auto lock_for_key = key_lock(key.digest);
    std::lock_guard key_guard(*lock_for_key);

    if (auto cached = cache_.get(key)) {
        ++cache_hits_;
        return *cached;
    }

    in_flight_.acquire();
    TransportReply reply;
    try {
        ++transport_calls_;
        reply = transport_->complete(request, key);
    } catch (...) {
        in_flight_.release();
        throw;
    }
    in_flight_.release();

    auto response = make_response(request, reply);
    cache_.put(key, response);
    return response;
}

// ---------------------------------------------------------------------------

std::string truncated_think_prefix(const std::string& reasoning, std::size_t budget_tokens) {
    auto tokens = split_whitespace(reasoning);
    std::string prefix(think_open);
    for (std::size_t i = 0; i < std::min(budget_tokens, tokens.size()); ++i) {
        if (i > 0) prefix += ' ';
        prefix += tokens[i];
    }
    prefix += think_close;
    return prefix;
}

std::optional<CompletionRequest> truncate_reasoning(const CompletionRequest& original, const ModelResponse& response,
                                                    std::size_t budget_tokens) {
    if (!response.reasoning) throw NotReasoningResponseError();
    if (budget_tokens >= whitespace_token_count(*response.reasoning)) return std::nullopt;

    CompletionRequest continuation = original;
    continuation.messages.push_back(
        {MessageRole::assistant, truncated_think_prefix(*response.reasoning, budget_tokens)});
    return continuation;
}

// ---------------------------------------------------------------------------

CompletionRequest ModelClient::request(std::vector<Message> messages, int sample_index) const {
    CompletionRequest req{model_id_, std::move(messages), params_, sample_index};
    req.params.seed = params_.seed + sample_index;
    return req;
}

Completion ModelClient::complete(std::vector<Message> messages, int sample_index) const {
    return complete(request(std::move(messages), sample_index));
}

Completion ModelClient::complete(const CompletionRequest& req) const {
    auto key = CacheKey::of(req);
    return {key.digest, backend_->generate(req)};
}

} // namespace itc
