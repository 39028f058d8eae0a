#include <catch2/catch_amalgamated.hpp>

#include "itc/error.hpp"
#include "itc/serialize.hpp"
#include "itc/text.hpp"
#include "itc_test_support.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <fstream>
#include <thread>

using namespace itc;
using itc_test::TempDir;

namespace {

CompletionRequest make_request(const std::string& content, int sample_index = 0) {
    return {"model-a", {{MessageRole::user, content}}, GenerationParams{}, sample_index};
}

std::unique_ptr<Transport> echo_transport(std::shared_ptr<std::atomic<int>> counter) {
    return std::make_unique<itc_test::CountingTransport>(
        [](const CompletionRequest& r) { return "echo " + r.messages.back().content + " #" + std::to_string(r.sample_index); },
        std::move(counter));
}

/// Local chat-completion endpoint whose replies come from a script.
class MockServer {
public:
    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    explicit MockServer(Handler handler) {
        server_.Post("/v1/chat/completions", [this, handler](const httplib::Request& req, httplib::Response& res) {
            {
                std::lock_guard lock(mutex_);
                requests_.push_back(req);
            }
            handler(req, res);
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockServer() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
    std::vector<httplib::Request> requests() {
        std::lock_guard lock(mutex_);
        return requests_;
    }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
    std::mutex mutex_;
    std::vector<httplib::Request> requests_;
};

std::string completion_body(const std::string& content, int prompt_tokens = 11, int completion_tokens = 22) {
    return json{{"id", "x"},
                {"choices", json::array({{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}})},
                {"usage", {{"prompt_tokens", prompt_tokens}, {"completion_tokens", completion_tokens}}}}
        .dump();
}

RemoteOptions fast_options(const std::string& url) {
    RemoteOptions o;
    o.base_url = url;
    o.api_key = "test-key";
    o.max_retries = 3;
    o.initial_backoff = std::chrono::milliseconds(1);
    o.timeout = std::chrono::seconds(10);
    return o;
}

} // namespace

TEST_CASE("cache keys cover every request field") {
    auto base = make_request("hello");
    auto key = CacheKey::of(base);
    CHECK(key.digest.size() == 64);
    CHECK(key.digest.find_first_not_of("0123456789abcdef") == std::string::npos);
    CHECK(CacheKey::of(make_request("hello")) == key);

    auto changed = base;
    changed.sample_index = 1;
    CHECK_FALSE(CacheKey::of(changed) == key);
    changed = base;
    changed.model_id = "model-b";
    CHECK_FALSE(CacheKey::of(changed) == key);
    changed = base;
    changed.params.temperature = 0.7;
    CHECK_FALSE(CacheKey::of(changed) == key);
    changed = base;
    changed.params.seed = 1;
    CHECK_FALSE(CacheKey::of(changed) == key);
    changed = base;
    changed.params.max_tokens = 10;
    CHECK_FALSE(CacheKey::of(changed) == key);
    changed = base;
    changed.params.stop = std::vector<std::string>{"x"};
    CHECK_FALSE(CacheKey::of(changed) == key);
    changed = base;
    changed.messages[0].role = MessageRole::system;
    CHECK_FALSE(CacheKey::of(changed) == key);
    changed = base;
    changed.messages.push_back({MessageRole::assistant, ""});
    CHECK_FALSE(CacheKey::of(changed) == key);
}

TEST_CASE("identical requests are served from the cache") {
    auto counter = std::make_shared<std::atomic<int>>(0);
    Backend backend(echo_transport(counter));
    auto first = backend.generate(make_request("q"));
    auto second = backend.generate(make_request("q"));
    CHECK(first == second);
    CHECK(*counter == 1);
    CHECK(backend.transport_calls() == 1);
    CHECK(backend.cache_hits() == 1);

    auto other = backend.generate(make_request("q", 1));
    CHECK(*counter == 2);
    CHECK(other.text != first.text);
}

TEST_CASE("scripted fixtures replay with whitespace-token usage") {
    auto request = make_request("What is 3 + 4?");
    FixtureSet fixtures;
    fixtures.add(CacheKey::of(request).digest, "the answer is \\boxed{7}", prompt_preview(request));
    Backend backend(std::make_unique<ScriptedTransport>(fixtures));
    auto r = backend.generate(request);
    CHECK(r.text == "the answer is \\boxed{7}");
    CHECK(r.completion_tokens == 4);
    CHECK(r.prompt_tokens == 5);
    CHECK_FALSE(r.reasoning.has_value());

    auto missing = make_request("What is 3 + 5?");
    try {
        backend.generate(missing);
        FAIL("expected a missing fixture");
    } catch (const FixtureMissingError& e) {
        CHECK(e.digest() == CacheKey::of(missing).digest);
        CHECK(std::string(e.what()).find(e.digest()) != std::string::npos);
    }
}

TEST_CASE("fixture sets save and load") {
    TempDir dir;
    FixtureSet set;
    set.add("ab12", "text with\nnewline", "user#0: hi");
    set.add("cd34", "other", "user#1: there");
    set.save(dir.path());
    auto loaded = FixtureSet::load(dir.path());
    CHECK(loaded.size() == 2);
    CHECK(loaded.find("ab12") == "text with\nnewline");
    CHECK_FALSE(loaded.find("zz").has_value());
    auto manifest = std::ifstream(dir / "manifest.tsv");
    std::string header, line;
    std::getline(manifest, header);
    std::getline(manifest, line);
    CHECK(header == "digest\tprompt_preview");
    CHECK(line == "ab12\tuser#0: hi");
}

TEST_CASE("persistent cache survives a new backend") {
    TempDir dir;
    auto counter = std::make_shared<std::atomic<int>>(0);
    auto request = make_request("persist me");
    ModelResponse first;
    {
        Backend backend(echo_transport(counter), {dir.path(), 4});
        first = backend.generate(request);
    }
    auto digest = CacheKey::of(request).digest;
    CHECK(std::filesystem::exists(dir.path() / digest.substr(0, 2) / digest));
    Backend again(echo_transport(counter), {dir.path(), 4});
    CHECK(again.generate(request) == first);
    CHECK(*counter == 1);
    CHECK(again.transport_calls() == 0);
}

TEST_CASE("unreadable cache entries are refetched") {
    TempDir dir;
    auto counter = std::make_shared<std::atomic<int>>(0);
    auto request = make_request("corrupt");
    ResponseCache cache(dir.path());
    auto path = *cache.path_for(CacheKey::of(request));
    std::filesystem::create_directories(path.parent_path());
    std::ofstream(path) << "{not json";
    Backend backend(echo_transport(counter), {dir.path(), 2});
    CHECK(backend.generate(request).text == "echo corrupt #0");
    CHECK(*counter == 1);
}

TEST_CASE("concurrent identical requests reach the transport once") {
    auto counter = std::make_shared<std::atomic<int>>(0);
    auto slow = std::make_unique<itc_test::CountingTransport>(
        [](const CompletionRequest& r) {
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
            return "slow " + r.messages.back().content;
        },
        counter);
    Backend backend(std::move(slow), {std::nullopt, 16});
    std::vector<std::string> texts(32);
    {
        std::vector<std::jthread> threads;
        for (int t = 0; t < 32; ++t)
            threads.emplace_back([&, t] { texts[t] = backend.generate(make_request("same", t % 4)).text; });
    }
    CHECK(*counter == 4);
    for (const auto& t : texts) CHECK(t == "slow same");
}

TEST_CASE("in-flight requests respect the global limit") {
    std::atomic<int> active{0}, peak{0};
    auto counter = std::make_shared<std::atomic<int>>(0);
    auto transport = std::make_unique<itc_test::CountingTransport>(
        [&](const CompletionRequest&) {
            int now = ++active;
            int seen = peak.load();
            while (now > seen && !peak.compare_exchange_weak(seen, now)) {
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(15));
            --active;
            return std::string("ok");
        },
        counter);
    Backend backend(std::move(transport), {std::nullopt, 3});
    {
        std::vector<std::jthread> threads;
        for (int t = 0; t < 12; ++t) threads.emplace_back([&, t] { backend.generate(make_request("x", t)); });
    }
    CHECK(*counter == 12);
    CHECK(peak.load() <= 3);
    CHECK(peak.load() >= 2);
}

TEST_CASE("make_response splits reasoning and prefers reported usage") {
    auto request = make_request("a b c");
    auto r = make_response(request, {"<think>one two three</think>\n\\boxed{5}", std::nullopt, std::nullopt, 9});
    CHECK(r.reasoning == "one two three");
    CHECK(r.answer_text == "\n\\boxed{5}");
    CHECK(r.completion_tokens == 4);
    CHECK(r.prompt_tokens == 3);
    CHECK(r.latency_ms == 9);
    CHECK_NOTHROW(r.validate());

    auto reported = make_response(request, {"x", 100, 200, 0});
    CHECK(reported.prompt_tokens == 100);
    CHECK(reported.completion_tokens == 200);
}

TEST_CASE("truncate_reasoning keeps the first budget tokens") {
    std::string reasoning;
    for (int i = 0; i < 100; ++i) reasoning += "w" + std::to_string(i) + (i % 7 == 0 ? "\n" : " ");
    auto original = make_request("solve");
    auto response = make_response(original, {"<think>" + reasoning + "</think>\\boxed{1}", {}, {}, 0});

    auto cont = truncate_reasoning(original, response, 40);
    REQUIRE(cont);
    REQUIRE(cont->messages.size() == 2);
    CHECK(cont->messages[0] == original.messages[0]);
    CHECK(cont->messages[1].role == MessageRole::assistant);
    const auto& prefix = cont->messages[1].content;
    REQUIRE(prefix.starts_with("<think>"));
    REQUIRE(prefix.ends_with("</think>"));
    auto kept = prefix.substr(7, prefix.size() - 15);
    auto tokens = split_whitespace(kept);
    REQUIRE(tokens.size() == 40);
    CHECK(tokens.front() == "w0");
    CHECK(tokens.back() == "w39");
    CHECK(cont->sample_index == original.sample_index);
    CHECK(cont->params == original.params);

    auto empty = truncate_reasoning(original, response, 0);
    REQUIRE(empty);
    CHECK(empty->messages[1].content == "<think></think>");

    CHECK_FALSE(truncate_reasoning(original, response, 100).has_value());
    CHECK_FALSE(truncate_reasoning(original, response, 1'000'000'000).has_value());

    auto plain = make_response(original, {"no reasoning", {}, {}, 0});
    CHECK_THROWS_AS(truncate_reasoning(original, plain, 5), NotReasoningResponseError);
}

TEST_CASE("model client seeds follow the sample index") {
    auto counter = std::make_shared<std::atomic<int>>(0);
    Backend backend(echo_transport(counter));
    GenerationParams params;
    params.seed = 40;
    ModelClient client(backend, "m", params);
    auto r = client.request({{MessageRole::user, "x"}}, 2);
    CHECK(r.params.seed == 42);
    CHECK(r.sample_index == 2);
    auto c = client.complete({{MessageRole::user, "x"}}, 2);
    CHECK(c.prompt_hash == CacheKey::of(r).digest);
}

TEST_CASE("request validation") {
    auto counter = std::make_shared<std::atomic<int>>(0);
    Backend backend(echo_transport(counter));
    CompletionRequest empty{"m", {}, {}, 0};
    CHECK_THROWS_AS(backend.generate(empty), ValidationError);
    auto negative = make_request("x", -1);
    CHECK_THROWS_AS(backend.generate(negative), ValidationError);
    CHECK(*counter == 0);
}

TEST_CASE("remote transport body and parsing") {
    auto request = make_request("hi", 3);
    request.params.seed = 9;
    auto body = json::parse(RemoteTransport::request_body(request));
    CHECK(body["model"] == "model-a");
    CHECK(body["messages"] == json::array({{{"role", "user"}, {"content", "hi"}}}));
    CHECK(body["temperature"] == 0.6);
    CHECK(body["max_tokens"] == 4096);
    CHECK(body["seed"] == 9);
    CHECK_FALSE(body.contains("stop"));

    auto reply = RemoteTransport::parse_body(completion_body("<think>r</think>ok", 5, 6));
    CHECK(reply.text == "<think>r</think>ok");
    CHECK(reply.prompt_tokens == 5);
    CHECK(reply.completion_tokens == 6);
    auto no_usage = RemoteTransport::parse_body(R"({"choices":[{"message":{"content":"x"}}]})");
    CHECK_FALSE(no_usage.completion_tokens.has_value());

    CHECK_THROWS_AS(RemoteTransport::parse_body("not json"), ProtocolError);
    CHECK_THROWS_AS(RemoteTransport::parse_body(R"({"choices":[]})"), ProtocolError);
    CHECK_THROWS_AS(RemoteTransport::parse_body(R"({"choices":[{"message":{}}]})"), ProtocolError);
    CHECK_THROWS_AS(RemoteTransport(RemoteOptions{}), ValidationError);
}

TEST_CASE("remote transport against a local server") {
    SECTION("success sends credentials and the chat body") {
        MockServer server([](const httplib::Request&, httplib::Response& res) {
            res.set_content(completion_body("<think>a b</think>\\boxed{2}"), "application/json");
        });
        RemoteTransport transport(fast_options(server.url() + "/"));
        auto request = make_request("What is 1 + 1?");
        auto reply = transport.complete(request, CacheKey::of(request));
        CHECK(reply.text == "<think>a b</think>\\boxed{2}");
        CHECK(reply.completion_tokens == 22);
        auto seen = server.requests();
        REQUIRE(seen.size() == 1);
        CHECK(seen[0].get_header_value("Authorization") == "Bearer test-key");
        auto body = json::parse(seen[0].body);
        CHECK(body["messages"][0]["content"] == "What is 1 + 1?");
        CHECK(body["model"] == "model-a");
    }

    SECTION("429 and 503 are retried") {
        std::atomic<int> calls{0};
        MockServer server([&](const httplib::Request&, httplib::Response& res) {
            int n = calls++;
            if (n == 0) res.status = 429;
            else if (n == 1) res.status = 503;
            else res.set_content(completion_body("fine"), "application/json");
        });
        RemoteTransport transport(fast_options(server.url()));
        auto request = make_request("x");
        CHECK(transport.complete(request, CacheKey::of(request)).text == "fine");
        CHECK(calls == 3);
    }

    SECTION("retries run out") {
        std::atomic<int> calls{0};
        MockServer server([&](const httplib::Request&, httplib::Response& res) {
            ++calls;
            res.status = 500;
        });
        RemoteTransport transport(fast_options(server.url()));
        auto request = make_request("x");
        CHECK_THROWS_AS(transport.complete(request, CacheKey::of(request)), TransportError);
        CHECK(calls == 4);
    }

    SECTION("client errors fail without retry") {
        std::atomic<int> calls{0};
        MockServer server([&](const httplib::Request&, httplib::Response& res) {
            ++calls;
            res.status = 400;
            res.set_content("bad request", "text/plain");
        });
        RemoteTransport transport(fast_options(server.url()));
        auto request = make_request("x");
        CHECK_THROWS_AS(transport.complete(request, CacheKey::of(request)), TransportError);
        CHECK(calls == 1);
    }

    SECTION("malformed bodies are protocol errors") {
        MockServer server([](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"unexpected": true})", "application/json");
        });
        RemoteTransport transport(fast_options(server.url()));
        auto request = make_request("x");
        CHECK_THROWS_AS(transport.complete(request, CacheKey::of(request)), ProtocolError);
    }

    SECTION("connection failures become transport errors") {
        // Bound but never listening, so connecting is refused.
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        REQUIRE(fd >= 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        REQUIRE(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
        socklen_t len = sizeof addr;
        REQUIRE(::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0);
        int port = ntohs(addr.sin_port);
        auto options = fast_options("http://127.0.0.1:" + std::to_string(port));
        options.max_retries = 1;
        RemoteTransport transport(options);
        auto request = make_request("x");
        CHECK_THROWS_AS(transport.complete(request, CacheKey::of(request)), TransportError);
        ::close(fd);
    }

    SECTION("a cached backend resumes with zero calls") {
        TempDir dir;
        MockServer server([](const httplib::Request& req, httplib::Response& res) {
            auto body = json::parse(req.body);
            res.set_content(completion_body("seed " + std::to_string(body["seed"].get<int>())), "application/json");
        });
        for (int pass = 0; pass < 2; ++pass) {
            Backend backend(std::make_unique<RemoteTransport>(fast_options(server.url())), {dir.path(), 8});
            ModelClient client(backend, "model-a", GenerationParams{});
            for (int i = 0; i < 8; ++i) CHECK(client.complete({{MessageRole::user, "q"}}, i).response.text ==
                                              "seed " + std::to_string(i));
            CHECK(backend.transport_calls() == (pass == 0 ? 8u : 0u));
        }
        CHECK(server.requests().size() == 8);
    }
}

TEST_CASE("remote options read the environment") {
    ::setenv("ITC_BASE_URL", "http://example.invalid", 1);
    ::setenv("ITC_API_KEY", "k", 1);
    ::setenv("OTHER_URL", "http://other.invalid", 1);
    auto o = RemoteOptions::from_environment();
    CHECK(o.base_url == "http://example.invalid");
    CHECK(o.api_key == "k");
    CHECK(RemoteOptions::from_environment("OTHER_URL").base_url == "http://other.invalid");
    CHECK(RemoteOptions::from_environment("UNSET_URL_VAR").base_url == "http://example.invalid");
    ::unsetenv("ITC_BASE_URL");
    ::unsetenv("ITC_API_KEY");
    ::unsetenv("OTHER_URL");
}
