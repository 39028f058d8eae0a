#include "itc/error.hpp"
#include "itc/serialize.hpp"
#include "itc/transports.hpp"

#include <fstream>

namespace itc {

namespace fs = std::filesystem;

FixtureSet FixtureSet::load(const fs::path& dir) {
    FixtureSet set;
    std::ifstream in(dir / "responses.jsonl");
    if (!in) throw Error("cannot open fixtures " + (dir / "responses.jsonl").string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            auto j = json::parse(line);
            set.texts_.insert_or_assign(j.at("digest").get<std::string>(), j.at("text").get<std::string>());
        } catch (const json::exception& e) {
            throw Error("fixtures line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return set;
}

void FixtureSet::save(const fs::path& dir) const {
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "responses.jsonl.tmp", std::ios::trunc);
        for (const auto& [digest, text] : texts_) out << json{{"digest", digest}, {"text", text}}.dump() << '\n';
    }
    {
        std::ofstream out(dir / "manifest.tsv.tmp", std::ios::trunc);
        out << "digest\tprompt_preview\n";
        for (const auto& [digest, _] : texts_) {
            auto it = previews_.find(digest);
            out << digest << '\t' << (it == previews_.end() ? std::string() : it->second) << '\n';
        }
    }
    fs::rename(dir / "responses.jsonl.tmp", dir / "responses.jsonl");
    fs::rename(dir / "manifest.tsv.tmp", dir / "manifest.tsv");
}

std::optional<std::string> FixtureSet::find(const std::string& digest) const {
    if (auto it = texts_.find(digest); it != texts_.end()) return it->second;
    return std::nullopt;
}

void FixtureSet::add(const std::string& digest, std::string text, std::string preview) {
    texts_.insert_or_assign(digest, std::move(text));
    previews_.insert_or_assign(digest, std::move(preview));
}

std::string prompt_preview(const CompletionRequest& request, std::size_t max_chars) {
    if (request.messages.empty()) return {};
    const auto& last = request.messages.back();
    std::string preview = std::string(to_string(last.role)) + "#" + std::to_string(request.sample_index) + ": ";
    for (char c : last.content) {
        if (preview.size() >= max_chars) {
            preview += "...";
            break;
        }
        preview.push_back(c == '\n' || c == '\t' || c == '\r' ? ' ' : c);
    }
    return preview;
}

TransportReply ScriptedTransport::complete(const CompletionRequest&, const CacheKey& key) {
    auto text = fixtures_.find(key.digest);
    if (!text) throw FixtureMissingError(key.digest);
    return {*text, std::nullopt, std::nullopt, 0};
}

TransportReply RecordingTransport::complete(const CompletionRequest& request, const CacheKey& key) {
    auto reply = inner_->complete(request, key);
    std::lock_guard lock(mutex_);
    sink_->add(key.digest, reply.text, prompt_preview(request));
    return reply;
}

} // namespace itc
