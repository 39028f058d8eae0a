#include "itc/serialize.hpp"

#include "itc/error.hpp"

#include <set>

namespace itc {

namespace {

template <class T>
std::optional<T> optional_field(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

template <class T>
void put_optional(json& j, const char* key, const std::optional<T>& value) {
    if (value) j[key] = *value;
}

int int_field(const json& j, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw ValidationError(key, "must be an integer");
    return v.get<int>();
}

} // namespace

TaskKind task_kind_from_string(std::string_view s) {
    if (s == "math") return TaskKind::math;
    if (s == "multiple_choice") return TaskKind::multiple_choice;
    throw ValidationError("task_kind", "unknown task kind '" + std::string(s) + "'");
}

ModelKind model_kind_from_string(std::string_view s) {
    if (s == "reasoning") return ModelKind::reasoning;
    if (s == "non_reasoning") return ModelKind::non_reasoning;
    throw ValidationError("kind", "unknown model kind '" + std::string(s) + "'");
}

CallRole call_role_from_string(std::string_view s) {
    for (auto role : {CallRole::sample, CallRole::judge, CallRole::feedback, CallRole::revision,
                      CallRole::observation, CallRole::aggregate})
        if (to_string(role) == s) return role;
    throw ValidationError("role", "unknown call role '" + std::string(s) + "'");
}

void to_json(json& j, const Query& q) {
    j = json{{"id", q.id}, {"task_kind", to_string(q.task_kind)}, {"prompt", q.prompt}, {"gold_answer", q.gold_answer}};
    put_optional(j, "difficulty", q.difficulty);
}

void from_json(const json& j, Query& q) {
    q.id = j.at("id").get<std::string>();
    q.task_kind = task_kind_from_string(j.value("task_kind", std::string("math")));
    q.prompt = j.at("prompt").get<std::string>();
    q.gold_answer = j.at("gold_answer").get<std::string>();
    q.difficulty = optional_field<int>(j, "difficulty");
}

void to_json(json& j, const GenerationParams& p) {
    j = json{{"temperature", p.temperature}, {"max_tokens", p.max_tokens}, {"seed", p.seed}};
    put_optional(j, "stop", p.stop);
}

void from_json(const json& j, GenerationParams& p) {
    p = GenerationParams{};
    p.temperature = j.value("temperature", p.temperature);
    p.max_tokens = j.value("max_tokens", p.max_tokens);
    p.seed = j.value("seed", p.seed);
    p.stop = optional_field<std::vector<std::string>>(j, "stop");
}

void to_json(json& j, const ModelResponse& r) {
    j = json{{"text", r.text},
             {"answer_text", r.answer_text},
             {"prompt_tokens", r.prompt_tokens},
             {"completion_tokens", r.completion_tokens},
             {"latency_ms", r.latency_ms}};
    put_optional(j, "reasoning", r.reasoning);
    put_optional(j, "extracted_answer", r.extracted_answer);
}

void from_json(const json& j, ModelResponse& r) {
    r.text = j.at("text").get<std::string>();
    r.answer_text = j.at("answer_text").get<std::string>();
    r.reasoning = optional_field<std::string>(j, "reasoning");
    r.extracted_answer = optional_field<std::string>(j, "extracted_answer");
    r.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
    r.completion_tokens = j.value("completion_tokens", std::int64_t{0});
    r.latency_ms = j.value("latency_ms", std::int64_t{0});
}

void to_json(json& j, const JudgedResponse& r) {
    j = json{{"response", r.response}, {"scores", r.scores}, {"mean_score", r.mean_score}};
}

void from_json(const json& j, JudgedResponse& r) {
    r.response = j.at("response").get<ModelResponse>();
    r.scores = j.at("scores").get<std::vector<int>>();
    r.mean_score = j.at("mean_score").get<double>();
}

void to_json(json& j, const NormalizedAnswer& a) {
    j = json{{"canonical", a.canonical}};
    if (a.numeric_value) j["numeric"] = to_string(*a.numeric_value);
}

void from_json(const json& j, NormalizedAnswer& a) {
    a.canonical = j.at("canonical").get<std::string>();
    a.numeric_value.reset();
    if (j.contains("numeric")) {
        a.numeric_value = parse_rational(j.at("numeric").get<std::string>());
        if (!a.numeric_value) throw ValidationError("numeric", "not a rational");
    }
}

void to_json(json& j, const Call& c) {
    j = json{{"role", to_string(c.role)}, {"prompt_hash", c.prompt_hash}, {"response", c.response}};
}

void from_json(const json& j, Call& c) {
    c.role = call_role_from_string(j.at("role").get<std::string>());
    c.prompt_hash = j.at("prompt_hash").get<std::string>();
    c.response = j.at("response").get<ModelResponse>();
}

void to_json(json& j, const RunRecord& r) {
    j = json{{"query_id", r.query_id},
             {"strategy", strategy_to_json(r.strategy)},
             {"model_id", r.model_id},
             {"task_kind", to_string(r.task_kind)},
             {"gold_answer", r.gold_answer},
             {"calls", r.calls},
             {"final_answer", r.final_answer},
             {"correct", r.correct},
             {"total_completion_tokens", r.total_completion_tokens}};
    put_optional(j, "error", r.error);
}

void from_json(const json& j, RunRecord& r) {
    r.query_id = j.at("query_id").get<std::string>();
    r.strategy = strategy_from_json(j.at("strategy"));
    r.model_id = j.at("model_id").get<std::string>();
    r.task_kind = task_kind_from_string(j.at("task_kind").get<std::string>());
    r.gold_answer = j.at("gold_answer").get<std::string>();
    r.calls = j.at("calls").get<std::vector<Call>>();
    r.final_answer = j.at("final_answer").get<std::string>();
    r.correct = j.at("correct").get<bool>();
    r.total_completion_tokens = j.at("total_completion_tokens").get<std::int64_t>();
    r.error = optional_field<std::string>(j, "error");
}

json strategy_to_json(const StrategyConfig& config) {
    json j = std::visit(
        [](const auto& c) -> json {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, MajorityVote>) return {{"n", c.n}};
            if constexpr (std::is_same_v<T, WeightedMajority>)
                return {{"n", c.n}, {"weighting", to_string(c.weighting)}};
            if constexpr (std::is_same_v<T, MajorityTopK>) return {{"n", c.n}, {"k", c.k}};
            if constexpr (std::is_same_v<T, BestOfN>) return {{"n", c.n}, {"judge_repeats", c.judge_repeats}};
            if constexpr (std::is_same_v<T, SequentialRevisions>)
                return {{"length", c.length}, {"selection", to_string(c.selection)}};
            if constexpr (std::is_same_v<T, ParallelSequential>) return {{"chains", c.chains}, {"length", c.length}};
            if constexpr (std::is_same_v<T, PlanSearch>)
                return {{"observations", c.observations}, {"derived", c.derived}};
            if constexpr (std::is_same_v<T, PVGame>) return {{"per_round", c.per_round}, {"rounds", c.rounds}};
            if constexpr (std::is_same_v<T, MoA>) return {{"proposers", c.proposers}, {"layers", c.layers}};
            if constexpr (std::is_same_v<T, ReasoningTruncation>) return {{"budget_tokens", c.budget_tokens}};
        },
        config);
    j["kind"] = strategy_kind(config);
    return j;
}

StrategyConfig strategy_from_json(const json& j, ModelKind model_kind) {
    if (!j.is_object()) throw ValidationError("strategy", "must be an object");
    if (!j.contains("kind") || !j.at("kind").is_string()) throw ValidationError("kind", "missing strategy kind");
    const auto kind = j.at("kind").get<std::string>();
    const int default_n = default_sample_count(model_kind);

    auto check_keys = [&](std::set<std::string> allowed) {
        allowed.insert("kind");
        for (const auto& item : j.items())
            if (!allowed.count(item.key()))
                throw ValidationError(item.key(), "unknown field for strategy '" + kind + "'");
    };

    StrategyConfig config;
    if (kind == "majority_vote") {
        check_keys({"n"});
        config = MajorityVote{int_field(j, "n", default_n)};
    } else if (kind == "weighted_majority") {
        check_keys({"n", "weighting"});
        WeightedMajority c{int_field(j, "n", default_n)};
        if (j.contains("weighting")) {
            auto w = j.at("weighting").get<std::string>();
            if (w == "inverse_length") c.weighting = VoteWeighting::inverse_length;
            else if (w == "rank") c.weighting = VoteWeighting::rank;
            else if (w == "exponential_decay") c.weighting = VoteWeighting::exponential_decay;
            else throw ValidationError("weighting", "unknown weighting '" + w + "'");
        }
        config = c;
    } else if (kind == "majority_topk") {
        check_keys({"n", "k"});
        int n = int_field(j, "n", default_n);
        config = MajorityTopK{n, int_field(j, "k", default_top_k(n))};
    } else if (kind == "best_of_n") {
        check_keys({"n", "judge_repeats"});
        config = BestOfN{int_field(j, "n", default_n), int_field(j, "judge_repeats", default_judge_repeats)};
    } else if (kind == "sequential_revisions") {
        check_keys({"length", "selection"});
        SequentialRevisions c{int_field(j, "length", SequentialRevisions{}.length)};
        if (j.contains("selection")) {
            auto s = j.at("selection").get<std::string>();
            if (s == "last") c.selection = RevisionSelection::last;
            else if (s == "best") c.selection = RevisionSelection::best;
            else throw ValidationError("selection", "must be 'last' or 'best'");
        }
        config = c;
    } else if (kind == "parallel_sequential") {
        check_keys({"chains", "length"});
        config = ParallelSequential{int_field(j, "chains", ParallelSequential{}.chains),
                                    int_field(j, "length", ParallelSequential{}.length)};
    } else if (kind == "plansearch") {
        check_keys({"observations", "derived"});
        config = PlanSearch{int_field(j, "observations", 3), int_field(j, "derived", 2)};
    } else if (kind == "pvgame") {
        check_keys({"per_round", "rounds"});
        config = PVGame{int_field(j, "per_round", 3), int_field(j, "rounds", 1)};
    } else if (kind == "moa") {
        check_keys({"proposers", "layers"});
        config = MoA{int_field(j, "proposers", 4), int_field(j, "layers", 1)};
    } else if (kind == "reasoning_truncation") {
        check_keys({"budget_tokens"});
        config = ReasoningTruncation{int_field(j, "budget_tokens", ReasoningTruncation{}.budget_tokens)};
    } else {
        throw ValidationError("kind", "unknown strategy kind '" + kind + "'");
    }
    validate(config);
    return config;
}

void strip_latency(json& j) {
    if (j.is_object()) {
        j.erase("latency_ms");
        for (auto& item : j.items()) strip_latency(item.value());
    } else if (j.is_array()) {
        for (auto& v : j) strip_latency(v);
    }
}

} // namespace itc
