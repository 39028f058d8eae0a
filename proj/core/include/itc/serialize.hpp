#pragma once

#include "itc/answer.hpp"
#include "itc/domain.hpp"

#include <nlohmann/json.hpp>

namespace itc {

using json = nlohmann::json;

void to_json(json& j, const Query& q);
void from_json(const json& j, Query& q);
void to_json(json& j, const GenerationParams& p);
void from_json(const json& j, GenerationParams& p);
void to_json(json& j, const ModelResponse& r);
void from_json(const json& j, ModelResponse& r);
void to_json(json& j, const JudgedResponse& r);
void from_json(const json& j, JudgedResponse& r);
void to_json(json& j, const NormalizedAnswer& a);
void from_json(const json& j, NormalizedAnswer& a);
void to_json(json& j, const Call& c);
void from_json(const json& j, Call& c);
void to_json(json& j, const RunRecord& r);
void from_json(const json& j, RunRecord& r);

json strategy_to_json(const StrategyConfig& config);

/// Parses a tagged strategy object ({"kind": "majority_topk", "n": 8}).
/// Omitted counts take the defaults for `model_kind` (n = 100 reasoning /
/// 256 non-reasoning, k = n/2, judge_repeats = 3, ...). Unknown keys and
/// invalid values raise ValidationError naming the field.
StrategyConfig strategy_from_json(const json& j, ModelKind model_kind = ModelKind::reasoning);

TaskKind task_kind_from_string(std::string_view s);
ModelKind model_kind_from_string(std::string_view s);
CallRole call_role_from_string(std::string_view s);

/// Removes every "latency_ms" member recursively; latency is the only
/// nondeterministic field of a record.
void strip_latency(json& j);

} // namespace itc
