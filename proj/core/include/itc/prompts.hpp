#pragma once

#include "itc/domain.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace itc {

/// Prompt text assets compiled in from core/prompts/*.txt.
namespace assets {
extern const std::string_view judge;
extern const std::string_view clarity_judge;
extern const std::string_view revision_feedback;
extern const std::string_view revision;
extern const std::string_view instruction_math;
extern const std::string_view instruction_choice;
extern const std::string_view solve;
extern const std::string_view plansearch_observe;
extern const std::string_view plansearch_derive;
extern const std::string_view plansearch_solve;
extern const std::string_view pvgame_helpful;
extern const std::string_view pvgame_sneaky;
extern const std::string_view pvgame_guided;
extern const std::string_view moa_refine;
extern const std::string_view moa_final;
} // namespace assets

using TemplateValues = std::map<std::string, std::string, std::less<>>;

/// Single-pass substitution: `{name}` is replaced by its value (names may
/// contain spaces), `{{` and `}}` become literal braces, and substituted
/// values are never re-scanned. Other braces are copied through. A
/// placeholder without a value throws ValidationError.
std::string render_template(std::string_view tpl, const TemplateValues& values);

std::string_view answer_instruction(TaskKind kind);

std::string render_solve(std::string_view question, TaskKind kind);
std::string render_feedback(std::string_view question, std::string_view previous_response);
std::string render_revision(std::string_view question, std::string_view previous_response,
                            std::string_view feedback);

/// "[Response 1]\n...\n\n[Response 2]\n..." block used by aggregation prompts.
std::string format_numbered(const std::vector<std::string>& items, std::string_view label);

} // namespace itc
