#pragma once

#include "itc/domain.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace itc {

inline constexpr std::string_view think_open = "<think>";
inline constexpr std::string_view think_close = "</think>";

using Rational = boost::multiprecision::cpp_rational;

struct ThinkSplit {
    std::optional<std::string> reasoning;
    std::string answer_part;

    bool operator==(const ThinkSplit&) const = default;
};

/// Splits on the first open delimiter and the first close delimiter after
/// it. An unterminated trace yields reasoning = everything after the open
/// delimiter and an empty answer part. Text preceding the open delimiter, if
/// any, is kept at the front of the answer part.
ThinkSplit extract_think(std::string_view text);

enum class BoxedStatus { found, absent, unbalanced };

struct BoxedExtraction {
    BoxedStatus status = BoxedStatus::absent;
    std::string content;
};

/// Contents of the last `\boxed{...}` in `text`, matched by brace depth.
BoxedExtraction find_last_boxed(std::string_view text);

/// As find_last_boxed, collapsing the unbalanced case to nullopt (logged).
std::optional<std::string> extract_boxed(std::string_view text);

/// Last standalone A-D letter inside an answer declaration ("answer is X",
/// "(X)", "\boxed{X}", "pick X", "final: X", ...). Returned uppercased.
std::optional<char> extract_choice(std::string_view text);

struct NormalizedAnswer {
    std::string canonical;
    std::optional<Rational> numeric_value;

    bool operator==(const NormalizedAnswer&) const = default;
};

/// Strips whitespace, `$`, sizing commands (`\left`, `\right`,
/// `\displaystyle`, `\dfrac`/`\tfrac`), `\text{}` wrappers and trailing
/// periods, then parses integers, decimals, `a/b` and `\frac{a}{b}` into an
/// exact rational in lowest terms.
NormalizedAnswer normalize_math(std::string_view raw);

/// Multiple-choice answers normalize to a single uppercase letter when one
/// can be read ("(c)", " C ", "c"); otherwise to the stripped text.
NormalizedAnswer normalize_choice(std::string_view raw);

/// Equal canonical forms, or both numeric and equal as rationals. No
/// symbolic algebra: "x+1" and "1+x" are different answers.
bool answers_equivalent(const NormalizedAnswer& a, const NormalizedAnswer& b);

/// Pulls the answer out of the post-reasoning part of a completion according
/// to the task kind (boxed expression for math, declared letter otherwise).
std::optional<NormalizedAnswer> extract_answer(std::string_view answer_text, TaskKind kind);

NormalizedAnswer normalize_gold(std::string_view gold, TaskKind kind);

bool is_correct(const std::optional<NormalizedAnswer>& answer, std::string_view gold, TaskKind kind);

std::string to_string(const Rational& value);
std::optional<Rational> parse_rational(std::string_view text);

} // namespace itc
