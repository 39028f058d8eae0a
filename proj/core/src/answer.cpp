#include "itc/answer.hpp"

#include "itc/text.hpp"

#include <spdlog/spdlog.h>

#include <array>
#include <cctype>
#include <regex>

namespace itc {

ThinkSplit extract_think(std::string_view text) {
    auto open = text.find(think_open);
    if (open == std::string_view::npos) return {std::nullopt, std::string(text)};

    std::string prefix(text.substr(0, open));
    auto body_start = open + think_open.size();
    auto close = text.find(think_close, body_start);
    if (close == std::string_view::npos) return {std::string(text.substr(body_start)), prefix};

    return {std::string(text.substr(body_start, close - body_start)),
            prefix + std::string(text.substr(close + think_close.size()))};
}

BoxedExtraction find_last_boxed(std::string_view text) {
    static constexpr std::string_view command = "\\boxed{";
    auto pos = text.rfind(command);
    if (pos == std::string_view::npos) return {BoxedStatus::absent, {}};

    auto start = pos + command.size();
    int depth = 1;
    for (auto i = start; i < text.size(); ++i) {
        if (text[i] == '{') {
            ++depth;
        } else if (text[i] == '}') {
            if (--depth == 0) return {BoxedStatus::found, std::string(text.substr(start, i - start))};
        }
    }
    return {BoxedStatus::unbalanced, {}};
}

std::optional<std::string> extract_boxed(std::string_view text) {
    auto result = find_last_boxed(text);
    if (result.status == BoxedStatus::unbalanced) {
        spdlog::debug("unbalanced braces in last \\boxed command; treating as absent");
        return std::nullopt;
    }
    if (result.status == BoxedStatus::absent) return std::nullopt;
    return std::move(result.content);
}

std::optional<char> extract_choice(std::string_view text) {
    using std::regex_constants::icase;
    using std::regex_constants::ECMAScript;
    static const std::array<std::regex, 5> patterns = {
        std::regex(R"(answer\s*(?:is|:)\s*(?:option\s+|choice\s+)?\(?([a-d])\)?(?![a-z0-9]))", ECMAScript | icase),
        std::regex(R"(\(([a-d])\))", ECMAScript | icase),
        std::regex(R"(\\boxed\{\s*(?:\\text(?:bf)?\{\s*)?\(?([a-d])\)?\s*\}?\s*\})", ECMAScript | icase),
        std::regex(R"(\b(?:pick|choose|select|go with)\s+(?:option\s+|choice\s+)?\(?([a-d])\)?(?=\s*(?:$|[.,;:!?\n])))",
                   ECMAScript | icase),
        std::regex(R"(\bfinal(?:\s+answer)?\s*(?:is|:)\s*(?:option\s+|choice\s+)?\(?([a-d])\)?(?![a-z0-9]))",
                   ECMAScript | icase),
    };

    std::optional<char> best;
    std::ptrdiff_t best_pos = -1;
    std::string haystack(text);
    for (const auto& re : patterns) {
        for (auto it = std::sregex_iterator(haystack.begin(), haystack.end(), re); it != std::sregex_iterator();
             ++it) {
            auto pos = it->position(1);
            if (pos > best_pos) {
                best_pos = pos;
                best = static_cast<char>(std::toupper(static_cast<unsigned char>(haystack[pos])));
            }
        }
    }
    return best;
}

namespace {

void erase_all(std::string& s, std::string_view what) {
    for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos)) s.erase(pos, what.size());
}

// Removes `\cmd` only where it is not the prefix of a longer command name.
void erase_command(std::string& s, std::string_view command) {
    for (auto pos = s.find(command); pos != std::string::npos; pos = s.find(command, pos)) {
        auto end = pos + command.size();
        if (end < s.size() && std::isalpha(static_cast<unsigned char>(s[end]))) {
            pos = end;
            continue;
        }
        s.erase(pos, command.size());
    }
}

void replace_all(std::string& s, std::string_view what, std::string_view with) {
    for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos + with.size()))
        s.replace(pos, what.size(), with);
}

// `\cmd{inner}` -> `inner` for text-style wrappers.
void unwrap_command(std::string& s, std::string_view command) {
    std::string open = std::string(command) + "{";
    for (auto pos = s.find(open); pos != std::string::npos; pos = s.find(open, pos)) {
        auto start = pos + open.size();
        int depth = 1;
        std::size_t i = start;
        for (; i < s.size(); ++i) {
            if (s[i] == '{') ++depth;
            if (s[i] == '}' && --depth == 0) break;
        }
        if (i >= s.size()) return;
        s = s.substr(0, pos) + s.substr(start, i - start) + s.substr(i + 1);
    }
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

/// Decimal digit string to an integer. The string constructor of cpp_int
/// treats a leading 0 as an octal prefix, so leading zeros are dropped first.
boost::multiprecision::cpp_int decimal_digits(std::string_view digits) {
    auto first = digits.find_first_not_of('0');
    if (first == std::string_view::npos) return 0;
    return boost::multiprecision::cpp_int{std::string(digits.substr(first))};
}

std::optional<boost::multiprecision::cpp_int> parse_integer(std::string_view s) {
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    if (!all_digits(s)) return std::nullopt;
    auto value = decimal_digits(s);
    return negative ? -value : value;
}

std::optional<Rational> parse_decimal(std::string_view s) {
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    auto dot = s.find('.');
    if (dot == std::string_view::npos) return std::nullopt;
    auto whole = s.substr(0, dot);
    auto frac = s.substr(dot + 1);
    if (whole.empty() && frac.empty()) return std::nullopt;
    if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac))) return std::nullopt;

    auto digits = decimal_digits(std::string(whole) + std::string(frac));
    boost::multiprecision::cpp_int scale = boost::multiprecision::pow(boost::multiprecision::cpp_int(10),
                                                                      static_cast<unsigned>(frac.size()));
    Rational value(digits, scale);
    return negative ? Rational(-value) : value;
}

std::optional<Rational> make_fraction(std::string_view num, std::string_view den) {
    auto n = parse_integer(num);
    auto d = parse_integer(den);
    if (!n || !d || *d == 0) return std::nullopt;
    return Rational(*n, *d);
}

std::optional<Rational> parse_numeric(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (auto i = parse_integer(s)) return Rational(*i);
    if (auto d = parse_decimal(s)) return d;

    bool negative = false;
    std::string_view body = s;
    if (body.front() == '-' || body.front() == '+') {
        negative = body.front() == '-';
        body.remove_prefix(1);
    }

    std::optional<Rational> value;
    static constexpr std::string_view frac = "\\frac{";
    if (body.substr(0, frac.size()) == frac) {
        auto num_end = body.find('}', frac.size());
        if (num_end == std::string_view::npos || num_end + 1 >= body.size() || body[num_end + 1] != '{')
            return std::nullopt;
        auto den_start = num_end + 2;
        auto den_end = body.find('}', den_start);
        if (den_end == std::string_view::npos || den_end + 1 != body.size()) return std::nullopt;
        value = make_fraction(body.substr(frac.size(), num_end - frac.size()),
                              body.substr(den_start, den_end - den_start));
    } else if (auto slash = body.find('/'); slash != std::string_view::npos) {
        auto num = body.substr(0, slash);
        auto den = body.substr(slash + 1);
        if (all_digits(num) && all_digits(den)) value = make_fraction(num, den);
    }
    if (value && negative) *value = -*value;
    return value;
}

bool is_grouped_number(std::string_view s) {
    static const std::regex grouped(R"(^[+-]?\d{1,3}(,\d{3})+(\.\d+)?$)");
    return std::regex_match(s.begin(), s.end(), grouped);
}

bool is_word(std::string_view s) {
    return s.size() >= 2 &&
           std::all_of(s.begin(), s.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
}

} // namespace

NormalizedAnswer normalize_math(std::string_view raw) {
    std::string s(trim(raw));
    erase_all(s, "$");
    erase_command(s, "\\left");
    erase_command(s, "\\right");
    erase_command(s, "\\displaystyle");
    replace_all(s, "\\dfrac", "\\frac");
    replace_all(s, "\\tfrac", "\\frac");
    for (std::string_view spacing : {"\\!", "\\,", "\\;", "\\:"}) erase_all(s, spacing);
    erase_command(s, "\\quad");
    for (std::string_view wrapper : {"\\text", "\\textbf", "\\mathrm", "\\mbox"}) unwrap_command(s, wrapper);

    std::erase_if(s, [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
    while (!s.empty() && s.back() == '.') s.pop_back();
    if (is_grouped_number(s)) std::erase(s, ',');
    if (is_word(s)) s = to_lower_ascii(s);

    NormalizedAnswer out;
    out.numeric_value = parse_numeric(s);
    out.canonical = std::move(s);
    return out;
}

NormalizedAnswer normalize_choice(std::string_view raw) {
    std::string s(trim(raw));
    std::string core = s;
    std::erase_if(core, [](char c) { return c == '(' || c == ')' || std::isspace(static_cast<unsigned char>(c)); });
    while (!core.empty() && core.back() == '.') core.pop_back();
    if (core.size() == 1 && std::isalpha(static_cast<unsigned char>(core[0])))
        return {to_upper_ascii(core), std::nullopt};
    if (auto letter = extract_choice(s)) return {std::string(1, *letter), std::nullopt};
    return {s, std::nullopt};
}

bool answers_equivalent(const NormalizedAnswer& a, const NormalizedAnswer& b) {
    if (a.canonical == b.canonical) return true;
    return a.numeric_value && b.numeric_value && *a.numeric_value == *b.numeric_value;
}

std::optional<NormalizedAnswer> extract_answer(std::string_view answer_text, TaskKind kind) {
    if (kind == TaskKind::multiple_choice) {
        if (auto letter = extract_choice(answer_text)) return NormalizedAnswer{std::string(1, *letter), std::nullopt};
        return std::nullopt;
    }
    auto boxed = extract_boxed(answer_text);
    if (!boxed) return std::nullopt;
    auto normalized = normalize_math(*boxed);
    if (normalized.canonical.empty()) return std::nullopt;
    return normalized;
}

NormalizedAnswer normalize_gold(std::string_view gold, TaskKind kind) {
    return kind == TaskKind::multiple_choice ? normalize_choice(gold) : normalize_math(gold);
}

bool is_correct(const std::optional<NormalizedAnswer>& answer, std::string_view gold, TaskKind kind) {
    return answer && answers_equivalent(*answer, normalize_gold(gold, kind));
}

std::string to_string(const Rational& value) {
    return value.str();
}

std::optional<Rational> parse_rational(std::string_view text) {
    auto slash = text.find('/');
    if (slash == std::string_view::npos) {
        auto i = parse_integer(text);
        if (!i) return std::nullopt;
        return Rational(*i);
    }
    return make_fraction(text.substr(0, slash), text.substr(slash + 1));
}

} // namespace itc
