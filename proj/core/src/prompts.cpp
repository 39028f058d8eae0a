#include "itc/prompts.hpp"

#include "itc/error.hpp"

namespace itc {

namespace {

bool is_name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == ' ';
}

} // namespace

std::string render_template(std::string_view tpl, const TemplateValues& values) {
    std::string out;
    out.reserve(tpl.size());
    std::size_t i = 0;
    while (i < tpl.size()) {
        char c = tpl[i];
        if (c == '{' && i + 1 < tpl.size() && tpl[i + 1] == '{') {
            out.push_back('{');
            i += 2;
            continue;
        }
        if (c == '}' && i + 1 < tpl.size() && tpl[i + 1] == '}') {
            out.push_back('}');
            i += 2;
            continue;
        }
        if (c == '{') {
            auto j = i + 1;
            while (j < tpl.size() && is_name_char(tpl[j])) ++j;
            if (j < tpl.size() && tpl[j] == '}' && j > i + 1) {
                auto name = tpl.substr(i + 1, j - i - 1);
                auto it = values.find(name);
                if (it == values.end()) throw ValidationError(std::string(name), "no value for template placeholder");
                out += it->second;
                i = j + 1;
                continue;
            }
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

std::string_view answer_instruction(TaskKind kind) {
    return kind == TaskKind::math ? assets::instruction_math : assets::instruction_choice;
}

std::string render_solve(std::string_view question, TaskKind kind) {
    return render_template(assets::solve,
                           {{"question", std::string(question)}, {"instruction", std::string(answer_instruction(kind))}});
}

std::string render_feedback(std::string_view question, std::string_view previous_response) {
    return render_template(assets::revision_feedback, {{"question", std::string(question)},
                                                       {"previous response", std::string(previous_response)}});
}

std::string render_revision(std::string_view question, std::string_view previous_response, std::string_view feedback) {
    return render_template(assets::revision, {{"question", std::string(question)},
                                              {"previous response", std::string(previous_response)},
                                              {"feedback", std::string(feedback)}});
}

std::string format_numbered(const std::vector<std::string>& items, std::string_view label) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += "\n\n";
        out += "[" + std::string(label) + " " + std::to_string(i + 1) + "]\n" + items[i];
    }
    return out;
}

} // namespace itc
