#include "llmloc/reply.hpp"

namespace llmloc {

std::optional<std::string> extract_fenced_block(std::string_view text) {
    auto open = text.find("```");
    if (open == std::string_view::npos) return std::nullopt;
    auto body = text.find('\n', open);
    if (body == std::string_view::npos) return std::nullopt;
    ++body;
    // the closing fence must start a line
    std::size_t pos = body;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        auto line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        if (starts_with(trim(line), "```")) return std::string(text.substr(body, pos - body));
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    return std::nullopt;
}

std::optional<std::vector<std::string>> fenced_lines(std::string_view text) {
    auto block = extract_fenced_block(text);
    if (!block) return std::nullopt;
    std::vector<std::string> out;
    for (auto line : split_lines(*block)) {
        auto t = trim(line);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

}  // namespace llmloc
