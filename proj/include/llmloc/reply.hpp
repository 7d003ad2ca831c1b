#pragma once

#include "llmloc/common.hpp"
#include "llmloc/gateway.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace llmloc {

/// Body of the first ``` fenced block, without the fence lines. An info string
/// after the opening fence is ignored.
std::optional<std::string> extract_fenced_block(std::string_view text);

/// Non-blank, trimmed lines of the first fenced block.
std::optional<std::vector<std::string>> fenced_lines(std::string_view text);

/// Appended to a prompt when the first reply could not be parsed.
inline constexpr std::string_view kFormatReminder =
    "\n\nYour previous reply could not be parsed. Reply with exactly one fenced block in the format shown above "
    "and nothing else.\n";

/// Send `req`; if `parse` rejects the reply, send once more with the format
/// reminder appended. Returns nullopt after the second failure, with a warning
/// in `sink`. Gateway errors propagate.
template <class T>
std::optional<T> ask_parsed(Gateway& gateway, const ChatRequest& req,
                            const std::function<std::optional<T>(std::string_view)>& parse, DiagnosticSink& sink,
                            const std::string& stage) {
    if (auto first = parse(gateway.complete(req).text)) return first;
    ChatRequest again = req;
    again.rendered_prompt += kFormatReminder;
    if (auto second = parse(gateway.complete(again).text)) return second;
    sink.warn(stage, "unparseable model reply after one retry (" + req.template_id + ")");
    return std::nullopt;
}

}  // namespace llmloc
