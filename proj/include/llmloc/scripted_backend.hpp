#pragma once

#include "llmloc/gateway.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace llmloc {

/// Canned answers for one defect, keyed by what the prompt asks about.
///
/// {
///   "annotate":       {"path": [["LLM_CALL", "phrase", "kw1, kw2"], ...], ...},
///   "infer":          ["path", ...],
///   "retrieve":       ["LLM_PROMPT", ...],
///   "counterfactual": {"path": [9.1, "rationale"], ...},
///   "pairwise_order": ["closest path", ...]
/// }
struct AnswerScript {
    struct Label {
        std::string role;
        std::string phrase;
        std::string keywords;
    };
    std::map<std::string, std::vector<Label>> annotate;
    std::vector<std::string> infer;
    std::vector<std::string> retrieve;
    std::map<std::string, std::pair<double, std::string>> counterfactual;
    std::vector<std::string> pairwise_order;

    static AnswerScript parse(std::string_view text);
    static AnswerScript load(const std::string& path);
};

/// Offline stand-in for a model: reads the paths a prompt is about and answers
/// from the script. A prompt about a path the script does not cover is an error,
/// so gaps in a script surface while recording rather than as silent defaults.
class ScriptedBackend final : public ChatBackend {
public:
    explicit ScriptedBackend(AnswerScript script) : script_(std::move(script)) {}
    BackendReply send(const ChatRequest& req) override;
    std::string id() const override { return "scripted"; }

    std::string answer(const ChatRequest& req) const;

private:
    AnswerScript script_;
};

}  // namespace llmloc
