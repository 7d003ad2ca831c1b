#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace llmloc {

/// File roles in an LLM workflow.
enum class AnnotationType { llm_prompt, llm_call, llm_config, llm_tool, llm_memory };

inline constexpr std::array<AnnotationType, 5> kAllAnnotationTypes{
    AnnotationType::llm_prompt, AnnotationType::llm_call, AnnotationType::llm_config, AnnotationType::llm_tool,
    AnnotationType::llm_memory};

std::string_view to_string(AnnotationType t);
std::optional<AnnotationType> parse_annotation_type(std::string_view s);

struct Annotation {
    AnnotationType type = AnnotationType::llm_prompt;
    std::string phrase;
    std::vector<std::string> keywords;

    bool operator==(const Annotation&) const = default;
};

}  // namespace llmloc
