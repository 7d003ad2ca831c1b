#pragma once

#include <map>
#include <string>

namespace llmloc {

/// Templates compiled into the binary from prompts/*.txt, keyed by file stem
/// (`annotate.v1`, `counterfactual.v1`, ...).
const std::map<std::string, std::string>& embedded_templates();

/// A set of prompt templates. The id includes the version, so editing a template
/// and bumping its version changes every request hash that uses it.
class PromptSet {
public:
    /// Embedded templates only.
    PromptSet();
    /// Embedded templates overridden by any `*.txt` found in `dir`.
    static PromptSet from_directory(const std::string& dir);

    const std::string& get(const std::string& id) const;

    /// Substitute `{{NAME}}` placeholders. Throws Error(invariant) on a placeholder
    /// with no value, so templates and callers cannot drift apart silently.
    std::string render(const std::string& id, const std::map<std::string, std::string>& vars) const;

private:
    std::map<std::string, std::string> templates_;
};

}  // namespace llmloc
