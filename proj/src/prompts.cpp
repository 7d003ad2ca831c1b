#include "llmloc/prompts.hpp"

#include "llmloc/common.hpp"

#include <filesystem>

namespace llmloc {

PromptSet::PromptSet() : templates_(embedded_templates()) {}

PromptSet PromptSet::from_directory(const std::string& dir) {
    PromptSet set;
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw Error(ErrorKind::io, "prompt directory not found: " + dir);
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        auto name = entry.path().filename().string();
        if (!entry.is_regular_file() || !name.ends_with(".txt")) continue;
        set.templates_[name.substr(0, name.size() - 4)] = read_file(entry.path().string());
    }
    return set;
}

const std::string& PromptSet::get(const std::string& id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) throw Error(ErrorKind::invariant, "unknown prompt template: " + id);
    return it->second;
}

std::string PromptSet::render(const std::string& id, const std::map<std::string, std::string>& vars) const {
    const std::string& tpl = get(id);
    std::string out;
    out.reserve(tpl.size());
    std::size_t pos = 0;
    while (pos < tpl.size()) {
        auto open = tpl.find("{{", pos);
        if (open == std::string::npos) {
            out.append(tpl, pos);
            break;
        }
        auto close = tpl.find("}}", open + 2);
        if (close == std::string::npos) throw Error(ErrorKind::invariant, id + ": unterminated placeholder");
        out.append(tpl, pos, open - pos);
        std::string key = tpl.substr(open + 2, close - open - 2);
        auto it = vars.find(key);
        if (it == vars.end()) throw Error(ErrorKind::invariant, id + ": no value for placeholder " + key);
        out.append(it->second);
        pos = close + 2;
    }
    return out;
}

}  // namespace llmloc
