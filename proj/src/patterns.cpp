#include "llmloc/patterns.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <set>

using nlohmann::json;

namespace llmloc {
namespace {

struct BuiltinKeyword {
    AnnotationType type;
    const char* keyword;
};

// Curated from common LLM frameworks (LangChain, LlamaIndex, AutoGen, OpenAI SDK).
// Bump kDefaultPatternSetVersion when editing.
constexpr BuiltinKeyword kBuiltins[] = {
    {AnnotationType::llm_prompt, "system"},
    {AnnotationType::llm_prompt, "user"},
    {AnnotationType::llm_prompt, "prompt"},
    {AnnotationType::llm_prompt, "instruction"},
    {AnnotationType::llm_prompt, "instructions"},
    {AnnotationType::llm_prompt, "system_prompt"},
    {AnnotationType::llm_prompt, "PromptTemplate"},
    {AnnotationType::llm_prompt, "ChatPromptTemplate"},
    {AnnotationType::llm_prompt, "SystemMessage"},
    {AnnotationType::llm_prompt, "HumanMessage"},
    {AnnotationType::llm_call, "ChatOpenAI"},
    {AnnotationType::llm_call, "AzureChatOpenAI"},
    {AnnotationType::llm_call, "ChatAnthropic"},
    {AnnotationType::llm_call, "agenerate"},
    {AnnotationType::llm_call, "invoke"},
    {AnnotationType::llm_call, "ainvoke"},
    {AnnotationType::llm_call, "completion"},
    {AnnotationType::llm_call, "ChatCompletion"},
    {AnnotationType::llm_call, "LLMChain"},
    {AnnotationType::llm_call, "AssistantAgent"},
    {AnnotationType::llm_config, "model_name"},
    {AnnotationType::llm_config, "temperature"},
    {AnnotationType::llm_config, "api_key"},
    {AnnotationType::llm_config, "max_tokens"},
    {AnnotationType::llm_config, "OPENAI_API_KEY"},
    {AnnotationType::llm_config, "llm_config"},
    {AnnotationType::llm_config, "ServiceContext"},
    {AnnotationType::llm_tool, "@tool"},
    {AnnotationType::llm_tool, "register_tool"},
    {AnnotationType::llm_tool, "StructuredTool"},
    {AnnotationType::llm_tool, "FunctionTool"},
    {AnnotationType::llm_tool, "register_function"},
    {AnnotationType::llm_tool, "tool_calls"},
    {AnnotationType::llm_memory, "ConversationBufferMemory"},
    {AnnotationType::llm_memory, "ConversationSummaryMemory"},
    {AnnotationType::llm_memory, "VectorStore"},
    {AnnotationType::llm_memory, "VectorStoreIndex"},
    {AnnotationType::llm_memory, "chat_history"},
    {AnnotationType::llm_memory, "Chroma"},
    {AnnotationType::llm_memory, "FAISS"},
};

bool learned_less(const PatternEntry& a, const PatternEntry& b) {
    return std::tie(a.type, a.keyword) < std::tie(b.type, b.keyword);
}

std::regex compile(const std::string& src) {
    return std::regex(src, std::regex::ECMAScript | std::regex::optimize);
}

}  // namespace

std::string keyword_to_pattern(std::string_view keyword) {
    if (keyword.empty()) throw Error(ErrorKind::usage, "empty keyword cannot become a pattern");
    static constexpr std::string_view meta = R"(^$\.*+?()[]{}|/)";
    std::string out;
    if (is_word_char(keyword.front())) out += R"(\b)";
    for (char c : keyword) {
        if (meta.find(c) != std::string_view::npos) out.push_back('\\');
        out.push_back(c);
    }
    if (is_word_char(keyword.back())) out += R"(\b)";
    return out;
}

PatternLibrary PatternLibrary::with_defaults() {
    PatternLibrary lib;
    for (const auto& b : kBuiltins) {
        lib.add_entry({b.type, b.keyword, keyword_to_pattern(b.keyword), PatternOrigin::builtin, ""});
    }
    return lib;
}

void PatternLibrary::add_entry(PatternEntry e) {
    compiled_.push_back(compile(e.regex_source));
    entries_.push_back(std::move(e));
}

void PatternLibrary::sort_learned() {
    auto first = std::find_if(entries_.begin(), entries_.end(),
                              [](const PatternEntry& e) { return e.origin == PatternOrigin::learned; });
    std::vector<PatternEntry> learned(first, entries_.end());
    entries_.erase(first, entries_.end());
    compiled_.resize(entries_.size());
    std::sort(learned.begin(), learned.end(), learned_less);
    for (auto& e : learned) add_entry(std::move(e));
}

std::vector<PatternEntry> PatternLibrary::learned() const {
    std::vector<PatternEntry> out;
    for (const auto& e : entries_)
        if (e.origin == PatternOrigin::learned) out.push_back(e);
    return out;
}

bool PatternLibrary::add_learned(const std::vector<std::pair<AnnotationType, std::string>>& keywords,
                                 const std::string& timestamp) {
    bool changed = false;
    for (const auto& [type, kw] : keywords) {
        if (kw.empty()) continue;
        bool skip = false;
        std::vector<std::size_t> absorbed;
        for (std::size_t i = 0; i < entries_.size() && !skip; ++i) {
            const auto& e = entries_[i];
            if (e.type != type) continue;
            if (e.keyword == kw) {
                skip = true;
            } else if (e.origin == PatternOrigin::learned) {
                if (starts_with(kw, e.keyword)) skip = true;          // existing one is shorter
                else if (starts_with(e.keyword, kw)) absorbed.push_back(i);  // new one is shorter
            }
        }
        if (skip) continue;
        for (auto it = absorbed.rbegin(); it != absorbed.rend(); ++it) {
            entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(*it));
            compiled_.erase(compiled_.begin() + static_cast<std::ptrdiff_t>(*it));
        }
        add_entry({type, kw, keyword_to_pattern(kw), PatternOrigin::learned, timestamp});
        changed = true;
    }
    if (changed) sort_learned();
    return changed;
}

std::vector<std::string> PatternLibrary::keywords() const {
    std::set<std::string> s;
    for (const auto& e : entries_) s.insert(e.keyword);
    return {s.begin(), s.end()};
}

MatchProfile PatternLibrary::match(TextDoc doc) const {
    MatchProfile p;
    p.file_line_count = doc.line_count;
    const char* begin = doc.text.data();
    const char* end = begin + doc.text.size();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        auto n = static_cast<std::size_t>(std::distance(std::cregex_iterator(begin, end, compiled_[i]), std::cregex_iterator()));
        p.per_type[static_cast<std::size_t>(entries_[i].type)] += n;
        p.total_matches += n;
    }
    return p;
}

MatchProfile match_file(const PatternLibrary& lib, const FileRecord& file) {
    return lib.match({file.content, file.line_count});
}

double coverage(const MatchProfile& p) {
    auto matched = std::count_if(p.per_type.begin(), p.per_type.end(), [](std::size_t c) { return c > 0; });
    return static_cast<double>(matched) / static_cast<double>(p.per_type.size());
}

double density(const MatchProfile& p) {
    double lines = static_cast<double>(std::max<std::size_t>(1, p.file_line_count));
    return std::min(1.0, static_cast<double>(p.total_matches) / lines);
}

double seed_score(const MatchProfile& p, const SeedScoreConfig& cfg) {
    return cfg.w_c * coverage(p) + cfg.w_d * density(p);
}

std::vector<MatchProfile> match_files(const PatternLibrary& lib, const std::vector<TextDoc>& docs) {
    std::vector<MatchProfile> out(docs.size());
    const auto n = static_cast<std::ptrdiff_t>(docs.size());
#pragma omp parallel for schedule(dynamic, 2)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = lib.match(docs[static_cast<std::size_t>(i)]);
    }
    return out;
}

std::vector<MatchProfile> match_files_serial(const PatternLibrary& lib, const std::vector<TextDoc>& docs) {
    std::vector<MatchProfile> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(lib.match(d));
    return out;
}

// ---------------------------------------------------------------------------
// persistence

std::string serialize_library(const PatternLibrary& lib) {
    json doc;
    doc["version"] = kPatternFileVersion;
    doc["learned"] = json::array();
    for (const auto& e : lib.learned()) {
        doc["learned"].push_back(
            {{"type", to_string(e.type)}, {"keyword", e.keyword}, {"regex", e.regex_source}, {"added_at", e.added_at}});
    }
    return doc.dump(1) + "\n";
}

PatternLibrary parse_library(std::string_view text) {
    auto fail = [](const std::string& where, const std::string& what) -> PatternLibrary {
        throw Error(ErrorKind::parse, "patterns.json: " + where + ": " + what);
    };
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        return fail("document", e.what());
    }
    if (!doc.is_object() || !doc.contains("version") || !doc["version"].is_number_integer())
        return fail("document", "missing integer 'version'");
    if (doc["version"].get<int>() != kPatternFileVersion) return fail("document", "unsupported version");
    if (!doc.contains("learned") || !doc["learned"].is_array()) return fail("document", "missing array 'learned'");

    PatternLibrary lib = PatternLibrary::with_defaults();
    const auto& learned = doc["learned"];
    for (std::size_t i = 0; i < learned.size(); ++i) {
        const auto& r = learned[i];
        std::string where = "learned[" + std::to_string(i) + "]";
        for (const char* key : {"type", "keyword", "regex", "added_at"})
            if (!r.is_object() || !r.contains(key) || !r[key].is_string())
                return fail(where, std::string("missing string field '") + key + "'");
        auto type = parse_annotation_type(r["type"].get<std::string>());
        if (!type) return fail(where, "unknown annotation type '" + r["type"].get<std::string>() + "'");
        auto kw = r["keyword"].get<std::string>();
        if (kw.empty()) return fail(where, "empty keyword");
        if (r["regex"].get<std::string>() != keyword_to_pattern(kw))
            return fail(where, "regex does not match the escaped keyword");
        lib.add_learned({{*type, kw}}, r["added_at"].get<std::string>());
    }
    return lib;
}

PatternLibrary load_library(const std::string& path) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return PatternLibrary::with_defaults();
    return parse_library(read_file(path));
}

void save_library(const PatternLibrary& lib, const std::string& path) { write_file(path, serialize_library(lib)); }

}  // namespace llmloc
