#include "llmloc/analyzer.hpp"

#include "llmloc/reply.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <regex>

namespace llmloc {

namespace {

const std::regex& frame_re() {
    static const std::regex re(R"re(File "([^"]+)", line \d+)re");
    return re;
}

const std::regex& path_line_re() {
    static const std::regex re(R"re(([A-Za-z0-9_.~/\\-]*[A-Za-z0-9_]\.[A-Za-z][A-Za-z0-9]*):\d+)re");
    return re;
}

const std::regex& segment_re() {
    static const std::regex re(R"re([A-Za-z0-9_.~/\\-]*[A-Za-z0-9_]\.[A-Za-z][A-Za-z0-9]*)re");
    return re;
}

const std::regex& quoted_re() {
    static const std::regex re(R"re([`'"]([^`'"\s]+)[`'"])re");
    return re;
}

bool is_trace_line(std::string_view line) {
    std::cmatch m;
    return std::regex_search(line.begin(), line.end(), m, frame_re()) ||
           std::regex_search(line.begin(), line.end(), m, path_line_re());
}

std::set<std::string> default_extensions() {
    IngestConfig cfg;
    std::set<std::string> out = cfg.source_extensions;
    out.insert(cfg.text_extensions.begin(), cfg.text_extensions.end());
    return out;
}

}  // namespace

DefectDescription DefectDescription::from_text(std::string text, std::string instance_id) {
    DefectDescription d;
    d.instance_id = std::move(instance_id);
    d.raw_text = std::move(text);
    for (auto line : split_lines(d.raw_text))
        if (is_trace_line(line)) d.trace_lines.emplace_back(line);
    return d;
}

DefectDescription DefectDescription::from_file(const std::string& path) {
    std::string text = read_file(path);
    std::string id;
    auto t = trim(text);
    if (starts_with(t, "{")) {
        auto doc = nlohmann::json::parse(t, nullptr, false);
        if (!doc.is_discarded() && doc.is_object() && doc.contains("description")) {
            if (!doc["description"].is_string()) throw Error(ErrorKind::usage, path + ": 'description' must be a string");
            text = doc["description"].get<std::string>();
            id = doc.value("instance_id", std::string{});
        }
    }
    if (trim(text).empty()) throw Error(ErrorKind::usage, "defect description is empty: " + path);
    return from_text(std::move(text), std::move(id));
}

std::string_view to_string(EvidenceSource s) {
    switch (s) {
        case EvidenceSource::direct: return "direct";
        case EvidenceSource::inference: return "inference";
        case EvidenceSource::retrieval: return "retrieval";
    }
    return "?";
}

void AnalyzerConfig::validate() const {
    if (!(context_fraction > 0 && context_fraction <= 1))
        throw Error(ErrorKind::usage, "analyzer.context_fraction must lie in (0, 1]");
}

int confidence_level(bool direct, bool inference, bool retrieval) {
    if (direct) return 4;
    if (inference && retrieval) return 3;
    if (inference) return 2;
    if (retrieval) return 1;
    return 0;
}

std::size_t CandidateFile::best_rank() const {
    std::size_t best = SIZE_MAX;
    for (const auto& r : ranks)
        if (r) best = std::min(best, *r);
    return best;
}

std::vector<EvidenceSource> CandidateFile::sources() const {
    std::vector<EvidenceSource> out;
    for (auto s : {EvidenceSource::direct, EvidenceSource::inference, EvidenceSource::retrieval})
        if (has(s)) out.push_back(s);
    return out;
}

// ---------------------------------------------------------------------------
// direct extraction

std::vector<FileMention> find_file_mentions(std::string_view text, const std::set<std::string>& extensions) {
    std::map<std::size_t, std::string> found;  // offset -> mention, longest wins
    auto keep = [&](std::size_t offset, std::string s) {
        while (!s.empty() && (s.back() == '.' || s.back() == '/')) s.pop_back();
        if (s.empty()) return;
        auto& slot = found[offset];
        if (s.size() > slot.size()) slot = std::move(s);
    };
    auto has_known_ext = [&](std::string_view s) { return extensions.contains(extension_of(s)); };

    const char* base = text.data();
    auto scan = [&](const std::regex& re, int group, bool check_ext) {
        for (std::cregex_iterator it(base, base + text.size(), re), end; it != end; ++it) {
            const auto& m = (*it)[group];
            std::string s = m.str();
            if (check_ext && !has_known_ext(s)) continue;
            keep(static_cast<std::size_t>(m.first - base), std::move(s));
        }
    };
    scan(frame_re(), 1, false);
    scan(path_line_re(), 1, false);
    scan(segment_re(), 0, true);
    scan(quoted_re(), 1, true);

    std::vector<FileMention> out;
    std::size_t covered_to = 0;
    for (auto& [offset, s] : found) {
        // a shorter match inside an earlier longer one is the same mention
        if (offset < covered_to) continue;
        covered_to = offset + s.size();
        out.push_back({std::move(s), offset});
    }
    return out;
}

std::optional<std::string> resolve_mention(const Graph& g, std::string_view mention, DiagnosticSink& sink) {
    const std::string norm = normalize_path(mention);
    if (norm.empty()) return std::nullopt;
    if (auto id = g.lookup_by_path(norm); id && is_file_kind(g.at(*id).kind)) return norm;

    std::vector<std::string> paths;
    for (const auto& id : g.file_nodes()) paths.push_back(g.at(id).path);

    // the mention ends with a repository path (absolute or foreign-rooted trace paths)
    std::string longest;
    for (const auto& p : paths)
        if (norm.size() > p.size() && norm.ends_with("/" + p) && p.size() > longest.size()) longest = p;
    if (!longest.empty()) return longest;

    // a repository path ends with the mention
    std::vector<std::string> hits;
    for (const auto& p : paths)
        if (p.ends_with("/" + norm)) hits.push_back(p);
    if (hits.size() == 1) return hits.front();
    if (hits.size() > 1) {
        sink.info("direct", "ambiguous file mention dropped: " + norm);
        return std::nullopt;
    }

    hits.clear();
    auto base = basename_of(norm);
    for (const auto& p : paths)
        if (basename_of(p) == base) hits.push_back(p);
    if (hits.size() == 1) return hits.front();
    if (hits.empty())
        sink.debug("direct", "file mention not in repository: " + norm);
    else
        sink.info("direct", "ambiguous basename dropped: " + norm);
    return std::nullopt;
}

std::vector<std::string> extract_direct(const DefectDescription& d, const Graph& g, DiagnosticSink& sink,
                                        const std::set<std::string>& extensions) {
    const auto exts = extensions.empty() ? default_extensions() : extensions;
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& m : find_file_mentions(d.raw_text, exts))
        if (auto p = resolve_mention(g, m.text, sink); p && seen.insert(*p).second) out.push_back(*p);
    return out;
}

// ---------------------------------------------------------------------------
// symptom-based inference

std::vector<std::string> repository_metadata(const Graph& g) {
    std::vector<std::string> lines;
    for (const auto& fid : g.file_nodes()) {
        const auto& file = g.at(fid);
        std::vector<std::string> functions;
        for (const auto& child : g.contained_in(fid)) {
            const auto& c = g.at(child);
            if (c.kind == NodeKind::function) functions.push_back(c.name);
            if (c.kind == NodeKind::class_def)
                for (const auto& m : g.contained_in(child))
                    if (g.at(m).kind == NodeKind::function) functions.push_back(c.name + "." + g.at(m).name);
        }
        std::sort(functions.begin(), functions.end());
        std::string roles;
        for (const auto& a : file.annotations) {
            if (!roles.empty()) roles += ", ";
            roles += to_string(a.type);
        }
        std::string fn_list;
        for (const auto& f : functions) {
            if (!fn_list.empty()) fn_list += ", ";
            fn_list += f;
        }
        lines.push_back("- " + file.path + " | " + (fn_list.empty() ? "-" : fn_list) + " | " +
                        (roles.empty() ? "-" : roles));
    }
    return lines;
}

namespace {

std::string strip_list_marker(std::string_view line) {
    auto t = trim(line);
    if (starts_with(t, "- ") || starts_with(t, "* ")) t = trim(t.substr(2));
    std::size_t digits = 0;
    while (digits < t.size() && std::isdigit(static_cast<unsigned char>(t[digits]))) ++digits;
    if (digits > 0 && digits + 1 < t.size() && (t[digits] == '.' || t[digits] == ')') && t[digits + 1] == ' ')
        t = trim(t.substr(digits + 2));
    if (t.size() >= 2 && t.front() == '`' && t.back() == '`') t = t.substr(1, t.size() - 2);
    return std::string(t);
}

std::optional<std::vector<std::string>> parse_path_list(std::string_view text) {
    auto lines = fenced_lines(text);
    if (!lines) return std::nullopt;
    std::vector<std::string> out;
    for (const auto& l : *lines) {
        auto s = strip_list_marker(l);
        // metadata lines echoed back keep only their path
        if (auto bar = s.find(" | "); bar != std::string::npos) s = std::string(trim(s.substr(0, bar)));
        if (!s.empty()) out.push_back(s);
    }
    return out;
}

std::optional<std::vector<AnnotationType>> parse_type_list(std::string_view text) {
    auto lines = fenced_lines(text);
    if (!lines || lines->empty()) return std::nullopt;
    std::set<AnnotationType> types;
    for (const auto& l : *lines) {
        auto t = parse_annotation_type(strip_list_marker(l));
        if (!t) return std::nullopt;
        types.insert(*t);
    }
    return std::vector<AnnotationType>(types.begin(), types.end());
}

std::vector<std::vector<std::string>> chunk_lines(const std::vector<std::string>& lines, double budget) {
    std::vector<std::vector<std::string>> chunks;
    std::vector<std::string> current;
    double used = 0;
    for (const auto& l : lines) {
        double t = static_cast<double>(estimate_tokens(l.size() + 1));
        if (!current.empty() && used + t > budget) {
            chunks.push_back(std::move(current));
            current.clear();
            used = 0;
        }
        current.push_back(l);
        used += t;
    }
    if (!current.empty()) chunks.push_back(std::move(current));
    return chunks;
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

}  // namespace

std::vector<std::string> infer_from_symptoms(const DefectDescription& d, const Graph& g, Gateway& gateway,
                                             const PromptSet& prompts, const AnalyzerConfig& cfg,
                                             DiagnosticSink& sink, std::size_t max_context_tokens) {
    auto metadata = repository_metadata(g);
    if (metadata.empty() || cfg.k_i == 0) return {};
    const double budget = cfg.context_fraction * static_cast<double>(max_context_tokens) -
                          static_cast<double>(cfg.prompt_overhead_tokens + estimate_tokens(d.raw_text.size()));
    auto chunks = chunk_lines(metadata, budget);

    const std::function<std::optional<std::vector<std::string>>(std::string_view)> parse = parse_path_list;
    std::map<std::string, std::pair<std::size_t, std::size_t>> best;  // path -> (rank, chunk)
    for (std::size_t c = 0; c < chunks.size(); ++c) {
        ChatRequest req;
        req.template_id = kInferTemplate;
        req.rendered_prompt =
            prompts.render(kInferTemplate, {{"DESCRIPTION", d.raw_text}, {"METADATA", join_lines(chunks[c])}});
        req.tag = "infer";
        auto reply = ask_parsed(gateway, req, parse, sink, "infer");
        if (!reply) continue;
        std::size_t rank = 0;
        std::set<std::string> seen;
        for (const auto& raw : *reply) {
            auto p = normalize_path(raw);
            auto id = g.lookup_by_path(p);
            if (!id || !is_file_kind(g.at(*id).kind)) {
                sink.debug("infer", "model named a file that does not exist: " + raw);
                continue;
            }
            if (!seen.insert(p).second) continue;
            auto key = std::make_pair(rank++, c);
            auto [it, fresh] = best.emplace(p, key);
            if (!fresh && key < it->second) it->second = key;
        }
    }
    std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::string>> order;
    for (const auto& [p, key] : best) order.push_back({key, p});
    std::sort(order.begin(), order.end());
    std::vector<std::string> out;
    for (const auto& [key, p] : order) {
        if (out.size() == cfg.k_i) break;
        out.push_back(p);
    }
    return out;
}

// ---------------------------------------------------------------------------
// annotation-based retrieval

RetrievalResult retrieve_by_annotation(const DefectDescription& d, const Graph& g, const PatternLibrary& lib,
                                       Gateway& gateway, const PromptSet& prompts, const AnalyzerConfig& cfg,
                                       DiagnosticSink& sink) {
    RetrievalResult out;
    ChatRequest req;
    req.template_id = kRetrieveTemplate;
    req.rendered_prompt = prompts.render(kRetrieveTemplate, {{"DESCRIPTION", d.raw_text}});
    req.tag = "retrieve";
    const std::function<std::optional<std::vector<AnnotationType>>(std::string_view)> parse = parse_type_list;
    if (auto types = ask_parsed(gateway, req, parse, sink, "retrieve")) {
        out.predicted = *types;
    } else {
        sink.warn("retrieve", "falling back to all annotation types");
        out.predicted.assign(kAllAnnotationTypes.begin(), kAllAnnotationTypes.end());
    }

    std::set<NodeId> pool;
    for (auto t : out.predicted) {
        const auto& ids = g.files_with_annotation(t);
        pool.insert(ids.begin(), ids.end());
    }
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& id : pool) {
        const auto& n = g.at(id);
        std::string_view text = n.source_text ? std::string_view(*n.source_text) : std::string_view{};
        auto profile = lib.match({text, n.span ? n.span->end : count_lines(text)});
        ranked.push_back({-density(profile), n.path});
    }
    std::sort(ranked.begin(), ranked.end());
    for (const auto& [neg, p] : ranked) {
        if (out.files.size() == cfg.k_r) break;
        out.files.push_back(p);
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<CandidateFile> aggregate(const std::vector<std::string>& direct, const std::vector<std::string>& inferred,
                                     const std::vector<std::string>& retrieved) {
    std::map<std::string, CandidateFile> by_path;
    auto add = [&](const std::vector<std::string>& list, EvidenceSource s) {
        std::size_t rank = 0;
        for (const auto& p : list) {
            auto& c = by_path[p];
            c.path = p;
            auto& slot = c.ranks[static_cast<std::size_t>(s)];
            if (!slot) slot = rank;
            ++rank;
        }
    };
    add(direct, EvidenceSource::direct);
    add(inferred, EvidenceSource::inference);
    add(retrieved, EvidenceSource::retrieval);

    std::vector<CandidateFile> out;
    for (auto& [p, c] : by_path) {
        c.confidence = confidence_level(c.has(EvidenceSource::direct), c.has(EvidenceSource::inference),
                                        c.has(EvidenceSource::retrieval));
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(), [](const CandidateFile& a, const CandidateFile& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.best_rank() != b.best_rank()) return a.best_rank() < b.best_rank();
        return a.path < b.path;
    });
    return out;
}

AnalysisResult analyze(const DefectDescription& d, const Graph& g, const PatternLibrary& lib, Gateway& gateway,
                       const PromptSet& prompts, const AnalyzerConfig& cfg, DiagnosticSink& sink) {
    cfg.validate();
    AnalysisResult r;
    if (cfg.use_direct) r.direct = extract_direct(d, g, sink);
    if (cfg.use_inference)
        r.inferred = infer_from_symptoms(d, g, gateway, prompts, cfg, sink, gateway.config().max_context_tokens);
    if (cfg.use_retrieval) r.retrieval = retrieve_by_annotation(d, g, lib, gateway, prompts, cfg, sink);
    r.candidates = aggregate(r.direct, r.inferred, r.retrieval.files);
    return r;
}

}  // namespace llmloc
