#include "llmloc/annotator.hpp"

#include "llmloc/reply.hpp"

#include <algorithm>
#include <future>
#include <set>

namespace llmloc {

void AnnotatorConfig::validate() const {
    if (k_s < 1) throw Error(ErrorKind::usage, "annotator.k_s must be at least 1");
    if (!(bm25.k1 >= 0)) throw Error(ErrorKind::usage, "annotator.bm25_k1 must be non-negative");
    if (!(bm25.b >= 0 && bm25.b <= 1)) throw Error(ErrorKind::usage, "annotator.bm25_b must lie in [0, 1]");
    if (!(context_fraction > 0 && context_fraction <= 1))
        throw Error(ErrorKind::usage, "annotator.context_fraction must lie in (0, 1]");
}

namespace {

std::string_view node_text(const Node& n) { return n.source_text ? std::string_view(*n.source_text) : std::string_view{}; }

std::size_t node_lines(const Node& n) { return n.span ? n.span->end : count_lines(node_text(n)); }

bool by_score_then_path(const ScoredFile& a, const ScoredFile& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.path < b.path;
}

}  // namespace

std::vector<ScoredFile> select_seeds(const Graph& g, const PatternLibrary& lib, const AnnotatorConfig& cfg) {
    auto files = g.file_nodes();
    std::vector<TextDoc> docs;
    docs.reserve(files.size());
    for (const auto& id : files) {
        const auto& n = g.at(id);
        docs.push_back({node_text(n), node_lines(n)});
    }
    auto profiles = match_files(lib, docs);
    std::vector<ScoredFile> scored;
    for (std::size_t i = 0; i < files.size(); ++i) {
        double s = seed_score(profiles[i], cfg.score_cfg);
        if (s > 0) scored.push_back({files[i], g.at(files[i]).path, s});
    }
    std::sort(scored.begin(), scored.end(), by_score_then_path);
    if (scored.size() > cfg.k_s) scored.resize(cfg.k_s);
    return scored;
}

CandidateSet expand_candidates(const Graph& g, const std::vector<ScoredFile>& seeds, const PatternLibrary& lib,
                               const AnnotatorConfig& cfg) {
    CandidateSet out;
    out.seeds = seeds;
    out.merged = seeds;
    std::set<NodeId> seed_ids;
    for (const auto& s : seeds) seed_ids.insert(s.node);
    if (cfg.k_h == 0 || cfg.k_e == 0 || seeds.empty()) return out;

    std::vector<NodeId> pool;
    for (const auto& id : k_hop_files(g, seed_ids, cfg.k_h))
        if (!seed_ids.contains(id)) pool.push_back(id);
    if (pool.empty()) return out;

    std::vector<Bm25Doc> docs;
    docs.reserve(pool.size());
    std::map<std::string, NodeId> by_path;
    for (const auto& id : pool) {
        const auto& n = g.at(id);
        docs.push_back({n.path, node_text(n)});
        by_path.emplace(n.path, id);
    }
    auto hits = bm25_rank(docs, lib.keywords(), cfg.bm25);
    for (const auto& h : hits) out.expanded.push_back({by_path.at(h.key), h.key, h.score});
    if (out.expanded.size() > cfg.k_e) out.expanded.resize(cfg.k_e);

    std::set<std::string> seen;
    for (const auto& s : out.merged) seen.insert(s.path);
    for (const auto& e : out.expanded)
        if (seen.insert(e.path).second) out.merged.push_back(e);
    return out;
}

namespace {

std::size_t file_tokens(const Node& n) { return estimate_tokens(node_text(n).size() + n.path.size() + 32); }

std::string render_files(const Graph& g, const std::vector<std::string>& paths) {
    std::string out;
    for (const auto& p : paths) {
        const auto& n = g.at(*g.lookup_by_path(p));
        out += "### FILE: " + p + "\n";
        out += node_text(n);
        if (!out.empty() && out.back() != '\n') out += '\n';
        out += "### END FILE\n\n";
    }
    return out;
}

std::vector<std::string> split_on(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        parts.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

struct LabelledRecord {
    std::string path;
    RawAnnotation ann;
};

std::optional<std::vector<LabelledRecord>> parse_annotate_reply(std::string_view text) {
    auto lines = fenced_lines(text);
    if (!lines) return std::nullopt;
    std::vector<LabelledRecord> out;
    for (const auto& line : *lines) {
        auto fields = split_on(line, '|');
        if (fields.size() < 4) return std::nullopt;
        auto type = parse_annotation_type(fields[1]);
        if (!type || fields[0].empty()) return std::nullopt;
        LabelledRecord r;
        r.path = normalize_path(fields[0]);
        r.ann.type = *type;
        // a phrase may itself contain '|'
        for (std::size_t i = 2; i + 1 < fields.size(); ++i) {
            if (i > 2) r.ann.phrase += " | ";
            r.ann.phrase += fields[i];
        }
        for (auto& kw : split_on(fields.back(), ','))
            if (!kw.empty()) r.ann.keywords.push_back(std::move(kw));
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace

std::vector<std::vector<std::string>> plan_batches(const Graph& g, const std::vector<std::string>& paths,
                                                   std::size_t max_context_tokens, const AnnotatorConfig& cfg) {
    const double limit = cfg.context_fraction * static_cast<double>(max_context_tokens);
    const double budget = limit - static_cast<double>(cfg.prompt_overhead_tokens);
    std::vector<std::vector<std::string>> batches;
    std::vector<std::string> current;
    double used = 0;
    for (const auto& p : paths) {
        auto id = g.lookup_by_path(p);
        if (!id) throw Error(ErrorKind::invariant, "annotation candidate not in graph: " + p);
        double t = static_cast<double>(file_tokens(g.at(*id)));
        if (!current.empty() && used + t > budget) {
            batches.push_back(std::move(current));
            current.clear();
            used = 0;
        }
        current.push_back(p);
        used += t;
    }
    if (!current.empty()) batches.push_back(std::move(current));
    return batches;
}

std::map<std::string, std::vector<RawAnnotation>> annotate_files(const std::vector<std::string>& paths, const Graph& g,
                                                                  Gateway& gateway, const PromptSet& prompts,
                                                                  const AnnotatorConfig& cfg, DiagnosticSink& sink) {
    std::map<std::string, std::vector<RawAnnotation>> out;
    if (paths.empty()) return out;
    auto batches = plan_batches(g, paths, gateway.config().max_context_tokens, cfg);

    const std::function<std::optional<std::vector<LabelledRecord>>(std::string_view)> parse = parse_annotate_reply;
    std::vector<std::future<std::optional<std::vector<LabelledRecord>>>> pending;
    for (const auto& batch : batches) {
        ChatRequest req;
        req.template_id = kAnnotateTemplate;
        req.rendered_prompt = prompts.render(kAnnotateTemplate, {{"FILES", render_files(g, batch)}});
        req.tag = "annotate";
        pending.push_back(std::async(std::launch::async, [&gateway, &sink, &parse, req] {
            return ask_parsed(gateway, req, parse, sink, "annotate");
        }));
    }
    for (std::size_t b = 0; b < batches.size(); ++b) {
        auto records = pending[b].get();
        if (!records) {
            sink.warn("annotate", "batch of " + std::to_string(batches[b].size()) + " files skipped");
            continue;
        }
        std::set<std::string> members(batches[b].begin(), batches[b].end());
        for (auto& r : *records) {
            if (!members.contains(r.path)) {
                sink.debug("annotate", "reply names a file outside its batch: " + r.path);
                continue;
            }
            out[r.path].push_back(std::move(r.ann));
        }
    }
    return out;
}

std::vector<std::pair<AnnotationType, std::string>> validate_keywords(
    const std::vector<std::pair<AnnotationType, std::string>>& raw, std::string_view content) {
    std::set<std::pair<AnnotationType, std::string>> present;
    for (const auto& [type, kw] : raw)
        if (!kw.empty() && content.find(kw) != std::string_view::npos) present.emplace(type, kw);
    std::vector<std::pair<AnnotationType, std::string>> out;
    for (const auto& entry : present) {
        // sorted order puts a prefix directly before the words it absorbs
        if (!out.empty() && out.back().first == entry.first && starts_with(entry.second, out.back().second)) continue;
        out.push_back(entry);
    }
    return out;
}

std::vector<Annotation> finalize_annotations(const std::vector<RawAnnotation>& raw, std::string_view content) {
    std::map<AnnotationType, Annotation> by_type;
    std::vector<std::pair<AnnotationType, std::string>> keywords;
    for (const auto& r : raw) {
        auto& a = by_type[r.type];
        a.type = r.type;
        if (a.phrase.empty()) a.phrase = r.phrase;
        for (const auto& kw : r.keywords) keywords.emplace_back(r.type, kw);
    }
    for (auto& [type, kw] : validate_keywords(keywords, content)) by_type[type].keywords.push_back(std::move(kw));
    std::vector<Annotation> out;
    for (auto& [type, a] : by_type) out.push_back(std::move(a));
    return out;
}

bool enrich_graph(Graph& g, const std::map<std::string, std::vector<Annotation>>& annotations, PatternLibrary& lib,
                  const std::string& timestamp, DiagnosticSink& sink) {
    std::vector<std::pair<AnnotationType, std::string>> learned;
    for (const auto& [path, anns] : annotations) {
        auto id = g.lookup_by_path(path);
        if (!id || !is_file_kind(g.at(*id).kind)) {
            sink.warn("annotate", "annotation for unknown file dropped: " + path);
            continue;
        }
        g.set_annotations(*id, anns);
        for (const auto& a : anns)
            for (const auto& kw : a.keywords) learned.emplace_back(a.type, kw);
    }
    return lib.add_learned(learned, timestamp);
}

AnnotationOutcome run_annotation(Graph& g, PatternLibrary& lib, Gateway& gateway, const PromptSet& prompts,
                                 const AnnotatorConfig& cfg, const std::string& timestamp, DiagnosticSink& sink) {
    cfg.validate();
    AnnotationOutcome out;
    out.candidates = expand_candidates(g, select_seeds(g, lib, cfg), lib, cfg);

    std::vector<std::string> paths;
    for (const auto& c : out.candidates.merged) paths.push_back(c.path);
    auto raw = annotate_files(paths, g, gateway, prompts, cfg, sink);
    for (const auto& [path, records] : raw) {
        const auto& n = g.at(*g.lookup_by_path(path));
        out.annotations[path] = finalize_annotations(records, node_text(n));
    }
    out.library_changed = enrich_graph(g, out.annotations, lib, timestamp, sink);

    g.meta.annotation_candidates.clear();
    for (const auto& s : out.candidates.seeds) g.meta.annotation_candidates.push_back({s.path, "seed", s.score});
    for (const auto& e : out.candidates.expanded) {
        bool is_seed = std::any_of(out.candidates.seeds.begin(), out.candidates.seeds.end(),
                                   [&](const ScoredFile& s) { return s.path == e.path; });
        if (!is_seed) g.meta.annotation_candidates.push_back({e.path, "expanded", e.score});
    }
    return out;
}

}  // namespace llmloc
