#include "llmloc/validator.hpp"

#include "llmloc/reply.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <future>
#include <numeric>

using nlohmann::json;

namespace llmloc {

std::string_view to_string(Band b) {
    switch (b) {
        case Band::root_cause: return "root_cause";
        case Band::contributor: return "contributor";
        case Band::symptom: return "symptom";
    }
    return "?";
}

std::optional<Band> parse_band(std::string_view s) {
    for (auto b : {Band::root_cause, Band::contributor, Band::symptom})
        if (to_string(b) == s) return b;
    return std::nullopt;
}

Band band_of(double score) {
    if (score >= 8.0) return Band::root_cause;
    if (score > 5.0) return Band::contributor;
    return Band::symptom;
}

// ---------------------------------------------------------------------------
// subgraphs

namespace {

bool traversable(const Graph& g, const NodeId& id) {
    auto k = g.at(id).kind;
    return k != NodeKind::repo && k != NodeKind::package;
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

std::string node_label(const Node& n) {
    if (is_file_kind(n.kind)) return n.path;
    return n.path + "::" + n.name;
}

std::string_view first_line(std::string_view text) {
    auto nl = text.find('\n');
    return nl == std::string_view::npos ? text : text.substr(0, nl);
}

std::string format_score(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", s);
    return buf;
}

}  // namespace

std::vector<NodeId> shortest_dependency_path(const Graph& g, const NodeId& from, const NodeId& to,
                                             const std::set<NodeId>& candidates) {
    if (from == to) return {from};
    // BFS layers, then the cheapest predecessor along shortest paths
    std::map<NodeId, std::size_t> dist{{from, 0}};
    std::deque<NodeId> queue{from};
    std::vector<NodeId> order;
    while (!queue.empty()) {
        auto u = queue.front();
        queue.pop_front();
        order.push_back(u);
        if (u == to) continue;
        for (const auto& v : g.neighbors(u)) {
            if (dist.contains(v) || !traversable(g, v)) continue;
            dist[v] = dist[u] + 1;
            queue.push_back(v);
        }
    }
    if (!dist.contains(to)) return {};

    std::map<NodeId, std::pair<std::size_t, NodeId>> best;  // node -> (interior non-candidates, predecessor)
    best[from] = {0, NodeId{}};
    for (const auto& u : order) {
        if (u == from) continue;
        std::optional<std::pair<std::size_t, NodeId>> pick;
        for (const auto& p : g.neighbors(u)) {
            auto dp = dist.find(p);
            if (dp == dist.end() || dp->second + 1 != dist[u] || !best.contains(p)) continue;
            std::size_t cost = best[p].first + ((p != from && !candidates.contains(p)) ? 1 : 0);
            if (!pick || cost < pick->first) pick = std::make_pair(cost, p);
        }
        if (pick) best[u] = *pick;
    }
    std::vector<NodeId> path{to};
    while (path.back() != from) path.push_back(best.at(path.back()).second);
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<std::string> extract_signatures(const Graph& g, const NodeId& file) {
    std::vector<std::pair<std::size_t, std::string>> lines;
    auto add = [&](const Node& n, std::string_view indent) {
        if (!n.source_text || !n.span) return;
        std::string line = std::string(indent) + std::string(trim(first_line(*n.source_text)));
        lines.push_back({n.span->start, line});
    };
    for (const auto& child : g.contained_in(file)) {
        const auto& c = g.at(child);
        if (c.kind == NodeKind::function) add(c, "");
        if (c.kind == NodeKind::class_def) {
            add(c, "");
            for (const auto& m : g.contained_in(child))
                if (g.at(m).kind == NodeKind::function) add(g.at(m), "    ");
        }
    }
    std::stable_sort(lines.begin(), lines.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::string> out;
    for (auto& [start, l] : lines) out.push_back(std::move(l));
    return out;
}

std::vector<SubgraphContext> build_subgraphs(const Graph& g, const std::vector<std::string>& candidate_paths,
                                             std::size_t max_intermediate) {
    std::vector<std::string> paths;
    std::vector<NodeId> ids;
    std::set<std::string> uniq(candidate_paths.begin(), candidate_paths.end());
    for (const auto& p : uniq) {
        auto id = g.lookup_by_path(p);
        if (!id) throw Error(ErrorKind::invariant, "validator candidate not in graph: " + p);
        paths.push_back(p);
        ids.push_back(*id);
    }
    const std::set<NodeId> cand_set(ids.begin(), ids.end());

    UnionFind uf(ids.size());
    std::vector<std::set<NodeId>> extra(ids.size());  // path nodes admitted per pair, keyed by first endpoint
    std::vector<bool> paired(ids.size(), false);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
            auto path = shortest_dependency_path(g, ids[i], ids[j], cand_set);
            if (path.empty()) continue;
            std::size_t interior = 0;
            for (std::size_t k = 1; k + 1 < path.size(); ++k)
                if (!cand_set.contains(path[k])) ++interior;
            if (interior > max_intermediate) continue;
            uf.unite(i, j);
            paired[i] = paired[j] = true;
            extra[i].insert(path.begin(), path.end());
        }
    }

    std::map<std::size_t, SubgraphContext> groups;
    std::map<std::size_t, std::set<NodeId>> members;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto root = uf.find(i);
        auto& ctx = groups[root];
        ctx.candidates.push_back(paths[i]);
        ctx.isolated = !paired[i];
        ctx.signatures[paths[i]] = extract_signatures(g, ids[i]);
        members[root].insert(ids[i]);
        members[root].insert(extra[i].begin(), extra[i].end());
    }

    std::vector<SubgraphContext> out;
    for (auto& [root, ctx] : groups) {
        const auto& mem = members[root];
        ctx.members.assign(mem.begin(), mem.end());
        for (const auto& e : g.edges())
            if (mem.contains(e.src) && mem.contains(e.dst)) ctx.edges.push_back(e);
        std::sort(ctx.edges.begin(), ctx.edges.end());
        std::vector<std::string> lines;
        for (const auto& e : ctx.edges)
            lines.push_back(node_label(g.at(e.src)) + " -" + std::string(to_string(e.kind)) + "-> " +
                            node_label(g.at(e.dst)));
        std::sort(lines.begin(), lines.end());
        for (const auto& l : lines) ctx.topology += l + "\n";
        std::sort(ctx.candidates.begin(), ctx.candidates.end());
        out.push_back(std::move(ctx));
    }
    std::sort(out.begin(), out.end(),
              [](const SubgraphContext& a, const SubgraphContext& b) { return a.candidates < b.candidates; });
    return out;
}

// ---------------------------------------------------------------------------
// counterfactual scoring

double clamp_score(double raw, DiagnosticSink* sink, const std::string& path) {
    double s = std::clamp(raw, 1.0, 10.0);
    if (s != raw && sink) sink->warn("validate", "score " + format_score(raw) + " for " + path + " clamped to [1, 10]");
    return s;
}

std::optional<std::pair<double, std::string>> parse_score_reply(std::string_view text) {
    auto lines = fenced_lines(text);
    if (!lines) return std::nullopt;
    std::optional<double> score;
    std::string rationale;
    for (const auto& l : *lines) {
        std::string_view v = l;
        if (starts_with(v, "score:")) {
            auto num = std::string(trim(v.substr(6)));
            char* end = nullptr;
            double s = std::strtod(num.c_str(), &end);
            if (end == num.c_str() || !std::isfinite(s)) return std::nullopt;
            score = s;
        } else if (starts_with(v, "rationale:")) {
            rationale = std::string(trim(v.substr(10)));
        }
    }
    if (!score) return std::nullopt;
    return std::make_pair(*score, rationale);
}

namespace {

std::vector<AnnotationType> types_of(const Node& n) {
    std::vector<AnnotationType> out;
    for (const auto& a : n.annotations) out.push_back(a.type);
    return out;
}

std::string roles_text(const std::vector<AnnotationType>& types) {
    std::string out;
    for (auto t : types) {
        if (!out.empty()) out += ", ";
        out += to_string(t);
    }
    return out.empty() ? "none" : out;
}

std::string clipped_content(const Node& n, std::size_t limit) {
    std::string text = n.source_text ? *n.source_text : std::string{};
    if (text.size() > limit) text = text.substr(0, limit) + "\n... (truncated)\n";
    return text;
}

double bm25_of(const Graph& g, const std::string& path) {
    for (const auto& c : g.meta.annotation_candidates)
        if (c.path == path && c.stage == "expanded") return c.score;
    return 0.0;
}

std::string render_context(const SubgraphContext& ctx, const std::string& path) {
    std::string out;
    if (ctx.isolated) {
        out += "No dependency context: this file is not closely connected to any other candidate.\n";
    } else {
        out += "Candidates in this context: ";
        for (std::size_t i = 0; i < ctx.candidates.size(); ++i) out += (i ? ", " : "") + ctx.candidates[i];
        out += "\n\nDependency flow:\n" + ctx.topology;
    }
    for (const auto& [file, sigs] : ctx.signatures) {
        if (ctx.isolated && file != path) continue;
        out += "\nSignatures in " + file + ":\n";
        if (sigs.empty()) out += "(none)\n";
        for (const auto& s : sigs) out += "  " + s + "\n";
    }
    return out;
}

}  // namespace

ScoredCandidate score_counterfactual(const CandidateFile& candidate, const SubgraphContext& context,
                                     const DefectDescription& d, const Graph& g, Gateway& gateway,
                                     const PromptSet& prompts, const ValidatorConfig& cfg, DiagnosticSink& sink) {
    const auto& node = g.at(*g.lookup_by_path(candidate.path));
    ScoredCandidate out;
    out.path = candidate.path;
    out.confidence = candidate.confidence;
    out.bm25_score = bm25_of(g, candidate.path);
    out.annotation_types = types_of(node);

    ChatRequest req;
    req.template_id = kCounterfactualTemplate;
    req.rendered_prompt = prompts.render(kCounterfactualTemplate, {{"DESCRIPTION", d.raw_text},
                                                                   {"PATH", candidate.path},
                                                                   {"ANNOTATIONS", roles_text(out.annotation_types)},
                                                                   {"CONTEXT", render_context(context, candidate.path)},
                                                                   {"CONTENT", clipped_content(node, cfg.content_limit_bytes)}});
    req.tag = "counterfactual";
    const std::function<std::optional<std::pair<double, std::string>>(std::string_view)> parse = parse_score_reply;
    if (auto r = ask_parsed(gateway, req, parse, sink, "validate")) {
        out.score = clamp_score(r->first, &sink, candidate.path);
        out.rationale = r->second;
    } else {
        out.score = kDefaultScore;
        out.rationale = "score unavailable";
        sink.warn("validate", "default score used for " + candidate.path);
    }
    out.band = band_of(out.score);
    return out;
}

// ---------------------------------------------------------------------------
// ranking

void sort_low_group(std::vector<ScoredCandidate>& group) {
    std::sort(group.begin(), group.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.bm25_score != b.bm25_score) return a.bm25_score > b.bm25_score;
        return a.path < b.path;
    });
}

namespace {

std::optional<char> parse_choice(std::string_view text) {
    auto lines = fenced_lines(text);
    if (!lines || lines->size() != 1) return std::nullopt;
    const auto& l = lines->front();
    if (l == "A" || l == "B") return l.front();
    return std::nullopt;
}

bool by_score_then_path(const ScoredCandidate& a, const ScoredCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.path < b.path;
}

}  // namespace

bool PairwiseJudge::closer(const ScoredCandidate& a, const ScoredCandidate& b) {
    const bool a_first = a.path < b.path;
    const ScoredCandidate& lhs = a_first ? a : b;
    const ScoredCandidate& rhs = a_first ? b : a;
    auto key = std::make_pair(lhs.path, rhs.path);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
        const auto& na = g_.at(*g_.lookup_by_path(lhs.path));
        const auto& nb = g_.at(*g_.lookup_by_path(rhs.path));
        ChatRequest req;
        req.template_id = kPairwiseTemplate;
        req.rendered_prompt = prompts_.render(kPairwiseTemplate, {{"DESCRIPTION", d_.raw_text},
                                                                  {"PATH_A", lhs.path},
                                                                  {"ANNOTATIONS_A", roles_text(lhs.annotation_types)},
                                                                  {"SCORE_A", format_score(lhs.score)},
                                                                  {"CONTENT_A", clipped_content(na, cfg_.content_limit_bytes)},
                                                                  {"PATH_B", rhs.path},
                                                                  {"ANNOTATIONS_B", roles_text(rhs.annotation_types)},
                                                                  {"SCORE_B", format_score(rhs.score)},
                                                                  {"CONTENT_B", clipped_content(nb, cfg_.content_limit_bytes)}});
        req.tag = "rank-high";
        ++queries_;
        const std::function<std::optional<char>(std::string_view)> parse = parse_choice;
        std::string winner;
        if (auto choice = ask_parsed(gateway_, req, parse, sink_, "rank")) {
            winner = *choice == 'A' ? lhs.path : rhs.path;
        } else {
            winner = by_score_then_path(lhs, rhs) ? lhs.path : rhs.path;
            sink_.warn("rank", "pairwise judgment unavailable for " + lhs.path + " vs " + rhs.path +
                                   ", ordered by score");
        }
        it = cache_.emplace(key, winner).first;
    }
    return it->second == a.path;
}

void merge_sort_by(std::vector<ScoredCandidate>& items,
                   const std::function<bool(const ScoredCandidate&, const ScoredCandidate&)>& before) {
    if (items.size() < 2) return;
    auto mid = items.begin() + static_cast<std::ptrdiff_t>(items.size() / 2);
    std::vector<ScoredCandidate> left(items.begin(), mid), right(mid, items.end());
    merge_sort_by(left, before);
    merge_sort_by(right, before);
    std::size_t i = 0, j = 0, k = 0;
    while (i < left.size() && j < right.size()) {
        if (before(right[j], left[i]))
            items[k++] = std::move(right[j++]);
        else
            items[k++] = std::move(left[i++]);
    }
    while (i < left.size()) items[k++] = std::move(left[i++]);
    while (j < right.size()) items[k++] = std::move(right[j++]);
}

std::vector<ScoredCandidate> rank_adaptive(std::vector<ScoredCandidate> scored, PairwiseJudge& judge) {
    std::vector<ScoredCandidate> high, low;
    for (auto& s : scored) (s.score > kDefaultScore ? high : low).push_back(std::move(s));
    std::sort(high.begin(), high.end(), by_score_then_path);
    merge_sort_by(high, [&judge](const ScoredCandidate& a, const ScoredCandidate& b) { return judge.closer(a, b); });
    sort_low_group(low);
    high.insert(high.end(), std::make_move_iterator(low.begin()), std::make_move_iterator(low.end()));
    return high;
}

// ---------------------------------------------------------------------------
// report

std::vector<std::string> LocalizationReport::ranked_paths() const {
    std::vector<std::string> out;
    for (const auto& e : entries) out.push_back(e.path);
    return out;
}

LocalizationReport make_report(const std::string& instance_id, const std::vector<ScoredCandidate>& ordered,
                               const TokenUsage& usage, std::map<std::string, std::string> config) {
    LocalizationReport r;
    r.instance_id = instance_id;
    r.usage = usage;
    r.config = std::move(config);
    for (const auto& s : ordered) {
        ReportEntry e;
        e.rank = r.entries.size() + 1;
        e.path = s.path;
        e.score = s.score;
        e.band = s.band;
        e.annotation_types = s.annotation_types;
        e.rationale = s.rationale;
        e.confidence = s.confidence;
        r.entries.push_back(std::move(e));
    }
    if (r.entries.empty()) r.notes.push_back("no candidates");
    return r;
}

std::string report_to_json(const LocalizationReport& r) {
    json doc;
    doc["instance_id"] = r.instance_id;
    doc["ranking"] = json::array();
    for (const auto& e : r.entries) {
        json types = json::array();
        for (auto t : e.annotation_types) types.push_back(std::string(to_string(t)));
        doc["ranking"].push_back({{"rank", e.rank},
                                  {"path", e.path},
                                  {"score", e.score ? json(*e.score) : json(nullptr)},
                                  {"band", e.band ? json(std::string(to_string(*e.band))) : json(nullptr)},
                                  {"annotation_types", types},
                                  {"rationale", e.rationale},
                                  {"confidence", e.confidence}});
    }
    doc["usage"] = {{"input_tokens", r.usage.input_tokens},
                    {"output_tokens", r.usage.output_tokens},
                    {"estimated_cost", r.usage.estimated_cost}};
    doc["config"] = r.config;
    doc["notes"] = r.notes;
    return doc.dump(1) + "\n";
}

LocalizationReport report_from_json(std::string_view text) {
    LocalizationReport r;
    try {
        auto doc = json::parse(text);
        r.instance_id = doc.at("instance_id").get<std::string>();
        for (const auto& e : doc.at("ranking")) {
            ReportEntry entry;
            entry.rank = e.at("rank").get<std::size_t>();
            entry.path = e.at("path").get<std::string>();
            if (!e.at("score").is_null()) entry.score = e["score"].get<double>();
            if (!e.at("band").is_null()) {
                entry.band = parse_band(e["band"].get<std::string>());
                if (!entry.band) throw Error(ErrorKind::parse, "report: unknown band for " + entry.path);
            }
            for (const auto& t : e.at("annotation_types")) {
                auto type = parse_annotation_type(t.get<std::string>());
                if (!type) throw Error(ErrorKind::parse, "report: unknown annotation type for " + entry.path);
                entry.annotation_types.push_back(*type);
            }
            entry.rationale = e.at("rationale").get<std::string>();
            entry.confidence = e.at("confidence").get<int>();
            r.entries.push_back(std::move(entry));
        }
        const auto& u = doc.at("usage");
        r.usage = {u.at("input_tokens").get<std::uint64_t>(), u.at("output_tokens").get<std::uint64_t>(),
                   u.at("estimated_cost").get<double>()};
        r.config = doc.at("config").get<std::map<std::string, std::string>>();
        r.notes = doc.at("notes").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse, std::string("report: ") + e.what());
    }
    return r;
}

std::string report_to_text(const LocalizationReport& r) {
    std::string out = "Localization report";
    if (!r.instance_id.empty()) out += " for " + r.instance_id;
    out += "\n\n";
    if (r.entries.empty()) out += "No candidates.\n";
    for (const auto& e : r.entries) {
        out += std::to_string(e.rank) + ". " + e.path;
        if (e.score) out += "  score " + format_score(*e.score) + " (" + std::string(to_string(*e.band)) + ")";
        out += "  confidence " + std::to_string(e.confidence) + "\n";
        out += "   roles: " + roles_text(e.annotation_types) + "\n";
        if (!e.rationale.empty()) out += "   " + e.rationale + "\n";
    }
    char cost[64];
    std::snprintf(cost, sizeof cost, "%.6f", r.usage.estimated_cost);
    out += "\nTokens: " + std::to_string(r.usage.input_tokens) + " in, " + std::to_string(r.usage.output_tokens) +
           " out; estimated cost $" + cost + "\n";
    return out;
}

}  // namespace llmloc
