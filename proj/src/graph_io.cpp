#include "llmloc/graph.hpp"

#include <json.hpp>

#include <algorithm>

using nlohmann::json;

namespace llmloc {
namespace {

json annotation_to_json(const Annotation& a) {
    return json{{"type", to_string(a.type)}, {"phrase", a.phrase}, {"keywords", a.keywords}};
}

json node_to_json(const Node& n) {
    json j;
    j["id"] = n.id.value;
    j["kind"] = to_string(n.kind);
    j["name"] = n.name;
    j["path"] = n.path;
    j["span"] = n.span ? json::array({n.span->start, n.span->end}) : json(nullptr);
    j["source_text"] = n.source_text ? json(*n.source_text) : json(nullptr);
    j["annotations"] = json::array();
    for (const auto& a : n.annotations) j["annotations"].push_back(annotation_to_json(a));
    return j;
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw Error(ErrorKind::parse, "graph.json: " + where + ": " + what);
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) fail(where, std::string("missing field '") + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(where, std::string("field '") + key + "' has the wrong type");
    }
}

}  // namespace

std::string serialize(const Graph& g) {
    std::vector<const Node*> nodes;
    nodes.reserve(g.node_count());
    for (const auto& [_, n] : g.nodes()) nodes.push_back(&n);
    std::sort(nodes.begin(), nodes.end(), [](const Node* a, const Node* b) { return a->id < b->id; });

    std::vector<Edge> edges = g.edges();
    std::sort(edges.begin(), edges.end());

    json doc;
    doc["format_version"] = kGraphFormatVersion;
    doc["nodes"] = json::array();
    for (const auto* n : nodes) doc["nodes"].push_back(node_to_json(*n));
    doc["edges"] = json::array();
    for (const auto& e : edges) doc["edges"].push_back({{"src", e.src.value}, {"dst", e.dst.value}, {"kind", to_string(e.kind)}});
    json meta;
    meta["repo_name"] = g.meta.repo_name;
    meta["annotation_candidates"] = json::array();
    for (const auto& c : g.meta.annotation_candidates)
        meta["annotation_candidates"].push_back({{"path", c.path}, {"stage", c.stage}, {"score", c.score}});
    doc["meta"] = meta;
    return doc.dump(1) + "\n";
}

Graph deserialize(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail("document", e.what());
    }
    if (!doc.is_object()) fail("document", "top level is not an object");
    if (field<int>(doc, "format_version", "document") != kGraphFormatVersion) fail("document", "unsupported format_version");

    Graph g;
    const auto& nodes = doc.contains("nodes") ? doc["nodes"] : json();
    if (!nodes.is_array()) fail("document", "'nodes' must be an array");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& jn = nodes[i];
        std::string where = "nodes[" + std::to_string(i) + "]";
        Node n;
        n.id = NodeId{field<std::string>(jn, "id", where)};
        where += " (id " + n.id.value + ")";
        auto kind = parse_node_kind(field<std::string>(jn, "kind", where));
        if (!kind) fail(where, "unknown node kind");
        n.kind = *kind;
        n.name = field<std::string>(jn, "name", where);
        n.path = field<std::string>(jn, "path", where);
        if (jn.contains("span") && !jn["span"].is_null()) {
            auto span = field<std::vector<std::size_t>>(jn, "span", where);
            if (span.size() != 2 || span[0] > span[1]) fail(where, "malformed span");
            n.span = LineSpan{span[0], span[1]};
        }
        if (jn.contains("source_text") && !jn["source_text"].is_null())
            n.source_text = field<std::string>(jn, "source_text", where);
        if (jn.contains("annotations")) {
            const auto& anns = jn["annotations"];
            if (!anns.is_array()) fail(where, "'annotations' must be an array");
            for (std::size_t k = 0; k < anns.size(); ++k) {
                std::string aw = where + ".annotations[" + std::to_string(k) + "]";
                Annotation a;
                auto t = parse_annotation_type(field<std::string>(anns[k], "type", aw));
                if (!t) fail(aw, "unknown annotation type");
                a.type = *t;
                a.phrase = field<std::string>(anns[k], "phrase", aw);
                a.keywords = field<std::vector<std::string>>(anns[k], "keywords", aw);
                n.annotations.push_back(std::move(a));
            }
        }
        if (g.find(n.id)) fail(where, "duplicate node id");
        g.add_node(std::move(n));
    }

    const auto& edges = doc.contains("edges") ? doc["edges"] : json();
    if (!edges.is_array()) fail("document", "'edges' must be an array");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& je = edges[i];
        std::string where = "edges[" + std::to_string(i) + "]";
        Edge e;
        e.src = NodeId{field<std::string>(je, "src", where)};
        e.dst = NodeId{field<std::string>(je, "dst", where)};
        auto kind = parse_edge_kind(field<std::string>(je, "kind", where));
        if (!kind) fail(where, "unknown edge kind");
        e.kind = *kind;
        where += " (" + e.src.value + " -" + std::string(to_string(e.kind)) + "-> " + e.dst.value + ")";
        if (!g.find(e.src)) fail(where, "dangling src");
        if (!g.find(e.dst)) fail(where, "dangling dst");
        g.add_edge(e);
    }

    if (doc.contains("meta")) {
        const auto& m = doc["meta"];
        g.meta.repo_name = field<std::string>(m, "repo_name", "meta");
        if (m.contains("annotation_candidates")) {
            const auto& cands = m["annotation_candidates"];
            if (!cands.is_array()) fail("meta", "'annotation_candidates' must be an array");
            for (std::size_t i = 0; i < cands.size(); ++i) {
                std::string where = "meta.annotation_candidates[" + std::to_string(i) + "]";
                g.meta.annotation_candidates.push_back({field<std::string>(cands[i], "path", where),
                                                        field<std::string>(cands[i], "stage", where),
                                                        field<double>(cands[i], "score", where)});
            }
        }
    }
    g.rebuild_indices();
    auto problems = check_invariants(g);
    if (!problems.empty()) fail("graph", problems.front());
    return g;
}

}  // namespace llmloc
