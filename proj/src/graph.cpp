#include "llmloc/graph.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

namespace llmloc {

std::string_view to_string(NodeKind k) {
    switch (k) {
    case NodeKind::repo: return "REPO";
    case NodeKind::package: return "PACKAGE";
    case NodeKind::file: return "FILE";
    case NodeKind::textfile: return "TEXTFILE";
    case NodeKind::class_def: return "CLASS";
    case NodeKind::function: return "FUNCTION";
    case NodeKind::attribute: return "ATTRIBUTE";
    }
    return "FILE";
}

std::string_view to_string(EdgeKind k) {
    switch (k) {
    case EdgeKind::contain: return "CONTAIN";
    case EdgeKind::call: return "CALL";
    case EdgeKind::import: return "IMPORT";
    case EdgeKind::extend: return "EXTEND";
    }
    return "CONTAIN";
}

std::optional<NodeKind> parse_node_kind(std::string_view s) {
    for (auto k : {NodeKind::repo, NodeKind::package, NodeKind::file, NodeKind::textfile, NodeKind::class_def,
                   NodeKind::function, NodeKind::attribute})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

std::optional<EdgeKind> parse_edge_kind(std::string_view s) {
    for (auto k : {EdgeKind::contain, EdgeKind::call, EdgeKind::import, EdgeKind::extend})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

std::string_view to_string(AnnotationType t) {
    switch (t) {
    case AnnotationType::llm_prompt: return "LLM_PROMPT";
    case AnnotationType::llm_call: return "LLM_CALL";
    case AnnotationType::llm_config: return "LLM_CONFIG";
    case AnnotationType::llm_tool: return "LLM_TOOL";
    case AnnotationType::llm_memory: return "LLM_MEMORY";
    }
    return "LLM_PROMPT";
}

std::optional<AnnotationType> parse_annotation_type(std::string_view s) {
    for (auto t : kAllAnnotationTypes)
        if (to_string(t) == s) return t;
    return std::nullopt;
}

// ---------------------------------------------------------------------------

void Graph::add_node(Node node) {
    if (nodes_.count(node.id)) {
        throw Error(ErrorKind::invariant, "duplicate node id " + node.id.value + " (" + std::string(to_string(node.kind)) +
                                              " " + node.path + " " + node.name + ")");
    }
    if (node.kind == NodeKind::repo) repo_id_ = node.id;
    NodeId id = node.id;
    nodes_.emplace(std::move(id), std::move(node));
}

void Graph::add_edge(const Edge& edge) {
    if (!nodes_.count(edge.src) || !nodes_.count(edge.dst)) {
        throw Error(ErrorKind::invariant, "edge endpoint missing: " + edge.src.value + " -> " + edge.dst.value);
    }
    if (edge_set_.insert(edge).second) edges_.push_back(edge);
}

const Node* Graph::find(const NodeId& id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

const Node& Graph::at(const NodeId& id) const {
    auto* n = find(id);
    if (!n) throw Error(ErrorKind::invariant, "unknown node id " + id.value);
    return *n;
}

std::optional<NodeId> Graph::lookup_by_path(std::string_view path) const {
    auto it = idx_.by_path.find(normalize_path(path));
    if (it == idx_.by_path.end()) return std::nullopt;
    return it->second;
}

namespace {
const std::set<NodeId> kEmptyIds;
const std::vector<std::size_t> kEmptyEdges;
}  // namespace

const std::set<NodeId>& Graph::lookup_by_name(const std::string& name) const {
    auto it = idx_.by_name.find(name);
    return it == idx_.by_name.end() ? kEmptyIds : it->second;
}

const std::set<NodeId>& Graph::files_with_annotation(AnnotationType t) const {
    auto it = idx_.by_annotation.find(t);
    return it == idx_.by_annotation.end() ? kEmptyIds : it->second;
}

std::vector<NodeId> Graph::file_nodes() const {
    std::vector<std::pair<std::string, NodeId>> tmp;
    for (const auto& [path, id] : idx_.by_path) tmp.emplace_back(path, id);
    std::sort(tmp.begin(), tmp.end());
    std::vector<NodeId> out;
    out.reserve(tmp.size());
    for (auto& [_, id] : tmp) out.push_back(id);
    return out;
}

const std::vector<std::size_t>& Graph::out_edges(const NodeId& id) const {
    auto it = idx_.out_edges.find(id);
    return it == idx_.out_edges.end() ? kEmptyEdges : it->second;
}

const std::vector<std::size_t>& Graph::in_edges(const NodeId& id) const {
    auto it = idx_.in_edges.find(id);
    return it == idx_.in_edges.end() ? kEmptyEdges : it->second;
}

std::vector<NodeId> Graph::neighbors(const NodeId& id) const {
    std::vector<NodeId> out;
    for (auto e : out_edges(id)) out.push_back(edges_[e].dst);
    for (auto e : in_edges(id)) out.push_back(edges_[e].src);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::optional<NodeId> Graph::container_of(const NodeId& id) const {
    for (auto e : in_edges(id))
        if (edges_[e].kind == EdgeKind::contain) return edges_[e].src;
    return std::nullopt;
}

std::vector<NodeId> Graph::contained_in(const NodeId& id) const {
    std::vector<NodeId> out;
    for (auto e : out_edges(id))
        if (edges_[e].kind == EdgeKind::contain) out.push_back(edges_[e].dst);
    return out;
}

void Graph::set_annotations(const NodeId& file, std::vector<Annotation> annotations) {
    auto it = nodes_.find(file);
    if (it == nodes_.end() || !is_file_kind(it->second.kind)) {
        throw Error(ErrorKind::invariant, "annotations may only be attached to file nodes: " + file.value);
    }
    std::sort(annotations.begin(), annotations.end(),
              [](const Annotation& a, const Annotation& b) { return a.type < b.type; });
    auto& node = it->second;
    for (auto t : kAllAnnotationTypes) idx_.by_annotation[t].erase(file);
    node.annotations = std::move(annotations);
    for (const auto& a : node.annotations) idx_.by_annotation[a.type].insert(file);
    for (auto t : kAllAnnotationTypes)
        if (idx_.by_annotation[t].empty()) idx_.by_annotation.erase(t);
}

GraphIndices Graph::compute_indices() const {
    GraphIndices idx;
    for (const auto& [id, n] : nodes_) {
        if (is_file_kind(n.kind)) idx.by_path.emplace(n.path, id);
        if (n.kind != NodeKind::repo) idx.by_name[n.name].insert(id);
        for (const auto& a : n.annotations) idx.by_annotation[a.type].insert(id);
    }
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        idx.out_edges[edges_[i].src].push_back(i);
        idx.in_edges[edges_[i].dst].push_back(i);
    }
    return idx;
}

void Graph::rebuild_indices() {
    std::sort(edges_.begin(), edges_.end());
    idx_ = compute_indices();
}

NodeId make_node_id(NodeKind kind, std::string_view path, std::string_view name, std::optional<LineSpan> span) {
    std::string key;
    key.append(to_string(kind)).push_back('\x1f');
    key.append(path).push_back('\x1f');
    key.append(name).push_back('\x1f');
    if (span) key.append(std::to_string(span->start) + "-" + std::to_string(span->end));
    return NodeId{sha256_hex(key).substr(0, 16)};
}

// ---------------------------------------------------------------------------
// construction

namespace {

std::string excerpt(std::string_view content, LineSpan span) {
    auto lines = split_lines(content);
    std::string out;
    for (std::size_t l = span.start; l <= span.end && l <= lines.size(); ++l) {
        out.append(lines[l - 1]);
        out.push_back('\n');
    }
    return out;
}

std::string last_component(std::string_view dotted) {
    auto pos = dotted.find_last_of('.');
    return std::string(pos == std::string_view::npos ? dotted : dotted.substr(pos + 1));
}

std::vector<std::string> split_dots(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i <= s.size()) {
        auto j = s.find('.', i);
        if (j == std::string_view::npos) j = s.size();
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j + 1;
    }
    return out;
}

std::string join_path(std::string_view dir, const std::vector<std::string>& comps, std::size_t n) {
    std::string p(dir);
    for (std::size_t i = 0; i < n; ++i) {
        if (!p.empty()) p.push_back('/');
        p.append(comps[i]);
    }
    return p;
}

class Builder {
public:
    Builder(const std::vector<FileRecord>& files, const std::vector<std::vector<SyntaxEntity>>& entities,
            DiagnosticSink& sink)
        : files_(files), entities_(entities), sink_(sink) {}

    Graph run(const std::string& repo_name) {
        if (files_.size() != entities_.size()) {
            throw Error(ErrorKind::invariant, "entity lists do not align with files");
        }
        g_.meta.repo_name = repo_name;
        Node repo;
        repo.kind = NodeKind::repo;
        repo.name = repo_name;
        repo.id = make_node_id(NodeKind::repo, "", repo_name, std::nullopt);
        g_.add_node(repo);

        for (const auto& f : files_) path_to_file_.emplace(f.path, add_file(f));
        for (std::size_t i = 0; i < files_.size(); ++i) add_definitions(files_[i], entities_[i]);
        g_.rebuild_indices();
        for (std::size_t i = 0; i < files_.size(); ++i) resolve_imports(files_[i], entities_[i]);
        g_.rebuild_indices();
        for (std::size_t i = 0; i < files_.size(); ++i) resolve_calls_and_bases(files_[i], entities_[i]);
        g_.rebuild_indices();
        return std::move(g_);
    }

private:
    NodeId package_for(std::string_view dir) {
        if (dir.empty()) return g_.repo_id();
        auto it = packages_.find(std::string(dir));
        if (it != packages_.end()) return it->second;
        NodeId parent = package_for(dirname_of(dir));
        Node pkg;
        pkg.kind = NodeKind::package;
        pkg.name = std::string(basename_of(dir));
        pkg.path = std::string(dir);
        pkg.id = make_node_id(NodeKind::package, pkg.path, pkg.name, std::nullopt);
        NodeId id = pkg.id;
        g_.add_node(std::move(pkg));
        g_.add_edge({parent, id, EdgeKind::contain});
        packages_.emplace(std::string(dir), id);
        return id;
    }

    NodeId add_file(const FileRecord& f) {
        NodeId parent = package_for(dirname_of(f.path));
        Node n;
        n.kind = f.kind == FileKind::source ? NodeKind::file : NodeKind::textfile;
        n.name = std::string(basename_of(f.path));
        n.path = f.path;
        n.span = f.line_count ? std::optional<LineSpan>(LineSpan{1, f.line_count}) : std::nullopt;
        n.source_text = f.content;
        n.id = make_node_id(n.kind, n.path, n.name, n.span);
        NodeId id = n.id;
        g_.add_node(std::move(n));
        g_.add_edge({parent, id, EdgeKind::contain});
        return id;
    }

    void add_definitions(const FileRecord& f, const std::vector<SyntaxEntity>& ents) {
        auto& defs = defs_[f.path];
        const NodeId file_id = path_to_file_.at(f.path);
        std::set<std::tuple<EntityKind, std::string, LineSpan>> seen;
        for (const auto& e : ents) {
            NodeKind kind;
            if (e.kind == EntityKind::class_def) kind = NodeKind::class_def;
            else if (e.kind == EntityKind::function) kind = NodeKind::function;
            else if (e.kind == EntityKind::attribute) kind = NodeKind::attribute;
            else continue;
            if (!seen.insert({e.kind, e.name, e.span}).second) continue;

            std::string dotted = e.enclosing ? *e.enclosing + "." + e.name : e.name;
            NodeId parent = file_id;
            if (e.enclosing && kind != NodeKind::class_def) {
                auto it = defs.find(*e.enclosing);
                if (it != defs.end() && g_.at(it->second).kind == NodeKind::class_def) parent = it->second;
            }
            Node n;
            n.kind = kind;
            n.name = e.name;
            n.path = f.path;
            n.span = e.span;
            n.source_text = excerpt(f.content, e.span);
            n.id = make_node_id(kind, f.path, e.name, e.span);
            NodeId id = n.id;
            g_.add_node(std::move(n));
            g_.add_edge({parent, id, EdgeKind::contain});
            defs.emplace(dotted, id);  // first definition wins for redefinitions
        }
    }

    std::optional<std::string> existing_file(const std::string& path, bool want_text) const {
        auto it = path_to_file_.find(path);
        if (it == path_to_file_.end()) return std::nullopt;
        bool is_text = g_.at(it->second).kind == NodeKind::textfile;
        return is_text == want_text ? std::optional<std::string>(path) : std::nullopt;
    }

    std::optional<std::string> unique_suffix_match(const std::string& suffix, bool want_text) const {
        std::optional<std::string> found;
        for (const auto& [path, id] : path_to_file_) {
            if ((g_.at(id).kind == NodeKind::textfile) != want_text) continue;
            if (path == suffix || (path.size() > suffix.size() && path.ends_with("/" + suffix))) {
                if (found) return std::nullopt;
                found = path;
            }
        }
        return found;
    }

    std::optional<std::string> resolve_module(const std::string& target, const std::string& from) const {
        std::size_t dots = 0;
        while (dots < target.size() && target[dots] == '.') ++dots;
        auto comps = split_dots(std::string_view(target).substr(dots));
        auto try_base = [&](const std::string& base) -> std::optional<std::string> {
            for (std::size_t m = comps.size(); m >= 1; --m) {
                std::string p = join_path(base, comps, m);
                if (auto hit = existing_file(p + ".py", false)) return hit;
                if (auto hit = existing_file(p + "/__init__.py", false)) return hit;
            }
            if (comps.empty()) {
                if (auto hit = existing_file(join_path(base, comps, 0) + "/__init__.py", false)) return hit;
            }
            return std::nullopt;
        };
        if (dots > 0) {
            std::string base(dirname_of(from));
            for (std::size_t i = 1; i < dots; ++i) base = std::string(dirname_of(base));
            return try_base(base);
        }
        if (auto hit = try_base("")) return hit;
        if (auto hit = try_base(std::string(dirname_of(from)))) return hit;
        for (std::size_t m = comps.size(); m >= 2; --m) {
            if (auto hit = unique_suffix_match(join_path("", comps, m) + ".py", false)) return hit;
        }
        return std::nullopt;
    }

    std::optional<std::string> resolve_text_path(const std::string& literal, const std::string& from) const {
        std::string lit = normalize_path(literal);
        if (lit.empty()) return std::nullopt;
        if (auto hit = existing_file(lit, true)) return hit;
        std::string dir(dirname_of(from));
        if (!dir.empty())
            if (auto hit = existing_file(normalize_path(dir + "/" + literal), true)) return hit;
        if (auto hit = unique_suffix_match(lit, true)) return hit;
        return unique_suffix_match(std::string(basename_of(lit)), true);
    }

    void resolve_imports(const FileRecord& f, const std::vector<SyntaxEntity>& ents) {
        const NodeId src = path_to_file_.at(f.path);
        for (const auto& e : ents) {
            if (e.kind != EntityKind::import_ref || !e.target) continue;
            std::optional<std::string> hit = e.name == kImportPath ? resolve_text_path(*e.target, f.path)
                                                                   : resolve_module(*e.target, f.path);
            if (!hit) {
                if (e.name != kImportPath)
                    sink_.debug("graph", f.path + ": unresolved import " + *e.target);
                continue;
            }
            if (*hit == f.path) continue;
            g_.add_edge({src, path_to_file_.at(*hit), EdgeKind::import});
            imports_[f.path].insert(*hit);
        }
    }

    /// Candidates of `kind` named `name`, preferring those in `f` or files it imports.
    std::vector<NodeId> pick(const std::string& name, NodeKind kind, const std::string& from) const {
        std::vector<NodeId> local, global;
        const auto imp = imports_.find(from);
        for (const auto& id : g_.lookup_by_name(name)) {
            const auto& n = g_.at(id);
            if (n.kind != kind) continue;
            global.push_back(id);
            if (n.path == from || (imp != imports_.end() && imp->second.count(n.path))) local.push_back(id);
        }
        return local.empty() ? global : local;
    }

    void resolve_calls_and_bases(const FileRecord& f, const std::vector<SyntaxEntity>& ents) {
        const auto& defs = defs_[f.path];
        for (const auto& e : ents) {
            if ((e.kind != EntityKind::call_ref && e.kind != EntityKind::extend_ref) || !e.target || !e.enclosing) continue;
            auto src_it = defs.find(*e.enclosing);
            if (src_it == defs.end()) continue;
            const NodeId& src = src_it->second;
            const auto src_kind = g_.at(src).kind;
            std::string name = last_component(*e.target);

            if (e.kind == EntityKind::extend_ref) {
                if (src_kind != NodeKind::class_def) continue;
                auto targets = pick(name, NodeKind::class_def, f.path);
                std::erase(targets, src);
                if (targets.empty()) sink_.debug("graph", f.path + ": unresolved base class " + *e.target);
                for (const auto& t : targets) g_.add_edge({src, t, EdgeKind::extend});
                continue;
            }

            if (src_kind != NodeKind::function) continue;
            auto targets = pick(name, NodeKind::function, f.path);
            // Constructor calls link to the class's __init__.
            for (const auto& cls : pick(name, NodeKind::class_def, f.path)) {
                for (const auto& child : g_.contained_in(cls)) {
                    const auto& n = g_.at(child);
                    if (n.kind == NodeKind::function && n.name == "__init__") targets.push_back(child);
                }
            }
            if (targets.empty()) {
                sink_.debug("graph", f.path + ": unresolved call " + *e.target);
                continue;
            }
            for (const auto& t : targets) g_.add_edge({src, t, EdgeKind::call});
        }
    }

    const std::vector<FileRecord>& files_;
    const std::vector<std::vector<SyntaxEntity>>& entities_;
    DiagnosticSink& sink_;
    Graph g_;
    std::unordered_map<std::string, NodeId> packages_;
    std::unordered_map<std::string, NodeId> path_to_file_;
    std::unordered_map<std::string, std::map<std::string, NodeId>> defs_;
    std::unordered_map<std::string, std::set<std::string>> imports_;
};

}  // namespace

Graph build_graph(const std::vector<FileRecord>& files, const std::vector<std::vector<SyntaxEntity>>& entities,
                  const std::string& repo_name, DiagnosticSink& sink) {
    return Builder(files, entities, sink).run(repo_name);
}

std::set<NodeId> k_hop_files(const Graph& g, const std::set<NodeId>& seeds, std::size_t k) {
    std::set<NodeId> result;
    std::unordered_map<NodeId, std::size_t> dist;
    std::deque<NodeId> queue;
    for (const auto& s : seeds) {
        if (!g.find(s)) continue;
        dist.emplace(s, 0);
        queue.push_back(s);
    }
    while (!queue.empty()) {
        NodeId cur = queue.front();
        queue.pop_front();
        const std::size_t d = dist.at(cur);
        if (is_file_kind(g.at(cur).kind)) result.insert(cur);
        if (d == k) continue;
        for (const auto& nb : g.neighbors(cur)) {
            if (dist.emplace(nb, d + 1).second) queue.push_back(nb);
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// invariants

namespace {

bool contain_allowed(NodeKind parent, NodeKind child) {
    switch (parent) {
    case NodeKind::repo:
    case NodeKind::package:
        return child == NodeKind::package || child == NodeKind::file || child == NodeKind::textfile;
    case NodeKind::file:
        return child == NodeKind::class_def || child == NodeKind::function || child == NodeKind::attribute;
    case NodeKind::class_def: return child == NodeKind::function || child == NodeKind::attribute;
    default: return false;
    }
}

bool edge_typing_ok(EdgeKind e, NodeKind src, NodeKind dst) {
    switch (e) {
    case EdgeKind::contain: return contain_allowed(src, dst);
    case EdgeKind::call: return src == NodeKind::function && dst == NodeKind::function;
    case EdgeKind::import: return src == NodeKind::file && is_file_kind(dst);
    case EdgeKind::extend: return src == NodeKind::class_def && dst == NodeKind::class_def;
    }
    return false;
}

}  // namespace

std::vector<std::string> check_invariants(const Graph& g) {
    std::vector<std::string> problems;
    std::size_t repos = 0;
    std::size_t contains = 0;
    std::unordered_map<NodeId, std::size_t> parents;
    for (const auto& [id, n] : g.nodes()) {
        if (n.kind == NodeKind::repo) ++repos;
        if (n.kind != NodeKind::repo && n.kind != NodeKind::package && n.path.empty())
            problems.push_back("node " + id.value + " has an empty path");
        if (!n.annotations.empty() && !is_file_kind(n.kind))
            problems.push_back("non-file node " + id.value + " carries annotations");
    }
    if (repos != 1) problems.push_back("expected exactly one REPO node, found " + std::to_string(repos));
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
        const auto& e = g.edges()[i];
        const auto* s = g.find(e.src);
        const auto* d = g.find(e.dst);
        if (!s || !d) {
            problems.push_back("edge #" + std::to_string(i) + " has a dangling endpoint");
            continue;
        }
        if (!edge_typing_ok(e.kind, s->kind, d->kind)) {
            problems.push_back("edge #" + std::to_string(i) + " " + std::string(to_string(e.kind)) + " " +
                               std::string(to_string(s->kind)) + "->" + std::string(to_string(d->kind)) +
                               " violates edge typing");
        }
        if (e.kind == EdgeKind::contain) {
            ++contains;
            ++parents[e.dst];
        }
    }
    if (contains + 1 != g.node_count())
        problems.push_back("CONTAIN edge count " + std::to_string(contains) + " != |V|-1 = " +
                           std::to_string(g.node_count() - 1));
    for (const auto& [id, n] : g.nodes()) {
        std::size_t p = parents.count(id) ? parents.at(id) : 0;
        if (n.kind == NodeKind::repo && p != 0) problems.push_back("REPO node has a container");
        if (n.kind != NodeKind::repo && p != 1)
            problems.push_back("node " + id.value + " has " + std::to_string(p) + " containers");
    }
    // reachability from the root along CONTAIN rules out cycles given the counts above
    if (!g.repo_id().empty()) {
        std::unordered_set<NodeId> seen{g.repo_id()};
        std::deque<NodeId> q{g.repo_id()};
        while (!q.empty()) {
            auto cur = q.front();
            q.pop_front();
            for (const auto& c : g.contained_in(cur))
                if (seen.insert(c).second) q.push_back(c);
        }
        if (seen.size() != g.node_count()) problems.push_back("CONTAIN does not span all nodes from REPO");
    }
    if (!(g.compute_indices() == g.indices())) problems.push_back("lookup indices are stale");
    return problems;
}

}  // namespace llmloc
