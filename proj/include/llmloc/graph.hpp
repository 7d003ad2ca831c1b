#pragma once

#include "llmloc/annotation.hpp"
#include "llmloc/common.hpp"
#include "llmloc/ingest.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace llmloc {

enum class NodeKind { repo, package, file, textfile, class_def, function, attribute };
enum class EdgeKind { contain, call, import, extend };

std::string_view to_string(NodeKind k);
std::string_view to_string(EdgeKind k);
std::optional<NodeKind> parse_node_kind(std::string_view s);
std::optional<EdgeKind> parse_edge_kind(std::string_view s);

inline bool is_file_kind(NodeKind k) { return k == NodeKind::file || k == NodeKind::textfile; }

struct Node {
    NodeId id;
    NodeKind kind = NodeKind::file;
    std::string name;
    std::string path;
    std::optional<LineSpan> span;
    std::optional<std::string> source_text;
    std::vector<Annotation> annotations;  // sorted by type; file nodes only

    bool operator==(const Node&) const = default;
};

struct Edge {
    NodeId src;
    NodeId dst;
    EdgeKind kind = EdgeKind::contain;

    auto operator<=>(const Edge&) const = default;
};

/// A file chosen by the annotation stage, with the score that chose it.
struct CandidateRecord {
    std::string path;
    std::string stage;  // "seed" or "expanded"
    double score = 0.0;

    bool operator==(const CandidateRecord&) const = default;
};

struct GraphMeta {
    std::string repo_name;
    std::vector<CandidateRecord> annotation_candidates;

    bool operator==(const GraphMeta&) const = default;
};

/// Lookup tables derived from nodes and edges.
struct GraphIndices {
    std::unordered_map<std::string, NodeId> by_path;
    std::unordered_map<std::string, std::set<NodeId>> by_name;
    std::map<AnnotationType, std::set<NodeId>> by_annotation;
    std::unordered_map<NodeId, std::vector<std::size_t>> out_edges;
    std::unordered_map<NodeId, std::vector<std::size_t>> in_edges;

    bool operator==(const GraphIndices&) const = default;
};

/// The repository knowledge graph. Nodes are immutable after construction except
/// for file annotations, which are replaced wholesale by set_annotations().
class Graph {
public:
    /// Throws Error(invariant) on a duplicate id.
    void add_node(Node node);
    /// Ignores an edge equal to one already present. Throws Error(invariant) on a missing endpoint.
    void add_edge(const Edge& edge);

    const Node* find(const NodeId& id) const;
    const Node& at(const NodeId& id) const;
    const std::unordered_map<NodeId, Node>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::size_t node_count() const { return nodes_.size(); }

    std::optional<NodeId> lookup_by_path(std::string_view path) const;
    const std::set<NodeId>& lookup_by_name(const std::string& name) const;
    const std::set<NodeId>& files_with_annotation(AnnotationType t) const;
    /// FILE and TEXTFILE nodes, ordered by path.
    std::vector<NodeId> file_nodes() const;

    const std::vector<std::size_t>& out_edges(const NodeId& id) const;
    const std::vector<std::size_t>& in_edges(const NodeId& id) const;
    /// Undirected neighbours over every edge kind, sorted and unique.
    std::vector<NodeId> neighbors(const NodeId& id) const;
    /// Parent along CONTAIN, absent for the root.
    std::optional<NodeId> container_of(const NodeId& id) const;
    std::vector<NodeId> contained_in(const NodeId& id) const;

    void set_annotations(const NodeId& file, std::vector<Annotation> annotations);

    const NodeId& repo_id() const { return repo_id_; }
    GraphMeta meta;

    const GraphIndices& indices() const { return idx_; }
    /// Recompute every lookup table from nodes and edges.
    GraphIndices compute_indices() const;
    void rebuild_indices();

private:
    std::unordered_map<NodeId, Node> nodes_;
    std::vector<Edge> edges_;
    std::set<Edge> edge_set_;
    GraphIndices idx_;
    NodeId repo_id_;
};

/// Content-addressed id: hash of (kind, path, name, span).
NodeId make_node_id(NodeKind kind, std::string_view path, std::string_view name, std::optional<LineSpan> span);

/// Materialize the graph. `entities[i]` belongs to `files[i]`.
Graph build_graph(const std::vector<FileRecord>& files, const std::vector<std::vector<SyntaxEntity>>& entities,
                  const std::string& repo_name, DiagnosticSink& sink);

/// File nodes within `k` undirected hops of any seed.
std::set<NodeId> k_hop_files(const Graph& g, const std::set<NodeId>& seeds, std::size_t k);

/// Structural checks: CONTAIN tree, edge typing, required fields, index coherence.
/// Empty result means the graph is well formed.
std::vector<std::string> check_invariants(const Graph& g);

/// Canonical `graph.json` text (sorted keys, sorted node and edge arrays, trailing newline).
std::string serialize(const Graph& g);
/// Throws Error(parse) naming the offending record.
Graph deserialize(std::string_view text);

inline constexpr int kGraphFormatVersion = 1;

}  // namespace llmloc
