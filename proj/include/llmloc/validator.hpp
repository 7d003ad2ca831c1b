#pragma once

#include "llmloc/analyzer.hpp"
#include "llmloc/gateway.hpp"
#include "llmloc/graph.hpp"
#include "llmloc/prompts.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace llmloc {

struct ValidatorConfig {
    std::size_t max_intermediate = 2;  // non-candidate nodes allowed between two candidates
    std::size_t content_limit_bytes = 16000;
};

enum class Band { root_cause, contributor, symptom };

std::string_view to_string(Band b);
std::optional<Band> parse_band(std::string_view s);

/// >= 8 root cause, (5, 8) contributor, <= 5 symptom.
Band band_of(double score);

inline constexpr double kDefaultScore = 5.0;

struct SubgraphContext {
    std::vector<std::string> candidates;  // candidate paths, sorted
    std::vector<NodeId> members;          // sorted
    std::vector<Edge> edges;              // induced on members, sorted
    std::string topology;
    std::map<std::string, std::vector<std::string>> signatures;  // per candidate file
    bool isolated = false;
};

/// Shortest undirected path between two nodes that avoids REPO and PACKAGE nodes.
/// Among equally short paths the one with the fewest non-`candidates` interior
/// nodes wins; ties go to the smaller node ids. Empty when unreachable.
std::vector<NodeId> shortest_dependency_path(const Graph& g, const NodeId& from, const NodeId& to,
                                             const std::set<NodeId>& candidates);

/// Group candidates whose connecting path has at most `max_intermediate`
/// non-candidate nodes. Candidates without such a partner form isolated contexts.
std::vector<SubgraphContext> build_subgraphs(const Graph& g, const std::vector<std::string>& candidate_paths,
                                             std::size_t max_intermediate);

/// Class and function header lines of one file, in source order.
std::vector<std::string> extract_signatures(const Graph& g, const NodeId& file);

struct ScoredCandidate {
    std::string path;
    double score = kDefaultScore;
    Band band = Band::symptom;
    std::string rationale;
    int confidence = 0;
    double bm25_score = 0.0;
    std::vector<AnnotationType> annotation_types;

    bool operator==(const ScoredCandidate&) const = default;
};

/// Clamp to [1, 10]; reports out-of-range values.
double clamp_score(double raw, DiagnosticSink* sink = nullptr, const std::string& path = {});

/// Parse `score:` and `rationale:` lines from a fenced block.
std::optional<std::pair<double, std::string>> parse_score_reply(std::string_view text);

ScoredCandidate score_counterfactual(const CandidateFile& candidate, const SubgraphContext& context,
                                     const DefectDescription& d, const Graph& g, Gateway& gateway,
                                     const PromptSet& prompts, const ValidatorConfig& cfg, DiagnosticSink& sink);

/// Lexicographic (score desc, confidence desc, bm25 desc, path asc). No model calls.
void sort_low_group(std::vector<ScoredCandidate>& group);

/// Pairwise judge with a per-pair cache. The pair is always shown with the
/// lexicographically smaller path as candidate A.
class PairwiseJudge {
public:
    PairwiseJudge(const DefectDescription& d, const Graph& g, Gateway& gateway, const PromptSet& prompts,
                  const ValidatorConfig& cfg, DiagnosticSink& sink)
        : d_(d), g_(g), gateway_(gateway), prompts_(prompts), cfg_(cfg), sink_(sink) {}

    /// True when `a` is closer to the root cause than `b`.
    bool closer(const ScoredCandidate& a, const ScoredCandidate& b);
    std::size_t queries() const { return queries_; }

private:
    const DefectDescription& d_;
    const Graph& g_;
    Gateway& gateway_;
    const PromptSet& prompts_;
    const ValidatorConfig& cfg_;
    DiagnosticSink& sink_;
    std::map<std::pair<std::string, std::string>, std::string> cache_;  // (A, B) -> winning path
    std::size_t queries_ = 0;
};

/// Merge sort over an arbitrary, possibly intransitive comparator.
void merge_sort_by(std::vector<ScoredCandidate>& items,
                   const std::function<bool(const ScoredCandidate&, const ScoredCandidate&)>& before);

/// Scores above 5 go first, ordered by pairwise judgments; the rest follow in
/// the model-free low-group order.
std::vector<ScoredCandidate> rank_adaptive(std::vector<ScoredCandidate> scored, PairwiseJudge& judge);

struct ReportEntry {
    std::size_t rank = 0;
    std::string path;
    std::optional<double> score;
    std::optional<Band> band;
    std::vector<AnnotationType> annotation_types;
    std::string rationale;
    int confidence = 0;

    bool operator==(const ReportEntry&) const = default;
};

struct LocalizationReport {
    std::string instance_id;
    std::vector<ReportEntry> entries;
    TokenUsage usage;
    std::map<std::string, std::string> config;
    std::vector<std::string> notes;

    std::vector<std::string> ranked_paths() const;
    bool operator==(const LocalizationReport&) const = default;
};

LocalizationReport make_report(const std::string& instance_id, const std::vector<ScoredCandidate>& ordered,
                               const TokenUsage& usage, std::map<std::string, std::string> config);

/// Canonical JSON with a trailing newline.
std::string report_to_json(const LocalizationReport& r);
LocalizationReport report_from_json(std::string_view text);
std::string report_to_text(const LocalizationReport& r);

inline constexpr const char* kCounterfactualTemplate = "counterfactual.v1";
inline constexpr const char* kPairwiseTemplate = "pairwise.v1";

}  // namespace llmloc
