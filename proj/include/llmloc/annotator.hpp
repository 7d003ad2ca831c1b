#pragma once

#include "llmloc/annotation.hpp"
#include "llmloc/bm25.hpp"
#include "llmloc/gateway.hpp"
#include "llmloc/graph.hpp"
#include "llmloc/patterns.hpp"
#include "llmloc/prompts.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace llmloc {

struct AnnotatorConfig {
    std::size_t k_s = 10;  // analysis seeds
    std::size_t k_h = 1;   // BFS hops from the seeds
    std::size_t k_e = 5;   // expansion files kept after BM25
    SeedScoreConfig score_cfg;
    Bm25Params bm25;
    std::size_t prompt_overhead_tokens = 600;
    double context_fraction = 0.8;  // share of the model context a batch may fill

    /// Throws Error(usage) when a parameter is out of range.
    void validate() const;
};

struct ScoredFile {
    NodeId node;
    std::string path;
    double score = 0.0;

    bool operator==(const ScoredFile&) const = default;
};

struct CandidateSet {
    std::vector<ScoredFile> seeds;     // seed score, descending
    std::vector<ScoredFile> expanded;  // BM25 score, descending
    std::vector<ScoredFile> merged;    // seeds then expansion, first occurrence wins
};

/// Top k_s file nodes by seed score; ties by path; zero scores never selected.
std::vector<ScoredFile> select_seeds(const Graph& g, const PatternLibrary& lib, const AnnotatorConfig& cfg);

/// Files within k_h hops of the seeds, ranked by BM25 against the library keywords.
CandidateSet expand_candidates(const Graph& g, const std::vector<ScoredFile>& seeds, const PatternLibrary& lib,
                               const AnnotatorConfig& cfg);

/// One labelled record from the model, before keyword validation.
struct RawAnnotation {
    AnnotationType type = AnnotationType::llm_prompt;
    std::string phrase;
    std::vector<std::string> keywords;
};

/// Group paths into batches whose estimated prompt size stays under the budget.
/// A file too large for any batch travels alone.
std::vector<std::vector<std::string>> plan_batches(const Graph& g, const std::vector<std::string>& paths,
                                                   std::size_t max_context_tokens, const AnnotatorConfig& cfg);

/// Ask the model to label every candidate. Files the model leaves out get nothing.
std::map<std::string, std::vector<RawAnnotation>> annotate_files(const std::vector<std::string>& paths, const Graph& g,
                                                                  Gateway& gateway, const PromptSet& prompts,
                                                                  const AnnotatorConfig& cfg, DiagnosticSink& sink);

/// Keep keywords that occur literally in `content`, collapse same-type keywords
/// sharing a prefix to the shorter one, and order by (type, keyword).
std::vector<std::pair<AnnotationType, std::string>> validate_keywords(
    const std::vector<std::pair<AnnotationType, std::string>>& raw, std::string_view content);

/// Validated annotations for one file, one entry per type, sorted by type.
std::vector<Annotation> finalize_annotations(const std::vector<RawAnnotation>& raw, std::string_view content);

/// Attach annotations to file nodes and feed their keywords to the library.
/// Unknown paths are reported and skipped. Returns true if the library changed.
bool enrich_graph(Graph& g, const std::map<std::string, std::vector<Annotation>>& annotations, PatternLibrary& lib,
                  const std::string& timestamp, DiagnosticSink& sink);

struct AnnotationOutcome {
    CandidateSet candidates;
    std::map<std::string, std::vector<Annotation>> annotations;
    bool library_changed = false;
};

/// Seeds, expansion, labelling and enrichment in one pass. Candidate scores are
/// kept in the graph metadata for later ranking.
AnnotationOutcome run_annotation(Graph& g, PatternLibrary& lib, Gateway& gateway, const PromptSet& prompts,
                                 const AnnotatorConfig& cfg, const std::string& timestamp, DiagnosticSink& sink);

inline constexpr const char* kAnnotateTemplate = "annotate.v1";

}  // namespace llmloc
