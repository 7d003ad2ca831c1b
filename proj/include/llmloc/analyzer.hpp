#pragma once

#include "llmloc/annotation.hpp"
#include "llmloc/gateway.hpp"
#include "llmloc/graph.hpp"
#include "llmloc/patterns.hpp"
#include "llmloc/prompts.hpp"

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace llmloc {

struct DefectDescription {
    std::string instance_id;
    std::string raw_text;
    std::vector<std::string> trace_lines;  // lines of raw_text that look like stack frames

    static DefectDescription from_text(std::string text, std::string instance_id = {});
    /// Plain text, or a JSON document {instance_id?, description}. Throws Error(usage)
    /// when the description is empty.
    static DefectDescription from_file(const std::string& path);
};

enum class EvidenceSource { direct = 0, inference = 1, retrieval = 2 };

std::string_view to_string(EvidenceSource s);

struct AnalyzerConfig {
    std::size_t k_i = 5;  // inference results kept
    std::size_t k_r = 5;  // retrieval results kept
    bool use_direct = true;
    bool use_inference = true;
    bool use_retrieval = true;
    std::size_t prompt_overhead_tokens = 800;
    double context_fraction = 0.8;

    void validate() const;
};

/// Four evidence levels: direct 4; inference and retrieval 3; inference only 2;
/// retrieval only 1. Zero when no channel produced the file.
int confidence_level(bool direct, bool inference, bool retrieval);

struct CandidateFile {
    std::string path;
    std::array<std::optional<std::size_t>, 3> ranks;  // 0-based rank per source
    int confidence = 0;

    bool has(EvidenceSource s) const { return ranks[static_cast<std::size_t>(s)].has_value(); }
    std::size_t best_rank() const;
    std::vector<EvidenceSource> sources() const;

    bool operator==(const CandidateFile&) const = default;
};

/// A mention of a file in free text, and where it was found.
struct FileMention {
    std::string text;
    std::size_t offset = 0;
};

/// Every file mention in the description, in text order: traceback frames,
/// `path.ext:line` references, extension-bearing path segments and quoted names.
std::vector<FileMention> find_file_mentions(std::string_view text, const std::set<std::string>& extensions);

/// Map a mention to a file path: exact match, then the longest graph path that is
/// a path suffix of the mention (or the unique one the mention is a suffix of),
/// then a unique basename.
std::optional<std::string> resolve_mention(const Graph& g, std::string_view mention, DiagnosticSink& sink);

/// Files named in the description. No model calls.
std::vector<std::string> extract_direct(const DefectDescription& d, const Graph& g, DiagnosticSink& sink,
                                        const std::set<std::string>& extensions = {});

/// One metadata line per file: path, defined functions, LLM roles.
std::vector<std::string> repository_metadata(const Graph& g);

std::vector<std::string> infer_from_symptoms(const DefectDescription& d, const Graph& g, Gateway& gateway,
                                             const PromptSet& prompts, const AnalyzerConfig& cfg,
                                             DiagnosticSink& sink, std::size_t max_context_tokens);

struct RetrievalResult {
    std::vector<AnnotationType> predicted;
    std::vector<std::string> files;
};

RetrievalResult retrieve_by_annotation(const DefectDescription& d, const Graph& g, const PatternLibrary& lib,
                                       Gateway& gateway, const PromptSet& prompts, const AnalyzerConfig& cfg,
                                       DiagnosticSink& sink);

/// Union by path with confidence levels, ordered by confidence, best rank, path.
std::vector<CandidateFile> aggregate(const std::vector<std::string>& direct, const std::vector<std::string>& inferred,
                                     const std::vector<std::string>& retrieved);

struct AnalysisResult {
    std::vector<std::string> direct;
    std::vector<std::string> inferred;
    RetrievalResult retrieval;
    std::vector<CandidateFile> candidates;
};

AnalysisResult analyze(const DefectDescription& d, const Graph& g, const PatternLibrary& lib, Gateway& gateway,
                       const PromptSet& prompts, const AnalyzerConfig& cfg, DiagnosticSink& sink);

inline constexpr const char* kInferTemplate = "infer.v1";
inline constexpr const char* kRetrieveTemplate = "retrieve.v1";

}  // namespace llmloc
