#pragma once

#include "llmloc/analyzer.hpp"
#include "llmloc/annotator.hpp"
#include "llmloc/gateway.hpp"
#include "llmloc/graph.hpp"
#include "llmloc/ingest.hpp"
#include "llmloc/patterns.hpp"
#include "llmloc/prompts.hpp"
#include "llmloc/validator.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace llmloc {

struct PipelineConfig {
    IngestConfig ingest;
    AnnotatorConfig annotator;
    AnalyzerConfig analyzer;
    ValidatorConfig validator;
    bool use_validator = true;

    /// Flat key/value view recorded in every report.
    std::map<std::string, std::string> snapshot() const;
};

/// The full pipeline followed by one variant per disabled stage:
/// no-direct, no-inference, no-retrieval, no-validator.
std::vector<std::pair<std::string, PipelineConfig>> ablation_variants(const PipelineConfig& base);

/// Scan, parse and build the graph for a repository.
Graph build_repository_graph(const std::string& repo_root, const IngestConfig& cfg, DiagnosticSink& sink);

/// Analyzer candidates through the validator. With the validator disabled the
/// analyzer order is reported unscored.
LocalizationReport localize(const DefectDescription& d, const Graph& g, const PatternLibrary& lib, Gateway& gateway,
                            const PromptSet& prompts, const PipelineConfig& cfg, DiagnosticSink& sink);

struct InstanceRun {
    Graph graph;
    LocalizationReport report;
};

/// Build, annotate and localize one defect. `lib` receives learned keywords.
InstanceRun run_instance(const std::string& repo_root, const DefectDescription& d, PatternLibrary& lib,
                         Gateway& gateway, const PromptSet& prompts, const PipelineConfig& cfg,
                         const std::string& timestamp, DiagnosticSink& sink);

}  // namespace llmloc
