#pragma once

#include "llmloc/gateway.hpp"
#include "llmloc/pipeline.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace llmloc {

struct GroundTruth {
    std::string instance_id;
    std::set<std::string> gold_files;  // normalized, non-empty
};

struct RankedResult {
    std::string instance_id;
    std::vector<std::string> predictions;
    TokenUsage usage;
    bool failed = false;
};

/// 1 if any gold file is among the first k predictions. Throws Error(usage) for k = 0.
int top_k(const std::vector<std::string>& predictions, const std::set<std::string>& gold, std::size_t k);
/// (1/|G|) * sum over hits at position j of |G within first j| / j.
double average_precision(const std::vector<std::string>& predictions, const std::set<std::string>& gold);
/// 1 / position of the first gold hit, 0 when there is none.
double reciprocal_rank(const std::vector<std::string>& predictions, const std::set<std::string>& gold);

struct InstanceMetrics {
    std::string instance_id;
    int top1 = 0;
    int top3 = 0;
    double ap = 0.0;
    double rr = 0.0;
    TokenUsage usage;
    bool failed = false;
};

struct MetricsReport {
    std::size_t n = 0;
    double top1 = 0.0;
    double top3 = 0.0;
    double map = 0.0;
    double mrr = 0.0;
    double avg_cost = 0.0;
    double avg_in_tokens = 0.0;
    double avg_out_tokens = 0.0;
    TokenUsage total_usage;
    std::vector<InstanceMetrics> instances;
};

/// Means over results. Throws Error(invariant) naming an instance without ground truth.
MetricsReport aggregate_metrics(const std::vector<RankedResult>& results,
                                const std::map<std::string, GroundTruth>& gold);

std::string metrics_to_json(const MetricsReport& m);
std::string metrics_to_text(const MetricsReport& m);

struct BenchmarkInstance {
    std::string instance_id;
    std::string repo_root;
    std::string description_file;
    std::vector<std::string> gold_files;
    std::string session_file;
    std::string script_file;  // answers used to author the session; optional
};

struct Manifest {
    std::vector<BenchmarkInstance> instances;
};

/// Relative paths are resolved against the manifest's directory.
Manifest load_manifest(const std::string& path);

struct BenchmarkOptions {
    PipelineConfig pipeline;
    GatewayConfig gateway;
    std::string patterns_file;  // starting library for every instance; built-ins when empty
    std::string prompts_dir;    // embedded templates when empty
    std::string runs_dir;       // per-instance reports written here when non-empty
    std::string run_id = "run";
    std::string timestamp = "1970-01-01T00:00:00Z";
};

struct BenchmarkRun {
    MetricsReport metrics;
    std::vector<LocalizationReport> reports;
    std::vector<LedgerEntry> ledger;  // every request of every instance, in run order
};

/// Each instance gets a fresh replay gateway and a fresh pattern library.
/// A failing instance is scored as an empty prediction.
BenchmarkRun run_benchmark(const Manifest& manifest, const BenchmarkOptions& opts, DiagnosticSink& sink);

}  // namespace llmloc
