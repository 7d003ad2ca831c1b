#include "llmloc/pipeline.hpp"

#include <filesystem>
#include <future>

namespace llmloc {

std::map<std::string, std::string> PipelineConfig::snapshot() const {
    auto b = [](bool v) { return std::string(v ? "true" : "false"); };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", v);
        return std::string(buf);
    };
    return {{"annotator.k_s", std::to_string(annotator.k_s)},
            {"annotator.k_h", std::to_string(annotator.k_h)},
            {"annotator.k_e", std::to_string(annotator.k_e)},
            {"annotator.bm25_k1", num(annotator.bm25.k1)},
            {"annotator.bm25_b", num(annotator.bm25.b)},
            {"analyzer.k_i", std::to_string(analyzer.k_i)},
            {"analyzer.k_r", std::to_string(analyzer.k_r)},
            {"analyzer.direct", b(analyzer.use_direct)},
            {"analyzer.inference", b(analyzer.use_inference)},
            {"analyzer.retrieval", b(analyzer.use_retrieval)},
            {"validator.enabled", b(use_validator)},
            {"validator.max_intermediate", std::to_string(validator.max_intermediate)}};
}

std::vector<std::pair<std::string, PipelineConfig>> ablation_variants(const PipelineConfig& base) {
    std::vector<std::pair<std::string, PipelineConfig>> out{{"full", base}};
    auto add = [&](const char* name, auto&& change) {
        PipelineConfig c = base;
        change(c);
        out.emplace_back(name, c);
    };
    add("no-direct", [](PipelineConfig& c) { c.analyzer.use_direct = false; });
    add("no-inference", [](PipelineConfig& c) { c.analyzer.use_inference = false; });
    add("no-retrieval", [](PipelineConfig& c) { c.analyzer.use_retrieval = false; });
    add("no-validator", [](PipelineConfig& c) { c.use_validator = false; });
    return out;
}

Graph build_repository_graph(const std::string& repo_root, const IngestConfig& cfg, DiagnosticSink& sink) {
    cfg.validate();
    auto files = scan_repository(repo_root, cfg, sink);
    auto entities = parse_files(files, cfg, sink);
    auto name = std::filesystem::path(repo_root).lexically_normal().filename().string();
    if (name.empty()) name = std::filesystem::path(repo_root).lexically_normal().parent_path().filename().string();
    return build_graph(files, entities, name, sink);
}

LocalizationReport localize(const DefectDescription& d, const Graph& g, const PatternLibrary& lib, Gateway& gateway,
                            const PromptSet& prompts, const PipelineConfig& cfg, DiagnosticSink& sink) {
    const auto before = gateway.report_usage().total;
    auto analysis = analyze(d, g, lib, gateway, prompts, cfg.analyzer, sink);

    std::vector<ScoredCandidate> ordered;
    if (!cfg.use_validator) {
        for (const auto& c : analysis.candidates) {
            ScoredCandidate s;
            s.path = c.path;
            s.confidence = c.confidence;
            for (const auto& a : g.at(*g.lookup_by_path(c.path)).annotations) s.annotation_types.push_back(a.type);
            ordered.push_back(std::move(s));
        }
    } else {
        std::vector<std::string> paths;
        for (const auto& c : analysis.candidates) paths.push_back(c.path);
        auto contexts = build_subgraphs(g, paths, cfg.validator.max_intermediate);
        std::map<std::string, const SubgraphContext*> context_of;
        for (const auto& ctx : contexts)
            for (const auto& p : ctx.candidates) context_of[p] = &ctx;

        std::vector<std::future<ScoredCandidate>> pending;
        for (const auto& c : analysis.candidates) {
            pending.push_back(std::async(std::launch::async, [&, c] {
                return score_counterfactual(c, *context_of.at(c.path), d, g, gateway, prompts, cfg.validator, sink);
            }));
        }
        std::vector<ScoredCandidate> scored;
        for (auto& f : pending) scored.push_back(f.get());
        PairwiseJudge judge(d, g, gateway, prompts, cfg.validator, sink);
        ordered = rank_adaptive(std::move(scored), judge);
    }

    auto after = gateway.report_usage().total;
    TokenUsage used{after.input_tokens - before.input_tokens, after.output_tokens - before.output_tokens,
                    after.estimated_cost - before.estimated_cost};
    auto report = make_report(d.instance_id, ordered, used, cfg.snapshot());
    if (!cfg.use_validator) {
        for (auto& e : report.entries) {
            e.score.reset();
            e.band.reset();
        }
    }
    return report;
}

InstanceRun run_instance(const std::string& repo_root, const DefectDescription& d, PatternLibrary& lib,
                         Gateway& gateway, const PromptSet& prompts, const PipelineConfig& cfg,
                         const std::string& timestamp, DiagnosticSink& sink) {
    InstanceRun run;
    run.graph = build_repository_graph(repo_root, cfg.ingest, sink);
    run_annotation(run.graph, lib, gateway, prompts, cfg.annotator, timestamp, sink);
    run.report = localize(d, run.graph, lib, gateway, prompts, cfg, sink);
    return run;
}

}  // namespace llmloc
