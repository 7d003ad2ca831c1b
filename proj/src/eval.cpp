#include "llmloc/eval.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>

using nlohmann::json;
namespace fs = std::filesystem;

namespace llmloc {

int top_k(const std::vector<std::string>& predictions, const std::set<std::string>& gold, std::size_t k) {
    if (k == 0) throw Error(ErrorKind::usage, "top_k needs k >= 1");
    for (std::size_t i = 0; i < predictions.size() && i < k; ++i)
        if (gold.contains(predictions[i])) return 1;
    return 0;
}

double average_precision(const std::vector<std::string>& predictions, const std::set<std::string>& gold) {
    if (gold.empty()) throw Error(ErrorKind::usage, "average_precision needs a non-empty gold set");
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t j = 0; j < predictions.size(); ++j) {
        if (!gold.contains(predictions[j])) continue;
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(j + 1);
    }
    return sum / static_cast<double>(gold.size());
}

double reciprocal_rank(const std::vector<std::string>& predictions, const std::set<std::string>& gold) {
    for (std::size_t j = 0; j < predictions.size(); ++j)
        if (gold.contains(predictions[j])) return 1.0 / static_cast<double>(j + 1);
    return 0.0;
}

MetricsReport aggregate_metrics(const std::vector<RankedResult>& results,
                                const std::map<std::string, GroundTruth>& gold) {
    MetricsReport m;
    m.n = results.size();
    for (const auto& r : results) {
        auto g = gold.find(r.instance_id);
        if (g == gold.end()) throw Error(ErrorKind::invariant, "no ground truth for instance " + r.instance_id);
        InstanceMetrics im;
        im.instance_id = r.instance_id;
        im.top1 = top_k(r.predictions, g->second.gold_files, 1);
        im.top3 = top_k(r.predictions, g->second.gold_files, 3);
        im.ap = average_precision(r.predictions, g->second.gold_files);
        im.rr = reciprocal_rank(r.predictions, g->second.gold_files);
        im.usage = r.usage;
        im.failed = r.failed;
        m.total_usage += r.usage;
        m.instances.push_back(std::move(im));
    }
    if (m.n == 0) return m;
    const double n = static_cast<double>(m.n);
    for (const auto& im : m.instances) {
        m.top1 += im.top1;
        m.top3 += im.top3;
        m.map += im.ap;
        m.mrr += im.rr;
    }
    m.top1 /= n;
    m.top3 /= n;
    m.map /= n;
    m.mrr /= n;
    m.avg_cost = m.total_usage.estimated_cost / n;
    m.avg_in_tokens = static_cast<double>(m.total_usage.input_tokens) / n;
    m.avg_out_tokens = static_cast<double>(m.total_usage.output_tokens) / n;
    return m;
}

std::string metrics_to_json(const MetricsReport& m) {
    json doc = {{"n", m.n},
                {"top1", m.top1},
                {"top3", m.top3},
                {"map", m.map},
                {"mrr", m.mrr},
                {"avg_cost", m.avg_cost},
                {"avg_in_tokens", m.avg_in_tokens},
                {"avg_out_tokens", m.avg_out_tokens},
                {"total_input_tokens", m.total_usage.input_tokens},
                {"total_output_tokens", m.total_usage.output_tokens}};
    doc["instances"] = json::array();
    for (const auto& im : m.instances)
        doc["instances"].push_back({{"instance_id", im.instance_id},
                                    {"top1", im.top1},
                                    {"top3", im.top3},
                                    {"ap", im.ap},
                                    {"rr", im.rr},
                                    {"input_tokens", im.usage.input_tokens},
                                    {"output_tokens", im.usage.output_tokens},
                                    {"failed", im.failed}});
    return doc.dump(1) + "\n";
}

std::string metrics_to_text(const MetricsReport& m) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "instances  %zu\nTop-1      %.3f\nTop-3      %.3f\nMAP        %.3f\nMRR        %.3f\n"
                  "avg cost   $%.6f\navg tokens %.1f in / %.1f out\n",
                  m.n, m.top1, m.top3, m.map, m.mrr, m.avg_cost, m.avg_in_tokens, m.avg_out_tokens);
    std::string out = buf;
    for (const auto& im : m.instances) {
        std::snprintf(buf, sizeof buf, "  %-28s top1=%d top3=%d ap=%.3f rr=%.3f%s\n", im.instance_id.c_str(), im.top1,
                      im.top3, im.ap, im.rr, im.failed ? "  FAILED" : "");
        out += buf;
    }
    return out;
}

Manifest load_manifest(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::parse, path + ": " + e.what());
    }
    const fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? p : (base / p).string(); };
    if (!doc.is_object() || !doc.contains("instances") || !doc["instances"].is_array())
        throw Error(ErrorKind::parse, path + ": expected {\"instances\": [...]}");
    Manifest m;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < doc["instances"].size(); ++i) {
        const auto& r = doc["instances"][i];
        BenchmarkInstance inst;
        try {
            inst.instance_id = r.at("instance_id").get<std::string>();
            inst.repo_root = resolve(r.at("repo_root").get<std::string>());
            inst.description_file = resolve(r.at("description_file").get<std::string>());
            inst.session_file = resolve(r.at("session_file").get<std::string>());
            if (r.contains("script_file")) inst.script_file = resolve(r["script_file"].get<std::string>());
            for (const auto& g : r.value("gold_files", json::array())) inst.gold_files.push_back(g.get<std::string>());
        } catch (const json::exception& e) {
            throw Error(ErrorKind::parse, path + ": instances[" + std::to_string(i) + "]: " + e.what());
        }
        if (inst.gold_files.empty())
            throw Error(ErrorKind::invariant, "missing gold files for instance " + inst.instance_id);
        if (!ids.insert(inst.instance_id).second)
            throw Error(ErrorKind::parse, path + ": duplicate instance id " + inst.instance_id);
        m.instances.push_back(std::move(inst));
    }
    return m;
}

BenchmarkRun run_benchmark(const Manifest& manifest, const BenchmarkOptions& opts, DiagnosticSink& sink) {
    BenchmarkRun run;
    std::map<std::string, GroundTruth> gold;
    std::vector<RankedResult> results;
    if (manifest.instances.empty()) sink.warn("evaluate", "benchmark has no instances");
    const PromptSet prompts = opts.prompts_dir.empty() ? PromptSet() : PromptSet::from_directory(opts.prompts_dir);

    for (const auto& inst : manifest.instances) {
        GroundTruth gt{inst.instance_id, {}};
        for (const auto& g : inst.gold_files) gt.gold_files.insert(normalize_path(g));
        gold[inst.instance_id] = gt;

        RankedResult result;
        result.instance_id = inst.instance_id;
        try {
            auto backend = load_session(inst.session_file);
            Gateway gateway(backend, opts.gateway, &sink);
            auto lib = opts.patterns_file.empty() ? PatternLibrary::with_defaults() : load_library(opts.patterns_file);
            auto d = DefectDescription::from_file(inst.description_file);
            if (d.instance_id.empty()) d.instance_id = inst.instance_id;
            try {
                auto out = run_instance(inst.repo_root, d, lib, gateway, prompts, opts.pipeline, opts.timestamp, sink);
                result.predictions = out.report.ranked_paths();
                run.reports.push_back(out.report);
                if (!opts.runs_dir.empty()) {
                    auto dir = fs::path(opts.runs_dir) / opts.run_id;
                    write_file((dir / (inst.instance_id + ".json")).string(), report_to_json(out.report));
                }
            } catch (const Error& e) {
                result.failed = true;
                sink.warn("evaluate", inst.instance_id + ": " + e.what());
            }
            auto ledger = gateway.ledger();
            run.ledger.insert(run.ledger.end(), ledger.begin(), ledger.end());
            result.usage = gateway.report_usage().total;
        } catch (const Error& e) {
            result.failed = true;
            sink.warn("evaluate", inst.instance_id + ": " + e.what());
        }
        results.push_back(std::move(result));
    }
    run.metrics = aggregate_metrics(results, gold);
    if (!opts.runs_dir.empty())
        write_file((fs::path(opts.runs_dir) / opts.run_id / "metrics.json").string(), metrics_to_json(run.metrics));
    return run;
}

}  // namespace llmloc
