// llmloc: build a repository graph, annotate it, localize a defect, evaluate a benchmark.

#include "llmloc/annotator.hpp"
#include "llmloc/config.hpp"
#include "llmloc/eval.hpp"
#include "llmloc/pipeline.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace llmloc;

namespace {

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::usage: return 1;
        case ErrorKind::io: return 2;
        case ErrorKind::parse: return 2;
        case ErrorKind::gateway: return 3;
        case ErrorKind::invariant: return 4;
    }
    return 4;
}

struct Options {
    std::string config;
    std::string repo;
    std::string graph;
    std::string description;
    std::string session;
    std::string record;
    std::string backend;
    std::string patterns;
    std::string out;
    std::string manifest;
    std::string run_id = "run";
    std::string timestamp;
    std::optional<std::size_t> k_s, k_h, k_e, k_i, k_r;
    bool no_direct = false, no_inference = false, no_retrieval = false, no_validator = false;
    bool verbose = false;
};

std::string iso_utc(std::time_t t) {
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string resolve_timestamp(const Options& o) {
    if (!o.timestamp.empty()) return o.timestamp;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch)
        return iso_utc(static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10)));
    return iso_utc(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now()));
}

GlobalConfig effective_config(const Options& o) {
    GlobalConfig cfg = o.config.empty() ? GlobalConfig{} : load_config(o.config);
    auto& p = cfg.pipeline;
    if (o.k_s) p.annotator.k_s = *o.k_s;
    if (o.k_h) p.annotator.k_h = *o.k_h;
    if (o.k_e) p.annotator.k_e = *o.k_e;
    if (o.k_i) p.analyzer.k_i = *o.k_i;
    if (o.k_r) p.analyzer.k_r = *o.k_r;
    if (o.no_direct) p.analyzer.use_direct = false;
    if (o.no_inference) p.analyzer.use_inference = false;
    if (o.no_retrieval) p.analyzer.use_retrieval = false;
    if (o.no_validator) p.use_validator = false;
    if (!o.backend.empty()) cfg.backend.kind = o.backend;
    if (!o.graph.empty()) cfg.paths.graph = o.graph;
    if (!o.patterns.empty()) cfg.paths.patterns = o.patterns;
    cfg.validate();
    return cfg;
}

PromptSet load_prompts(const GlobalConfig& cfg) {
    return cfg.paths.prompts.empty() ? PromptSet() : PromptSet::from_directory(cfg.paths.prompts);
}

/// The backend chosen by flags and config, plus the recorder when --record is set.
struct BackendChoice {
    std::shared_ptr<ChatBackend> backend;
    std::shared_ptr<RecordingBackend> recorder;
};

BackendChoice make_backend(const Options& o, const GlobalConfig& cfg) {
    BackendChoice c;
    if (cfg.backend.kind == "replay") {
        if (o.session.empty()) throw Error(ErrorKind::usage, "replay backend needs --session");
        if (!fs::exists(o.session)) throw Error(ErrorKind::io, "session file not found: " + o.session);
        c.backend = load_session(o.session);
    } else {
        c.backend = std::make_shared<HttpBackend>(cfg.backend.http);
    }
    if (!o.record.empty()) {
        c.recorder = record_session(c.backend);
        c.backend = c.recorder;
    }
    return c;
}

void finish_recording(const BackendChoice& c, const Options& o) {
    if (c.recorder) c.recorder->save(o.record);
}

void print_diagnostics(const DiagnosticSink& sink, bool verbose) {
    for (const auto& d : sink.snapshot()) {
        if (!verbose && d.severity < Severity::warning) continue;
        std::cerr << to_string(d.severity) << ": [" << d.component << "] " << d.message << "\n";
    }
}

Graph read_graph(const std::string& path) {
    if (!fs::exists(path)) throw Error(ErrorKind::io, "graph not found: " + path);
    return deserialize(read_file(path));
}

int cmd_build_graph(const Options& o, DiagnosticSink& sink) {
    if (o.repo.empty()) throw Error(ErrorKind::usage, "build-graph needs --repo");
    auto cfg = effective_config(o);
    auto g = build_repository_graph(o.repo, cfg.pipeline.ingest, sink);
    const std::string out = o.out.empty() ? cfg.paths.graph : o.out;
    write_file(out, serialize(g));
    std::cout << "wrote " << out << " (" << g.node_count() << " nodes, " << g.edges().size() << " edges)\n";
    return 0;
}

int cmd_annotate(const Options& o, DiagnosticSink& sink) {
    auto cfg = effective_config(o);
    auto g = read_graph(cfg.paths.graph);
    auto lib = load_library(cfg.paths.patterns);
    auto backend = make_backend(o, cfg);
    Gateway gateway(backend.backend, cfg.gateway, &sink);
    auto outcome = run_annotation(g, lib, gateway, load_prompts(cfg), cfg.pipeline.annotator, resolve_timestamp(o), sink);
    finish_recording(backend, o);
    const std::string out = o.out.empty() ? cfg.paths.graph : o.out;
    write_file(out, serialize(g));
    if (outcome.library_changed) save_library(lib, cfg.paths.patterns);
    std::cout << "annotated " << outcome.annotations.size() << " of " << outcome.candidates.merged.size()
              << " candidate files; wrote " << out << "\n";
    return 0;
}

int cmd_localize(const Options& o, DiagnosticSink& sink) {
    if (o.description.empty()) throw Error(ErrorKind::usage, "localize needs --description");
    auto cfg = effective_config(o);
    auto d = DefectDescription::from_file(o.description);
    auto g = read_graph(cfg.paths.graph);
    auto lib = load_library(cfg.paths.patterns);
    auto backend = make_backend(o, cfg);
    Gateway gateway(backend.backend, cfg.gateway, &sink);
    auto report = localize(d, g, lib, gateway, load_prompts(cfg), cfg.pipeline, sink);
    finish_recording(backend, o);
    const fs::path out = o.out.empty() ? fs::path(".") : fs::path(o.out);
    write_file((out / "report.json").string(), report_to_json(report));
    auto text = report_to_text(report);
    write_file((out / "report.txt").string(), text);
    std::cout << text;
    return 0;
}

int cmd_evaluate(const Options& o, DiagnosticSink& sink) {
    if (o.manifest.empty()) throw Error(ErrorKind::usage, "evaluate needs --manifest");
    auto cfg = effective_config(o);
    if (!fs::exists(o.manifest)) throw Error(ErrorKind::io, "manifest not found: " + o.manifest);
    auto manifest = load_manifest(o.manifest);
    BenchmarkOptions opts;
    opts.pipeline = cfg.pipeline;
    opts.gateway = cfg.gateway;
    opts.prompts_dir = cfg.paths.prompts;
    opts.runs_dir = o.out.empty() ? cfg.paths.runs : o.out;
    opts.run_id = o.run_id;
    opts.timestamp = resolve_timestamp(o);
    if (!o.patterns.empty()) opts.patterns_file = o.patterns;
    auto run = run_benchmark(manifest, opts, sink);
    std::cout << metrics_to_text(run.metrics);
    return 0;
}

int cmd_patterns(const std::string& action, const Options& o) {
    auto cfg = effective_config(o);
    auto lib = load_library(cfg.paths.patterns);
    if (action == "list") {
        for (const auto& e : lib.entries())
            std::cout << (e.origin == PatternOrigin::builtin ? "builtin" : "learned") << "\t" << to_string(e.type) << "\t"
                      << e.keyword << "\t" << e.regex_source << (e.added_at.empty() ? "" : "\t" + e.added_at) << "\n";
        return 0;
    }
    if (action == "stats") {
        std::map<std::pair<std::string, std::string>, std::size_t> counts;
        std::size_t builtin = 0, learned = 0;
        for (const auto& e : lib.entries()) {
            (e.origin == PatternOrigin::builtin ? builtin : learned)++;
            ++counts[{std::string(to_string(e.type)), e.origin == PatternOrigin::builtin ? "builtin" : "learned"}];
        }
        std::cout << "total\t" << lib.entries().size() << "\nbuiltin\t" << builtin << "\nlearned\t" << learned << "\n";
        for (auto t : kAllAnnotationTypes) {
            std::string name(to_string(t));
            std::cout << name << "\t" << counts[{name, "builtin"}] << " builtin, " << counts[{name, "learned"}]
                      << " learned\n";
        }
        return 0;
    }
    throw Error(ErrorKind::usage, "unknown patterns action '" + action + "' (expected list or stats)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Localize defects in LLM-integrated Python repositories."};
    app.footer(describe_config_keys() +
               "\nExit codes: 0 success, 1 usage, 2 I/O or unreadable input, 3 model gateway, 4 invariant violation.\n"
               "The API key is read from the environment variable named by gateway.api_key_env.");
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "INI config file");
        sub->add_option("--graph", o.graph, "graph document (default paths.graph)");
        sub->add_option("--patterns", o.patterns, "pattern library document (default paths.patterns)");
        sub->add_option("--out", o.out, "output file or directory");
        sub->add_flag("-v,--verbose", o.verbose, "print info and debug diagnostics");
    };
    auto model = [&](CLI::App* sub) {
        sub->add_option("--backend", o.backend, "replay or http (default gateway.backend)");
        sub->add_option("--session", o.session, "replay session file");
        sub->add_option("--record", o.record, "record every exchange into this session file");
        sub->add_option("--timestamp", o.timestamp, "time stamp for learned patterns (default SOURCE_DATE_EPOCH or now)");
    };
    auto knobs = [&](CLI::App* sub) {
        sub->add_option("--k-s", o.k_s, "analysis seeds");
        sub->add_option("--k-h", o.k_h, "BFS hops around the seeds");
        sub->add_option("--k-e", o.k_e, "expansion files kept after BM25");
        sub->add_option("--k-i", o.k_i, "inference results kept");
        sub->add_option("--k-r", o.k_r, "retrieval results kept");
        sub->add_flag("--no-direct", o.no_direct, "disable direct extraction");
        sub->add_flag("--no-inference", o.no_inference, "disable symptom-based inference");
        sub->add_flag("--no-retrieval", o.no_retrieval, "disable annotation-based retrieval");
        sub->add_flag("--no-validator", o.no_validator, "report analyzer order without scoring");
    };

    auto* build = app.add_subcommand("build-graph", "scan a repository and write its graph");
    common(build);
    build->add_option("--repo", o.repo, "repository root")->required();

    auto* annotate = app.add_subcommand("annotate", "label LLM roles on graph files and learn keywords");
    common(annotate);
    model(annotate);
    knobs(annotate);

    auto* loc = app.add_subcommand("localize", "rank files for a defect description");
    common(loc);
    model(loc);
    knobs(loc);
    loc->add_option("--description", o.description, "defect report (text, or JSON with a description field)");

    auto* eval = app.add_subcommand("evaluate", "run a benchmark manifest against replay sessions");
    common(eval);
    knobs(eval);
    eval->add_option("--manifest", o.manifest, "benchmark manifest")->required();
    eval->add_option("--run-id", o.run_id, "output subdirectory under the runs directory");
    eval->add_option("--timestamp", o.timestamp, "time stamp for learned patterns");

    std::string patterns_action;
    auto* pats = app.add_subcommand("patterns", "inspect the pattern library");
    common(pats);
    pats->add_option("action", patterns_action, "list or stats")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    DiagnosticSink sink;
    int rc = 0;
    try {
        if (*build) rc = cmd_build_graph(o, sink);
        else if (*annotate) rc = cmd_annotate(o, sink);
        else if (*loc) rc = cmd_localize(o, sink);
        else if (*eval) rc = cmd_evaluate(o, sink);
        else if (*pats) rc = cmd_patterns(patterns_action, o);
    } catch (const Error& e) {
        print_diagnostics(sink, o.verbose);
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        print_diagnostics(sink, o.verbose);
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    print_diagnostics(sink, o.verbose);
    return rc;
}
