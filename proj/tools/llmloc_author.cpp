// llmloc-author: regenerate replay sessions for a benchmark manifest from its answer scripts.

#include "llmloc/authoring.hpp"
#include "llmloc/config.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace llmloc;

int main(int argc, char** argv) {
    CLI::App app{"Record replay sessions from answer scripts for every ablation variant."};
    std::string manifest_path;
    std::string config_path;
    std::string only;
    std::string timestamp = "2025-01-01T00:00:00Z";
    bool check = false;
    app.add_option("--manifest", manifest_path, "benchmark manifest")->required();
    app.add_option("--config", config_path, "INI configuration file");
    app.add_option("--instance", only, "limit to one instance id");
    app.add_option("--timestamp", timestamp, "time stamp for learned patterns");
    app.add_flag("--check", check, "compare with the committed sessions instead of writing");
    CLI11_PARSE(app, argc, argv);

    try {
        auto manifest = load_manifest(manifest_path);
        const GlobalConfig cfg = config_path.empty() ? GlobalConfig() : load_config(config_path);
        BenchmarkOptions opts;
        opts.pipeline = cfg.pipeline;
        opts.gateway = cfg.gateway;
        opts.timestamp = timestamp;
        int stale = 0;
        for (const auto& inst : manifest.instances) {
            if (!only.empty() && inst.instance_id != only) continue;
            DiagnosticSink sink;
            auto text = author_session(inst, opts, sink).serialize();
            if (check) {
                std::string current;
                try {
                    current = read_file(inst.session_file);
                } catch (const Error&) {
                }
                if (current != text) {
                    std::cout << "stale   " << inst.instance_id << "\n";
                    ++stale;
                } else {
                    std::cout << "ok      " << inst.instance_id << "\n";
                }
            } else {
                write_file(inst.session_file, text);
                std::cout << "wrote   " << inst.session_file << "\n";
            }
            for (const auto& d : sink.snapshot())
                if (d.severity >= Severity::warning)
                    std::cerr << "  " << to_string(d.severity) << ": [" << d.component << "] " << d.message << "\n";
        }
        return stale == 0 ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
