#include "llmloc/authoring.hpp"

namespace llmloc {

Session author_session(const BenchmarkInstance& inst, const BenchmarkOptions& opts, DiagnosticSink& sink) {
    if (inst.script_file.empty()) throw Error(ErrorKind::usage, inst.instance_id + ": no script_file in manifest");
    auto scripted = std::make_shared<ScriptedBackend>(AnswerScript::load(inst.script_file));
    auto recorder = std::make_shared<RecordingBackend>(scripted);
    const PromptSet prompts = opts.prompts_dir.empty() ? PromptSet() : PromptSet::from_directory(opts.prompts_dir);
    auto d = DefectDescription::from_file(inst.description_file);
    if (d.instance_id.empty()) d.instance_id = inst.instance_id;
    for (const auto& [name, cfg] : ablation_variants(opts.pipeline)) {
        Gateway gateway(recorder, opts.gateway, &sink);
        auto lib = opts.patterns_file.empty() ? PatternLibrary::with_defaults() : load_library(opts.patterns_file);
        run_instance(inst.repo_root, d, lib, gateway, prompts, cfg, opts.timestamp, sink);
    }
    return recorder->session();
}

}  // namespace llmloc
