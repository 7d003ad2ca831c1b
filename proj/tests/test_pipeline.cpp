#include "llmloc/pipeline.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace llmloc;
using testing::FakeBackend;
using testing::fenced;

namespace {

GatewayConfig quiet_config() {
    GatewayConfig c;
    c.model = "free";
    c.prices["free"] = {0.0, 0.0};
    return c;
}

InstanceRun replay_running_example(const PipelineConfig& cfg) {
    DiagnosticSink sink;
    Gateway gw(load_session(testing::fixture("sessions/gpt-researcher-language.json")), quiet_config(), &sink);
    auto d = DefectDescription::from_file(testing::fixture("instances/gpt-researcher-language/description.txt"));
    d.instance_id = "gpt-researcher-language";
    auto lib = PatternLibrary::with_defaults();
    return run_instance(testing::fixture("repos/gpt-researcher"), d, lib, gw, PromptSet(), cfg,
                        "2025-01-01T00:00:00Z", sink);
}

}  // namespace

TEST_CASE("running example replay ranks the two root causes above the symptom") {
    auto run = replay_running_example(PipelineConfig{});
    const auto& e = run.report.entries;
    REQUIRE(e.size() >= 3);
    CHECK(e[0].path == "gpt_researcher/prompts.py");
    CHECK(std::abs(*e[0].score - 9.1) < 1e-9);
    CHECK(e[0].band == Band::root_cause);
    CHECK(e[0].confidence == 4);
    CHECK(e[1].path == "gpt_researcher/config/config.py");
    CHECK(std::abs(*e[1].score - 9.0) < 1e-9);
    CHECK(e[1].band == Band::root_cause);
    CHECK(e[2].path == "gpt_researcher/agent.py");
    CHECK(std::abs(*e[2].score - 4.0) < 1e-9);
    CHECK(e[2].band == Band::symptom);
    for (std::size_t i = 0; i < e.size(); ++i) CHECK(e[i].rank == i + 1);
    CHECK(run.report.usage.input_tokens > 0);
}

TEST_CASE("running example report is byte-identical across runs") {
    auto a = report_to_json(replay_running_example(PipelineConfig{}).report);
    auto b = report_to_json(replay_running_example(PipelineConfig{}).report);
    CHECK(a == b);
}

TEST_CASE("without the validator the analyzer order is reported unscored") {
    PipelineConfig cfg;
    cfg.use_validator = false;
    auto run = replay_running_example(cfg);
    REQUIRE_FALSE(run.report.entries.empty());
    CHECK(run.report.entries[0].path == "gpt_researcher/prompts.py");
    for (const auto& e : run.report.entries) {
        CHECK_FALSE(e.score.has_value());
        CHECK_FALSE(e.band.has_value());
    }
    CHECK(run.report.config.at("validator.enabled") == "false");
}

TEST_CASE("ablation variants disable one stage each") {
    auto v = ablation_variants(PipelineConfig{});
    REQUIRE(v.size() == 5);
    CHECK(v[0].first == "full");
    CHECK(v[1].first == "no-direct");
    CHECK_FALSE(v[1].second.analyzer.use_direct);
    CHECK(v[2].first == "no-inference");
    CHECK_FALSE(v[2].second.analyzer.use_inference);
    CHECK(v[3].first == "no-retrieval");
    CHECK_FALSE(v[3].second.analyzer.use_retrieval);
    CHECK(v[4].first == "no-validator");
    CHECK_FALSE(v[4].second.use_validator);
    for (std::size_t i = 1; i < v.size(); ++i) {
        int off = !v[i].second.analyzer.use_direct + !v[i].second.analyzer.use_inference +
                  !v[i].second.analyzer.use_retrieval + !v[i].second.use_validator;
        CHECK(off == 1);
    }
}

TEST_CASE("report usage counts only this localization") {
    auto g = testing::fixture_graph("repos/gpt-researcher");
    auto fake = std::make_shared<FakeBackend>([](const ChatRequest& req) -> std::string {
        if (req.template_id == "infer.v1") return fenced("gpt_researcher/agent.py\n");
        if (req.template_id == "retrieve.v1") return fenced("LLM_PROMPT\n");
        if (req.template_id == "counterfactual.v1") return fenced("score: 3\nrationale: r\n");
        return fenced("A\n");
    });
    Gateway gw(fake, quiet_config());
    DiagnosticSink sink;
    ChatRequest warmup;
    warmup.template_id = "warmup";
    warmup.rendered_prompt = std::string(400, 'x');
    gw.complete(warmup);
    const auto before = gw.report_usage().total;
    auto r = localize(DefectDescription::from_text("agent output is wrong"), g, PatternLibrary::with_defaults(), gw,
                      PromptSet(), PipelineConfig{}, sink);
    const auto after = gw.report_usage().total;
    CHECK(r.usage.input_tokens == after.input_tokens - before.input_tokens);
    CHECK(r.usage.output_tokens == after.output_tokens - before.output_tokens);
    CHECK(r.entries.size() == 1);
}

TEST_CASE("no candidates gives an empty report with a note") {
    auto g = testing::fixture_graph("repos/gpt-researcher");
    auto fake = std::make_shared<FakeBackend>([](const ChatRequest& req) -> std::string {
        if (req.template_id == "infer.v1") return fenced("");
        return fenced("LLM_MEMORY\n");
    });
    Gateway gw(fake, quiet_config());
    DiagnosticSink sink;
    auto r = localize(DefectDescription::from_text("it is slow"), g, PatternLibrary::with_defaults(), gw, PromptSet(),
                      PipelineConfig{}, sink);
    CHECK(r.entries.empty());
    CHECK(r.notes == std::vector<std::string>{"no candidates"});
}

TEST_CASE("config snapshot lists the ranking parameters") {
    auto snap = PipelineConfig{}.snapshot();
    for (const char* key : {"annotator.k_s", "annotator.k_h", "annotator.k_e", "analyzer.k_i", "analyzer.k_r",
                            "validator.max_intermediate", "validator.enabled"})
        CHECK(snap.contains(key));
    CHECK(snap.at("analyzer.k_i") == "5");
}
