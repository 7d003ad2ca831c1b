#include "llmloc/validator.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include <sys/wait.h>

using namespace llmloc;
using testing::TempDir;

namespace {

struct Result {
    int code = -1;
    std::string output;  // stdout and stderr
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

Result run(const std::string& args, const char* binary = LLMLOC_CLI) {
    Result r;
    const std::string cmd = quote(binary) + " " + args + " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string fx(std::string_view rel) { return quote(testing::fixture(rel)); }

/// build-graph then annotate the running example repository into `dir`.
void prepare_running_example(const TempDir& dir) {
    auto b = run("build-graph --repo " + fx("repos/gpt-researcher") + " --out " + quote(dir / "graph.json"));
    REQUIRE(b.code == 0);
    auto a = run("annotate --config " + fx("llmloc.ini") + " --graph " + quote(dir / "graph.json") + " --patterns " +
                 quote(dir / "patterns.json") + " --session " + fx("sessions/gpt-researcher-language.json"));
    INFO(a.output);
    REQUIRE(a.code == 0);
}

}  // namespace

TEST_CASE("help lists subcommands, config keys and exit codes") {
    auto r = run("--help");
    CHECK(r.code == 0);
    for (const char* s : {"build-graph", "annotate", "localize", "evaluate", "patterns", "annotator.k_s",
                          "analyzer.k_i", "validator.max_intermediate", "gateway.model", "prices.<model>",
                          "Exit codes"})
        CHECK(r.output.find(s) != std::string::npos);
}

TEST_CASE("usage errors exit with 1") {
    CHECK(run("").code == 1);
    CHECK(run("frobnicate").code == 1);
    CHECK(run("build-graph").code == 1);
    CHECK(run("localize --graph x.json").code == 1);
    CHECK(run("patterns shuffle --patterns /nonexistent/p.json").code == 1);
    TempDir dir;
    dir.write("bad.ini", "[annotator]\nk_z = 3\n");
    CHECK(run("build-graph --repo " + fx("unit/llm_wrapper") + " --config " + quote(dir / "bad.ini")).code == 1);
}

TEST_CASE("build-graph writes the golden graph") {
    TempDir dir;
    auto r = run("build-graph --repo " + fx("unit/llm_wrapper") + " --out " + quote(dir / "g.json"));
    INFO(r.output);
    REQUIRE(r.code == 0);
    CHECK(r.output.find("12 nodes, 14 edges") != std::string::npos);
    CHECK(read_file(dir / "g.json") == read_file(testing::fixture("golden/llm_wrapper.graph.json")));
}

TEST_CASE("build-graph on a missing repository fails with an io code") {
    TempDir dir;
    auto r = run("build-graph --repo /nonexistent/repo --out " + quote(dir / "g.json"));
    CHECK(r.code == 2);
    CHECK(r.output.find("error:") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "g.json"));
}

TEST_CASE("annotate and localize replay the running example") {
    TempDir dir;
    prepare_running_example(dir);
    auto r = run("localize --config " + fx("llmloc.ini") + " --graph " + quote(dir / "graph.json") + " --patterns " +
                 quote(dir / "patterns.json") + " --session " + fx("sessions/gpt-researcher-language.json") +
                 " --description " + fx("instances/gpt-researcher-language/description.txt") + " --out " +
                 quote(dir.str()));
    INFO(r.output);
    REQUIRE(r.code == 0);
    auto report = report_from_json(read_file(dir / "report.json"));
    REQUIRE(report.entries.size() >= 3);
    CHECK(report.entries[0].path == "gpt_researcher/prompts.py");
    CHECK(report.entries[1].path == "gpt_researcher/config/config.py");
    CHECK(report.entries[2].path == "gpt_researcher/agent.py");
    CHECK(std::filesystem::is_regular_file(dir / "report.txt"));
    CHECK(r.output.find("1. gpt_researcher/prompts.py") != std::string::npos);

    // a learned keyword carries the SOURCE_DATE_EPOCH stamp
    auto list = run("patterns list --patterns " + quote(dir / "patterns.json"));
    CHECK(list.code == 0);
    CHECK(list.output.find("learned") != std::string::npos);
    CHECK(list.output.find("2025-01-01T00:00:00Z") != std::string::npos);
    auto stats = run("patterns stats --patterns " + quote(dir / "patterns.json"));
    CHECK(stats.code == 0);
    CHECK(stats.output.find("builtin") != std::string::npos);
}

TEST_CASE("localize rejects an empty description and a missing session") {
    TempDir dir;
    prepare_running_example(dir);
    dir.write("empty.txt", "\n");
    const std::string base = "localize --config " + fx("llmloc.ini") + " --graph " + quote(dir / "graph.json") +
                             " --patterns " + quote(dir / "patterns.json") + " --out " + quote(dir.str());
    auto empty = run(base + " --session " + fx("sessions/gpt-researcher-language.json") + " --description " +
                     quote(dir / "empty.txt"));
    CHECK(empty.code == 1);
    auto no_session = run(base + " --session " + quote(dir / "missing.json") + " --description " +
                          fx("instances/gpt-researcher-language/description.txt"));
    CHECK(no_session.code == 2);
    CHECK(no_session.output.find("missing.json") != std::string::npos);
    auto no_flag = run(base + " --description " + fx("instances/gpt-researcher-language/description.txt"));
    CHECK(no_flag.code == 1);
}

TEST_CASE("a replay miss is a gateway error") {
    TempDir dir;
    prepare_running_example(dir);
    dir.write("other.txt", "A completely different report that was never recorded.\n");
    auto r = run("localize --config " + fx("llmloc.ini") + " --graph " + quote(dir / "graph.json") + " --patterns " +
                 quote(dir / "patterns.json") + " --session " + fx("sessions/gpt-researcher-language.json") +
                 " --description " + quote(dir / "other.txt") + " --out " + quote(dir.str()));
    CHECK(r.code == 3);
}

TEST_CASE("a missing graph is an io error") {
    TempDir dir;
    auto r = run("localize --graph " + quote(dir / "none.json") + " --session " +
                 fx("sessions/gpt-researcher-language.json") + " --description " +
                 fx("instances/gpt-researcher-language/description.txt"));
    CHECK(r.code == 2);
}

TEST_CASE("evaluate prints metrics and writes per-instance reports") {
    TempDir dir;
    auto r = run("evaluate --config " + fx("llmloc.ini") + " --manifest " + fx("manifest.json") + " --out " +
                 quote(dir.str()) + " --run-id t");
    INFO(r.output);
    REQUIRE(r.code == 0);
    CHECK(r.output.find("Top-3      1.000") != std::string::npos);
    CHECK(std::filesystem::is_regular_file(dir / "t/metrics.json"));
    CHECK(std::filesystem::is_regular_file(dir / "t/chatbot-facts.json"));

    auto ablated = run("evaluate --config " + fx("llmloc.ini") + " --manifest " + fx("manifest.json") + " --out " +
                       quote(dir.str()) + " --run-id nv --no-validator");
    CHECK(ablated.code == 0);
    auto nv = report_from_json(read_file(dir / "nv/chatbot-facts.json"));
    for (const auto& e : nv.entries) CHECK_FALSE(e.score.has_value());
}

TEST_CASE("evaluate output is byte-identical across runs") {
    TempDir dir;
    for (const char* id : {"a", "b"})
        REQUIRE(run("evaluate --config " + fx("llmloc.ini") + " --manifest " + fx("manifest.json") + " --out " +
                    quote(dir.str()) + " --run-id " + id)
                    .code == 0);
    for (const char* f : {"metrics.json", "gpt-researcher-language.json", "ragapp-embed-dim.json"})
        CHECK(read_file(dir / (std::string("a/") + f)) == read_file(dir / (std::string("b/") + f)));
}

TEST_CASE("authoring check agrees with the committed sessions") {
    auto r = run("--config " + fx("llmloc.ini") + " --manifest " + fx("manifest.json") + " --check", LLMLOC_AUTHOR_CLI);
    INFO(r.output);
    CHECK(r.code == 0);
    CHECK(r.output.find("stale") == std::string::npos);
}
