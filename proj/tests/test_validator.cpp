#include "llmloc/validator.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

using namespace llmloc;
using testing::FakeBackend;
using testing::fenced;
using testing::TempDir;

namespace {

GatewayConfig quiet_config() {
    GatewayConfig c;
    c.model = "free";
    c.prices["free"] = {0.0, 0.0};
    return c;
}

Graph graph_of(const TempDir& dir) {
    DiagnosticSink sink;
    return build_repository_graph(dir.str(), IngestConfig{}, sink);
}

ScoredCandidate scored(std::string path, double score, int confidence = 0, double bm25 = 0.0) {
    ScoredCandidate s;
    s.path = std::move(path);
    s.score = score;
    s.band = band_of(score);
    s.confidence = confidence;
    s.bm25_score = bm25;
    return s;
}

std::vector<std::string> paths_of(const std::vector<ScoredCandidate>& v) {
    std::vector<std::string> out;
    for (const auto& s : v) out.push_back(s.path);
    return out;
}

CandidateFile candidate(std::string path, int confidence = 2) {
    CandidateFile c;
    c.path = std::move(path);
    c.confidence = confidence;
    c.ranks[1] = 0;
    return c;
}

/// Repository of single-file modules `names`, each importing the next in `chain`.
Graph chain_repo(TempDir& dir, const std::vector<std::string>& chain) {
    for (std::size_t i = 0; i < chain.size(); ++i) {
        std::string text = "def f_" + chain[i] + "():\n    return 1\n";
        if (i + 1 < chain.size()) text = "import " + chain[i + 1] + "\n" + text;
        dir.write(chain[i] + ".py", text);
    }
    return graph_of(dir);
}

}  // namespace

// ---------------------------------------------------------------------------
// bands and scores

TEST_CASE("band sweep over the score range") {
    for (int tenth = 10; tenth <= 100; ++tenth) {
        const double s = tenth / 10.0;
        CAPTURE(s);
        const Band expected = s >= 8.0 ? Band::root_cause : (s > 5.0 ? Band::contributor : Band::symptom);
        CHECK(band_of(s) == expected);
    }
    CHECK(band_of(8.0) == Band::root_cause);
    CHECK(band_of(7.999) == Band::contributor);
    CHECK(band_of(5.001) == Band::contributor);
    CHECK(band_of(5.0) == Band::symptom);
    CHECK(band_of(kDefaultScore) == Band::symptom);
}

TEST_CASE("band names round-trip") {
    for (auto b : {Band::root_cause, Band::contributor, Band::symptom}) CHECK(parse_band(to_string(b)) == b);
    CHECK_FALSE(parse_band("critical").has_value());
}

TEST_CASE("scores are clamped to the scale") {
    DiagnosticSink sink;
    CHECK(clamp_score(12, &sink, "a.py") == 10.0);
    CHECK(clamp_score(-3, &sink, "a.py") == 1.0);
    CHECK(clamp_score(7.5, &sink, "a.py") == 7.5);
    CHECK(sink.snapshot().size() == 2);
}

TEST_CASE("score replies") {
    auto r = parse_score_reply(fenced("score: 8.5\nrationale: renders the wrong variable\n"));
    REQUIRE(r);
    CHECK(r->first == 8.5);
    CHECK(r->second == "renders the wrong variable");
    CHECK_FALSE(parse_score_reply(fenced("rationale: no score\n")));
    CHECK_FALSE(parse_score_reply(fenced("score: high\n")));
    CHECK_FALSE(parse_score_reply("score: 3"));
}

// ---------------------------------------------------------------------------
// subgraphs

TEST_CASE("a direct import joins two candidates") {
    TempDir dir;
    auto g = chain_repo(dir, {"a", "b"});
    auto ctx = build_subgraphs(g, {"b.py", "a.py"}, 2);
    REQUIRE(ctx.size() == 1);
    CHECK(ctx[0].candidates == std::vector<std::string>{"a.py", "b.py"});
    CHECK_FALSE(ctx[0].isolated);
    CHECK(ctx[0].topology.find("a.py -IMPORT-> b.py") != std::string::npos);
}

TEST_CASE("intermediate node limit decides grouping") {
    TempDir dir;
    auto g = chain_repo(dir, {"a", "m1", "m2", "b"});
    CHECK(build_subgraphs(g, {"a.py", "b.py"}, 2).size() == 1);
    CHECK(build_subgraphs(g, {"a.py", "b.py"}, 1).size() == 2);

    TempDir far;
    auto g2 = chain_repo(far, {"a", "m1", "m2", "m3", "b"});
    auto ctx = build_subgraphs(g2, {"a.py", "b.py"}, 2);
    REQUIRE(ctx.size() == 2);
    CHECK(ctx[0].isolated);
    CHECK(ctx[1].isolated);
}

TEST_CASE("candidates on the path do not count as intermediates") {
    TempDir dir;
    auto g = chain_repo(dir, {"a", "m1", "b", "m2", "m3", "c"});
    auto ctx = build_subgraphs(g, {"a.py", "b.py", "c.py"}, 2);
    REQUIRE(ctx.size() == 1);
    CHECK(ctx[0].candidates == std::vector<std::string>{"a.py", "b.py", "c.py"});
}

TEST_CASE("shortest dependency path avoids package and repository nodes") {
    TempDir dir;
    dir.write("pkg/__init__.py", "");
    dir.write("pkg/x.py", "def f():\n    return 1\n");
    dir.write("pkg/y.py", "def g():\n    return 2\n");
    auto g = graph_of(dir);
    auto x = *g.lookup_by_path("pkg/x.py");
    auto y = *g.lookup_by_path("pkg/y.py");
    CHECK(shortest_dependency_path(g, x, y, {x, y}).empty());
    CHECK(build_subgraphs(g, {"pkg/x.py", "pkg/y.py"}, 2).size() == 2);
    CHECK(shortest_dependency_path(g, x, x, {x}) == std::vector<NodeId>{x});
}

TEST_CASE("running example candidates share one context") {
    auto g = testing::fixture_graph("repos/gpt-researcher");
    auto ctx = build_subgraphs(
        g, {"gpt_researcher/prompts.py", "gpt_researcher/config/config.py", "gpt_researcher/agent.py"}, 2);
    REQUIRE(ctx.size() == 1);
    CHECK(ctx[0].candidates.size() == 3);
    CHECK_FALSE(ctx[0].isolated);
    CHECK(ctx[0].signatures.size() == 3);
}

TEST_CASE("a single candidate is isolated") {
    auto g = testing::fixture_graph("repos/gpt-researcher");
    auto ctx = build_subgraphs(g, {"gpt_researcher/prompts.py"}, 2);
    REQUIRE(ctx.size() == 1);
    CHECK(ctx[0].isolated);
    CHECK(ctx[0].topology.empty());
}

TEST_CASE("unknown candidate is an invariant error") {
    auto g = testing::fixture_graph("repos/gpt-researcher");
    try {
        build_subgraphs(g, {"nope.py"}, 2);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::invariant);
    }
}

TEST_CASE("signatures keep source order and indent methods") {
    TempDir dir;
    dir.write("s.py", "def top(a, b):\n    return a\n\nclass K(Base):\n    def m(self):\n        pass\n\ndef last():\n    pass\n");
    auto g = graph_of(dir);
    CHECK(extract_signatures(g, *g.lookup_by_path("s.py")) ==
          std::vector<std::string>{"def top(a, b):", "class K(Base):", "    def m(self):", "def last():"});
}

// ---------------------------------------------------------------------------
// counterfactual scoring

TEST_CASE("counterfactual score parsed, clamped and banded") {
    TempDir dir;
    auto g = chain_repo(dir, {"a", "b"});
    auto ctx = build_subgraphs(g, {"a.py"}, 2);
    auto fake = std::make_shared<FakeBackend>([](const ChatRequest&) {
        return fenced("score: 12\nrationale: the defect lives here\n");
    });
    Gateway gw(fake, quiet_config());
    DiagnosticSink sink;
    auto s = score_counterfactual(candidate("a.py", 4), ctx[0], DefectDescription::from_text("x"), g, gw, PromptSet(),
                                  ValidatorConfig{}, sink);
    CHECK(s.score == 10.0);
    CHECK(s.band == Band::root_cause);
    CHECK(s.rationale == "the defect lives here");
    CHECK(s.confidence == 4);
    CHECK(fake->templates == std::vector<std::string>{kCounterfactualTemplate});
    CHECK(fake->prompts[0].find("No dependency context") != std::string::npos);
}

TEST_CASE("scorer failure falls back to the default score") {
    TempDir dir;
    auto g = chain_repo(dir, {"a"});
    auto ctx = build_subgraphs(g, {"a.py"}, 2);
    auto fake = std::make_shared<FakeBackend>([](const ChatRequest&) { return std::string("no idea"); });
    Gateway gw(fake, quiet_config());
    DiagnosticSink sink;
    auto s = score_counterfactual(candidate("a.py"), ctx[0], DefectDescription::from_text("x"), g, gw, PromptSet(),
                                  ValidatorConfig{}, sink);
    CHECK(s.score == 5.0);
    CHECK(s.rationale == "score unavailable");
    CHECK(s.band == Band::symptom);
    CHECK(fake->calls() == 2);
}

TEST_CASE("large files are truncated in the prompt") {
    TempDir dir;
    dir.write("big.py", std::string(5000, '#') + "\n");
    auto g = graph_of(dir);
    auto ctx = build_subgraphs(g, {"big.py"}, 2);
    auto fake = std::make_shared<FakeBackend>([](const ChatRequest&) { return fenced("score: 3\nrationale: r\n"); });
    Gateway gw(fake, quiet_config());
    DiagnosticSink sink;
    ValidatorConfig cfg;
    cfg.content_limit_bytes = 100;
    score_counterfactual(candidate("big.py"), ctx[0], DefectDescription::from_text("x"), g, gw, PromptSet(), cfg, sink);
    CHECK(fake->prompts[0].find("(truncated)") != std::string::npos);
    CHECK(fake->prompts[0].find(std::string(200, '#')) == std::string::npos);
}

// ---------------------------------------------------------------------------
// ranking

TEST_CASE("low group sorts by score, confidence, bm25, path") {
    std::vector<ScoredCandidate> group = {scored("e.py", 4, 1, 0.5), scored("d.py", 4, 2, 0.1),
                                          scored("c.py", 4, 2, 0.9), scored("b.py", 4, 2, 0.9),
                                          scored("a.py", 2, 4, 9.0), scored("f.py", 5, 0, 0.0)};
    sort_low_group(group);
    CHECK(paths_of(group) == std::vector<std::string>{"f.py", "b.py", "c.py", "d.py", "e.py", "a.py"});
}

TEST_CASE("low group sort matches a brute-force oracle") {
    testing::Rng rng(11);
    for (int round = 0; round < 200; ++round) {
        std::vector<ScoredCandidate> group;
        const auto n = rng.between(0, 8);
        for (std::size_t i = 0; i < n; ++i)
            group.push_back(scored("f" + std::to_string(i) + ".py", 1.0 + static_cast<double>(rng.below(5)),
                                   static_cast<int>(rng.below(3)), 0.5 * static_cast<double>(rng.below(3))));
        auto oracle = group;
        // selection sort on the tuple key
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            std::size_t best = i;
            for (std::size_t j = i + 1; j < oracle.size(); ++j) {
                auto key = [](const ScoredCandidate& s) {
                    return std::make_tuple(-s.score, -s.confidence, -s.bm25_score, s.path);
                };
                if (key(oracle[j]) < key(oracle[best])) best = j;
            }
            std::swap(oracle[i], oracle[best]);
        }
        rng.shuffle(group);
        sort_low_group(group);
        CHECK(paths_of(group) == paths_of(oracle));
    }
}

TEST_CASE("low group ranking makes no model calls") {
    TempDir dir;
    auto g = chain_repo(dir, {"a", "b", "c"});
    auto fake = std::make_shared<FakeBackend>([](const ChatRequest&) { return fenced("A\n"); });
    Gateway gw(fake, quiet_config());
    DiagnosticSink sink;
    auto d = DefectDescription::from_text("x");
    PromptSet prompts;
    PairwiseJudge judge(d, g, gw, prompts, ValidatorConfig{}, sink);
    auto out = rank_adaptive({scored("a.py", 5.0), scored("b.py", 3.0), scored("c.py", 1.0)}, judge);
    CHECK(paths_of(out) == std::vector<std::string>{"a.py", "b.py", "c.py"});
    CHECK(fake->calls() == 0);
    CHECK(judge.queries() == 0);
}

TEST_CASE("high group precedes low group whatever the judge says") {
    TempDir dir;
    auto g = chain_repo(dir, {"a", "b", "c", "d", "e"});
    testing::Rng rng(5);
    for (int round = 0; round < 50; ++round) {
        auto fake = std::make_shared<FakeBackend>([&](const ChatRequest&) { return fenced(rng.coin() ? "A\n" : "B\n"); });
        Gateway gw(fake, quiet_config());
        DiagnosticSink sink;
        auto d = DefectDescription::from_text("x");
        PromptSet prompts;
        PairwiseJudge judge(d, g, gw, prompts, ValidatorConfig{}, sink);
        std::vector<ScoredCandidate> in;
        for (const char* p : {"a.py", "b.py", "c.py", "d.py", "e.py"})
            in.push_back(scored(p, 1.0 + static_cast<double>(rng.below(19)) / 2.0));
        auto out = rank_adaptive(in, judge);
        REQUIRE(out.size() == in.size());
        bool seen_low = false;
        for (const auto& s : out) {
            if (s.score <= 5.0) seen_low = true;
            else CHECK_FALSE(seen_low);
        }
        std::size_t high = std::count_if(in.begin(), in.end(), [](const auto& s) { return s.score > 5.0; });
        CHECK(judge.queries() <= high * (high - (high > 0 ? 1 : 0)) / 2);
    }
}

TEST_CASE("pairwise judge asks each pair once with the smaller path as A") {
    TempDir dir;
    auto g = chain_repo(dir, {"a", "b", "c", "d"});
    std::map<std::pair<std::string, std::string>, int> asked;
    auto fake = std::make_shared<FakeBackend>([&](const ChatRequest& req) {
        auto find = [&](std::string_view label) {
            auto at = req.rendered_prompt.find(label);
            REQUIRE(at != std::string::npos);
            auto start = at + label.size();
            return req.rendered_prompt.substr(start, req.rendered_prompt.find('\n', start) - start);
        };
        auto a = find("## CANDIDATE A: "), b = find("## CANDIDATE B: ");
        CHECK(a < b);
        ++asked[{a, b}];
        // prefer the path later in the alphabet
        return fenced("B\n");
    });
    Gateway gw(fake, quiet_config());
    DiagnosticSink sink;
    auto d = DefectDescription::from_text("x");
    PromptSet prompts;
    PairwiseJudge judge(d, g, gw, prompts, ValidatorConfig{}, sink);
    std::vector<ScoredCandidate> high = {scored("a.py", 9), scored("b.py", 8), scored("c.py", 7), scored("d.py", 6)};
    auto out = rank_adaptive(high, judge);
    CHECK(paths_of(out) == std::vector<std::string>{"d.py", "c.py", "b.py", "a.py"});
    for (const auto& [pair, n] : asked) CHECK(n == 1);
    // asking again hits the cache
    const auto before = judge.queries();
    CHECK(judge.closer(out[0], out[1]));
    CHECK(judge.queries() == before);
}

TEST_CASE("merge sort with an intransitive comparator is deterministic") {
    // rock-paper-scissors cycle over three items plus a clear winner
    auto beats = [](const ScoredCandidate& x, const ScoredCandidate& y) {
        static const std::set<std::pair<std::string, std::string>> wins = {
            {"r", "s"}, {"s", "p"}, {"p", "r"}, {"w", "r"}, {"w", "s"}, {"w", "p"}};
        return wins.contains({x.path, y.path});
    };
    std::vector<ScoredCandidate> base = {scored("r", 9), scored("p", 8), scored("s", 7), scored("w", 6)};
    auto first = base;
    merge_sort_by(first, beats);
    for (int i = 0; i < 5; ++i) {
        auto again = base;
        merge_sort_by(again, beats);
        CHECK(paths_of(again) == paths_of(first));
    }
    auto perm = paths_of(first);
    std::sort(perm.begin(), perm.end());
    CHECK(perm == std::vector<std::string>{"p", "r", "s", "w"});
}

TEST_CASE("merge sort agrees with stable sort for a strict weak order") {
    testing::Rng rng(3);
    for (int round = 0; round < 200; ++round) {
        std::vector<ScoredCandidate> v;
        for (std::size_t i = 0, n = rng.between(0, 12); i < n; ++i)
            v.push_back(scored("p" + std::to_string(i), static_cast<double>(rng.below(4))));
        auto less = [](const ScoredCandidate& a, const ScoredCandidate& b) { return a.score > b.score; };
        auto oracle = v;
        std::stable_sort(oracle.begin(), oracle.end(), less);
        merge_sort_by(v, less);
        CHECK(paths_of(v) == paths_of(oracle));
    }
}

// ---------------------------------------------------------------------------
// reports

TEST_CASE("empty report carries a note") {
    auto r = make_report("x", {}, TokenUsage{}, {});
    CHECK(r.entries.empty());
    CHECK(r.notes == std::vector<std::string>{"no candidates"});
    CHECK(report_to_text(r).find("No candidates.") != std::string::npos);
}

TEST_CASE("report JSON round-trips and is canonical") {
    auto a = scored("a.py", 9.1, 4, 0.25);
    a.rationale = "renders \"language\"";
    a.annotation_types = {AnnotationType::llm_prompt, AnnotationType::llm_config};
    TokenUsage u;
    u.input_tokens = 120;
    u.output_tokens = 30;
    u.estimated_cost = 0.001;
    auto r = make_report("inst", {a, scored("b.py", 4.0, 1)}, u, {{"validator.max_intermediate", "2"}});
    CHECK(r.entries[0].rank == 1);
    CHECK(r.entries[1].rank == 2);
    CHECK(r.ranked_paths() == std::vector<std::string>{"a.py", "b.py"});
    auto text = report_to_json(r);
    CHECK(text.back() == '\n');
    auto back = report_from_json(text);
    CHECK(back == r);
    CHECK(report_to_json(back) == text);
}

TEST_CASE("unscored entries serialize as null") {
    LocalizationReport r;
    r.instance_id = "x";
    ReportEntry e;
    e.rank = 1;
    e.path = "a.py";
    e.confidence = 2;
    r.entries.push_back(e);
    auto text = report_to_json(r);
    CHECK(text.find("\"score\": null") != std::string::npos);
    CHECK(report_from_json(text) == r);
}

TEST_CASE("malformed report JSON is a parse error") {
    try {
        report_from_json("{\"ranking\": 3}");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::parse);
    }
}
