#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "llmloc/gateway.hpp"
#include "llmloc/prompts.hpp"
#include "llmloc/reply.hpp"

#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <future>
#include <thread>

using namespace llmloc;
using testing::FakeBackend;

namespace {

/// Backend reporting fixed token counts per call, in order.
class CountedBackend final : public ChatBackend {
public:
    explicit CountedBackend(std::vector<std::pair<std::uint64_t, std::uint64_t>> counts) : counts_(std::move(counts)) {}
    BackendReply send(const ChatRequest&) override {
        auto [in, out] = counts_.at(next_++);
        return {"ok", in, out};
    }
    std::string id() const override { return "counted"; }

private:
    std::vector<std::pair<std::uint64_t, std::uint64_t>> counts_;
    std::size_t next_ = 0;
};

/// Fails with a transport error `failures` times, then answers.
class FlakyBackend final : public ChatBackend {
public:
    explicit FlakyBackend(int failures) : failures_(failures) {}
    BackendReply send(const ChatRequest&) override {
        ++calls;
        if (calls <= failures_) throw TransportError("connection reset");
        return {"fine", 1, 1};
    }
    std::string id() const override { return "flaky"; }
    int calls = 0;

private:
    int failures_;
};

ChatRequest request(std::string prompt, std::string tag = "t", std::string tmpl = "annotate.v1") {
    ChatRequest r;
    r.template_id = std::move(tmpl);
    r.rendered_prompt = std::move(prompt);
    r.tag = std::move(tag);
    return r;
}

GatewayConfig fast_config() {
    GatewayConfig c;
    c.model = "free";
    c.prices["free"] = {0.0, 0.0};
    c.backoff_base = std::chrono::milliseconds(1);
    return c;
}

}  // namespace

TEST_CASE("token estimate and request hash") {
    CHECK(estimate_tokens(0) == 0);
    CHECK(estimate_tokens(1) == 1);
    CHECK(estimate_tokens(4) == 1);
    CHECK(estimate_tokens(5) == 2);
    auto a = request("hello");
    CHECK(request_hash(a) == sha256_hex("annotate.v1\nhello"));
    auto b = request("hello", "t", "annotate.v2");
    CHECK(request_hash(a) != request_hash(b));
    auto c = request("hello", "other-tag");
    CHECK(request_hash(a) == request_hash(c));
}

TEST_CASE("ledger totals and per-tag breakdown") {
    Gateway gw(std::make_shared<CountedBackend>(std::vector<std::pair<std::uint64_t, std::uint64_t>>{{100, 10}, {50, 5}}),
               fast_config());
    CHECK(gw.report_usage().total == TokenUsage{});
    CHECK(gw.report_usage().requests == 0);
    gw.complete(request("a", "annotate"));
    gw.complete(request("b", "infer"));
    auto u = gw.report_usage();
    CHECK(u.total.input_tokens == 150);
    CHECK(u.total.output_tokens == 15);
    CHECK(u.requests == 2);
    CHECK(u.per_tag.at("annotate").input_tokens == 100);
    CHECK(u.per_tag.at("infer").output_tokens == 5);
    auto ledger = gw.ledger();
    REQUIRE(ledger.size() == 2);
    CHECK(ledger[0].tag == "annotate");
    CHECK(ledger[1].hash == request_hash(request("b")));
    gw.reset_usage();
    CHECK(gw.report_usage().requests == 0);
}

TEST_CASE("cost from the price table") {
    GatewayConfig cfg = fast_config();
    cfg.model = "m";
    cfg.prices["m"] = {1.0, 2.0};
    Gateway gw(std::make_shared<CountedBackend>(std::vector<std::pair<std::uint64_t, std::uint64_t>>{{1000, 500}}), cfg);
    auto r = gw.complete(request("x"));
    CHECK(r.usage.estimated_cost == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(gw.report_usage().total.estimated_cost == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("unknown model costs zero with one warning") {
    DiagnosticSink sink;
    GatewayConfig cfg = fast_config();
    cfg.model = "mystery";
    Gateway gw(std::make_shared<CountedBackend>(std::vector<std::pair<std::uint64_t, std::uint64_t>>{{10, 1}, {10, 1}}),
               cfg, &sink);
    gw.complete(request("a"));
    gw.complete(request("b"));
    CHECK(gw.report_usage().total.estimated_cost == 0.0);
    CHECK(sink.count(Severity::warning) == 1);
}

TEST_CASE("accounting is conserved under concurrency") {
    auto fake = std::make_shared<FakeBackend>([](const ChatRequest& r) { return r.rendered_prompt + "!"; });
    GatewayConfig cfg = fast_config();
    cfg.max_in_flight = 3;
    Gateway gw(fake, cfg);
    std::vector<std::future<ChatResponse>> futures;
    for (int i = 0; i < 64; ++i)
        futures.push_back(std::async(std::launch::async, [&gw, i] {
            return gw.complete(request(std::string(static_cast<std::size_t>(i + 1), 'x'), i % 2 ? "odd" : "even"));
        }));
    TokenUsage sum;
    for (auto& f : futures) sum += f.get().usage;
    auto u = gw.report_usage();
    CHECK(u.requests == 64);
    CHECK(u.total.input_tokens == sum.input_tokens);
    CHECK(u.total.output_tokens == sum.output_tokens);
    TokenUsage from_ledger;
    for (const auto& e : gw.ledger()) from_ledger += e.usage;
    CHECK(from_ledger.input_tokens == u.total.input_tokens);
    CHECK(u.per_tag.at("odd").input_tokens + u.per_tag.at("even").input_tokens == u.total.input_tokens);
}

TEST_CASE("transport errors are retried with backoff, then surface") {
    auto flaky = std::make_shared<FlakyBackend>(2);
    DiagnosticSink sink;
    Gateway gw(flaky, fast_config(), &sink);
    CHECK(gw.complete(request("x")).text == "fine");
    CHECK(flaky->calls == 3);
    CHECK(sink.count(Severity::warning) == 2);

    auto dead = std::make_shared<FlakyBackend>(100);
    Gateway gw2(dead, fast_config());
    CHECK_THROWS_AS(gw2.complete(request("x")), TransportError);
    CHECK(dead->calls == 4);
    CHECK(gw2.ledger().empty());
}

TEST_CASE("record then replay") {
    auto fake = std::make_shared<FakeBackend>([](const ChatRequest& r) { return "echo " + r.rendered_prompt; });
    auto rec = record_session(fake);
    Gateway live(rec, fast_config());
    live.complete(request("one", "annotate"));
    live.complete(request("two", "infer", "infer.v1"));

    testing::TempDir dir;
    rec->save(dir / "s.json");
    auto text = read_file(dir / "s.json");
    CHECK(Session::parse(text).serialize() == text);

    Gateway replay(load_session(dir / "s.json"), fast_config());
    CHECK(replay.complete(request("one")).text == "echo one");
    CHECK(replay.complete(request("one")).text == "echo one");
    CHECK(replay.complete(request("two", "x", "infer.v1")).text == "echo two");
    CHECK(fake->calls() == 2);
    CHECK(replay.report_usage().total.input_tokens == 3 * estimate_tokens(3));
}

TEST_CASE("replay misses name the hash") {
    Session s;
    s.entries[request_hash(request("known"))] = {"annotate.v1", "t", "yes", 1, 1};
    Gateway gw(std::make_shared<ReplayBackend>(s), fast_config());
    auto changed = request("known", "t", "annotate.v2");
    try {
        gw.complete(changed);
        FAIL("expected a miss");
    } catch (const UnrecordedRequest& e) {
        CHECK(e.hash() == request_hash(changed));
        CHECK(std::string(e.what()).find(request_hash(changed)) != std::string::npos);
        CHECK(e.kind() == ErrorKind::gateway);
    }
}

TEST_CASE("empty session text misses everything; malformed text is a parse error") {
    Gateway gw(std::make_shared<ReplayBackend>(Session::parse("")), fast_config());
    CHECK_THROWS_AS(gw.complete(request("anything")), UnrecordedRequest);
    CHECK_THROWS_AS(Session::parse("{"), Error);
    CHECK_THROWS_AS(Session::parse("{\"format_version\": 9, \"entries\": {}}"), Error);
}

TEST_CASE("fenced block helpers") {
    CHECK(extract_fenced_block("intro\n```text\na\nb\n```\ntrailer") == "a\nb\n");
    CHECK_FALSE(extract_fenced_block("no fence here"));
    CHECK(fenced_lines("```\n  x \n\n y\n```") == std::vector<std::string>{"x", "y"});
}

TEST_CASE("ask_parsed retries once with a format reminder") {
    int n = 0;
    auto fake = std::make_shared<FakeBackend>([&n](const ChatRequest&) { return ++n == 1 ? "garbage" : "```\nok\n```"; });
    Gateway gw(fake, fast_config());
    DiagnosticSink sink;
    std::function<std::optional<std::string>(std::string_view)> parse = [](std::string_view t) {
        return extract_fenced_block(t);
    };
    auto got = ask_parsed<std::string>(gw, request("q"), parse, sink, "stage");
    CHECK(got == "ok\n");
    REQUIRE(fake->prompts.size() == 2);
    CHECK(fake->prompts[1] == "q" + std::string(kFormatReminder));

    auto never = std::make_shared<FakeBackend>([](const ChatRequest&) { return "garbage"; });
    Gateway gw2(never, fast_config());
    CHECK_FALSE(ask_parsed<std::string>(gw2, request("q"), parse, sink, "stage"));
    CHECK(never->calls() == 2);
    CHECK(sink.count(Severity::warning) == 1);
}

TEST_CASE("prompt templates render and reject unknown placeholders") {
    PromptSet prompts;
    for (const char* id : {"annotate.v1", "infer.v1", "retrieve.v1", "counterfactual.v1", "pairwise.v1"})
        CHECK_FALSE(prompts.get(id).empty());
    CHECK_THROWS_AS(prompts.get("nope.v1"), Error);
    CHECK_THROWS_AS(prompts.render("annotate.v1", {}), Error);

    testing::TempDir dir;
    dir.write("annotate.v1.txt", "files:\n{{FILES}}\n");
    auto custom = PromptSet::from_directory(dir.str());
    CHECK(custom.render("annotate.v1", {{"FILES", "a.py"}}) == "files:\na.py\n");
    CHECK(custom.get("infer.v1") == prompts.get("infer.v1"));
}

TEST_CASE("http backend speaks chat completions to a local server") {
    httplib::Server server;
    nlohmann::json seen;
    std::string auth;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen = nlohmann::json::parse(req.body);
        auth = req.get_header_value("Authorization");
        nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "```\nA\n```"}}}}}},
                                {"usage", {{"prompt_tokens", 42}, {"completion_tokens", 7}}}};
        res.set_content(reply.dump(), "application/json");
    });
    int busy = 0;
    server.Post("/busy/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++busy;
        res.status = 503;
    });
    server.Post("/bad/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        res.status = 400;
        res.set_content("{\"error\": \"bad request\"}", "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    ::setenv("LLMLOC_TEST_KEY", "sk-test", 1);
    HttpBackendConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/";
    cfg.model = "test-model";
    cfg.api_key_env = "LLMLOC_TEST_KEY";
    cfg.timeout = std::chrono::seconds(5);
    Gateway gw(std::make_shared<HttpBackend>(cfg), fast_config());
    auto req = request("which file?");
    req.max_output_tokens = 64;
    auto r = gw.complete(req);
    CHECK(r.text == "```\nA\n```");
    CHECK(r.usage.input_tokens == 42);
    CHECK(r.usage.output_tokens == 7);
    CHECK(r.backend_id == "http:test-model");
    CHECK(seen["model"] == "test-model");
    CHECK(seen["temperature"] == 0.0);
    CHECK(seen["max_tokens"] == 64);
    CHECK(seen["messages"][0]["content"] == "which file?");
    CHECK(auth == "Bearer sk-test");

    cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/busy";
    Gateway busy_gw(std::make_shared<HttpBackend>(cfg), fast_config());
    CHECK_THROWS_AS(busy_gw.complete(req), TransportError);
    CHECK(busy == 4);

    cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/bad";
    Gateway bad_gw(std::make_shared<HttpBackend>(cfg), fast_config());
    try {
        bad_gw.complete(req);
        FAIL("expected an error");
    } catch (const TransportError&) {
        FAIL("400 must not be retried");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::gateway);
    }

    server.stop();
    t.join();
}
