#include "llmloc/gateway.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <thread>

using nlohmann::json;

namespace llmloc {

std::string request_hash(const ChatRequest& req) {
    return sha256_hex(req.template_id + "\n" + req.rendered_prompt);
}

std::size_t estimate_tokens(std::size_t bytes) { return (bytes + 3) / 4; }

Gateway::Gateway(std::shared_ptr<ChatBackend> backend, GatewayConfig cfg, DiagnosticSink* sink)
    : backend_(std::move(backend)),
      cfg_(std::move(cfg)),
      sink_(sink),
      in_flight_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, cfg_.max_in_flight))) {
    if (!backend_) throw Error(ErrorKind::usage, "gateway needs a backend");
}

ChatResponse Gateway::complete(const ChatRequest& req) {
    if (req.rendered_prompt.empty()) throw Error(ErrorKind::invariant, "empty prompt for template " + req.template_id);
    if (req.temperature < 0) throw Error(ErrorKind::invariant, "negative temperature");
    const std::string hash = request_hash(req);

    BackendReply reply;
    in_flight_.acquire();
    try {
        for (std::size_t attempt = 0;; ++attempt) {
            try {
                reply = backend_->send(req);
                break;
            } catch (const TransportError& e) {
                if (attempt >= cfg_.max_retries) throw;
                if (sink_) sink_->warn("gateway", std::string("retrying after transport error: ") + e.what());
                std::this_thread::sleep_for(cfg_.backoff_base * (1 << attempt));
            }
        }
    } catch (...) {
        in_flight_.release();
        throw;
    }
    in_flight_.release();

    ChatResponse resp;
    resp.text = std::move(reply.text);
    resp.backend_id = backend_->id();
    resp.usage.input_tokens = reply.input_tokens;
    resp.usage.output_tokens = reply.output_tokens;

    std::lock_guard lock(mutex_);
    auto price = cfg_.prices.find(cfg_.model);
    if (price != cfg_.prices.end()) {
        resp.usage.estimated_cost = static_cast<double>(reply.input_tokens) / 1000.0 * price->second.input_per_1k +
                                    static_cast<double>(reply.output_tokens) / 1000.0 * price->second.output_per_1k;
    } else if (!warned_unpriced_) {
        warned_unpriced_ = true;
        if (sink_) sink_->warn("gateway", "no price for model '" + cfg_.model + "', cost reported as 0");
    }
    ledger_.push_back({req.tag, hash, resp.usage});
    return resp;
}

UsageReport Gateway::report_usage() const {
    std::lock_guard lock(mutex_);
    UsageReport r;
    for (const auto& e : ledger_) {
        r.per_tag[e.tag] += e.usage;
        r.total += e.usage;
        ++r.requests;
    }
    return r;
}

std::vector<LedgerEntry> Gateway::ledger() const {
    std::lock_guard lock(mutex_);
    return ledger_;
}

void Gateway::reset_usage() {
    std::lock_guard lock(mutex_);
    ledger_.clear();
}

// ---------------------------------------------------------------------------

std::string Session::serialize() const {
    json doc;
    doc["format_version"] = kSessionFormatVersion;
    doc["entries"] = json::object();
    for (const auto& [hash, r] : entries) {
        doc["entries"][hash] = {{"template_id", r.template_id},
                                {"tag", r.tag},
                                {"text", r.text},
                                {"input_tokens", r.input_tokens},
                                {"output_tokens", r.output_tokens}};
    }
    return doc.dump(1) + "\n";
}

Session Session::parse(std::string_view text) {
    Session s;
    if (trim(text).empty()) return s;
    auto fail = [](const std::string& what) -> Session { throw Error(ErrorKind::parse, "session: " + what); };
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        return fail(e.what());
    }
    if (!doc.is_object() || doc.value("format_version", 0) != kSessionFormatVersion)
        return fail("missing or unsupported format_version");
    if (!doc.contains("entries") || !doc["entries"].is_object()) return fail("'entries' must be an object");
    for (const auto& [hash, r] : doc["entries"].items()) {
        try {
            s.entries[hash] = {r.at("template_id").get<std::string>(), r.at("tag").get<std::string>(),
                               r.at("text").get<std::string>(), r.at("input_tokens").get<std::uint64_t>(),
                               r.at("output_tokens").get<std::uint64_t>()};
        } catch (const json::exception&) {
            return fail("entry " + hash + " is malformed");
        }
    }
    return s;
}

Session Session::load(const std::string& path) { return parse(read_file(path)); }

void Session::save(const std::string& path) const { write_file(path, serialize()); }

BackendReply ReplayBackend::send(const ChatRequest& req) {
    auto hash = request_hash(req);
    auto it = session_.entries.find(hash);
    if (it == session_.entries.end()) throw UnrecordedRequest(hash);
    return {it->second.text, it->second.input_tokens, it->second.output_tokens};
}

BackendReply RecordingBackend::send(const ChatRequest& req) {
    auto reply = inner_->send(req);
    std::lock_guard lock(mutex_);
    session_.entries[request_hash(req)] = {req.template_id, req.tag, reply.text, reply.input_tokens,
                                           reply.output_tokens};
    return reply;
}

Session RecordingBackend::session() const {
    std::lock_guard lock(mutex_);
    return session_;
}

void RecordingBackend::save(const std::string& path) const { session().save(path); }

std::shared_ptr<ReplayBackend> load_session(const std::string& path) {
    return std::make_shared<ReplayBackend>(Session::load(path));
}

std::shared_ptr<RecordingBackend> record_session(std::shared_ptr<ChatBackend> live) {
    return std::make_shared<RecordingBackend>(std::move(live));
}

// ---------------------------------------------------------------------------

BackendReply HttpBackend::send(const ChatRequest& req) {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    std::string base = cfg_.base_url;
    auto scheme_end = base.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorKind::usage, "base_url needs a scheme: " + base);
    auto path_start = base.find('/', scheme_end + 3);
    std::string origin = path_start == std::string::npos ? base : base.substr(0, path_start);
    std::string prefix = path_start == std::string::npos ? "" : base.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

    httplib::Client client(origin);
    client.set_connection_timeout(cfg_.timeout);
    client.set_read_timeout(cfg_.timeout);
    httplib::Headers headers;
    if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);

    json body = {{"model", cfg_.model},
                 {"messages", json::array({{{"role", "user"}, {"content", req.rendered_prompt}}})},
                 {"temperature", req.temperature},
                 {"max_tokens", req.max_output_tokens}};
    auto res = client.Post(prefix + "/chat/completions", headers, body.dump(), "application/json");
    if (!res) throw TransportError("HTTP request failed: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
        throw TransportError("HTTP " + std::to_string(res->status) + " from " + origin);
    if (res->status != 200)
        throw Error(ErrorKind::gateway, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));

    try {
        auto doc = json::parse(res->body);
        BackendReply reply;
        reply.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
        if (doc.contains("usage")) {
            reply.input_tokens = doc["usage"].value("prompt_tokens", std::uint64_t{0});
            reply.output_tokens = doc["usage"].value("completion_tokens", std::uint64_t{0});
        } else {
            reply.input_tokens = estimate_tokens(req.rendered_prompt.size());
            reply.output_tokens = estimate_tokens(reply.text.size());
        }
        return reply;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::gateway, std::string("malformed chat-completions response: ") + e.what());
    }
}

}  // namespace llmloc
