#pragma once

#include "llmloc/common.hpp"

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <vector>

namespace llmloc {

struct TokenUsage {
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
    double estimated_cost = 0.0;  // USD

    TokenUsage& operator+=(const TokenUsage& o) {
        input_tokens += o.input_tokens;
        output_tokens += o.output_tokens;
        estimated_cost += o.estimated_cost;
        return *this;
    }
    bool operator==(const TokenUsage&) const = default;
};

struct ChatRequest {
    std::string template_id;  // includes the template version, e.g. "annotate.v1"
    std::string rendered_prompt;
    double temperature = 0.0;
    std::size_t max_output_tokens = 1024;
    std::string tag;  // pipeline stage label used for accounting
};

struct ChatResponse {
    std::string text;
    TokenUsage usage;
    std::string backend_id;
};

/// What a backend returns before pricing.
struct BackendReply {
    std::string text;
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
};

/// Retryable failure: connection problems, timeouts, 429 and 5xx responses.
class TransportError : public Error {
public:
    explicit TransportError(const std::string& what) : Error(ErrorKind::gateway, what) {}
};

/// A replay session has no recording for this request.
class UnrecordedRequest : public Error {
public:
    explicit UnrecordedRequest(std::string hash)
        : Error(ErrorKind::gateway, "unrecorded request " + hash), hash_(std::move(hash)) {}
    const std::string& hash() const noexcept { return hash_; }

private:
    std::string hash_;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual BackendReply send(const ChatRequest& req) = 0;
    virtual std::string id() const = 0;
};

/// Stable key for a request: SHA-256 over the versioned template id and the rendered prompt.
std::string request_hash(const ChatRequest& req);

/// ceil(bytes / 4).
std::size_t estimate_tokens(std::size_t bytes);

struct Price {
    double input_per_1k = 0.0;
    double output_per_1k = 0.0;
};

struct GatewayConfig {
    std::string model;
    std::map<std::string, Price> prices;
    std::size_t max_context_tokens = 128000;
    std::size_t max_in_flight = 4;
    std::size_t max_retries = 3;
    std::chrono::milliseconds backoff_base{200};
};

struct LedgerEntry {
    std::string tag;
    std::string hash;
    TokenUsage usage;
};

struct UsageReport {
    std::map<std::string, TokenUsage> per_tag;
    TokenUsage total;
    std::size_t requests = 0;
};

/// The only path from pipeline code to a model. Thread-safe; at most
/// `max_in_flight` requests reach the backend at once.
class Gateway {
public:
    Gateway(std::shared_ptr<ChatBackend> backend, GatewayConfig cfg, DiagnosticSink* sink = nullptr);

    ChatResponse complete(const ChatRequest& req);

    UsageReport report_usage() const;
    std::vector<LedgerEntry> ledger() const;
    void reset_usage();

    const GatewayConfig& config() const { return cfg_; }
    std::string backend_id() const { return backend_->id(); }

private:
    std::shared_ptr<ChatBackend> backend_;
    GatewayConfig cfg_;
    DiagnosticSink* sink_;
    std::counting_semaphore<> in_flight_;
    mutable std::mutex mutex_;
    std::vector<LedgerEntry> ledger_;
    bool warned_unpriced_ = false;
};

// ---------------------------------------------------------------------------
// record / replay

struct RecordedResponse {
    std::string template_id;
    std::string tag;
    std::string text;
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;

    bool operator==(const RecordedResponse&) const = default;
};

/// Hash -> response map persisted as canonical JSON (`sessions/*.json`).
struct Session {
    std::map<std::string, RecordedResponse> entries;

    std::string serialize() const;
    /// Empty text is an empty session. Throws Error(parse) on malformed input.
    static Session parse(std::string_view text);
    static Session load(const std::string& path);
    void save(const std::string& path) const;
};

inline constexpr int kSessionFormatVersion = 1;

class ReplayBackend final : public ChatBackend {
public:
    explicit ReplayBackend(Session session) : session_(std::move(session)) {}
    BackendReply send(const ChatRequest& req) override;
    std::string id() const override { return "replay"; }

private:
    Session session_;
};

/// Wraps a live backend and keeps every exchange for later replay.
class RecordingBackend final : public ChatBackend {
public:
    explicit RecordingBackend(std::shared_ptr<ChatBackend> inner, Session seed = {})
        : inner_(std::move(inner)), session_(std::move(seed)) {}
    BackendReply send(const ChatRequest& req) override;
    std::string id() const override { return inner_->id(); }

    Session session() const;
    void save(const std::string& path) const;

private:
    std::shared_ptr<ChatBackend> inner_;
    mutable std::mutex mutex_;
    Session session_;
};

std::shared_ptr<ReplayBackend> load_session(const std::string& path);
std::shared_ptr<RecordingBackend> record_session(std::shared_ptr<ChatBackend> live);

/// Chat-completions style HTTP endpoint (`POST {base_url}/chat/completions`).
struct HttpBackendConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4o-mini";
    std::string api_key_env = "OPENAI_API_KEY";
    std::chrono::seconds timeout{120};
};

class HttpBackend final : public ChatBackend {
public:
    explicit HttpBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {}
    BackendReply send(const ChatRequest& req) override;
    std::string id() const override { return "http:" + cfg_.model; }

private:
    HttpBackendConfig cfg_;
};

}  // namespace llmloc
