#pragma once

#include "llmloc/gateway.hpp"
#include "llmloc/graph.hpp"
#include "llmloc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <mutex>
#include <vector>

#include <unistd.h>

namespace llmloc::testing {

inline std::string fixture(std::string_view rel) { return std::string(LLMLOC_FIXTURES_DIR) + "/" + std::string(rel); }

inline Graph fixture_graph(std::string_view repo) {
    DiagnosticSink sink;
    return build_repository_graph(fixture(repo), IngestConfig{}, sink);
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("llmloc-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string str() const { return path_.string(); }
    std::string operator/(std::string_view rel) const { return (path_ / rel).string(); }
    void write(std::string_view rel, std::string_view content) const { write_file(*this / rel, content); }

private:
    std::filesystem::path path_;
};

/// Seeded generator for property tests.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_); }
    std::size_t between(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(gen_);
    }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    bool coin() { return below(2) == 1; }
    template <class T>
    void shuffle(std::vector<T>& v) {
        std::shuffle(v.begin(), v.end(), gen_);
    }

private:
    std::mt19937_64 gen_;
};

/// Backend answering from a callback and counting requests per template.
class FakeBackend final : public ChatBackend {
public:
    using Reply = std::function<std::string(const ChatRequest&)>;
    explicit FakeBackend(Reply reply) : reply_(std::move(reply)) {}

    BackendReply send(const ChatRequest& req) override {
        std::lock_guard lock(mutex_);
        prompts.push_back(req.rendered_prompt);
        templates.push_back(req.template_id);
        BackendReply r;
        r.text = reply_(req);
        r.input_tokens = estimate_tokens(req.rendered_prompt.size());
        r.output_tokens = estimate_tokens(r.text.size());
        return r;
    }
    std::string id() const override { return "fake"; }

    std::size_t calls() const {
        std::lock_guard lock(mutex_);
        return prompts.size();
    }

    std::vector<std::string> prompts;
    std::vector<std::string> templates;

private:
    Reply reply_;
    mutable std::mutex mutex_;
};

inline std::string fenced(std::string_view body) { return "```\n" + std::string(body) + "```\n"; }

}  // namespace llmloc::testing
