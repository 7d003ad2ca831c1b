#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace llmloc {

/// Failure categories. Each maps to one CLI exit code.
enum class ErrorKind { usage, io, gateway, invariant, parse };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Opaque, content-addressed identifier of a graph node.
struct NodeId {
    std::string value;

    auto operator<=>(const NodeId&) const = default;
    bool empty() const noexcept { return value.empty(); }
};

enum class Severity { debug, info, warning, error };

std::string_view to_string(Severity s);

struct Diagnostic {
    Severity severity = Severity::info;
    std::string component;
    std::string message;
};

/// Collects diagnostics from every pipeline stage. Appends are thread-safe.
class DiagnosticSink {
public:
    void add(Severity severity, std::string component, std::string message);
    void warn(std::string component, std::string message) {
        add(Severity::warning, std::move(component), std::move(message));
    }
    void info(std::string component, std::string message) {
        add(Severity::info, std::move(component), std::move(message));
    }
    void debug(std::string component, std::string message) {
        add(Severity::debug, std::move(component), std::move(message));
    }

    std::vector<Diagnostic> snapshot() const;
    std::size_t count(Severity at_least) const;
    void clear();

private:
    mutable std::mutex mutex_;
    std::vector<Diagnostic> items_;
};

/// Lower-case hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Forward slashes, no `.`/`..` segments, no leading `./` or `/`.
/// `..` that would climb above the root is dropped.
std::string normalize_path(std::string_view path);

std::string_view basename_of(std::string_view path);
std::string_view dirname_of(std::string_view path);
/// Extension including the dot, lower-cased (`.py`). Empty if none.
std::string extension_of(std::string_view path);

/// Number of lines: newline count, plus one if the text does not end in '\n'.
std::size_t count_lines(std::string_view text);
std::vector<std::string_view> split_lines(std::string_view text);

std::string_view trim(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
bool is_word_char(char c);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace llmloc

template <>
struct std::hash<llmloc::NodeId> {
    std::size_t operator()(const llmloc::NodeId& id) const noexcept {
        return std::hash<std::string>{}(id.value);
    }
};
