#pragma once

#include "llmloc/common.hpp"

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace llmloc {

enum class FileKind { source, text };

struct FileRecord {
    std::string path;  // repository-relative, normalized
    FileKind kind = FileKind::source;
    std::size_t byte_length = 0;
    std::size_t line_count = 0;
    std::string content;

    bool operator==(const FileRecord&) const = default;
};

FileRecord make_file_record(std::string path, FileKind kind, std::string content);

enum class EntityKind { class_def, function, attribute, import_ref, call_ref, extend_ref };

std::string_view to_string(EntityKind k);

struct LineSpan {
    std::size_t start = 0;  // 1-based, inclusive
    std::size_t end = 0;

    auto operator<=>(const LineSpan&) const = default;
    bool contains(const LineSpan& other) const { return start <= other.start && other.end <= end; }
};

/// One syntactic fact extracted from a source file.
///
/// Definitions (class/function/attribute) carry `name`; references carry the raw
/// `target` text. Import references use `name` to distinguish module imports
/// ("module") from string literals that look like file paths ("path").
struct SyntaxEntity {
    EntityKind kind = EntityKind::function;
    std::string name;
    LineSpan span;
    std::optional<std::string> enclosing;  // dotted path of the enclosing definition
    std::optional<std::string> target;

    auto operator<=>(const SyntaxEntity&) const = default;
};

inline constexpr std::string_view kImportModule = "module";
inline constexpr std::string_view kImportPath = "path";

struct IngestConfig {
    std::set<std::string> source_extensions{".py"};
    std::set<std::string> text_extensions{".yaml", ".yml", ".json", ".jinja2", ".txt", ".toml", ".md"};
    std::set<std::string> excluded_dirs{"__pycache__", ".git", ".venv", "venv", "node_modules", ".idea", ".vscode"};
    std::set<std::string> excluded_files{"setup.py"};
    std::size_t max_file_bytes = 1u << 20;

    /// Throws Error(usage) when source and text allowlists overlap.
    void validate() const;
};

/// Grammar-backed parser seam. Implementations never throw on malformed input;
/// they return what they could extract and report problems to the sink.
class SyntaxParser {
public:
    virtual ~SyntaxParser() = default;
    virtual std::vector<SyntaxEntity> parse(std::string_view content, std::string_view grammar_id,
                                            DiagnosticSink& sink) const = 0;
};

/// Python 3 parser: tokenizer with indentation tracking plus a block-structured
/// statement recognizer. Grammar id "python".
class PythonParser final : public SyntaxParser {
public:
    std::vector<SyntaxEntity> parse(std::string_view content, std::string_view grammar_id,
                                    DiagnosticSink& sink) const override;
};

const SyntaxParser& default_parser();

/// Walk `root` and return every file that survives the filter rules, sorted by path.
/// Throws Error(io) if root is not a readable directory.
std::vector<FileRecord> scan_repository(const std::string& root, const IngestConfig& cfg, DiagnosticSink& sink,
                                        const SyntaxParser& parser = default_parser());

/// Entities of one file. Text files and oversized files yield nothing.
std::vector<SyntaxEntity> parse_file(const FileRecord& file, const IngestConfig& cfg, DiagnosticSink& sink,
                                     const SyntaxParser& parser = default_parser());

/// Per-file entity lists, index-aligned with `files`. OpenMP over files.
std::vector<std::vector<SyntaxEntity>> parse_files(const std::vector<FileRecord>& files, const IngestConfig& cfg,
                                                   DiagnosticSink& sink,
                                                   const SyntaxParser& parser = default_parser());

/// Serial reference for parse_files.
std::vector<std::vector<SyntaxEntity>> parse_files_serial(const std::vector<FileRecord>& files,
                                                          const IngestConfig& cfg, DiagnosticSink& sink,
                                                          const SyntaxParser& parser = default_parser());

}  // namespace llmloc
