#include "llmloc/ingest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace llmloc {

std::string_view to_string(EntityKind k) {
    switch (k) {
    case EntityKind::class_def: return "class";
    case EntityKind::function: return "function";
    case EntityKind::attribute: return "attribute";
    case EntityKind::import_ref: return "import_ref";
    case EntityKind::call_ref: return "call_ref";
    case EntityKind::extend_ref: return "extend_ref";
    }
    return "function";
}

FileRecord make_file_record(std::string path, FileKind kind, std::string content) {
    FileRecord r;
    r.path = normalize_path(path);
    r.kind = kind;
    r.byte_length = content.size();
    r.line_count = count_lines(content);
    r.content = std::move(content);
    return r;
}

void IngestConfig::validate() const {
    for (const auto& ext : source_extensions) {
        if (text_extensions.count(ext)) {
            throw Error(ErrorKind::usage, "extension listed as both source and text: " + ext);
        }
    }
}

namespace {

bool has_substantive_content(const std::vector<SyntaxEntity>& entities) {
    return std::any_of(entities.begin(), entities.end(), [](const SyntaxEntity& e) {
        return e.kind == EntityKind::class_def || e.kind == EntityKind::function || e.kind == EntityKind::attribute;
    });
}

struct Pending {
    std::string rel;
    fs::path abs;
    FileKind kind;
};

std::optional<std::string> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) return std::nullopt;
    return ss.str();
}

}  // namespace

std::vector<FileRecord> scan_repository(const std::string& root, const IngestConfig& cfg, DiagnosticSink& sink,
                                        const SyntaxParser& parser) {
    cfg.validate();
    std::error_code ec;
    fs::path base(root);
    if (!fs::is_directory(base, ec)) throw Error(ErrorKind::io, "repository root is not a readable directory: " + root);

    std::vector<Pending> pending;
    fs::recursive_directory_iterator it(base, fs::directory_options::skip_permission_denied, ec);
    if (ec) throw Error(ErrorKind::io, "cannot open repository root " + root + ": " + ec.message());
    for (const fs::recursive_directory_iterator end; it != end; it.increment(ec)) {
        if (ec) {
            sink.warn("ingest", "directory walk error: " + ec.message());
            ec.clear();
            continue;
        }
        const auto& entry = *it;
        std::string name = entry.path().filename().string();
        if (entry.is_directory(ec)) {
            if (cfg.excluded_dirs.count(name) || starts_with(name, ".")) it.disable_recursion_pending();
            continue;
        }
        if (!entry.is_regular_file(ec)) continue;
        if (starts_with(name, ".")) continue;
        if (cfg.excluded_files.count(name)) continue;
        std::string ext = extension_of(name);
        FileKind kind;
        if (cfg.source_extensions.count(ext)) {
            kind = FileKind::source;
        } else if (cfg.text_extensions.count(ext)) {
            kind = FileKind::text;
        } else {
            continue;
        }
        pending.push_back({normalize_path(fs::relative(entry.path(), base, ec).generic_string()), entry.path(), kind});
    }
    std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) { return a.rel < b.rel; });

    std::vector<std::optional<FileRecord>> slots(pending.size());
    const auto n = static_cast<std::ptrdiff_t>(pending.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto& p = pending[static_cast<std::size_t>(i)];
        auto content = slurp(p.abs);
        if (!content) {
            sink.warn("ingest", "skipping unreadable file: " + p.rel);
            continue;
        }
        auto rec = make_file_record(p.rel, p.kind, std::move(*content));
        if (basename_of(rec.path) == "__init__.py") {
            DiagnosticSink quiet;
            if (!has_substantive_content(parse_file(rec, cfg, quiet, parser))) continue;
        }
        slots[static_cast<std::size_t>(i)] = std::move(rec);
    }

    std::vector<FileRecord> out;
    out.reserve(slots.size());
    for (auto& s : slots)
        if (s) out.push_back(std::move(*s));
    return out;
}

std::vector<SyntaxEntity> parse_file(const FileRecord& file, const IngestConfig& cfg, DiagnosticSink& sink,
                                     const SyntaxParser& parser) {
    if (file.kind != FileKind::source) return {};
    if (file.byte_length > cfg.max_file_bytes) {
        sink.info("ingest", file.path + ": larger than " + std::to_string(cfg.max_file_bytes) +
                                " bytes, kept as a leaf node");
        return {};
    }
    DiagnosticSink local;
    auto entities = parser.parse(file.content, "python", local);
    for (auto& d : local.snapshot()) sink.add(d.severity, d.component, file.path + ": " + d.message);
    return entities;
}

std::vector<std::vector<SyntaxEntity>> parse_files(const std::vector<FileRecord>& files, const IngestConfig& cfg,
                                                   DiagnosticSink& sink, const SyntaxParser& parser) {
    std::vector<std::vector<SyntaxEntity>> out(files.size());
    const auto n = static_cast<std::ptrdiff_t>(files.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = parse_file(files[static_cast<std::size_t>(i)], cfg, sink, parser);
    }
    return out;
}

std::vector<std::vector<SyntaxEntity>> parse_files_serial(const std::vector<FileRecord>& files,
                                                          const IngestConfig& cfg, DiagnosticSink& sink,
                                                          const SyntaxParser& parser) {
    std::vector<std::vector<SyntaxEntity>> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(parse_file(f, cfg, sink, parser));
    return out;
}

}  // namespace llmloc
