#pragma once

#include "llmloc/annotation.hpp"
#include "llmloc/ingest.hpp"

#include <array>
#include <cstddef>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace llmloc {

enum class PatternOrigin { builtin, learned };

struct PatternEntry {
    AnnotationType type = AnnotationType::llm_prompt;
    std::string keyword;
    std::string regex_source;
    PatternOrigin origin = PatternOrigin::builtin;
    std::string added_at;  // ISO-8601 UTC, empty for built-in entries

    bool operator==(const PatternEntry&) const = default;
};

struct MatchProfile {
    std::array<std::size_t, 5> per_type{};
    std::size_t total_matches = 0;
    std::size_t file_line_count = 0;

    std::size_t count(AnnotationType t) const { return per_type[static_cast<std::size_t>(t)]; }
    bool operator==(const MatchProfile&) const = default;
};

struct SeedScoreConfig {
    double w_c = 0.7;
    double w_d = 0.3;
};

/// Text handed to the matching kernels.
struct TextDoc {
    std::string_view text;
    std::size_t line_count = 0;
};

/// Escape regex metacharacters and add `\b` on each side whose end character is a word character.
/// Throws Error(usage) for an empty keyword.
std::string keyword_to_pattern(std::string_view keyword);

/// Built-in entries plus learned ones. Built-ins come first in curated order;
/// learned entries follow, ordered by (type, keyword).
class PatternLibrary {
public:
    static PatternLibrary with_defaults();

    const std::vector<PatternEntry>& entries() const { return entries_; }
    std::vector<PatternEntry> learned() const;

    /// Appends validated keywords. Exact duplicates are skipped and a keyword that
    /// shares a prefix with a learned entry of the same type collapses to the shorter
    /// of the two. Returns true if the library changed.
    bool add_learned(const std::vector<std::pair<AnnotationType, std::string>>& keywords, const std::string& timestamp);

    /// Distinct keywords across all entries, sorted.
    std::vector<std::string> keywords() const;

    MatchProfile match(TextDoc doc) const;

private:
    void add_entry(PatternEntry e);
    void sort_learned();

    std::vector<PatternEntry> entries_;
    std::vector<std::regex> compiled_;
};

inline constexpr int kDefaultPatternSetVersion = 1;
inline constexpr int kPatternFileVersion = 1;

MatchProfile match_file(const PatternLibrary& lib, const FileRecord& file);

double coverage(const MatchProfile& p);
double density(const MatchProfile& p);
double seed_score(const MatchProfile& p, const SeedScoreConfig& cfg);

/// Match every document, OpenMP over documents.
std::vector<MatchProfile> match_files(const PatternLibrary& lib, const std::vector<TextDoc>& docs);
/// Serial reference for match_files.
std::vector<MatchProfile> match_files_serial(const PatternLibrary& lib, const std::vector<TextDoc>& docs);

/// `patterns.json`: {version, learned:[...]} ordered by type then keyword.
std::string serialize_library(const PatternLibrary& lib);
/// Throws Error(parse) naming the bad record.
PatternLibrary parse_library(std::string_view text);
/// Missing file yields the built-in set.
PatternLibrary load_library(const std::string& path);
void save_library(const PatternLibrary& lib, const std::string& path);

}  // namespace llmloc
