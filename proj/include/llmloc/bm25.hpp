#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace llmloc {

/// Okapi BM25. k1 controls term-frequency saturation, b the strength of
/// document-length normalization.
struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct Bm25Doc {
    std::string key;  // tie-break and identity (a file path)
    std::string_view text;
};

struct Bm25Hit {
    std::string key;
    double score = 0.0;

    bool operator==(const Bm25Hit&) const = default;
};

/// Lower-cased runs of [A-Za-z0-9_]; everything else separates tokens.
std::vector<std::string> bm25_tokenize(std::string_view text);

/// Per-document scores, index-aligned with `docs`. Query terms are tokenized and
/// deduplicated; IDF is ln((N - n + 0.5) / (n + 0.5) + 1). OpenMP over documents.
std::vector<double> bm25_scores(const std::vector<Bm25Doc>& docs, const std::vector<std::string>& query_terms,
                                const Bm25Params& params);
/// Serial reference for bm25_scores.
std::vector<double> bm25_scores_serial(const std::vector<Bm25Doc>& docs, const std::vector<std::string>& query_terms,
                                       const Bm25Params& params);

/// Documents sorted by descending score, ties by key ascending.
std::vector<Bm25Hit> bm25_rank(const std::vector<Bm25Doc>& docs, const std::vector<std::string>& query_terms,
                               const Bm25Params& params);

}  // namespace llmloc
