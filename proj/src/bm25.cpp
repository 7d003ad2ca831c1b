#include "llmloc/bm25.hpp"

#include "llmloc/common.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <unordered_map>

namespace llmloc {

std::vector<std::string> bm25_tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (is_word_char(c)) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

namespace {

struct DocStats {
    std::size_t length = 0;
    std::vector<std::size_t> tf;  // per query term
};

DocStats doc_stats(std::string_view text, const std::unordered_map<std::string, std::size_t>& term_index) {
    DocStats s;
    s.tf.assign(term_index.size(), 0);
    for (const auto& tok : bm25_tokenize(text)) {
        ++s.length;
        auto it = term_index.find(tok);
        if (it != term_index.end()) ++s.tf[it->second];
    }
    return s;
}

std::vector<std::string> query_tokens(const std::vector<std::string>& terms) {
    std::set<std::string> uniq;
    for (const auto& t : terms)
        for (auto& tok : bm25_tokenize(t)) uniq.insert(std::move(tok));
    return {uniq.begin(), uniq.end()};
}

std::vector<double> combine(const std::vector<DocStats>& stats, std::size_t n_terms, const Bm25Params& p, bool parallel) {
    const double n_docs = static_cast<double>(stats.size());
    double total_len = 0;
    std::vector<double> df(n_terms, 0.0);
    for (const auto& s : stats) {
        total_len += static_cast<double>(s.length);
        for (std::size_t t = 0; t < n_terms; ++t)
            if (s.tf[t] > 0) df[t] += 1.0;
    }
    std::vector<double> scores(stats.size(), 0.0);
    if (stats.empty() || total_len == 0) return scores;
    const double avgdl = total_len / n_docs;
    std::vector<double> idf(n_terms);
    for (std::size_t t = 0; t < n_terms; ++t) idf[t] = std::log((n_docs - df[t] + 0.5) / (df[t] + 0.5) + 1.0);

    auto score_one = [&](std::size_t d) {
        const auto& s = stats[d];
        const double norm = p.k1 * (1.0 - p.b + p.b * static_cast<double>(s.length) / avgdl);
        double sum = 0.0;
        for (std::size_t t = 0; t < n_terms; ++t) {
            if (s.tf[t] == 0) continue;
            const double tf = static_cast<double>(s.tf[t]);
            sum += idf[t] * tf * (p.k1 + 1.0) / (tf + norm);
        }
        scores[d] = sum;
    };
    const auto n = static_cast<std::ptrdiff_t>(stats.size());
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t d = 0; d < n; ++d) score_one(static_cast<std::size_t>(d));
    } else {
        for (std::ptrdiff_t d = 0; d < n; ++d) score_one(static_cast<std::size_t>(d));
    }
    return scores;
}

std::unordered_map<std::string, std::size_t> index_terms(const std::vector<std::string>& tokens) {
    std::unordered_map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < tokens.size(); ++i) idx.emplace(tokens[i], i);
    return idx;
}

}  // namespace

std::vector<double> bm25_scores(const std::vector<Bm25Doc>& docs, const std::vector<std::string>& query_terms,
                                const Bm25Params& params) {
    const auto tokens = query_tokens(query_terms);
    const auto term_index = index_terms(tokens);
    std::vector<DocStats> stats(docs.size());
    const auto n = static_cast<std::ptrdiff_t>(docs.size());
#pragma omp parallel for schedule(dynamic, 2)
    for (std::ptrdiff_t d = 0; d < n; ++d) {
        stats[static_cast<std::size_t>(d)] = doc_stats(docs[static_cast<std::size_t>(d)].text, term_index);
    }
    return combine(stats, tokens.size(), params, true);
}

std::vector<double> bm25_scores_serial(const std::vector<Bm25Doc>& docs, const std::vector<std::string>& query_terms,
                                       const Bm25Params& params) {
    const auto tokens = query_tokens(query_terms);
    const auto term_index = index_terms(tokens);
    std::vector<DocStats> stats;
    stats.reserve(docs.size());
    for (const auto& d : docs) stats.push_back(doc_stats(d.text, term_index));
    return combine(stats, tokens.size(), params, false);
}

std::vector<Bm25Hit> bm25_rank(const std::vector<Bm25Doc>& docs, const std::vector<std::string>& query_terms,
                               const Bm25Params& params) {
    auto scores = bm25_scores(docs, query_terms, params);
    std::vector<Bm25Hit> hits;
    hits.reserve(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) hits.push_back({docs[i].key, scores[i]});
    std::sort(hits.begin(), hits.end(), [](const Bm25Hit& a, const Bm25Hit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.key < b.key;
    });
    return hits;
}

}  // namespace llmloc
