#pragma once

// Naive reference computations shared by the unit tests and the acceptance binary.

#include "llmloc/bm25.hpp"
#include "llmloc/graph.hpp"

#include "support.hpp"

#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace llmloc::testing {

// Three documents with hand-countable terms. Query {prompt, config}.
// Lengths 5, 5, 3; average 13/3. n(prompt) = 2, n(config) = 2, so both IDFs are ln(1.6).
inline const std::vector<Bm25Doc> kBm25Docs{{"a.py", "prompt template renders the prompt"},
                                            {"b.py", "model config sets the temperature"},
                                            {"c.yaml", "prompt config loader"}};
inline const std::vector<std::string> kBm25Query{"prompt", "config"};

// Values computed by hand with k1 = 1.2, b = 0.75.
inline constexpr double kBm25ScoreA = 0.6194517878538268;
inline constexpr double kBm25ScoreB = 0.4421744669877645;
inline constexpr double kBm25ScoreC = 1.0753683037142432;

struct MetricInstance {
    std::vector<std::string> gold;  // distinct
    std::vector<std::string> preds;  // distinct
};

inline bool in_list(const std::vector<std::string>& v, const std::string& s) {
    for (const auto& x : v)
        if (x == s) return true;
    return false;
}

inline int oracle_top_k(const MetricInstance& m, std::size_t k) {
    int hit = 0;
    for (std::size_t j = 0; j < m.preds.size(); ++j)
        if (j < k && in_list(m.gold, m.preds[j])) hit = 1;
    return hit;
}

/// Precision at every prefix recomputed from scratch.
inline double oracle_ap(const MetricInstance& m) {
    double sum = 0.0;
    for (std::size_t j = 1; j <= m.preds.size(); ++j) {
        if (!in_list(m.gold, m.preds[j - 1])) continue;
        std::size_t correct = 0;
        for (std::size_t i = 0; i < j; ++i) correct += in_list(m.gold, m.preds[i]) ? 1 : 0;
        sum += static_cast<double>(correct) / static_cast<double>(j);
    }
    return sum / static_cast<double>(m.gold.size());
}

inline double oracle_rr(const MetricInstance& m) {
    double best = 0.0;
    for (std::size_t j = m.preds.size(); j >= 1; --j)
        if (in_list(m.gold, m.preds[j - 1])) best = 1.0 / static_cast<double>(j);
    return best;
}

/// |gold| in 1..4 and |preds| in 0..10 over a 12-file universe.
inline MetricInstance random_metric_instance(Rng& rng) {
    std::vector<std::string> universe;
    for (int i = 0; i < 12; ++i) universe.push_back("src/f" + std::to_string(i) + ".py");
    MetricInstance m;
    rng.shuffle(universe);
    m.gold.assign(universe.begin(), universe.begin() + static_cast<std::ptrdiff_t>(rng.between(1, 4)));
    rng.shuffle(universe);
    m.preds.assign(universe.begin(), universe.begin() + static_cast<std::ptrdiff_t>(rng.between(0, 10)));
    return m;
}

/// All-pairs hop distances by repeated relaxation over the undirected edge list.
inline std::map<std::pair<NodeId, NodeId>, std::size_t> all_pairs_distances(const Graph& g) {
    constexpr std::size_t inf = std::numeric_limits<std::size_t>::max();
    std::vector<NodeId> ids;
    for (const auto& [id, n] : g.nodes()) ids.push_back(id);
    std::map<std::pair<NodeId, NodeId>, std::size_t> d;
    for (const auto& a : ids)
        for (const auto& b : ids) d[{a, b}] = a == b ? 0 : inf;
    for (const auto& e : g.edges()) {
        if (e.src == e.dst) continue;
        d[{e.src, e.dst}] = 1;
        d[{e.dst, e.src}] = 1;
    }
    for (const auto& k : ids)
        for (const auto& i : ids) {
            auto ik = d[{i, k}];
            if (ik == inf) continue;
            for (const auto& j : ids) {
                auto kj = d[{k, j}];
                if (kj != inf && ik + kj < d[{i, j}]) d[{i, j}] = ik + kj;
            }
        }
    return d;
}

inline std::set<NodeId> oracle_k_hop(const Graph& g, const std::map<std::pair<NodeId, NodeId>, std::size_t>& d,
                                     const std::set<NodeId>& seeds, std::size_t k) {
    std::set<NodeId> out;
    for (const auto& [id, n] : g.nodes()) {
        if (!is_file_kind(n.kind)) continue;
        for (const auto& s : seeds)
            if (d.at({s, id}) <= k) {
                out.insert(id);
                break;
            }
    }
    return out;
}

}  // namespace llmloc::testing
