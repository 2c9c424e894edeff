#include "spt/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "spt/tensor.hpp"

namespace spt {

ConnectivityGraph build_fcg(const std::vector<uint8_t>& present) {
    ConnectivityGraph g;
    g.n_nodes = static_cast<int>(present.size());
    g.strategy = GraphStrategy::kFcg;
    for (int i = 0; i < g.n_nodes; ++i) {
        if (!present[i]) continue;
        for (int j = i + 1; j < g.n_nodes; ++j)
            if (present[j]) g.edges.emplace_back(i, j);
    }
    return g;
}

ConnectivityGraph build_knn(const std::vector<double>& centers,
                            const std::vector<uint8_t>& present, int k) {
    check(k >= 1, "build_knn: k must be >= 1");
    const int n = static_cast<int>(present.size());
    check(centers.size() == static_cast<size_t>(n) * 2, "build_knn: centers shape mismatch");
    std::set<std::pair<int, int>> edges;
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
        if (present[i]) idx.push_back(i);
    for (int i : idx) {
        std::vector<std::pair<double, int>> cand;
        cand.reserve(idx.size());
        for (int j : idx) {
            if (j == i) continue;
            const double dy = centers[2 * i] - centers[2 * j];
            const double dx = centers[2 * i + 1] - centers[2 * j + 1];
            cand.emplace_back(dy * dy + dx * dx, j);
        }
        // (distance, index) order makes ties deterministic: smaller index wins.
        std::sort(cand.begin(), cand.end());
        const int m = std::min<int>(k, static_cast<int>(cand.size()));
        for (int t = 0; t < m; ++t) {
            const int j = cand[t].second;
            edges.emplace(std::min(i, j), std::max(i, j));
        }
    }
    ConnectivityGraph g;
    g.n_nodes = n;
    g.strategy = GraphStrategy::kKnn;
    g.edges.assign(edges.begin(), edges.end());
    return g;
}

ConnectivityGraph build_rag(const SegmentMask& segments, bool eight_connectivity) {
    check(segments.height > 0 && segments.width > 0, "build_rag: empty mask");
    std::set<std::pair<int, int>> edges;
    const int h = segments.height, w = segments.width;
    auto link = [&](int32_t a, int32_t b) {
        if (a != b) edges.emplace(std::min(a, b), std::max(a, b));
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int32_t a = segments.at(y, x);
            if (x + 1 < w) link(a, segments.at(y, x + 1));
            if (y + 1 < h) link(a, segments.at(y + 1, x));
            if (eight_connectivity) {
                if (y + 1 < h && x + 1 < w) link(a, segments.at(y + 1, x + 1));
                if (y + 1 < h && x - 1 >= 0) link(a, segments.at(y + 1, x - 1));
            }
        }
    ConnectivityGraph g;
    g.n_nodes = segments.n_segments;
    g.strategy = GraphStrategy::kRag;
    g.edges.assign(edges.begin(), edges.end());
    return g;
}

AttentionMask to_attention_mask(const ConnectivityGraph& graph,
                                const std::vector<uint8_t>& present) {
    check(graph.n_nodes == static_cast<int>(present.size()),
          "to_attention_mask: size mismatch");
    AttentionMask m;
    m.dim = graph.n_nodes + 1;
    m.allowed.assign(static_cast<size_t>(m.dim) * m.dim, 0);
    for (int i = 0; i < m.dim; ++i) {
        m.at(0, i) = 1;
        m.at(i, 0) = 1;
        m.at(i, i) = 1;
    }
    for (const auto& [a, b] : graph.edges) {
        m.at(a + 1, b + 1) = 1;
        m.at(b + 1, a + 1) = 1;
    }
    return m;
}

void write_edge_list(const ConnectivityGraph& graph, const std::string& path) {
    std::ofstream f(path);
    check(f.good(), "cannot open " + path);
    for (const auto& [a, b] : graph.edges) f << a << " " << b << "\n";
}

}  // namespace spt
