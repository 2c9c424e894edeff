#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spt/segmentation.hpp"

namespace spt {

enum class GraphStrategy { kFcg, kKnn, kRag };

// Undirected edge set over patch indices. Self-pairs are never stored; the
// diagonal is added when the attention mask is realized.
struct ConnectivityGraph {
    int n_nodes = 0;
    GraphStrategy strategy = GraphStrategy::kFcg;
    std::vector<std::pair<int, int>> edges;  // sorted, first < second
};

// Boolean (n_nodes+1)^2 mask; index 0 is the classification token, which
// connects to every token. Diagonal is always true.
struct AttentionMask {
    int dim = 0;  // n_nodes + 1
    std::vector<uint8_t> allowed;

    uint8_t at(int i, int j) const { return allowed[static_cast<size_t>(i) * dim + j]; }
    uint8_t& at(int i, int j) { return allowed[static_cast<size_t>(i) * dim + j]; }
};

ConnectivityGraph build_fcg(const std::vector<uint8_t>& present);

// Directed k-nearest-neighbour edges by Euclidean distance on centers,
// symmetrized by union. Ties broken by smaller index.
ConnectivityGraph build_knn(const std::vector<double>& centers,
                            const std::vector<uint8_t>& present, int k);

// Edge (a,b) iff some pixel of segment a is 4-adjacent (optionally
// 8-adjacent) to some pixel of segment b.
ConnectivityGraph build_rag(const SegmentMask& segments, bool eight_connectivity = false);

AttentionMask to_attention_mask(const ConnectivityGraph& graph,
                                const std::vector<uint8_t>& present);

// Text dump, one "a b" pair per line, sorted.
void write_edge_list(const ConnectivityGraph& graph, const std::string& path);

}  // namespace spt
