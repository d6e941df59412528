#pragma once

#include <vector>

#include "longnbt/observed.hpp"

namespace longnbt {

/// CSR adjacency over both orientations of the weighted bipartite graph
/// whose biadjacency matrix is A. Immutable after construction.
struct BipartiteGraph {
    index_t n = 0;  // left vertices
    index_t m = 0;  // right vertices

    // left orientation: neighbors of x are right_of[left_ptr[x] .. left_ptr[x+1])
    std::vector<index_t> left_ptr;
    std::vector<index_t> right_of;
    std::vector<double> left_weight;

    // right orientation
    std::vector<index_t> right_ptr;
    std::vector<index_t> left_of;
    std::vector<double> right_weight;

    index_t edge_count() const { return index_t(right_of.size()); }
    index_t left_degree(index_t x) const { return left_ptr[std::size_t(x + 1)] - left_ptr[std::size_t(x)]; }
    index_t right_degree(index_t y) const { return right_ptr[std::size_t(y + 1)] - right_ptr[std::size_t(y)]; }
};

/// Same shape as BipartiteGraph restricted to right vertices of degree >= 2;
/// right indices are re-packed and mapped back through original_right.
struct PrunedGraph {
    BipartiteGraph g;
    std::vector<index_t> original_right;  // pruned index -> original index
};

BipartiteGraph build_graph(const ObservedMatrix& obs);

PrunedGraph prune_degree_one(const BipartiteGraph& g);

struct TangleReport {
    std::vector<bool> per_left_vertex;  // true = at most one cycle in the ball
    bool all_tangle_free = true;
    index_t max_excess = 0;
};

/// Per-left-vertex flag: the radius-neighborhood (induced ball, distance in
/// edges) has cycle excess |E| - |V| + 1 at most one.
TangleReport tangle_free_check(const BipartiteGraph& g, index_t radius);

}  // namespace longnbt
