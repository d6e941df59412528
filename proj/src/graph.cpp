#include "longnbt/graph.hpp"

#include <algorithm>

namespace longnbt {

BipartiteGraph build_graph(const ObservedMatrix& obs) {
    BipartiteGraph g;
    g.n = obs.n;
    g.m = obs.m;
    const index_t nnz = index_t(obs.entries.size());

    g.left_ptr.assign(std::size_t(g.n + 1), 0);
    g.right_ptr.assign(std::size_t(g.m + 1), 0);
    for (const Entry& e : obs.entries) {
        ++g.left_ptr[std::size_t(e.x + 1)];
        ++g.right_ptr[std::size_t(e.y + 1)];
    }
    for (index_t i = 0; i < g.n; ++i) g.left_ptr[std::size_t(i + 1)] += g.left_ptr[std::size_t(i)];
    for (index_t j = 0; j < g.m; ++j) g.right_ptr[std::size_t(j + 1)] += g.right_ptr[std::size_t(j)];

    g.right_of.resize(std::size_t(nnz));
    g.left_weight.resize(std::size_t(nnz));
    g.left_of.resize(std::size_t(nnz));
    g.right_weight.resize(std::size_t(nnz));

    // entries are row-major, so the left lists fill already sorted by y
    std::vector<index_t> cursor(g.left_ptr.begin(), g.left_ptr.end() - 1);
    for (const Entry& e : obs.entries) {
        index_t at = cursor[std::size_t(e.x)]++;
        g.right_of[std::size_t(at)] = e.y;
        g.left_weight[std::size_t(at)] = e.a;
    }
    // column lists fill sorted by x for the same reason
    std::vector<index_t> rcursor(g.right_ptr.begin(), g.right_ptr.end() - 1);
    for (const Entry& e : obs.entries) {
        index_t at = rcursor[std::size_t(e.y)]++;
        g.left_of[std::size_t(at)] = e.x;
        g.right_weight[std::size_t(at)] = e.a;
    }
    return g;
}

PrunedGraph prune_degree_one(const BipartiteGraph& g) {
    PrunedGraph out;
    std::vector<index_t> new_right(static_cast<std::size_t>(g.m), -1);
    for (index_t y = 0; y < g.m; ++y) {
        if (g.right_degree(y) >= 2) {
            new_right[std::size_t(y)] = index_t(out.original_right.size());
            out.original_right.push_back(y);
        }
    }
    const index_t mm = index_t(out.original_right.size());

    std::vector<RawEntry> kept;
    for (index_t y = 0; y < g.m; ++y) {
        index_t ny = new_right[std::size_t(y)];
        if (ny < 0) continue;
        for (index_t k = g.right_ptr[std::size_t(y)]; k < g.right_ptr[std::size_t(y + 1)]; ++k)
            kept.push_back({g.left_of[std::size_t(k)], ny, g.right_weight[std::size_t(k)]});
    }
    std::sort(kept.begin(), kept.end(),
              [](const RawEntry& a, const RawEntry& b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });

    BipartiteGraph& pg = out.g;
    pg.n = g.n;
    pg.m = mm;
    pg.left_ptr.assign(std::size_t(pg.n + 1), 0);
    pg.right_ptr.assign(std::size_t(pg.m + 1), 0);
    for (const RawEntry& e : kept) {
        ++pg.left_ptr[std::size_t(e.x + 1)];
        ++pg.right_ptr[std::size_t(e.y + 1)];
    }
    for (index_t i = 0; i < pg.n; ++i) pg.left_ptr[std::size_t(i + 1)] += pg.left_ptr[std::size_t(i)];
    for (index_t j = 0; j < pg.m; ++j) pg.right_ptr[std::size_t(j + 1)] += pg.right_ptr[std::size_t(j)];

    pg.right_of.resize(kept.size());
    pg.left_weight.resize(kept.size());
    pg.left_of.resize(kept.size());
    pg.right_weight.resize(kept.size());
    std::vector<index_t> cursor(pg.left_ptr.begin(), pg.left_ptr.end() - 1);
    for (const RawEntry& e : kept) {
        index_t at = cursor[std::size_t(e.x)]++;
        pg.right_of[std::size_t(at)] = e.y;
        pg.left_weight[std::size_t(at)] = e.value;
    }
    std::vector<index_t> rcursor(pg.right_ptr.begin(), pg.right_ptr.end() - 1);
    for (const RawEntry& e : kept) {
        index_t at = rcursor[std::size_t(e.y)]++;
        pg.left_of[std::size_t(at)] = e.x;
        pg.right_weight[std::size_t(at)] = e.value;
    }
    return out;
}

namespace {

// Vertices of the bipartite graph packed into one id space for BFS.
inline index_t pack_left(index_t x) { return 2 * x; }
inline index_t pack_right(index_t y) { return 2 * y + 1; }

}  // namespace

TangleReport tangle_free_check(const BipartiteGraph& g, index_t radius) {
    if (radius < 1) throw invalid_input("tangle_free_check: radius must be >= 1");
    TangleReport report;
    report.per_left_vertex.assign(std::size_t(g.n), true);

    std::vector<index_t> dist(static_cast<std::size_t>(2 * std::max(g.n, g.m) + 2), -1);
    std::vector<index_t> seen;  // packed ids touched by the current BFS
    std::vector<index_t> queue;

    for (index_t x0 = 0; x0 < g.n; ++x0) {
        seen.clear();
        queue.clear();
        queue.push_back(pack_left(x0));
        dist[std::size_t(pack_left(x0))] = 0;
        seen.push_back(pack_left(x0));
        std::size_t head = 0;
        index_t ball_edges = 0;

        while (head < queue.size()) {
            index_t id = queue[head++];
            index_t dd = dist[std::size_t(id)];
            if (dd == radius) continue;
            if (id % 2 == 0) {
                index_t x = id / 2;
                for (index_t k = g.left_ptr[std::size_t(x)]; k < g.left_ptr[std::size_t(x + 1)]; ++k) {
                    index_t y = g.right_of[std::size_t(k)];
                    index_t pid = pack_right(y);
                    if (dist[std::size_t(pid)] < 0) {
                        dist[std::size_t(pid)] = dd + 1;
                        seen.push_back(pid);
                        queue.push_back(pid);
                    }
                }
            } else {
                index_t y = id / 2;
                for (index_t k = g.right_ptr[std::size_t(y)]; k < g.right_ptr[std::size_t(y + 1)]; ++k) {
                    index_t x = g.left_of[std::size_t(k)];
                    index_t pid = pack_left(x);
                    if (dist[std::size_t(pid)] < 0) {
                        dist[std::size_t(pid)] = dd + 1;
                        seen.push_back(pid);
                        queue.push_back(pid);
                    }
                }
            }
        }

        // count induced edges: for each left vertex in the ball, neighbors in
        // the ball (each edge counted once from its left endpoint)
        for (index_t id : seen) {
            if (id % 2 != 0) continue;
            index_t x = id / 2;
            for (index_t k = g.left_ptr[std::size_t(x)]; k < g.left_ptr[std::size_t(x + 1)]; ++k) {
                index_t y = g.right_of[std::size_t(k)];
                if (dist[std::size_t(pack_right(y))] >= 0) ++ball_edges;
            }
        }
        index_t excess = ball_edges - index_t(seen.size()) + 1;
        report.max_excess = std::max(report.max_excess, excess);
        if (excess > 1) {
            report.per_left_vertex[std::size_t(x0)] = false;
            report.all_tangle_free = false;
        }
        for (index_t id : seen) dist[std::size_t(id)] = -1;
    }
    return report;
}

}  // namespace longnbt
