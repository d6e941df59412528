#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "longnbt/graph.hpp"
#include "longnbt/observed.hpp"
#include "longnbt/rng.hpp"

using namespace longnbt;

namespace {

// test-local Bernoulli sampler, independent of the synth module
ObservedMatrix bernoulli_instance(index_t n, index_t m, double d, std::uint64_t seed) {
    double p = d / std::sqrt(double(n) * double(m));
    std::vector<RawEntry> raw;
    for (index_t x = 0; x < n; ++x) {
        CounterRng rng(seed, 1000 + std::uint64_t(x));
        index_t k = rng.binomial(m, p);
        for (index_t y : rng.sample_without_replacement(m, k))
            raw.push_back({x, y, 1.0 + 0.1 * double((x + y) % 7)});
    }
    return ingest(n, m, d, std::move(raw), false);
}

}  // namespace

TEST_CASE("ingest scales by sqrt(mn)/d") {
    ObservedMatrix obs = ingest(2, 2, 1.5, {{0, 0, 1.0}}, false);
    CHECK(obs.entries.size() == 1);
    CHECK(obs.entries[0].a == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(obs.sampling_probability() == doctest::Approx(0.75));
}

TEST_CASE("ingest accepts empty entry list") {
    ObservedMatrix obs = ingest(3, 5, 1.2, {}, false);
    CHECK(obs.entries.empty());
}

TEST_CASE("ingest rejections") {
    CHECK_THROWS_AS(ingest(3, 3, 3.1, {}, false), invalid_input);  // p > 1
    CHECK_THROWS_AS(ingest(1, 3, 1.5, {}, false), invalid_input);  // n < 2
    CHECK_THROWS_AS(ingest(4, 3, 1.5, {}, false), invalid_input);  // m < n
    CHECK_THROWS_AS(ingest(3, 3, 0.5, {}, false), invalid_input);  // d <= 1
    CHECK_THROWS_AS(ingest(3, 4, 1.5, {{0, 4, 1.0}}, false), invalid_input);
    CHECK_THROWS_AS(ingest(3, 4, 1.5, {{0, 1, 1.0}, {0, 1, 2.0}}, false), invalid_input);
    CHECK_THROWS_AS(ingest(3, 4, 1.5, {{-1, 1, 1.0}}, false), invalid_input);
}

TEST_CASE("ingest canonicalizes row-major") {
    ObservedMatrix obs = ingest(3, 4, 1.5, {{2, 1, 1.0}, {0, 3, 1.0}, {0, 1, 1.0}}, true);
    CHECK(obs.entries[0].x == 0);
    CHECK(obs.entries[0].y == 1);
    CHECK(obs.entries[1].y == 3);
    CHECK(obs.entries[2].x == 2);
}

TEST_CASE("build_graph small examples") {
    ObservedMatrix obs = ingest(2, 2, 1.5, {{0, 0, 2.0}, {1, 0, 3.0}}, true);
    BipartiteGraph g = build_graph(obs);
    REQUIRE(g.right_degree(0) == 2);
    CHECK(g.left_of[0] == 0);
    CHECK(g.right_weight[0] == 2.0);
    CHECK(g.left_of[1] == 1);
    CHECK(g.right_weight[1] == 3.0);
    CHECK(g.right_degree(1) == 0);

    BipartiteGraph empty = build_graph(ingest(2, 2, 1.5, {}, true));
    CHECK(empty.edge_count() == 0);
}

TEST_CASE("transpose consistency on a random 20x40 instance") {
    ObservedMatrix obs = bernoulli_instance(20, 40, 3.0, 17);
    BipartiteGraph g = build_graph(obs);
    CHECK(g.edge_count() == index_t(obs.entries.size()));

    std::vector<std::tuple<index_t, index_t, double>> from_left, from_right;
    for (index_t x = 0; x < g.n; ++x)
        for (index_t k = g.left_ptr[std::size_t(x)]; k < g.left_ptr[std::size_t(x + 1)]; ++k)
            from_left.emplace_back(x, g.right_of[std::size_t(k)], g.left_weight[std::size_t(k)]);
    for (index_t y = 0; y < g.m; ++y)
        for (index_t k = g.right_ptr[std::size_t(y)]; k < g.right_ptr[std::size_t(y + 1)]; ++k)
            from_right.emplace_back(g.left_of[std::size_t(k)], y, g.right_weight[std::size_t(k)]);
    std::sort(from_left.begin(), from_left.end());
    std::sort(from_right.begin(), from_right.end());
    CHECK(from_left == from_right);

    // adjacency lists sorted by index
    for (index_t x = 0; x < g.n; ++x)
        for (index_t k = g.left_ptr[std::size_t(x)] + 1; k < g.left_ptr[std::size_t(x + 1)]; ++k)
            CHECK(g.right_of[std::size_t(k - 1)] < g.right_of[std::size_t(k)]);
}

TEST_CASE("prune_degree_one basics") {
    // single edge: right vertex vanishes
    PrunedGraph p1 = prune_degree_one(build_graph(ingest(2, 2, 1.5, {{0, 0, 1.0}}, true)));
    CHECK(p1.g.m == 0);
    CHECK(p1.g.edge_count() == 0);
    CHECK(p1.g.n == 2);  // left vertices retained

    // degree-2 right vertex survives with both edges
    PrunedGraph p2 =
        prune_degree_one(build_graph(ingest(2, 2, 1.5, {{0, 0, 1.0}, {1, 0, 2.0}}, true)));
    CHECK(p2.g.m == 1);
    CHECK(p2.g.edge_count() == 2);
    CHECK(p2.original_right[0] == 0);
}

TEST_CASE("pruning is idempotent") {
    ObservedMatrix obs = bernoulli_instance(30, 900, 2.5, 5);
    PrunedGraph once = prune_degree_one(build_graph(obs));
    PrunedGraph twice = prune_degree_one(once.g);
    CHECK(twice.g.edge_count() == once.g.edge_count());
    CHECK(twice.g.m == once.g.m);
    for (index_t y = 0; y < twice.g.m; ++y) CHECK(twice.original_right[std::size_t(y)] == y);
    CHECK(twice.g.left_of == once.g.left_of);
    CHECK(twice.g.right_weight == once.g.right_weight);
}

TEST_CASE("pruned right-vertex count tracks the binomial tail") {
    const index_t n = 100, m = 10000;
    const double d = 4.0;
    const double p = d / std::sqrt(double(n) * double(m));
    ObservedMatrix obs = bernoulli_instance(n, m, d, 2024);
    PrunedGraph pg = prune_degree_one(build_graph(obs));

    // P(Bin(n,p) >= 2) exactly
    double p0 = std::pow(1.0 - p, double(n));
    double p1 = double(n) * p * std::pow(1.0 - p, double(n - 1));
    double tail = 1.0 - p0 - p1;
    double mean = double(m) * tail;
    double sigma = std::sqrt(double(m) * tail * (1.0 - tail));
    CHECK(std::abs(double(pg.g.m) - mean) <= 3.0 * sigma);
}

TEST_CASE("tangle_free_check cases") {
    // tree neighborhood: excess 0
    ObservedMatrix tree = ingest(3, 4, 1.5, {{0, 0, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}, {2, 1, 1.0}}, true);
    TangleReport r1 = tangle_free_check(build_graph(tree), 4);
    CHECK(r1.all_tangle_free);
    CHECK(r1.max_excess == 0);

    // single 4-cycle x0-y0-x1-y1-x0, radius 2: excess 1, still fine
    ObservedMatrix cyc =
        ingest(2, 2, 1.4, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}}, true);
    TangleReport r2 = tangle_free_check(build_graph(cyc), 2);
    CHECK(r2.all_tangle_free);
    CHECK(r2.max_excess == 1);

    // two edge-disjoint 4-cycles sharing x0: excess 2 at large radius
    ObservedMatrix tangled = ingest(3, 4,
                                    1.9,
                                    {{0, 0, 1.0},
                                     {0, 1, 1.0},
                                     {1, 0, 1.0},
                                     {1, 1, 1.0},
                                     {0, 2, 1.0},
                                     {0, 3, 1.0},
                                     {2, 2, 1.0},
                                     {2, 3, 1.0}},
                                    true);
    TangleReport r3 = tangle_free_check(build_graph(tangled), 6);
    CHECK_FALSE(r3.all_tangle_free);
    CHECK_FALSE(r3.per_left_vertex[0]);
    CHECK(r3.max_excess == 2);
}

TEST_CASE("observed matrix text round trip") {
    ObservedMatrix obs = bernoulli_instance(12, 60, 2.0, 3);
    std::ostringstream out;
    write_observed(out, obs);
    std::istringstream in(out.str());
    ObservedMatrix back = read_observed(in);
    REQUIRE(back.entries.size() == obs.entries.size());
    CHECK(back.n == obs.n);
    CHECK(back.m == obs.m);
    CHECK(back.d == obs.d);
    for (std::size_t i = 0; i < obs.entries.size(); ++i) {
        CHECK(back.entries[i].x == obs.entries[i].x);
        CHECK(back.entries[i].y == obs.entries[i].y);
        CHECK(back.entries[i].a == doctest::Approx(obs.entries[i].a).epsilon(1e-14));
    }
}

TEST_CASE("observed reader handles comments and rejects junk") {
    std::istringstream good("# header\n3 6 1.5\n0 0 1.0 # entry\n\n2 5 -0.5\n");
    ObservedMatrix obs = read_observed(good);
    CHECK(obs.entries.size() == 2);
    std::istringstream bad("3 6\n");
    CHECK_THROWS_AS(read_observed(bad), invalid_input);
}
