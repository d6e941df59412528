#pragma once

#include <string>
#include <vector>

#include "longnbt/dense.hpp"
#include "longnbt/graph.hpp"

namespace longnbt {

using EdgeVector = std::vector<double>;

/// Oriented 2-path set: triples (e1, e2, e3) with e1, e3 distinct left
/// vertices sharing the right neighbor e2, sorted lexicographically.
/// Carries the weight diagonal delta[e] = A_{e1 e2} A_{e3 e2}, the inverse
/// (involution) map and the index structure needed for O(|paths|) operator
/// application. Immutable after construction.
struct TwoPathSet {
    index_t n = 0;  // left vertices (original indexing)
    index_t m = 0;  // right vertices (original indexing)

    std::vector<index_t> e1, e2, e3;
    std::vector<double> delta;
    std::vector<index_t> inverse;    // involution, no fixed points
    std::vector<index_t> wedge_id;   // id of the (e1, e2) group
    std::vector<index_t> excl_wedge; // wedge of (e3, e2) = wedge_id[inverse[e]]
    index_t num_wedges = 0;

    std::vector<index_t> starts_ptr;  // CSR over e1 (paths are sorted, so contiguous)
    std::vector<index_t> ends_ptr;    // CSR over e3, path ids ascending in each bucket
    std::vector<index_t> ends_idx;

    index_t size() const { return index_t(e1.size()); }
    double delta_max_abs() const;
};

constexpr index_t kDefaultTwoPathCap = 100'000'000;

/// Enumerates every oriented 2-path of the pruned graph. The path count
/// equals sum_y deg(y)(deg(y)-1); exceeding the cap raises size_error
/// carrying that count.
TwoPathSet enumerate_two_paths(const PrunedGraph& pg, const ObservedMatrix& obs,
                               index_t cap = kDefaultTwoPathCap);

/// (Bv)(e) = sum_{f: f1 = e3, f2 != e2} delta[f] v(f), via the factored
/// form t(e3) - s(e3, e2); O(|paths|).
EdgeVector apply_B(const TwoPathSet& tp, const EdgeVector& v);

/// Literal double-loop evaluation of the same sum; reference for tests.
EdgeVector apply_B_direct(const TwoPathSet& tp, const EdgeVector& v);

/// (B^T v)(f) = sum_{e: e3 = f1, e2 != f2} delta[f] v(e).
EdgeVector apply_B_transpose(const TwoPathSet& tp, const EdgeVector& v);

std::vector<double> apply_S(const TwoPathSet& tp, const EdgeVector& v);
std::vector<double> apply_S_delta(const TwoPathSet& tp, const EdgeVector& v);
EdgeVector apply_T(const TwoPathSet& tp, const std::vector<double>& w);
EdgeVector apply_T_delta(const TwoPathSet& tp, const std::vector<double>& w);
EdgeVector apply_J_delta(const TwoPathSet& tp, const EdgeVector& v);

/// (T^T v)(x) = sum_{e3 = x} v(e): end-vertex sums. Parity-time maps this
/// pullback of a left eigenvector onto S_Delta of the right one.
std::vector<double> apply_T_transpose(const TwoPathSet& tp, const EdgeVector& v);

struct RelationReport {
    // max_v ||Bv - (T S_delta v - J_delta v)||; exact only while every
    // right vertex in the support has degree <= 2 (see verify docs).
    double stated_identity_residual = 0.0;
    // max_v ||J_delta B v - B^T J_delta v||; exact for this B.
    double parity_residual = 0.0;
    // factored vs literal application of B itself.
    double direct_vs_factored = 0.0;
    double delta_max = 0.0;       // scale reference |Delta|_max
    index_t middle_degree_ge3 = 0;  // right vertices with >= 3 incident paths' wedges
    index_t trials = 0;
};

/// Probes the operator identities with random unit vectors. The
/// T S_delta - J_delta form misses the extra same-middle-vertex exclusions
/// whenever a right vertex has degree >= 3, so its residual is structural,
/// not numerical; the report separates the two effects.
RelationReport verify_relations(const TwoPathSet& tp, index_t trials, std::uint64_t seed);

constexpr index_t kDefaultDenseBCap = 2000;

/// Entrywise materialization of B; oracle for small instances.
DenseMatrix dense_B(const TwoPathSet& tp, index_t cap = kDefaultDenseBCap);

/// Binary dump: magic "NBT1", little-endian 64-bit counts, triples, delta.
void save_two_paths(const std::string& path, const TwoPathSet& tp);
TwoPathSet load_two_paths(const std::string& path);

}  // namespace longnbt
