#pragma once

#include <vector>

#include "longnbt/observed.hpp"

namespace longnbt {

struct TruncatedSvd {
    std::vector<double> singular_values;      // descending
    std::vector<std::vector<double>> left;    // length-n vectors
    index_t iterations = 0;
    bool converged = false;
};

/// Truncated SVD of the sparse A by block power iteration with
/// orthonormalization on the implicit A A^T (never materialized).
TruncatedSvd truncated_svd_baseline(const ObservedMatrix& obs, index_t k, double tol = 1e-8,
                                    index_t max_iter = 2000, std::uint64_t seed = 1);

}  // namespace longnbt
