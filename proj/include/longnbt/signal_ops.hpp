#pragma once

#include <vector>

#include "longnbt/ground_truth.hpp"

namespace longnbt {

// Matrix-free applications of the variance matrix Q = sqrt(mn) (M o M) and
// Phi = Q Q^T through the rank factors; cost O((n + m) r^2) per apply, no
// n x m storage.

std::vector<double> apply_Q(const GroundTruth& gt, const std::vector<double>& w);
std::vector<double> apply_Q_star(const GroundTruth& gt, const std::vector<double>& v);
std::vector<double> apply_Phi(const GroundTruth& gt, const std::vector<double>& v);

/// rho = ||Q|| by power iteration on Phi from the all-ones direction
/// (Phi is entrywise nonnegative, so the Perron root is reached).
/// Dense materialization is used below the size cap as a fallback route.
double compute_rho(const GroundTruth& gt, double rel_tol = 1e-10,
                   index_t dense_cap_nm = 1'000'000);

/// Same power iteration on an explicitly materialized Q (oracle route).
double compute_rho_dense(const GroundTruth& gt, double rel_tol = 1e-10);

DenseMatrix materialize_Q(const GroundTruth& gt, index_t cap_nm = 1'000'000);

}  // namespace longnbt
