#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "longnbt/common.hpp"
#include "longnbt/dense.hpp"

namespace longnbt {

struct EigenPair {
    cdouble lambda{0.0, 0.0};
    std::vector<cdouble> right_vec;  // unit norm
    std::vector<cdouble> left_vec;   // unit norm; empty until paired
    double residual = 0.0;           // ||A xi - lambda xi||
    bool converged = false;
    cdouble lambda_left{0.0, 0.0};   // eigenvalue from the transpose solve
    bool has_left = false;
};

struct ArnoldiOptions {
    index_t k = 1;
    index_t krylov_dim = 0;  // 0 = max(4k, 32), clamped to dim
    double tol = 1e-8;
    index_t max_restarts = 200;
    std::uint64_t seed = 1;
};

struct ArnoldiResult {
    std::vector<EigenPair> pairs;  // sorted by |lambda| desc, ties Re desc then Im asc
    bool all_converged = false;
    bool invariant_subspace = false;  // Krylov breakdown: returned pairs are exact
    index_t restarts_used = 0;
};

/// Explicitly restarted Arnoldi with two-pass Gram-Schmidt
/// reorthogonalization; the projected Hessenberg eigenproblem is solved by
/// the in-repo Francis QR + inverse iteration. Complex conjugate pairs are
/// returned together (k is extended by one if the cut would split a pair).
ArnoldiResult arnoldi_topk(const ApplyFn& apply, index_t dim, const ArnoldiOptions& opts);

/// Runs arnoldi_topk on the transpose operator and attaches left vectors to
/// the matching right pairs (greedy matching on |lambda_L - lambda_R| with
/// threshold 100 * tol * max(1, |lambda|)).
void attach_left_vectors(std::vector<EigenPair>& pairs, const ApplyFn& apply_transpose,
                         index_t dim, const ArnoldiOptions& opts);

struct SpectrumSummary {
    std::vector<EigenPair> outliers;  // first r0 pairs
    double bulk_radius = 0.0;         // |lambda_{r0+1}| when available
    bool bulk_radius_known = false;
    double bulk_theta2_ratio = 0.0;   // bulk_radius / theta^2, diagnostics only
    index_t k_requested = 0;
    index_t k_converged = 0;
    bool partial = false;  // fewer than r0 converged pairs
};

SpectrumSummary classify_spectrum(const std::vector<EigenPair>& pairs, index_t r0, double theta,
                                  index_t ell);

struct PowerApplyResult {
    std::vector<double> unit;  // zero vector if a zero iterate was hit
    double log_scale = 0.0;    // -inf sentinel on zero
};

/// Computes A^ell v with per-step normalization: unit * exp(log_scale) =
/// A^ell v. ell = 0 returns (v/||v||, log ||v||).
PowerApplyResult power_apply(const ApplyFn& apply, const std::vector<double>& v, index_t ell);

/// Stable ordering used everywhere a spectrum is reported.
bool spectral_order(const cdouble& a, const cdouble& b);

}  // namespace longnbt
