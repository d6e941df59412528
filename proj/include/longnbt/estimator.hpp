#pragma once

#include <optional>
#include <vector>

#include "longnbt/params.hpp"
#include "longnbt/spectral.hpp"
#include "longnbt/two_paths.hpp"

namespace longnbt {

/// nu_hat_i = sqrt(max(Re lambda_i, 0)), one per outlier; pairs whose
/// imaginary part exceeds 10% of the modulus are flagged suspect.
struct SingularValueEstimate {
    std::vector<double> nu_hat;
    std::vector<bool> suspect;
};
SingularValueEstimate estimate_singular_values(const SpectrumSummary& summary);

/// Pull-backs of one eigenpair to left-vertex space:
/// zeta_R = S_Delta xi_R and zeta_L = S xi_L.
struct ZetaVectors {
    std::vector<double> zeta_R_raw;   // real part of S_Delta xi_R
    std::vector<double> zeta_L_raw;   // real part of S xi_L
    std::vector<double> zeta_R_unit;  // normalized copies (zero if degenerate)
    std::vector<double> zeta_L_unit;
    // end-vertex pullback T^T xi_L; this is the left quantity that actually
    // carries signal (parity-time maps it to S_Delta xi_R)
    std::vector<double> zeta_L_end_unit;
    double imag_fraction_R = 0.0;  // ||Im|| / ||vec|| before taking real parts
    double imag_fraction_L = 0.0;
    double s_xi_norm = 0.0;  // ||S xi_R||, the proof-sketch normalization
    bool has_left = false;
};
ZetaVectors extract_left_vectors(const TwoPathSet& tp, const EigenPair& pair);

struct GammaMatrix {
    index_t t = 0;
    std::vector<index_t> indices;
    DenseMatrix values;  // |indices| x |indices|
};

/// Gamma^(t)_ij = sum_{s<=t} <1, Phi^s (phi_i o phi_j)> / (nu_i nu_j d)^(2s),
/// evaluated by iterated implicit Phi application (Phi is never formed).
GammaMatrix compute_gamma_matrix(const GroundTruth& gt, double d, index_t t,
                                 const std::vector<index_t>& indices);

enum class GammaVariant {
    kDSquared,  // d^2 per series order: matches the Gamma recursion
    kPlainD,    // the resolvent as printed in the eigenvector theorem
};

/// gamma_i = <1, (I - Phi/(nu_i^4 d_eff))^{-1} (phi_i o phi_i)>, by Neumann
/// summation until the term falls under 1e-12 or 1e4 terms. Fails loudly
/// when rho^2 / (nu_i^4 d_eff) >= 1.
double predict_gamma(const GroundTruth& gt, const ModelParams& params, index_t i,
                     GammaVariant variant = GammaVariant::kDSquared);

/// Homogeneous-case closed form 1 / (1 - tau_i^4).
double homogeneous_gamma(const ModelParams& params, index_t i);

struct RecoveryEstimate {
    std::vector<cdouble> lambdas;      // outlier eigenvalues
    SingularValueEstimate nu;
    std::vector<ZetaVectors> zetas;    // one per outlier
    double bulk_radius = 0.0;
    bool bulk_radius_known = false;
};

/// Assembles the estimate from a classified spectrum.
RecoveryEstimate build_recovery_estimate(const TwoPathSet& tp, const SpectrumSummary& summary);

struct OutlierScore {
    index_t i = 0;              // outlier index (pairs with nu_{i+1})
    double nu_true = 0.0;
    double nu_hat = 0.0;
    double nu_rel_err = 0.0;
    double overlap_R = 0.0;        // ||proj of unit zeta_R on the nu_i eigenspace||
    double overlap_L = 0.0;        // start-vertex pullback S xi_L (as printed)
    double overlap_L_end = 0.0;    // end-vertex pullback T^T xi_L (signal-carrying)
    double overlap_R_mixed = 0.0;  // <S_Delta xi, phi> / ||S xi|| (proof-sketch form)
    double delta_ell = 0.0;        // relative eigengap; +inf when unique
    double gamma_pred = 0.0;       // canonical d^2 variant
    double gamma_pred_alt = 0.0;   // plain-d variant
    double gamma_homog = 0.0;      // closed form when homogeneous, else 0
    double gamma_obs = 0.0;        // 1 / overlap_R^2
    double overlap_pred = 0.0;     // 1 / sqrt(gamma_pred)
};

struct RecoveryReport {
    std::vector<OutlierScore> scores;
};

/// Scores the estimate against the ground truth: overlaps are projections
/// onto the matching singular eigenspace with sign alignment.
RecoveryReport evaluate_recovery(const RecoveryEstimate& estimate, const GroundTruth& gt,
                                 const ModelParams& params);

}  // namespace longnbt
