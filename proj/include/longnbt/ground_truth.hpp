#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "longnbt/dense.hpp"
#include "longnbt/observed.hpp"

namespace longnbt {

/// SVD of the ground-truth signal matrix M = sum_i nu_i phi_i psi_i^T.
/// For tensor unfoldings the right vectors are kept in Kronecker form
/// (psi_j = sum_i coeff(i, j) z_i with z_i a product of CP factors) so that
/// n x m storage is never materialized.
struct GroundTruth {
    index_t n = 0;
    index_t m = 0;
    index_t r = 0;
    std::vector<double> nu;                 // decreasing, > 0
    std::vector<std::vector<double>> phi;   // r vectors of length n
    std::vector<std::vector<double>> psi;   // r vectors of length m; empty when kron

    struct KronRep {
        index_t k_order = 0;
        std::vector<double> cp_weights;                         // r_cp
        std::vector<std::vector<double>> cp_left;               // r_cp x n
        std::vector<std::vector<std::vector<double>>> cp_right; // r_cp x (k_order-1) x n
        DenseMatrix coeff;                                      // r_cp x r
    };
    std::optional<KronRep> kron;
    bool homogeneous = false;

    double entry(index_t x, index_t y) const;      // M_xy
    double psi_value(index_t j, index_t y) const;  // psi_j(y)
    double psi_inf_norm(index_t j) const;
    double frobenius_sq() const;  // ||M||_F^2 = sum nu_i^2
    index_t kron_stride(index_t pos) const;  // n^(k_order - 2 - pos)
};

enum class VectorMode { kUniformSign, kRandomOrthonormal, kLocalized };

/// Generates orthonormal factor families. uniform-sign gives +-1/sqrt(n)
/// entries (kappa = 1, homogeneous when r = 1; r >= 2 uses scrambled Walsh
/// patterns and needs n, m divisible by 2^r). localized plants mass on one
/// coordinate per vector to hit kappa_target within 10%.
GroundTruth gen_rank_r(index_t n, index_t m, index_t r, std::vector<double> nu, VectorMode mode,
                       std::uint64_t seed, double kappa_target = 0.0);

struct CpComponent {
    double weight = 0.0;
    std::vector<std::vector<double>> factors;  // k_order unit vectors, length n each
};

/// Unfolds a CP tensor along its first mode into an n x n^(k-1) ground
/// truth (rows = mode 1); the SVD is induced from the small r x r system,
/// so non-orthogonal CP factors are fine. k_order must be odd.
GroundTruth unfold_tensor_cp(index_t n, index_t k_order, const std::vector<CpComponent>& comps);

enum class SamplerMode { kExactBernoulli, kFixedCount };

struct SampleSpec {
    double d = 0.0;
    std::uint64_t seed = 1;
    SamplerMode mode = SamplerMode::kExactBernoulli;
    index_t nnz_cap = 200'000'000;
};

/// Bernoulli-samples the ground truth: per-row binomial count plus uniform
/// column choice without replacement, which is distributionally identical
/// to i.i.d. Ber(d/sqrt(mn)) over the row. Deterministic per (seed, row).
ObservedMatrix sample_observed(const GroundTruth& gt, const SampleSpec& spec);

/// Text serialization (see README for the exact layout).
void write_ground_truth(std::ostream& out, const GroundTruth& gt);
GroundTruth read_ground_truth(std::istream& in);
void write_ground_truth_file(const std::string& path, const GroundTruth& gt);
GroundTruth read_ground_truth_file(const std::string& path);

/// Largest Gram deviation max |Phi^T Phi - I| over both factor families.
double orthonormality_defect(const GroundTruth& gt);

/// max_x |D_x - rho^2| / rho^2 where D_x = sum_y Phi_xy; zero exactly when
/// the instance is homogeneous.
double homogeneity_defect(const GroundTruth& gt);

}  // namespace longnbt
