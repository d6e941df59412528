#pragma once

#include <json.hpp>
#include <vector>

#include "longnbt/estimator.hpp"
#include "longnbt/ground_truth.hpp"
#include "longnbt/two_paths.hpp"

namespace longnbt::oracle {

/// Full spectrum of B via materialization + in-repo Hessenberg QR, sorted
/// by modulus (ties: Re desc, Im asc). Oracle path, |paths| <= cap.
std::vector<cdouble> dense_spectrum(const TwoPathSet& tp, index_t cap = kDefaultDenseBCap);

/// Gamma^(t)_ij by materializing Q and taking explicit dense powers of
/// Phi = Q Q^T; shares no code with estimator::compute_gamma_matrix.
double brute_gamma(const GroundTruth& gt, double d, index_t t, index_t i, index_t j,
                   index_t cap_nm = 1'000'000);

/// Bipartite Galton-Watson tree truncated at a given depth. Even depths
/// carry labels uniform on [n] and Poisson(d^2) offspring; odd depths carry
/// labels uniform on [m] and exactly one child.
struct GWTree {
    struct Node {
        index_t label = 0;
        index_t depth = 0;
        index_t parent = -1;
        index_t first_child = -1;
        index_t num_children = 0;
    };
    std::vector<Node> nodes;  // BFS order, root first
    index_t depth_cap = 0;
};

GWTree sample_gw_tree(const GroundTruth& gt, double d, index_t depth, index_t root_label,
                      std::uint64_t seed, index_t node_cap = 1'000'000);

/// f_{phi,t}: (mn/d^2)^t sum over descending non-backtracking paths of
/// length 2t of the M-product weights times phi at the endpoint.
double tree_functional(const GWTree& tree, const GroundTruth& gt, index_t phi_index, index_t t,
                       double d);

/// Closed form E f_{phi_i,t} f_{phi_j,t} at a fixed root label
/// (second display of the functional-expectations proposition).
double expected_functional_product(const GroundTruth& gt, double d, index_t t, index_t i,
                                   index_t j, index_t root_label);

/// Monte-Carlo trials of f_{phi,t} at a fixed root label; per-trial derived
/// seeds keep the aggregation order-independent.
std::vector<double> mc_tree_functional(const GroundTruth& gt, double d, index_t phi_index,
                                       index_t t, index_t root_label, index_t trials,
                                       std::uint64_t seed);

/// Paired trials (f_{phi_i,t}, f_{phi_j,t}) sharing the same trees.
std::vector<std::pair<double, double>> mc_tree_functional_pair(const GroundTruth& gt, double d,
                                                               index_t i, index_t j, index_t t,
                                                               index_t root_label, index_t trials,
                                                               std::uint64_t seed);

/// Chi-square goodness of fit of observed counts against Poisson(lambda);
/// bins with expected count < 5 are lumped. Returns the p-value.
double chi_square_poisson_pvalue(const std::vector<index_t>& counts, double lambda);

/// Regularized incomplete gamma P(a, x) (series + continued fraction).
double regularized_gamma_p(double a, double x);

struct PseudoEigenReport {
    index_t ell = 0;
    index_t r0 = 0;
    DenseMatrix uu, uhuh, uuh, uhblu;                  // measured gram matrices
    DenseMatrix ref_uu, ref_uhuh, ref_uuh, ref_uhblu;  // theorem targets
    double dev_uu = 0.0, dev_uhuh = 0.0, dev_uuh = 0.0, dev_uhblu = 0.0;  // relative Frobenius
};

/// Builds u_i = B^ell T phi_i / nu_i^(2 ell) and the hatted variants with
/// log-scale bookkeeping, and compares their grams to d^2 Gamma^(ell),
/// Gamma^(ell+1) - I, I, and diag(nu_i^2)^ell.
PseudoEigenReport pseudo_eigen_grams(const TwoPathSet& tp, const GroundTruth& gt,
                                     const ModelParams& params);

/// Raw matrices plus relative deviations, for the JSON report files.
nlohmann::json pseudo_report_to_json(const PseudoEigenReport& rep);

}  // namespace longnbt::oracle
