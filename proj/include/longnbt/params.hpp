#pragma once

#include <optional>
#include <string>
#include <vector>

#include "longnbt/ground_truth.hpp"

namespace longnbt {

/// Threshold and complexity parameters of the model, all derived from the
/// ground truth SVD and the sampling intensity d.
struct ModelParams {
    double d = 0.0;
    double rho = 0.0;     // ||Q||
    double L = 0.0;       // sqrt(mn) max |M_xy|
    double K = 0.0;       // L^2 / rho, always >= 1
    double eta = 0.0;     // log(m)/log(n) - 1
    double kappa = 0.0;   // sqrt(n) max_i ||phi_i||_inf
    double theta1 = 0.0;  // sqrt(rho / d)
    double theta2 = 0.0;  // L / d
    double theta = 0.0;   // max(theta1, theta2)
    index_t r0 = 0;       // #{i : nu_i >= theta}
    std::vector<double> tau;  // theta / nu_i for i < r0
    double epsilon = 0.0;
    index_t ell = 1;
    bool ell_clamped = false;  // floor(eps log_d n) was 0
};

/// Computes every parameter; rho comes from power iteration (dense
/// materialization below the nm <= 1e6 cap, implicit factor applies above).
/// Rejects factor families whose Gram deviates from identity by > 1e-8.
ModelParams compute_params(const GroundTruth& gt, double d,
                           std::optional<double> epsilon_override = std::nullopt);

struct InequalityCheck {
    std::string name;
    double value = 0.0;   // measured quantity
    double bound = 0.0;   // theorem bound
    double slack = 0.0;   // bound - value
    bool holds = false;
};

struct InequalityReport {
    std::vector<InequalityCheck> checks;
    bool all_hold = true;
};

/// K >= 1, rho >= ||M||_F^2 >= nu_1^2, and the entrywise Phi^t / tilde-Phi^t
/// bounds for t <= 3. Dense evaluation; requires n*m within the cap.
InequalityReport check_parameter_inequalities(const ModelParams& params, const GroundTruth& gt,
                                              index_t cap_nm = 1'000'000);

}  // namespace longnbt
