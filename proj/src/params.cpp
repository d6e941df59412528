#include "longnbt/params.hpp"

#include <cmath>

#include "longnbt/signal_ops.hpp"

namespace longnbt {

namespace {

double amplitude_parameter(const GroundTruth& gt) {
    double root_mn = std::sqrt(double(gt.m) * double(gt.n));
    if (gt.r == 1) {
        // separable: max |M| = nu_1 max|phi_1| max|psi_1|
        double mp = 0.0;
        for (double v : gt.phi[0]) mp = std::max(mp, std::abs(v));
        double mq;
        if (gt.kron && gt.kron->cp_weights.size() == 1) {
            // |psi_1| = |coeff| * prod_s max|v_s|
            mq = std::abs(gt.kron->coeff(0, 0));
            for (const auto& f : gt.kron->cp_right[0]) {
                double fm = 0.0;
                for (double v : f) fm = std::max(fm, std::abs(v));
                mq *= fm;
            }
        } else {
            mq = gt.psi_inf_norm(0);
        }
        return root_mn * gt.nu[0] * mp * mq;
    }
    if (gt.n * gt.m > 100'000'000)
        throw size_error("compute_params: exact max|M| scan exceeds cap for rank >= 2",
                         gt.n * gt.m);
    double mx = 0.0;
    for (index_t x = 0; x < gt.n; ++x)
        for (index_t y = 0; y < gt.m; ++y) mx = std::max(mx, std::abs(gt.entry(x, y)));
    return root_mn * mx;
}

}  // namespace

ModelParams compute_params(const GroundTruth& gt, double d,
                           std::optional<double> epsilon_override) {
    if (!(d > 1.0)) throw invalid_input("compute_params: d must be > 1");
    double defect = orthonormality_defect(gt);
    if (defect > 1e-8)
        throw invalid_input("compute_params: non-orthonormal factors (Gram deviation " +
                            std::to_string(defect) + ")");

    ModelParams p;
    p.d = d;
    p.rho = compute_rho(gt);
    p.L = amplitude_parameter(gt);
    p.K = p.L * p.L / p.rho;
    p.eta = std::log(double(gt.m)) / std::log(double(gt.n)) - 1.0;
    double kap = 0.0;
    for (const auto& v : gt.phi)
        for (double x : v) kap = std::max(kap, std::abs(x));
    p.kappa = std::sqrt(double(gt.n)) * kap;
    p.theta1 = std::sqrt(p.rho / d);
    p.theta2 = p.L / d;
    p.theta = std::max(p.theta1, p.theta2);
    p.r0 = 0;
    for (index_t i = 0; i < gt.r; ++i)
        if (gt.nu[std::size_t(i)] >= p.theta) p.r0 = i + 1;
    for (index_t i = 0; i < p.r0; ++i) p.tau.push_back(p.theta / gt.nu[std::size_t(i)]);
    p.epsilon = epsilon_override ? *epsilon_override : std::min(p.eta / 2.0, 1.0) / 25.0;
    double ell_raw = std::floor(p.epsilon * std::log(double(gt.n)) / std::log(d));
    if (ell_raw < 1.0) {
        p.ell = 1;
        p.ell_clamped = true;
    } else {
        p.ell = index_t(ell_raw);
        p.ell_clamped = false;
    }
    return p;
}

InequalityReport check_parameter_inequalities(const ModelParams& params, const GroundTruth& gt,
                                              index_t cap_nm) {
    InequalityReport rep;
    auto push = [&rep](const std::string& name, double value, double bound) {
        InequalityCheck c;
        c.name = name;
        c.value = value;
        c.bound = bound;
        c.slack = bound - value;
        // value <= bound with a floating point allowance
        c.holds = value <= bound * (1.0 + 1e-9) + 1e-300;
        rep.all_hold = rep.all_hold && c.holds;
        rep.checks.push_back(c);
    };
    // K >= 1  <=>  rho <= L^2
    push("rho_le_L_sq (K >= 1)", params.rho, params.L * params.L);
    // rho >= ||M||_F^2 >= nu_1^2
    push("frob_le_rho", gt.frobenius_sq(), params.rho);
    push("nu1_sq_le_frob", gt.nu[0] * gt.nu[0], gt.frobenius_sq());

    DenseMatrix q = materialize_Q(gt, cap_nm);
    const index_t n = gt.n, m = gt.m;
    double k2 = params.K * params.K;

    // Phi^t entrywise, t = 1..3
    DenseMatrix phi = matmul(q, q.transposed());
    DenseMatrix phi_prev = DenseMatrix::identity(n);  // Phi^(t-1)
    DenseMatrix phi_t = phi;                          // Phi^t
    double rho2t = params.rho * params.rho;
    for (int t = 1; t <= 3; ++t) {
        push("phi_pow_" + std::to_string(t), phi_t.max_abs(), k2 * rho2t / double(n));

        // tilde-Phi^t = Q^T Phi^(t-1) Q, streamed column by column
        DenseMatrix r = matmul(phi_prev, q);  // n x m
        double worst = 0.0;
        std::vector<double> col(static_cast<std::size_t>(m));
        for (index_t y2 = 0; y2 < m; ++y2) {
            std::fill(col.begin(), col.end(), 0.0);
            for (index_t x = 0; x < n; ++x) {
                double rxy = r(x, y2);
                if (rxy == 0.0) continue;
                for (index_t y = 0; y < m; ++y) col[std::size_t(y)] += q(x, y) * rxy;
            }
            for (double v : col) worst = std::max(worst, std::abs(v));
        }
        push("tilde_phi_pow_" + std::to_string(t), worst, k2 * rho2t / double(m));

        if (t < 3) {
            phi_prev = phi_t;
            phi_t = matmul(phi_t, phi);
            rho2t *= params.rho * params.rho;
        }
    }
    return rep;
}

}  // namespace longnbt
