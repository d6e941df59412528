#include "longnbt/signal_ops.hpp"

#include <cmath>

namespace longnbt {

// Q_xy = sqrt(mn) M_xy^2 = sqrt(mn) sum_{ij} nu_i nu_j phi_i(x) phi_j(x)
// psi_i(y) psi_j(y), so both applications reduce to r^2 rank-one terms.

std::vector<double> apply_Q_star(const GroundTruth& gt, const std::vector<double>& v) {
    if (index_t(v.size()) != gt.n) throw error("apply_Q_star: dimension mismatch");
    const index_t r = gt.r;
    double root_mn = std::sqrt(double(gt.m) * double(gt.n));
    DenseMatrix c(r, r);
    for (index_t i = 0; i < r; ++i)
        for (index_t j = 0; j < r; ++j) {
            double s = 0.0;
            for (index_t x = 0; x < gt.n; ++x)
                s += gt.phi[std::size_t(i)][std::size_t(x)] * gt.phi[std::size_t(j)][std::size_t(x)] *
                     v[std::size_t(x)];
            c(i, j) = gt.nu[std::size_t(i)] * gt.nu[std::size_t(j)] * s;
        }
    std::vector<double> out(static_cast<std::size_t>(gt.m), 0.0);
    for (index_t y = 0; y < gt.m; ++y) {
        double acc = 0.0;
        for (index_t i = 0; i < r; ++i) {
            double pi = gt.psi_value(i, y);
            for (index_t j = 0; j < r; ++j) acc += c(i, j) * pi * gt.psi_value(j, y);
        }
        out[std::size_t(y)] = root_mn * acc;
    }
    return out;
}

std::vector<double> apply_Q(const GroundTruth& gt, const std::vector<double>& w) {
    if (index_t(w.size()) != gt.m) throw error("apply_Q: dimension mismatch");
    const index_t r = gt.r;
    double root_mn = std::sqrt(double(gt.m) * double(gt.n));
    DenseMatrix c(r, r);
    for (index_t y = 0; y < gt.m; ++y) {
        double wy = w[std::size_t(y)];
        if (wy == 0.0) continue;
        for (index_t i = 0; i < r; ++i) {
            double pi = gt.psi_value(i, y);
            for (index_t j = 0; j <= i; ++j) c(i, j) += pi * gt.psi_value(j, y) * wy;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(gt.n), 0.0);
    for (index_t x = 0; x < gt.n; ++x) {
        double acc = 0.0;
        for (index_t i = 0; i < r; ++i) {
            double fi = gt.nu[std::size_t(i)] * gt.phi[std::size_t(i)][std::size_t(x)];
            for (index_t j = 0; j < i; ++j)
                acc += 2.0 * c(i, j) * fi * gt.nu[std::size_t(j)] * gt.phi[std::size_t(j)][std::size_t(x)];
            acc += c(i, i) * fi * gt.nu[std::size_t(i)] * gt.phi[std::size_t(i)][std::size_t(x)];
        }
        out[std::size_t(x)] = root_mn * acc;
    }
    return out;
}

std::vector<double> apply_Phi(const GroundTruth& gt, const std::vector<double>& v) {
    return apply_Q(gt, apply_Q_star(gt, v));
}

namespace {

double power_iterate(const std::function<std::vector<double>(const std::vector<double>&)>& op,
                     index_t dim, double rel_tol) {
    std::vector<double> v(static_cast<std::size_t>(dim), 1.0 / std::sqrt(double(dim)));
    double lam_prev = 0.0;
    for (int it = 0; it < 100000; ++it) {
        std::vector<double> w = op(v);
        double lam = 0.0;
        for (index_t i = 0; i < dim; ++i) lam += v[std::size_t(i)] * w[std::size_t(i)];
        double nw = 0.0;
        for (double x : w) nw += x * x;
        nw = std::sqrt(nw);
        if (nw == 0.0) return 0.0;
        for (index_t i = 0; i < dim; ++i) v[std::size_t(i)] = w[std::size_t(i)] / nw;
        if (it > 0 && std::abs(lam - lam_prev) <= rel_tol * std::max(std::abs(lam), 1e-300))
            return lam;
        lam_prev = lam;
    }
    return lam_prev;
}

}  // namespace

double compute_rho(const GroundTruth& gt, double rel_tol, index_t dense_cap_nm) {
    if (gt.n * gt.m <= dense_cap_nm) return compute_rho_dense(gt, rel_tol);
    double lam = power_iterate([&gt](const std::vector<double>& v) { return apply_Phi(gt, v); },
                               gt.n, rel_tol);
    return std::sqrt(std::max(lam, 0.0));
}

double compute_rho_dense(const GroundTruth& gt, double rel_tol) {
    DenseMatrix q = materialize_Q(gt);
    double lam = power_iterate(
        [&q](const std::vector<double>& v) {
            std::vector<double> tmp(static_cast<std::size_t>(q.cols()), 0.0);
            for (index_t i = 0; i < q.rows(); ++i) {
                double vi = v[std::size_t(i)];
                if (vi == 0.0) continue;
                for (index_t j = 0; j < q.cols(); ++j) tmp[std::size_t(j)] += q(i, j) * vi;
            }
            std::vector<double> out(static_cast<std::size_t>(q.rows()), 0.0);
            for (index_t i = 0; i < q.rows(); ++i) {
                double s = 0.0;
                for (index_t j = 0; j < q.cols(); ++j) s += q(i, j) * tmp[std::size_t(j)];
                out[std::size_t(i)] = s;
            }
            return out;
        },
        q.rows(), rel_tol);
    return std::sqrt(std::max(lam, 0.0));
}

DenseMatrix materialize_Q(const GroundTruth& gt, index_t cap_nm) {
    if (gt.n * gt.m > cap_nm) throw size_error("materialize_Q: n*m exceeds cap", gt.n * gt.m);
    double root_mn = std::sqrt(double(gt.m) * double(gt.n));
    DenseMatrix q(gt.n, gt.m);
    for (index_t x = 0; x < gt.n; ++x)
        for (index_t y = 0; y < gt.m; ++y) {
            double mxy = gt.entry(x, y);
            q(x, y) = root_mn * mxy * mxy;
        }
    return q;
}

}  // namespace longnbt
