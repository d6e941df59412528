#include "longnbt/svd_baseline.hpp"

#include <algorithm>
#include <cmath>

#include "longnbt/rng.hpp"

namespace longnbt {

namespace {

// out = A^T v (length m), in = length n
void apply_at(const ObservedMatrix& obs, const std::vector<double>& v, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (const Entry& e : obs.entries) out[std::size_t(e.y)] += e.a * v[std::size_t(e.x)];
}

void apply_a(const ObservedMatrix& obs, const std::vector<double>& w, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (const Entry& e : obs.entries) out[std::size_t(e.x)] += e.a * w[std::size_t(e.y)];
}

void orthonormalize(std::vector<std::vector<double>>& block, std::vector<bool>& alive) {
    for (std::size_t j = 0; j < block.size(); ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t i = 0; i < j; ++i) {
                if (!alive[i]) continue;
                double c = 0.0;
                for (std::size_t t = 0; t < block[j].size(); ++t) c += block[i][t] * block[j][t];
                for (std::size_t t = 0; t < block[j].size(); ++t) block[j][t] -= c * block[i][t];
            }
        }
        double nrm = 0.0;
        for (double x : block[j]) nrm += x * x;
        nrm = std::sqrt(nrm);
        if (nrm < 1e-300) {
            alive[j] = false;
            std::fill(block[j].begin(), block[j].end(), 0.0);
        } else {
            for (double& x : block[j]) x /= nrm;
        }
    }
}

}  // namespace

TruncatedSvd truncated_svd_baseline(const ObservedMatrix& obs, index_t k, double tol,
                                    index_t max_iter, std::uint64_t seed) {
    if (k < 1 || k > obs.n) throw invalid_input("truncated_svd_baseline: need 1 <= k <= n");
    TruncatedSvd out;

    std::vector<std::vector<double>> v(static_cast<std::size_t>(k),
                                       std::vector<double>(static_cast<std::size_t>(obs.n)));
    {
        CounterRng rng(seed, streams::kPowerIter);
        for (auto& col : v)
            for (auto& x : col) x = rng.normal();
    }
    std::vector<bool> alive(static_cast<std::size_t>(k), true);
    orthonormalize(v, alive);

    std::vector<double> sigma(static_cast<std::size_t>(k), 0.0), sigma_prev(static_cast<std::size_t>(k), 0.0);
    std::vector<double> tmp_m(static_cast<std::size_t>(obs.m)), tmp_n(static_cast<std::size_t>(obs.n));

    for (index_t it = 0; it < max_iter; ++it) {
        out.iterations = it + 1;
        for (index_t j = 0; j < k; ++j) {
            apply_at(obs, v[std::size_t(j)], tmp_m);
            double s2 = 0.0;
            for (double x : tmp_m) s2 += x * x;
            sigma[std::size_t(j)] = std::sqrt(s2);  // ||A^T v_j|| -> sigma_j at convergence
            apply_a(obs, tmp_m, tmp_n);
            v[std::size_t(j)] = tmp_n;
        }
        orthonormalize(v, alive);

        double worst = 0.0;
        for (index_t j = 0; j < k; ++j) {
            double scale = std::max({sigma[std::size_t(j)], sigma_prev[std::size_t(j)], 1e-300});
            worst = std::max(worst, std::abs(sigma[std::size_t(j)] - sigma_prev[std::size_t(j)]) / scale);
        }
        sigma_prev = sigma;
        if (it > 0 && worst <= tol) {
            out.converged = true;
            break;
        }
        // zero matrix: everything dead, nothing to iterate
        bool any_alive = false;
        for (bool a : alive) any_alive = any_alive || a;
        if (!any_alive) {
            out.converged = true;
            break;
        }
    }

    // Rayleigh-Ritz on the converged subspace for clean ordering
    std::vector<std::pair<double, index_t>> order;
    for (index_t j = 0; j < k; ++j) {
        if (!alive[std::size_t(j)]) sigma[std::size_t(j)] = 0.0;
        order.emplace_back(sigma[std::size_t(j)], j);
    }
    std::sort(order.begin(), order.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (auto& [sv, j] : order) {
        out.singular_values.push_back(sv);
        out.left.push_back(v[std::size_t(j)]);
    }
    return out;
}

}  // namespace longnbt
