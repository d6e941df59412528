#include "longnbt/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "longnbt/rng.hpp"

namespace longnbt {

bool spectral_order(const cdouble& a, const cdouble& b) {
    double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma > mb;
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() < b.imag();
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

struct RitzPair {
    cdouble lambda;
    std::vector<cdouble> vec;  // full-space, unit norm
    double residual;
    bool converged;
};

}  // namespace

ArnoldiResult arnoldi_topk(const ApplyFn& apply, index_t dim, const ArnoldiOptions& opts) {
    ArnoldiResult result;
    if (dim == 0) {
        result.all_converged = true;
        return result;
    }
    if (opts.k < 1) throw invalid_input("arnoldi_topk: k must be >= 1");
    if (!(opts.tol > 0.0)) throw invalid_input("arnoldi_topk: tol must be > 0");

    const index_t k_eff = std::min(opts.k, dim);
    index_t kdim = opts.krylov_dim > 0 ? opts.krylov_dim : std::max<index_t>(4 * k_eff, 32);
    kdim = std::min(kdim, dim);
    kdim = std::max(kdim, k_eff);

    // seeded start, uniform on the sphere
    std::vector<double> v0(static_cast<std::size_t>(dim));
    {
        CounterRng rng(opts.seed, streams::kArnoldiStart);
        for (auto& x : v0) x = rng.normal();
        double nv = norm2(v0);
        for (auto& x : v0) x /= nv;
    }

    std::vector<std::vector<double>> basis;
    std::vector<double> work(static_cast<std::size_t>(dim));
    std::vector<RitzPair> best;
    double best_score = std::numeric_limits<double>::infinity();
    index_t best_conv = -1;
    index_t stall = 0;
    bool invariant = false;

    for (index_t restart = 0; restart <= opts.max_restarts; ++restart) {
        result.restarts_used = restart;
        basis.assign(1, v0);
        DenseMatrix h(kdim + 1, kdim);
        index_t jdone = kdim;
        invariant = false;

        for (index_t j = 0; j < kdim; ++j) {
            apply(basis[std::size_t(j)], work);
            double wscale = norm2(work);
            for (int pass = 0; pass < 2; ++pass) {
                for (index_t i = 0; i <= j; ++i) {
                    double hij = dot(basis[std::size_t(i)], work);
                    h(i, j) += hij;
                    const auto& vi = basis[std::size_t(i)];
                    for (index_t t = 0; t < dim; ++t) work[std::size_t(t)] -= hij * vi[std::size_t(t)];
                }
            }
            double beta = norm2(work);
            bool breakdown = beta <= 1e-13 * std::max(wscale, 1e-300);
            if (breakdown) {
                // invariant subspace found: the Ritz values so far are exact.
                // Continue on the orthogonal complement so multiplicities
                // beyond one Krylov space can still be resolved.
                h(j + 1, j) = 0.0;
                if (index_t(basis.size()) >= dim || j + 1 >= kdim) {
                    jdone = j + 1;
                    invariant = true;
                    break;
                }
                bool extended = false;
                for (int attempt = 0; attempt < 5 && !extended; ++attempt) {
                    CounterRng rng(opts.seed,
                                   streams::kArnoldiStart + 100 + std::uint64_t(restart * 8 + j + attempt));
                    for (auto& x : work) x = rng.normal();
                    for (int pass = 0; pass < 2; ++pass)
                        for (const auto& vi : basis) {
                            double c = dot(vi, work);
                            for (index_t t = 0; t < dim; ++t) work[std::size_t(t)] -= c * vi[std::size_t(t)];
                        }
                    double nw = norm2(work);
                    if (nw > 1e-8) {
                        std::vector<double> next(static_cast<std::size_t>(dim));
                        for (index_t t = 0; t < dim; ++t) next[std::size_t(t)] = work[std::size_t(t)] / nw;
                        basis.push_back(std::move(next));
                        extended = true;
                    }
                }
                if (!extended) {
                    jdone = j + 1;
                    invariant = true;
                    break;
                }
                continue;
            }
            h(j + 1, j) = beta;
            if (j + 1 < kdim) {
                std::vector<double> next(static_cast<std::size_t>(dim));
                for (index_t t = 0; t < dim; ++t) next[std::size_t(t)] = work[std::size_t(t)] / beta;
                basis.push_back(std::move(next));
            }
        }

        DenseMatrix hs(jdone, jdone);
        for (index_t i = 0; i < jdone; ++i)
            for (index_t j = 0; j < jdone; ++j) hs(i, j) = h(i, j);
        double hnorm = hs.max_abs();

        std::vector<cdouble> eigs = hessenberg_eigenvalues(hs);
        std::sort(eigs.begin(), eigs.end(), spectral_order);

        index_t want = std::min(k_eff, jdone);
        if (want < index_t(eigs.size())) {
            const cdouble& edge = eigs[std::size_t(want - 1)];
            const cdouble& next = eigs[std::size_t(want)];
            if (edge.imag() != 0.0 && std::abs(next - std::conj(edge)) <=
                                          1e-8 * std::max(1.0, std::abs(edge)))
                ++want;
        }

        std::vector<RitzPair> ritz;
        bool all_ok = true;
        for (index_t i = 0; i < want; ++i) {
            cdouble lam = eigs[std::size_t(i)];
            std::vector<cdouble> y = hessenberg_eigenvector(hs, lam, int(i));
            std::vector<cdouble> x(static_cast<std::size_t>(dim), cdouble(0.0, 0.0));
            for (index_t j = 0; j < jdone; ++j) {
                cdouble yj = y[std::size_t(j)];
                const auto& vj = basis[std::size_t(j)];
                for (index_t t = 0; t < dim; ++t) x[std::size_t(t)] += yj * vj[std::size_t(t)];
            }
            double xnorm = 0.0;
            for (auto& c : x) xnorm += std::norm(c);
            xnorm = std::sqrt(xnorm);
            if (xnorm > 0)
                for (auto& c : x) c /= xnorm;

            // true residual via two real applies
            std::vector<double> xr(static_cast<std::size_t>(dim)), xi(static_cast<std::size_t>(dim));
            for (index_t t = 0; t < dim; ++t) {
                xr[std::size_t(t)] = x[std::size_t(t)].real();
                xi[std::size_t(t)] = x[std::size_t(t)].imag();
            }
            std::vector<double> axr(static_cast<std::size_t>(dim)), axi(static_cast<std::size_t>(dim));
            apply(xr, axr);
            apply(xi, axi);
            double res = 0.0;
            for (index_t t = 0; t < dim; ++t) {
                cdouble ax(axr[std::size_t(t)], axi[std::size_t(t)]);
                res += std::norm(ax - lam * x[std::size_t(t)]);
            }
            res = std::sqrt(res);
            bool conv = res <= opts.tol * std::abs(lam) || res <= 1e-13 * std::max(hnorm, 1e-300);
            all_ok = all_ok && conv;
            ritz.push_back({lam, std::move(x), res, conv});
        }
        // keep the best restart; unconverged bulk pairs stagnate, so stop
        // once five restarts in a row neither converge another pair nor
        // shrink the worst outstanding residual by 10%
        double score = 0.0;
        index_t conv_count = 0;
        for (const RitzPair& rp : ritz) {
            if (rp.converged)
                ++conv_count;
            else
                score = std::max(score, rp.residual / std::max(std::abs(rp.lambda), 1e-300));
        }
        bool progress = conv_count > best_conv ||
                        (conv_count == best_conv && score < 0.9 * best_score);
        bool better = conv_count > best_conv || (conv_count == best_conv && score <= best_score);
        if (better || best.empty()) {
            best = std::move(ritz);
            best_conv = conv_count;
            best_score = score;
        }
        stall = progress ? 0 : stall + 1;
        if (all_ok || invariant || restart == opts.max_restarts || stall >= 5) break;

        // restart direction: span of the wanted Ritz vectors
        std::fill(v0.begin(), v0.end(), 0.0);
        for (const RitzPair& rp : best) {
            for (index_t t = 0; t < dim; ++t)
                v0[std::size_t(t)] += rp.vec[std::size_t(t)].real() + rp.vec[std::size_t(t)].imag();
        }
        double nv = norm2(v0);
        if (nv <= 1e-300) {
            CounterRng rng(opts.seed, streams::kArnoldiStart + 7 + std::uint64_t(restart));
            for (auto& x : v0) x = rng.normal();
            nv = norm2(v0);
        }
        for (auto& x : v0) x /= nv;
    }

    std::sort(best.begin(), best.end(),
              [](const RitzPair& a, const RitzPair& b) { return spectral_order(a.lambda, b.lambda); });
    result.invariant_subspace = invariant;
    result.all_converged = true;
    for (RitzPair& rp : best) {
        EigenPair p;
        p.lambda = rp.lambda;
        p.right_vec = std::move(rp.vec);
        p.residual = rp.residual;
        p.converged = rp.converged;
        result.all_converged = result.all_converged && rp.converged;
        result.pairs.push_back(std::move(p));
    }
    return result;
}

void attach_left_vectors(std::vector<EigenPair>& pairs, const ApplyFn& apply_transpose,
                         index_t dim, const ArnoldiOptions& opts) {
    ArnoldiResult left = arnoldi_topk(apply_transpose, dim, opts);
    std::vector<bool> used(left.pairs.size(), false);
    for (EigenPair& p : pairs) {
        double best_dist = std::numeric_limits<double>::infinity();
        index_t best_idx = -1;
        for (std::size_t i = 0; i < left.pairs.size(); ++i) {
            if (used[i]) continue;
            double dist = std::abs(left.pairs[i].lambda - p.lambda);
            if (dist < best_dist) {
                best_dist = dist;
                best_idx = index_t(i);
            }
        }
        double threshold = 100.0 * opts.tol * std::max(1.0, std::abs(p.lambda));
        if (best_idx >= 0 && best_dist <= threshold) {
            used[std::size_t(best_idx)] = true;
            p.left_vec = left.pairs[std::size_t(best_idx)].right_vec;
            p.lambda_left = left.pairs[std::size_t(best_idx)].lambda;
            p.has_left = true;
        }
    }
}

SpectrumSummary classify_spectrum(const std::vector<EigenPair>& pairs, index_t r0, double theta,
                                  index_t ell) {
    (void)ell;  // the bulk bound constant C^(1/ell) is unknown; only the
                // theta^2 ratio is reported
    SpectrumSummary s;
    s.k_requested = index_t(pairs.size());
    for (const EigenPair& p : pairs)
        if (p.converged) ++s.k_converged;
    index_t take = std::min<index_t>(r0, index_t(pairs.size()));
    s.partial = take < r0;
    s.outliers.assign(pairs.begin(), pairs.begin() + take);
    if (index_t(pairs.size()) > r0) {
        s.bulk_radius = std::abs(pairs[std::size_t(r0)].lambda);
        s.bulk_radius_known = true;
        if (theta > 0.0) s.bulk_theta2_ratio = s.bulk_radius / (theta * theta);
    }
    return s;
}

PowerApplyResult power_apply(const ApplyFn& apply, const std::vector<double>& v, index_t ell) {
    if (ell < 0) throw invalid_input("power_apply: ell must be >= 0");
    PowerApplyResult out;
    double nv = norm2(v);
    if (nv == 0.0) {
        out.unit.assign(v.size(), 0.0);
        out.log_scale = -std::numeric_limits<double>::infinity();
        return out;
    }
    out.unit.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out.unit[i] = v[i] / nv;
    out.log_scale = std::log(nv);

    std::vector<double> work(v.size());
    for (index_t s = 0; s < ell; ++s) {
        apply(out.unit, work);
        double nw = norm2(work);
        if (nw == 0.0) {
            std::fill(out.unit.begin(), out.unit.end(), 0.0);
            out.log_scale = -std::numeric_limits<double>::infinity();
            return out;
        }
        for (std::size_t i = 0; i < work.size(); ++i) out.unit[i] = work[i] / nw;
        out.log_scale += std::log(nw);
    }
    return out;
}

}  // namespace longnbt
