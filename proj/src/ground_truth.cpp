#include "longnbt/ground_truth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "longnbt/rng.hpp"
#include "longnbt/signal_ops.hpp"

namespace longnbt {

double GroundTruth::psi_value(index_t j, index_t y) const {
    if (!kron) return psi[std::size_t(j)][std::size_t(y)];
    const KronRep& k = *kron;
    double s = 0.0;
    for (index_t i = 0; i < index_t(k.cp_weights.size()); ++i) {
        double z = 1.0;
        index_t rest = y;
        for (index_t pos = 0; pos < k.k_order - 1; ++pos) {
            index_t stride = kron_stride(pos);
            index_t digit = rest / stride;
            rest %= stride;
            z *= k.cp_right[std::size_t(i)][std::size_t(pos)][std::size_t(digit)];
        }
        s += k.coeff(i, j) * z;
    }
    return s;
}

double GroundTruth::entry(index_t x, index_t y) const {
    if (kron) {
        const KronRep& k = *kron;
        double s = 0.0;
        for (index_t i = 0; i < index_t(k.cp_weights.size()); ++i) {
            double z = k.cp_weights[std::size_t(i)] * k.cp_left[std::size_t(i)][std::size_t(x)];
            index_t rest = y;
            for (index_t pos = 0; pos < k.k_order - 1; ++pos) {
                index_t digit = rest / kron_stride(pos);
                rest %= kron_stride(pos);
                z *= k.cp_right[std::size_t(i)][std::size_t(pos)][std::size_t(digit)];
            }
            s += z;
        }
        return s;
    }
    double s = 0.0;
    for (index_t i = 0; i < r; ++i)
        s += nu[std::size_t(i)] * phi[std::size_t(i)][std::size_t(x)] *
             psi[std::size_t(i)][std::size_t(y)];
    return s;
}

double GroundTruth::psi_inf_norm(index_t j) const {
    if (!kron) {
        double s = 0.0;
        for (double v : psi[std::size_t(j)]) s = std::max(s, std::abs(v));
        return s;
    }
    // kron case: scan (desk-scale m only reached through rank-1 shortcuts
    // in compute_params; this generic path is exact but O(m))
    double s = 0.0;
    for (index_t y = 0; y < m; ++y) s = std::max(s, std::abs(psi_value(j, y)));
    return s;
}

double GroundTruth::frobenius_sq() const {
    double s = 0.0;
    for (double v : nu) s += v * v;
    return s;
}

namespace {

void mgs_orthonormalize(std::vector<std::vector<double>>& vecs) {
    for (std::size_t j = 0; j < vecs.size(); ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t i = 0; i < j; ++i) {
                double c = 0.0;
                for (std::size_t t = 0; t < vecs[j].size(); ++t) c += vecs[i][t] * vecs[j][t];
                for (std::size_t t = 0; t < vecs[j].size(); ++t) vecs[j][t] -= c * vecs[i][t];
            }
        }
        double nrm = 0.0;
        for (double v : vecs[j]) nrm += v * v;
        nrm = std::sqrt(nrm);
        if (nrm < 1e-12) throw error("orthonormalize: rank deficient family");
        for (double& v : vecs[j]) v /= nrm;
    }
}

std::vector<std::vector<double>> random_orthonormal(index_t count, index_t length,
                                                    CounterRng& rng) {
    std::vector<std::vector<double>> vecs(static_cast<std::size_t>(count),
                                          std::vector<double>(static_cast<std::size_t>(length)));
    for (auto& v : vecs)
        for (auto& x : v) x = rng.normal();
    mgs_orthonormalize(vecs);
    return vecs;
}

// scrambled Walsh sign patterns: orthogonal +-1/sqrt(len) vectors
std::vector<std::vector<double>> walsh_sign_family(index_t count, index_t length,
                                                   CounterRng& rng) {
    if (count > 1 && length % (index_t(1) << count) != 0)
        throw invalid_input("uniform-sign with r >= 2 needs the dimension divisible by 2^r");
    std::vector<index_t> perm(static_cast<std::size_t>(length));
    for (index_t i = 0; i < length; ++i) perm[std::size_t(i)] = i;
    for (index_t i = length - 1; i > 0; --i)
        std::swap(perm[std::size_t(i)], perm[std::size_t(rng.uniform_below(std::uint64_t(i + 1)))]);
    std::vector<double> flip(static_cast<std::size_t>(length));
    for (auto& s : flip) s = rng.sign();

    double scale = 1.0 / std::sqrt(double(length));
    std::vector<std::vector<double>> vecs(static_cast<std::size_t>(count),
                                          std::vector<double>(static_cast<std::size_t>(length)));
    for (index_t i = 0; i < count; ++i) {
        index_t mask = (count == 1) ? 0 : (index_t(1) << i);
        for (index_t x = 0; x < length; ++x) {
            index_t bits = perm[std::size_t(x)] & mask;
            double w = (__builtin_popcountll(std::uint64_t(bits)) % 2 == 0) ? 1.0 : -1.0;
            vecs[std::size_t(i)][std::size_t(x)] = flip[std::size_t(x)] * w * scale;
        }
    }
    return vecs;
}

void validate_nu(const std::vector<double>& nu) {
    if (nu.empty()) throw invalid_input("gen_rank_r: empty singular value list");
    for (std::size_t i = 0; i < nu.size(); ++i) {
        if (!(nu[i] > 0.0)) throw invalid_input("gen_rank_r: singular values must be positive");
        if (i > 0 && nu[i] > nu[i - 1] + 1e-15)
            throw invalid_input("gen_rank_r: singular values must be non-increasing");
    }
}

}  // namespace

GroundTruth gen_rank_r(index_t n, index_t m, index_t r, std::vector<double> nu, VectorMode mode,
                       std::uint64_t seed, double kappa_target) {
    if (n < 2 || m < n) throw invalid_input("gen_rank_r: need n >= 2 and m >= n");
    if (r < 1 || r > n) throw invalid_input("gen_rank_r: need 1 <= r <= n");
    if (index_t(nu.size()) != r) throw invalid_input("gen_rank_r: nu size must equal r");
    validate_nu(nu);

    GroundTruth gt;
    gt.n = n;
    gt.m = m;
    gt.r = r;
    gt.nu = std::move(nu);
    CounterRng rng(seed, streams::kGroundTruth);

    switch (mode) {
        case VectorMode::kUniformSign: {
            gt.phi = walsh_sign_family(r, n, rng);
            gt.psi = walsh_sign_family(r, m, rng);
            gt.homogeneous = (r == 1);
            break;
        }
        case VectorMode::kRandomOrthonormal: {
            gt.phi = random_orthonormal(r, n, rng);
            gt.psi = random_orthonormal(r, m, rng);
            break;
        }
        case VectorMode::kLocalized: {
            double sqn = std::sqrt(double(n));
            if (kappa_target < 1.0 || kappa_target > sqn)
                throw invalid_input("gen_rank_r: kappa target must lie in [1, sqrt(n)]");
            if (n < 2 * r) throw invalid_input("gen_rank_r: localized mode needs n >= 2r");
            double a = kappa_target / sqn;
            gt.phi.assign(std::size_t(r), std::vector<double>(std::size_t(n), 0.0));
            index_t tail = n - r;
            double measured = kappa_target;
            for (index_t i = 0; i < r; ++i) {
                index_t seg_lo = r + (tail * i) / r;
                index_t seg_hi = r + (tail * (i + 1)) / r;
                index_t seg = seg_hi - seg_lo;
                double b = std::sqrt(std::max(0.0, 1.0 - a * a) / double(seg));
                gt.phi[std::size_t(i)][std::size_t(i)] = a;
                for (index_t x = seg_lo; x < seg_hi; ++x) gt.phi[std::size_t(i)][std::size_t(x)] = b;
                measured = std::max(measured, sqn * b);
            }
            if (std::abs(measured - kappa_target) > 0.1 * kappa_target)
                throw invalid_input("gen_rank_r: kappa target infeasible at this (n, r)");
            gt.psi = random_orthonormal(r, m, rng);
            break;
        }
    }

    double defect = orthonormality_defect(gt);
    if (defect > 1e-10) throw error("gen_rank_r: orthonormality defect " + std::to_string(defect));
    return gt;
}

index_t GroundTruth::kron_stride(index_t pos) const {
    index_t s = 1;
    for (index_t q = pos + 1; q < kron->k_order - 1; ++q) s *= n;
    return s;
}

GroundTruth unfold_tensor_cp(index_t n, index_t k_order, const std::vector<CpComponent>& comps) {
    if (k_order < 3 || k_order % 2 == 0)
        throw invalid_input("unfold_tensor_cp: k_order must be odd and >= 3");
    if (comps.empty()) throw invalid_input("unfold_tensor_cp: no components");
    const index_t r_cp = index_t(comps.size());

    index_t m = 1;
    for (index_t s = 1; s < k_order; ++s) {
        if (m > index_t(2'000'000'000'000'000) / n)
            throw size_error("unfold_tensor_cp: m = n^(k-1) too large", -1);
        m *= n;
    }

    for (const CpComponent& c : comps) {
        if (!(c.weight > 0.0)) throw invalid_input("unfold_tensor_cp: weights must be positive");
        if (index_t(c.factors.size()) != k_order)
            throw invalid_input("unfold_tensor_cp: each component needs k_order factors");
        for (const auto& f : c.factors) {
            if (index_t(f.size()) != n)
                throw invalid_input("unfold_tensor_cp: factor length must equal n");
            double nrm = 0.0;
            for (double v : f) nrm += v * v;
            if (std::abs(std::sqrt(nrm) - 1.0) > 1e-8)
                throw invalid_input("unfold_tensor_cp: factors must be unit norm");
        }
    }

    // QR of the left factor block via modified Gram-Schmidt
    std::vector<std::vector<double>> q(static_cast<std::size_t>(r_cp), std::vector<double>(static_cast<std::size_t>(n)));
    DenseMatrix r_u(r_cp, r_cp);
    for (index_t j = 0; j < r_cp; ++j) {
        q[std::size_t(j)] = comps[std::size_t(j)].factors[0];
        for (int pass = 0; pass < 2; ++pass) {
            for (index_t i = 0; i < j; ++i) {
                double c = 0.0;
                for (index_t t = 0; t < n; ++t)
                    c += q[std::size_t(i)][std::size_t(t)] * q[std::size_t(j)][std::size_t(t)];
                r_u(i, j) += c;
                for (index_t t = 0; t < n; ++t)
                    q[std::size_t(j)][std::size_t(t)] -= c * q[std::size_t(i)][std::size_t(t)];
            }
        }
        double nrm = 0.0;
        for (double v : q[std::size_t(j)]) nrm += v * v;
        nrm = std::sqrt(nrm);
        if (nrm < 1e-10) throw invalid_input("unfold_tensor_cp: left factors are rank deficient");
        r_u(j, j) = nrm;
        for (double& v : q[std::size_t(j)]) v /= nrm;
    }

    // Gram of the Kronecker right system: products of per-mode inner products
    DenseMatrix g_z(r_cp, r_cp);
    for (index_t i = 0; i < r_cp; ++i)
        for (index_t j = 0; j < r_cp; ++j) {
            double prod = 1.0;
            for (index_t s = 1; s < k_order; ++s) {
                double dp = 0.0;
                for (index_t t = 0; t < n; ++t)
                    dp += comps[std::size_t(i)].factors[std::size_t(s)][std::size_t(t)] *
                          comps[std::size_t(j)].factors[std::size_t(s)][std::size_t(t)];
                prod *= dp;
            }
            g_z(i, j) = prod;
        }

    // Cholesky g_z = r_z^T r_z (upper triangular r_z)
    DenseMatrix r_z(r_cp, r_cp);
    for (index_t j = 0; j < r_cp; ++j) {
        double diag = g_z(j, j);
        for (index_t k = 0; k < j; ++k) diag -= r_z(k, j) * r_z(k, j);
        if (diag < 1e-12) throw invalid_input("unfold_tensor_cp: right factor system is degenerate");
        r_z(j, j) = std::sqrt(diag);
        for (index_t i = j + 1; i < r_cp; ++i) {
            double s = g_z(j, i);
            for (index_t k = 0; k < j; ++k) s -= r_z(k, j) * r_z(k, i);
            r_z(j, i) = s / r_z(j, j);
        }
    }

    // small core W = R_U diag(w) R_Z^T, then its SVD induces the SVD of M
    DenseMatrix w_core(r_cp, r_cp);
    for (index_t i = 0; i < r_cp; ++i)
        for (index_t j = 0; j < r_cp; ++j) {
            double s = 0.0;
            for (index_t k = 0; k < r_cp; ++k)
                s += r_u(i, k) * comps[std::size_t(k)].weight * r_z(j, k);
            w_core(i, j) = s;
        }
    DenseSvd core = dense_svd(w_core);

    GroundTruth gt;
    gt.n = n;
    gt.m = m;
    GroundTruth::KronRep kr;
    kr.k_order = k_order;
    for (const CpComponent& c : comps) {
        kr.cp_weights.push_back(c.weight);
        kr.cp_left.push_back(c.factors[0]);
        kr.cp_right.emplace_back(c.factors.begin() + 1, c.factors.end());
    }

    index_t kept = 0;
    double top = core.singular_values.empty() ? 0.0 : core.singular_values[0];
    for (index_t k = 0; k < r_cp; ++k)
        if (core.singular_values[std::size_t(k)] > 1e-12 * top) ++kept;
    if (kept == 0) throw invalid_input("unfold_tensor_cp: zero matrix");

    gt.r = kept;
    kr.coeff = DenseMatrix(r_cp, kept);
    for (index_t k = 0; k < kept; ++k) {
        gt.nu.push_back(core.singular_values[std::size_t(k)]);
        std::vector<double> phi_k(static_cast<std::size_t>(n), 0.0);
        for (index_t i = 0; i < r_cp; ++i)
            for (index_t t = 0; t < n; ++t)
                phi_k[std::size_t(t)] += core.left[std::size_t(k)][std::size_t(i)] *
                                         q[std::size_t(i)][std::size_t(t)];
        gt.phi.push_back(std::move(phi_k));
        // coeff column k solves R_Z^T? no: psi_k = Z (R_Z^{-1} s_k)
        std::vector<double> col = core.right[std::size_t(k)];
        for (index_t i = r_cp - 1; i >= 0; --i) {
            double s = col[std::size_t(i)];
            for (index_t j = i + 1; j < r_cp; ++j) s -= r_z(i, j) * col[std::size_t(j)];
            col[std::size_t(i)] = s / r_z(i, i);
        }
        for (index_t i = 0; i < r_cp; ++i) kr.coeff(i, k) = col[std::size_t(i)];
    }
    gt.kron = std::move(kr);
    return gt;
}

ObservedMatrix sample_observed(const GroundTruth& gt, const SampleSpec& spec) {
    double root_mn = std::sqrt(double(gt.m) * double(gt.n));
    if (!(spec.d > 1.0)) throw invalid_input("sample_observed: d must be > 1");
    if (spec.d >= root_mn) throw invalid_input("sample_observed: d >= sqrt(mn)");
    double p = spec.d / root_mn;
    double expected = spec.d * root_mn;
    if (expected > double(spec.nnz_cap))
        throw size_error("sample_observed: expected nnz exceeds cap", index_t(expected));

    std::vector<RawEntry> raw;
    raw.reserve(std::size_t(expected * 1.2) + 16);
    if (spec.mode == SamplerMode::kExactBernoulli) {
        for (index_t x = 0; x < gt.n; ++x) {
            CounterRng rng(spec.seed, streams::kSampleRowBase + std::uint64_t(x));
            index_t k = rng.binomial(gt.m, p);
            for (index_t y : rng.sample_without_replacement(gt.m, k))
                raw.push_back({x, y, gt.entry(x, y)});
        }
    } else {
        CounterRng rng(spec.seed, streams::kSampleRowBase - 1);
        index_t total = index_t(std::llround(expected));
        for (index_t id : rng.sample_without_replacement(gt.n * gt.m, total)) {
            index_t x = id / gt.m;
            index_t y = id % gt.m;
            raw.push_back({x, y, gt.entry(x, y)});
        }
    }
    return ingest(gt.n, gt.m, spec.d, std::move(raw), false);
}

double orthonormality_defect(const GroundTruth& gt) {
    double worst = 0.0;
    for (index_t i = 0; i < gt.r; ++i)
        for (index_t j = i; j < gt.r; ++j) {
            double dp = 0.0;
            for (index_t t = 0; t < gt.n; ++t)
                dp += gt.phi[std::size_t(i)][std::size_t(t)] * gt.phi[std::size_t(j)][std::size_t(t)];
            worst = std::max(worst, std::abs(dp - (i == j ? 1.0 : 0.0)));
        }
    if (!gt.kron) {
        for (index_t i = 0; i < gt.r; ++i)
            for (index_t j = i; j < gt.r; ++j) {
                double dp = 0.0;
                for (index_t t = 0; t < gt.m; ++t)
                    dp += gt.psi[std::size_t(i)][std::size_t(t)] *
                          gt.psi[std::size_t(j)][std::size_t(t)];
                worst = std::max(worst, std::abs(dp - (i == j ? 1.0 : 0.0)));
            }
    } else {
        // psi^T psi = coeff^T G_Z coeff with (G_Z)_{ij} separable over modes
        const auto& kr = *gt.kron;
        index_t r_cp = index_t(kr.cp_weights.size());
        DenseMatrix g_z(r_cp, r_cp);
        for (index_t i = 0; i < r_cp; ++i)
            for (index_t j = 0; j < r_cp; ++j) {
                double prod = 1.0;
                for (index_t s = 0; s < kr.k_order - 1; ++s) {
                    double dp = 0.0;
                    for (index_t t = 0; t < gt.n; ++t)
                        dp += kr.cp_right[std::size_t(i)][std::size_t(s)][std::size_t(t)] *
                              kr.cp_right[std::size_t(j)][std::size_t(s)][std::size_t(t)];
                    prod *= dp;
                }
                g_z(i, j) = prod;
            }
        for (index_t a = 0; a < gt.r; ++a)
            for (index_t b = a; b < gt.r; ++b) {
                double s = 0.0;
                for (index_t i = 0; i < r_cp; ++i)
                    for (index_t j = 0; j < r_cp; ++j)
                        s += kr.coeff(i, a) * g_z(i, j) * kr.coeff(j, b);
                worst = std::max(worst, std::abs(s - (a == b ? 1.0 : 0.0)));
            }
    }
    return worst;
}

double homogeneity_defect(const GroundTruth& gt) {
    // D_x = sum_y Phi_xy = (Phi 1_n)(x)
    std::vector<double> ones_n(static_cast<std::size_t>(gt.n), 1.0);
    std::vector<double> dx = apply_Q(gt, apply_Q_star(gt, ones_n));
    double rho = compute_rho(gt);
    double rho2 = rho * rho;
    double worst = 0.0;
    for (double v : dx) worst = std::max(worst, std::abs(v - rho2));
    return worst / rho2;
}

void write_ground_truth(std::ostream& out, const GroundTruth& gt) {
    out << std::setprecision(17);
    out << gt.n << ' ' << gt.m << ' ' << gt.r << '\n';
    for (index_t i = 0; i < gt.r; ++i) out << gt.nu[std::size_t(i)] << (i + 1 < gt.r ? ' ' : '\n');
    for (index_t i = 0; i < gt.r; ++i) {
        for (index_t t = 0; t < gt.n; ++t)
            out << gt.phi[std::size_t(i)][std::size_t(t)] << (t + 1 < gt.n ? ' ' : '\n');
    }
    if (!gt.kron) {
        out << "psi explicit\n";
        for (index_t i = 0; i < gt.r; ++i)
            for (index_t t = 0; t < gt.m; ++t)
                out << gt.psi[std::size_t(i)][std::size_t(t)] << (t + 1 < gt.m ? ' ' : '\n');
    } else {
        const auto& kr = *gt.kron;
        index_t r_cp = index_t(kr.cp_weights.size());
        out << "psi implicit-kron " << kr.k_order << ' ' << r_cp << '\n';
        for (index_t i = 0; i < r_cp; ++i) {
            out << kr.cp_weights[std::size_t(i)] << '\n';
            for (index_t t = 0; t < gt.n; ++t)
                out << kr.cp_left[std::size_t(i)][std::size_t(t)] << (t + 1 < gt.n ? ' ' : '\n');
            for (index_t s = 0; s < kr.k_order - 1; ++s)
                for (index_t t = 0; t < gt.n; ++t)
                    out << kr.cp_right[std::size_t(i)][std::size_t(s)][std::size_t(t)]
                        << (t + 1 < gt.n ? ' ' : '\n');
        }
        for (index_t i = 0; i < r_cp; ++i)
            for (index_t j = 0; j < gt.r; ++j) out << kr.coeff(i, j) << (j + 1 < gt.r ? ' ' : '\n');
    }
    out << "homogeneous " << (gt.homogeneous ? 1 : 0) << '\n';
}

GroundTruth read_ground_truth(std::istream& in) {
    GroundTruth gt;
    if (!(in >> gt.n >> gt.m >> gt.r)) throw invalid_input("ground truth: bad header");
    if (gt.n < 1 || gt.r < 1 || gt.r > gt.n) throw invalid_input("ground truth: bad dimensions");
    gt.nu.resize(std::size_t(gt.r));
    for (auto& v : gt.nu)
        if (!(in >> v)) throw invalid_input("ground truth: bad nu line");
    gt.phi.assign(std::size_t(gt.r), std::vector<double>(std::size_t(gt.n)));
    for (auto& row : gt.phi)
        for (auto& v : row)
            if (!(in >> v)) throw invalid_input("ground truth: bad phi block");
    std::string tag, kind;
    if (!(in >> tag >> kind) || tag != "psi") throw invalid_input("ground truth: missing psi tag");
    if (kind == "explicit") {
        gt.psi.assign(std::size_t(gt.r), std::vector<double>(std::size_t(gt.m)));
        for (auto& row : gt.psi)
            for (auto& v : row)
                if (!(in >> v)) throw invalid_input("ground truth: bad psi block");
    } else if (kind == "implicit-kron") {
        GroundTruth::KronRep kr;
        index_t r_cp;
        if (!(in >> kr.k_order >> r_cp)) throw invalid_input("ground truth: bad kron header");
        kr.cp_weights.resize(std::size_t(r_cp));
        kr.cp_left.assign(std::size_t(r_cp), std::vector<double>(std::size_t(gt.n)));
        kr.cp_right.assign(std::size_t(r_cp),
                           std::vector<std::vector<double>>(std::size_t(kr.k_order - 1),
                                                            std::vector<double>(std::size_t(gt.n))));
        for (index_t i = 0; i < r_cp; ++i) {
            if (!(in >> kr.cp_weights[std::size_t(i)]))
                throw invalid_input("ground truth: bad kron weight");
            for (auto& v : kr.cp_left[std::size_t(i)])
                if (!(in >> v)) throw invalid_input("ground truth: bad kron left factor");
            for (auto& f : kr.cp_right[std::size_t(i)])
                for (auto& v : f)
                    if (!(in >> v)) throw invalid_input("ground truth: bad kron right factor");
        }
        kr.coeff = DenseMatrix(r_cp, gt.r);
        for (index_t i = 0; i < r_cp; ++i)
            for (index_t j = 0; j < gt.r; ++j)
                if (!(in >> kr.coeff(i, j))) throw invalid_input("ground truth: bad kron coeff");
        gt.kron = std::move(kr);
    } else {
        throw invalid_input("ground truth: unknown psi kind " + kind);
    }
    int flag;
    if (!(in >> tag >> flag) || tag != "homogeneous")
        throw invalid_input("ground truth: missing homogeneous flag");
    gt.homogeneous = flag != 0;
    if (orthonormality_defect(gt) > 1e-8)
        throw invalid_input("ground truth: factors fail orthonormality on load");
    return gt;
}

void write_ground_truth_file(const std::string& path, const GroundTruth& gt) {
    std::ofstream out(path);
    if (!out) throw invalid_input("cannot open for writing: " + path);
    write_ground_truth(out, gt);
}

GroundTruth read_ground_truth_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("cannot open ground truth file: " + path);
    return read_ground_truth(in);
}

}  // namespace longnbt
