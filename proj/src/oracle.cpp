#include "longnbt/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "longnbt/rng.hpp"
#include "longnbt/signal_ops.hpp"
#include "longnbt/spectral.hpp"

namespace longnbt::oracle {

std::vector<cdouble> dense_spectrum(const TwoPathSet& tp, index_t cap) {
    DenseMatrix b = dense_B(tp, cap);
    std::vector<cdouble> eigs = dense_eigenvalues(std::move(b));
    std::sort(eigs.begin(), eigs.end(), spectral_order);
    return eigs;
}

double brute_gamma(const GroundTruth& gt, double d, index_t t, index_t i, index_t j,
                   index_t cap_nm) {
    if (i < 0 || i >= gt.r || j < 0 || j >= gt.r)
        throw invalid_input("brute_gamma: index out of range");
    DenseMatrix q = materialize_Q(gt, cap_nm);
    DenseMatrix phi_mat = matmul(q, q.transposed());

    std::vector<double> had(static_cast<std::size_t>(gt.n));
    for (index_t x = 0; x < gt.n; ++x)
        had[std::size_t(x)] =
            gt.phi[std::size_t(i)][std::size_t(x)] * gt.phi[std::size_t(j)][std::size_t(x)];

    double denom_step = std::pow(gt.nu[std::size_t(i)] * gt.nu[std::size_t(j)] * d, 2.0);
    double total = 0.0;
    DenseMatrix power = DenseMatrix::identity(gt.n);
    double denom = 1.0;
    for (index_t s = 0; s <= t; ++s) {
        std::vector<double> v = matvec(power, had);
        double num = 0.0;
        for (double x : v) num += x;
        total += num / denom;
        if (s < t) {
            power = matmul(power, phi_mat);
            denom *= denom_step;
        }
    }
    return total;
}

GWTree sample_gw_tree(const GroundTruth& gt, double d, index_t depth, index_t root_label,
                      std::uint64_t seed, index_t node_cap) {
    if (depth < 0) throw invalid_input("sample_gw_tree: depth must be >= 0");
    if (root_label < 0 || root_label >= gt.n)
        throw invalid_input("sample_gw_tree: root label out of range");
    CounterRng rng(seed, streams::kGWTreeBase);
    GWTree tree;
    tree.depth_cap = depth;
    tree.nodes.push_back({root_label, 0, -1, -1, 0});
    std::size_t head = 0;
    const double lambda = d * d;
    while (head < tree.nodes.size()) {
        // copy, since push_back below may reallocate
        GWTree::Node node = tree.nodes[head];
        index_t idx = index_t(head);
        ++head;
        if (node.depth >= depth) continue;
        index_t children =
            (node.depth % 2 == 0) ? index_t(rng.poisson(lambda)) : 1;
        if (index_t(tree.nodes.size()) + children > node_cap)
            throw size_error("sample_gw_tree: node cap exceeded", index_t(tree.nodes.size()) + children);
        tree.nodes[std::size_t(idx)].first_child = index_t(tree.nodes.size());
        tree.nodes[std::size_t(idx)].num_children = children;
        for (index_t c = 0; c < children; ++c) {
            index_t label = (node.depth % 2 == 0)
                                ? index_t(rng.uniform_below(std::uint64_t(gt.m)))
                                : index_t(rng.uniform_below(std::uint64_t(gt.n)));
            tree.nodes.push_back({label, node.depth + 1, idx, -1, 0});
        }
    }
    return tree;
}

double tree_functional(const GWTree& tree, const GroundTruth& gt, index_t phi_index, index_t t,
                       double d) {
    if (t < 0) throw invalid_input("tree_functional: t must be >= 0");
    if (2 * t > tree.depth_cap)
        throw invalid_input("tree_functional: tree depth insufficient for this t");
    const auto& phi = gt.phi[std::size_t(phi_index)];
    if (t == 0) return phi[std::size_t(tree.nodes[0].label)];

    // g_s(v) for even-depth v at depth 2u needs s = t - u; one value per node,
    // computed children-first (reverse BFS order)
    std::vector<double> val(tree.nodes.size(), 0.0);
    for (std::size_t rev = tree.nodes.size(); rev-- > 0;) {
        const GWTree::Node& node = tree.nodes[rev];
        if (node.depth % 2 != 0 || node.depth > 2 * t) continue;
        if (node.depth == 2 * t) {
            val[rev] = phi[std::size_t(node.label)];
            continue;
        }
        double acc = 0.0;
        for (index_t c = 0; c < node.num_children; ++c) {
            const GWTree::Node& mid = tree.nodes[std::size_t(node.first_child + c)];
            for (index_t gch = 0; gch < mid.num_children; ++gch) {
                index_t gidx = mid.first_child + gch;
                const GWTree::Node& grand = tree.nodes[std::size_t(gidx)];
                acc += gt.entry(node.label, mid.label) * gt.entry(grand.label, mid.label) *
                       val[std::size_t(gidx)];
            }
        }
        val[rev] = acc;
    }
    double prefactor = std::pow(double(gt.m) * double(gt.n) / (d * d), double(t));
    return prefactor * val[0];
}

double expected_functional_product(const GroundTruth& gt, double d, index_t t, index_t i,
                                   index_t j, index_t root_label) {
    std::vector<double> h(static_cast<std::size_t>(gt.n));
    for (index_t x = 0; x < gt.n; ++x)
        h[std::size_t(x)] =
            gt.phi[std::size_t(i)][std::size_t(x)] * gt.phi[std::size_t(j)][std::size_t(x)];
    double denom_step = std::pow(gt.nu[std::size_t(i)] * gt.nu[std::size_t(j)] * d, 2.0);
    std::vector<double> acc(static_cast<std::size_t>(gt.n), 0.0);
    double denom = 1.0;
    for (index_t s = 0; s <= t; ++s) {
        for (index_t x = 0; x < gt.n; ++x) acc[std::size_t(x)] += h[std::size_t(x)] / denom;
        if (s < t) {
            h = apply_Phi(gt, h);
            denom *= denom_step;
        }
    }
    double scale = std::pow(gt.nu[std::size_t(i)] * gt.nu[std::size_t(j)], 2.0 * double(t));
    return scale * acc[std::size_t(root_label)];
}

std::vector<double> mc_tree_functional(const GroundTruth& gt, double d, index_t phi_index,
                                       index_t t, index_t root_label, index_t trials,
                                       std::uint64_t seed) {
    std::vector<double> out;
    out.reserve(std::size_t(trials));
    for (index_t trial = 0; trial < trials; ++trial) {
        GWTree tree = sample_gw_tree(gt, d, 2 * t, root_label,
                                     rng_value(seed, streams::kGWTreeBase, std::uint64_t(trial)));
        out.push_back(tree_functional(tree, gt, phi_index, t, d));
    }
    return out;
}

std::vector<std::pair<double, double>> mc_tree_functional_pair(const GroundTruth& gt, double d,
                                                               index_t i, index_t j, index_t t,
                                                               index_t root_label, index_t trials,
                                                               std::uint64_t seed) {
    std::vector<std::pair<double, double>> out;
    out.reserve(std::size_t(trials));
    for (index_t trial = 0; trial < trials; ++trial) {
        GWTree tree = sample_gw_tree(gt, d, 2 * t, root_label,
                                     rng_value(seed, streams::kGWTreeBase, std::uint64_t(trial)));
        out.emplace_back(tree_functional(tree, gt, i, t, d), tree_functional(tree, gt, j, t, d));
    }
    return out;
}

double regularized_gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw invalid_input("regularized_gamma_p: bad arguments");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) {
        // series representation
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    // continued fraction for Q(a, x), then P = 1 - Q
    double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double dd = 1.0 / b;
    double h = dd;
    for (int n = 1; n < 500; ++n) {
        double an = -double(n) * (double(n) - a);
        b += 2.0;
        dd = an * dd + b;
        if (std::abs(dd) < tiny) dd = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        dd = 1.0 / dd;
        double delta = dd * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15) break;
    }
    double q = std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    return 1.0 - q;
}

double chi_square_poisson_pvalue(const std::vector<index_t>& counts, double lambda) {
    index_t total = 0;
    index_t max_count = 0;
    for (index_t c : counts) {
        total += 1;
        max_count = std::max(max_count, c);
    }
    if (total == 0) throw invalid_input("chi_square_poisson_pvalue: no samples");

    // expected bin masses, lumping the tail so every bin expects >= 5
    std::vector<double> expected;
    std::vector<double> observed;
    double pmf = std::exp(-lambda);
    double cum = 0.0;
    std::vector<double> obs_k(static_cast<std::size_t>(max_count + 1), 0.0);
    for (index_t c : counts) obs_k[std::size_t(c)] += 1.0;

    double exp_acc = 0.0, obs_acc = 0.0;
    for (index_t k = 0; k <= max_count; ++k) {
        double e = pmf * double(total);
        cum += pmf;
        pmf *= lambda / double(k + 1);
        exp_acc += e;
        obs_acc += obs_k[std::size_t(k)];
        if (exp_acc >= 5.0) {
            expected.push_back(exp_acc);
            observed.push_back(obs_acc);
            exp_acc = obs_acc = 0.0;
        }
    }
    // tail bin: everything above max_count plus any remainder
    double tail_mass = (1.0 - cum) * double(total) + exp_acc;
    if (!expected.empty() && tail_mass < 5.0) {
        expected.back() += tail_mass;
        observed.back() += obs_acc;
    } else {
        expected.push_back(tail_mass);
        observed.push_back(obs_acc);
    }

    if (expected.size() < 2) return 1.0;
    double stat = 0.0;
    for (std::size_t b = 0; b < expected.size(); ++b) {
        double diff = observed[b] - expected[b];
        stat += diff * diff / std::max(expected[b], 1e-12);
    }
    double df = double(expected.size() - 1);
    return 1.0 - regularized_gamma_p(df / 2.0, stat / 2.0);
}

PseudoEigenReport pseudo_eigen_grams(const TwoPathSet& tp, const GroundTruth& gt,
                                     const ModelParams& params) {
    if (params.r0 < 1) throw invalid_input("pseudo_eigen_grams: no outliers in scope");
    for (index_t i = 0; i < params.r0; ++i)
        if (!(gt.nu[std::size_t(i)] > 0.0))
            throw invalid_input("pseudo_eigen_grams: zero singular value in scope");
    const index_t r0 = params.r0;
    const index_t ell = params.ell;

    ApplyFn apply_b = [&tp](const std::vector<double>& in, std::vector<double>& out) {
        out = apply_B(tp, in);
    };
    ApplyFn apply_bt = [&tp](const std::vector<double>& in, std::vector<double>& out) {
        out = apply_B_transpose(tp, in);
    };

    struct Scaled {
        std::vector<double> unit;
        double log_coeff;  // vector = unit * exp(log_coeff)
    };
    std::vector<Scaled> u(static_cast<std::size_t>(r0)), uh(static_cast<std::size_t>(r0)), blu(static_cast<std::size_t>(r0));

    for (index_t i = 0; i < r0; ++i) {
        double log_nu = std::log(gt.nu[std::size_t(i)]);
        EdgeVector chi = apply_T(tp, gt.phi[std::size_t(i)]);
        PowerApplyResult pu = power_apply(apply_b, chi, ell);
        u[std::size_t(i)] = {pu.unit, pu.log_scale - 2.0 * double(ell) * log_nu};

        EdgeVector chk = apply_J_delta(tp, chi);
        PowerApplyResult ph = power_apply(apply_bt, chk, ell);
        uh[std::size_t(i)] = {ph.unit, ph.log_scale - (2.0 * double(ell) + 2.0) * log_nu};

        PowerApplyResult pb = power_apply(apply_b, u[std::size_t(i)].unit, ell);
        blu[std::size_t(i)] = {pb.unit, pb.log_scale + u[std::size_t(i)].log_coeff};
    }

    auto gram = [&](const std::vector<Scaled>& a, const std::vector<Scaled>& b) {
        DenseMatrix g(r0, r0);
        for (index_t i = 0; i < r0; ++i)
            for (index_t j = 0; j < r0; ++j) {
                double dp = 0.0;
                for (std::size_t t = 0; t < a[std::size_t(i)].unit.size(); ++t)
                    dp += a[std::size_t(i)].unit[t] * b[std::size_t(j)].unit[t];
                double lc = a[std::size_t(i)].log_coeff + b[std::size_t(j)].log_coeff;
                g(i, j) = std::isfinite(lc) ? dp * std::exp(lc) : 0.0;
            }
        return g;
    };

    PseudoEigenReport rep;
    rep.ell = ell;
    rep.r0 = r0;
    rep.uu = gram(u, u);
    rep.uhuh = gram(uh, uh);
    rep.uuh = gram(u, uh);
    rep.uhblu = gram(uh, blu);

    std::vector<index_t> idx;
    for (index_t i = 0; i < r0; ++i) idx.push_back(i);
    GammaMatrix g_ell = compute_gamma_matrix(gt, params.d, ell, idx);
    GammaMatrix g_ell1 = compute_gamma_matrix(gt, params.d, ell + 1, idx);

    rep.ref_uu = DenseMatrix(r0, r0);
    rep.ref_uhuh = DenseMatrix(r0, r0);
    rep.ref_uuh = DenseMatrix::identity(r0);
    rep.ref_uhblu = DenseMatrix(r0, r0);
    for (index_t i = 0; i < r0; ++i) {
        for (index_t j = 0; j < r0; ++j) {
            rep.ref_uu(i, j) = params.d * params.d * g_ell.values(i, j);
            rep.ref_uhuh(i, j) = g_ell1.values(i, j) - (i == j ? 1.0 : 0.0);
        }
        rep.ref_uhblu(i, i) = std::pow(gt.nu[std::size_t(i)] * gt.nu[std::size_t(i)], double(ell));
    }

    auto rel_dev = [](const DenseMatrix& x, const DenseMatrix& ref) {
        double num = 0.0, den = 0.0;
        for (index_t i = 0; i < x.rows(); ++i)
            for (index_t j = 0; j < x.cols(); ++j) {
                double d2 = x(i, j) - ref(i, j);
                num += d2 * d2;
                den += ref(i, j) * ref(i, j);
            }
        return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
    };
    rep.dev_uu = rel_dev(rep.uu, rep.ref_uu);
    rep.dev_uhuh = rel_dev(rep.uhuh, rep.ref_uhuh);
    rep.dev_uuh = rel_dev(rep.uuh, rep.ref_uuh);
    rep.dev_uhblu = rel_dev(rep.uhblu, rep.ref_uhblu);
    return rep;
}

namespace {

nlohmann::json matrix_to_json(const DenseMatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (index_t i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (index_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

nlohmann::json pseudo_report_to_json(const PseudoEigenReport& rep) {
    nlohmann::json j;
    j["ell"] = rep.ell;
    j["r0"] = rep.r0;
    j["UU"] = matrix_to_json(rep.uu);
    j["UhUh"] = matrix_to_json(rep.uhuh);
    j["UUh"] = matrix_to_json(rep.uuh);
    j["UhBlU"] = matrix_to_json(rep.uhblu);
    j["ref_UU"] = matrix_to_json(rep.ref_uu);
    j["ref_UhUh"] = matrix_to_json(rep.ref_uhuh);
    j["ref_UUh"] = matrix_to_json(rep.ref_uuh);
    j["ref_UhBlU"] = matrix_to_json(rep.ref_uhblu);
    j["dev_UU"] = rep.dev_uu;
    j["dev_UhUh"] = rep.dev_uhuh;
    j["dev_UUh"] = rep.dev_uuh;
    j["dev_UhBlU"] = rep.dev_uhblu;
    return j;
}

}  // namespace longnbt::oracle
