// Acceptance suite: runs the top-level criteria end to end and prints one
// PASS/FAIL line per criterion. An argument restricts the run to one
// criterion; the exit code is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "longnbt/oracle.hpp"
#include "longnbt/rng.hpp"
#include "longnbt/runner.hpp"
#include "longnbt/signal_ops.hpp"
#include "longnbt/svd_baseline.hpp"

using namespace longnbt;

namespace {

struct Criterion {
    int id;
    std::string title;
    double time_limit_s;
    bool pass = false;
    std::string detail;
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TwoPathSet paths_of(const ObservedMatrix& obs) {
    return enumerate_two_paths(prune_degree_one(build_graph(obs)), obs);
}

RunConfig homogeneous_config(double d, std::uint64_t seed) {
    RunConfig cfg;
    cfg.mode = "synth-run";
    cfg.n = 400;
    cfg.m = 160000;
    cfg.r = 1;
    cfg.nu = {1.0};
    cfg.vector_mode = "uniform-sign";
    cfg.seed = seed;
    cfg.d = d;
    cfg.k = 5;
    return cfg;
}

// ---- criterion 1: exact operator identities ------------------------------

void criterion_1(Criterion& c) {
    const double tol = 1e-12;
    double worst_stated = 0.0, worst_parity = 0.0, worst_factored = 0.0;
    index_t instances_with_deg3 = 0;
    int count = 0;
    for (std::uint64_t seed = 1; count < 100; ++seed) {
        index_t n = 10 + index_t(seed % 41);  // 10..50
        index_t m = n * (2 + index_t(seed % 5));
        double d = 1.3 + 0.037 * double(seed % 100);  // <= 5
        GroundTruth gt = gen_rank_r(n, m, 1, {1.0}, VectorMode::kUniformSign, seed);
        SampleSpec spec;
        spec.d = d;
        spec.seed = seed * 7 + 1;
        ObservedMatrix obs = sample_observed(gt, spec);
        TwoPathSet tp = paths_of(obs);
        if (tp.size() == 0) continue;
        ++count;
        RelationReport rep = verify_relations(tp, 3, seed);
        double scale = std::max(rep.delta_max, 1e-300);
        worst_stated = std::max(worst_stated, rep.stated_identity_residual / scale);
        worst_parity = std::max(worst_parity, rep.parity_residual / scale);
        worst_factored = std::max(worst_factored, rep.direct_vs_factored / scale);
        if (rep.middle_degree_ge3 > 0) ++instances_with_deg3;
    }
    bool stated_ok = worst_stated <= tol;
    bool parity_ok = worst_parity <= tol;
    c.pass = stated_ok && parity_ok;
    std::ostringstream d;
    d << "parity-time residual " << worst_parity << (parity_ok ? " <= " : " > ") << tol
      << " [" << (parity_ok ? "ok" : "VIOLATED") << "]; "
      << "B = TS_d - J_d residual " << worst_stated << (stated_ok ? " <= " : " > ") << tol << " ["
      << (stated_ok ? "ok" : "VIOLATED") << "]";
    if (!stated_ok) {
        d << " -- known defect of the printed identity: it omits the same-middle-vertex "
          << "exclusions, which exist on " << instances_with_deg3 << "/100 instances "
          << "(right degree >= 3); the corrected group-exclusion form (factored vs direct "
          << "application) has residual " << worst_factored << " <= 1e-12 on all instances. "
          << "See notes/decisions ledger.";
    }
    c.detail = d.str();
}

// ---- criterion 2: oracle equivalence --------------------------------------

void criterion_2(Criterion& c) {
    int dense_checked = 0, spec_checked = 0, gamma_checked = 0;
    double worst_apply = 0.0, worst_eig = 0.0, worst_gamma = 0.0;

    for (std::uint64_t seed = 1; dense_checked < 20 || spec_checked < 20; ++seed) {
        if (seed > 400) break;
        GroundTruth gt = gen_rank_r(40, 160, 1, {1.5}, VectorMode::kUniformSign, seed);
        SampleSpec spec;
        spec.d = 3.0;
        spec.seed = seed;
        ObservedMatrix obs = sample_observed(gt, spec);
        TwoPathSet tp = paths_of(obs);
        if (tp.size() < 60 || tp.size() > 500) continue;

        if (dense_checked < 20) {
            ++dense_checked;
            DenseMatrix b = dense_B(tp);
            CounterRng rng(seed, 77);
            EdgeVector v(static_cast<std::size_t>(tp.size()));
            for (auto& x : v) x = rng.normal();
            EdgeVector fast = apply_B(tp, v);
            std::vector<double> slow = matvec(b, v);
            double nrm = 0;
            for (double x : slow) nrm += x * x;
            nrm = std::max(std::sqrt(nrm), 1e-300);
            for (std::size_t i = 0; i < fast.size(); ++i)
                worst_apply = std::max(worst_apply, std::abs(fast[i] - slow[i]) / nrm);
        }

        std::vector<cdouble> dense = oracle::dense_spectrum(tp);
        double scale = std::abs(dense[0]);
        if (spec_checked < 20 && scale > 1e-6 && std::abs(dense[4]) >= 0.05 * scale) {
            ++spec_checked;
            ArnoldiOptions opts;
            opts.k = 5;
            opts.krylov_dim = 64;
            opts.tol = 1e-10;
            opts.seed = seed;
            ApplyFn op = [&tp](const std::vector<double>& in, std::vector<double>& out) {
                out = apply_B(tp, in);
            };
            ArnoldiResult res = arnoldi_topk(op, tp.size(), opts);
            for (std::size_t i = 0; i < std::min<std::size_t>(5, res.pairs.size()); ++i) {
                double best = 1e300;
                for (const cdouble& ref : dense)
                    best = std::min(best, std::abs(res.pairs[i].lambda - ref));
                worst_eig = std::max(worst_eig, best / scale);
                worst_eig = std::max(
                    worst_eig, std::abs(std::abs(res.pairs[i].lambda) - std::abs(dense[i])) / scale);
            }
        }
    }

    for (std::uint64_t seed = 1; gamma_checked < 20; ++seed) {
        index_t r = 1 + index_t(seed % 3);
        std::vector<double> nu;
        for (index_t i = 0; i < r; ++i) nu.push_back(2.0 - 0.5 * double(i));
        GroundTruth gt = gen_rank_r(20 + index_t(seed % 10), 100, r, nu,
                                    VectorMode::kRandomOrthonormal, seed);
        ++gamma_checked;
        index_t t = 2 + index_t(seed % 3);
        double d = 2.0 + 0.4 * double(seed % 4);
        for (index_t i = 0; i < r; ++i)
            for (index_t j = 0; j < r; ++j) {
                GammaMatrix g = compute_gamma_matrix(gt, d, t, {i, j});
                double brute = oracle::brute_gamma(gt, d, t, i, j);
                worst_gamma =
                    std::max(worst_gamma, std::abs(g.values(0, 1) - brute) /
                                              std::max(1.0, std::abs(brute)));
            }
    }

    bool ok = dense_checked >= 20 && spec_checked >= 20 && gamma_checked >= 20 &&
              worst_apply <= 1e-12 && worst_eig <= 1e-8 && worst_gamma <= 1e-10;
    c.pass = ok;
    std::ostringstream d;
    d << "apply_B vs dense_B rel " << worst_apply << " (<=1e-12, " << dense_checked
      << " instances); arnoldi vs dense top-5 rel " << worst_eig << " (<=1e-8, " << spec_checked
      << " instances); gamma vs brute rel " << worst_gamma << " (<=1e-10, " << gamma_checked
      << " instances)";
    c.detail = d.str();
}

// ---- criterion 3: singular value recovery ---------------------------------

void criterion_3(Criterion& c) {
    std::vector<double> lam_err;
    int good_gap = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        PipelineResult r = run_pipeline(homogeneous_config(16.0, seed), seed, 16.0);
        double l1 = r.pairs.empty() ? 0.0 : std::abs(r.pairs[0].lambda);
        lam_err.push_back(std::abs(r.pairs[0].lambda.real() - 1.0));
        if (r.params.r0 == 1 && r.summary.bulk_radius_known && r.pairs.size() >= 2) {
            double ratio = std::abs(r.pairs[1].lambda) / l1;
            if (ratio <= 0.5) ++good_gap;
        }
    }
    double med = median(lam_err);
    c.pass = med <= 0.15 && good_gap >= 8;
    std::ostringstream d;
    d << "median |lambda_1 - 1| = " << med << " (<= 0.15); gap |l2|/|l1| <= 0.5 in " << good_gap
      << "/10 seeds (need >= 8)";
    c.detail = d.str();
}

// ---- criterion 4: eigenvector overlap -------------------------------------

void criterion_4(Criterion& c) {
    std::vector<double> base_overlap;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        PipelineResult r = run_pipeline(homogeneous_config(16.0, seed), seed, 16.0);
        base_overlap.push_back(r.report.scores.empty() ? 0.0 : r.report.scores[0].overlap_R);
    }
    double base_med = median(base_overlap);

    std::ostringstream d;
    d << "median overlap at d=16: " << base_med << " (>= 0.9)";
    bool ok = base_med >= 0.9;
    for (double dd : {2.0, 4.0, 8.0, 16.0}) {
        std::vector<double> ov;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            PipelineResult r = run_pipeline(homogeneous_config(dd, seed), seed, dd);
            ov.push_back(r.report.scores.empty() ? 0.0 : r.report.scores[0].overlap_R);
        }
        double med = median(ov);
        double predicted = std::sqrt(1.0 - 1.0 / (dd * dd));
        d << "; d=" << dd << ": median " << med << " vs sqrt(1-d^-2) = " << predicted;
        if (dd >= 4.0) {
            bool within = std::abs(med - predicted) <= 0.1;
            ok = ok && within;
            d << (within ? " [ok]" : " [OUT]");
        }
    }
    c.pass = ok;
    c.detail = d.str();
}

// ---- criterion 5: threshold behavior --------------------------------------

void criterion_5(Criterion& c) {
    std::vector<double> low, high;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        PipelineResult rl = run_pipeline(homogeneous_config(1.2, seed), seed, 1.2);
        low.push_back(rl.report.scores.empty() ? 0.0 : rl.report.scores[0].overlap_R);
        PipelineResult rh = run_pipeline(homogeneous_config(8.0, seed), seed, 8.0);
        high.push_back(rh.report.scores.empty() ? 0.0 : rh.report.scores[0].overlap_R);
    }
    double med_low = median(low), med_high = median(high);
    c.pass = med_low <= med_high - 0.2;
    std::ostringstream d;
    d << "median overlap d=1.2: " << med_low << ", d=8: " << med_high
      << " (need low <= high - 0.2)";
    c.detail = d.str();
}

// ---- criterion 6: tree-functional means -----------------------------------

void criterion_6(Criterion& c) {
    GroundTruth gt = gen_rank_r(50, 2500, 2, {2.0, 1.0}, VectorMode::kRandomOrthonormal, 41);
    const double d = 2.0;
    const index_t trials = 10000;
    const index_t root = 5;
    double worst_z = 0.0;
    bool ok = true;
    std::ostringstream detail;

    for (index_t i = 0; i < 2; ++i) {
        for (index_t t = 0; t <= 2; ++t) {
            std::vector<double> vals =
                oracle::mc_tree_functional(gt, d, i, t, root, trials, 100 + 10 * i + t);
            KahanSum sum, sq;
            for (double v : vals) {
                sum.add(v);
                sq.add(v * v);
            }
            double mean = sum.value() / double(trials);
            double var = sq.value() / double(trials) - mean * mean;
            double se = std::sqrt(std::max(var, 0.0) / double(trials));
            double expect =
                std::pow(gt.nu[std::size_t(i)], 2.0 * double(t)) * gt.phi[std::size_t(i)][std::size_t(root)];
            double z = se > 0 ? std::abs(mean - expect) / se : 0.0;
            worst_z = std::max(worst_z, z);
            ok = ok && (z <= 3.0 || std::abs(mean - expect) < 1e-12);
        }
    }
    for (auto [i, j] : {std::pair<index_t, index_t>{0, 0}, {0, 1}, {1, 1}}) {
        for (index_t t = 0; t <= 2; ++t) {
            auto pairs =
                oracle::mc_tree_functional_pair(gt, d, i, j, t, root, trials, 200 + 10 * i + j + t);
            KahanSum sum, sq;
            for (auto [a, b] : pairs) {
                sum.add(a * b);
                sq.add(a * b * a * b);
            }
            double mean = sum.value() / double(trials);
            double var = sq.value() / double(trials) - mean * mean;
            double se = std::sqrt(std::max(var, 0.0) / double(trials));
            double expect = oracle::expected_functional_product(gt, d, t, i, j, root);
            double z = se > 0 ? std::abs(mean - expect) / se : 0.0;
            worst_z = std::max(worst_z, z);
            ok = ok && (z <= 3.0 || std::abs(mean - expect) < 1e-12);
        }
    }
    c.pass = ok;
    detail << "15 moment checks (t in {0,1,2}, first and second moments), worst |z| = " << worst_z
           << " (<= 3 standard errors, " << trials << " samples)";
    c.detail = detail.str();
}

// ---- criterion 7: spectral-structure grams --------------------------------

void criterion_7(Criterion& c) {
    std::vector<double> dev_uu, dev_uuh;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        GroundTruth gt = gen_rank_r(2000, 4000000, 1, {1.0}, VectorMode::kUniformSign, seed);
        SampleSpec spec;
        spec.d = 8.0;
        spec.seed = seed;
        ObservedMatrix obs = sample_observed(gt, spec);
        TwoPathSet tp = paths_of(obs);
        ModelParams p = compute_params(gt, 8.0);
        p.ell = 2;
        oracle::PseudoEigenReport rep = oracle::pseudo_eigen_grams(tp, gt, p);
        dev_uu.push_back(rep.dev_uu);
        dev_uuh.push_back(rep.dev_uuh);
    }
    double med_uu = median(dev_uu), med_uuh = median(dev_uuh);
    c.pass = med_uu <= 0.2 && med_uuh <= 0.2;
    std::ostringstream d;
    d << "median rel dev: U^T U vs d^2 Gamma^(l) = " << med_uu << ", U^T Uhat vs I = " << med_uuh
      << " (both <= 0.2, n=2000, d=8, ell=2, 10 seeds)";
    c.detail = d.str();
}

// ---- criterion 8: parameter inequalities ----------------------------------

void criterion_8(Criterion& c) {
    index_t violations = 0;
    int count = 0;
    for (std::uint64_t seed = 1; count < 1000; ++seed) {
        index_t pick = index_t(seed % 4);
        GroundTruth gt;
        try {
            switch (pick) {
                case 0:
                    gt = gen_rank_r(16 + 4 * index_t(seed % 5), 64 + 4 * index_t(seed % 20), 1,
                                    {1.0 + 0.1 * double(seed % 10)}, VectorMode::kUniformSign, seed);
                    break;
                case 1:
                    gt = gen_rank_r(16, 64, 2, {2.0, 1.0}, VectorMode::kUniformSign, seed);
                    break;
                case 2: {
                    index_t r = 1 + index_t(seed % 3);
                    std::vector<double> nu = {3.0, 2.0, 1.0};
                    nu.resize(std::size_t(r));
                    gt = gen_rank_r(12 + index_t(seed % 20), 50 + index_t(seed % 100), r, nu,
                                    VectorMode::kRandomOrthonormal, seed);
                    break;
                }
                default:
                    gt = gen_rank_r(25 + index_t(seed % 15), 60 + index_t(seed % 60), 1, {1.0},
                                    VectorMode::kLocalized, seed, 1.5 + 0.2 * double(seed % 8));
                    break;
            }
        } catch (const invalid_input&) {
            continue;  // infeasible corner of the parameter draw
        }
        ++count;
        double d = 1.5 + 0.25 * double(seed % 10);
        ModelParams p = compute_params(gt, d);
        InequalityReport rep = check_parameter_inequalities(p, gt);
        if (!rep.all_hold) ++violations;
    }
    c.pass = violations == 0;
    std::ostringstream d;
    d << violations << " violations across " << count << " generated instances (need 0)";
    c.detail = d.str();
}

// ---- criterion 9: determinism ---------------------------------------------

std::string file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool dirs_identical(const std::string& a, const std::string& b, std::string& why) {
    namespace fs = std::filesystem;
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    for (const std::string& f : names) {
        if (!fs::exists(fs::path(b) / f)) {
            why = f + " missing in second run";
            return false;
        }
        if (file_bytes(fs::path(a) / f) != file_bytes(fs::path(b) / f)) {
            why = f + " differs between runs";
            return false;
        }
    }
    return true;
}

void criterion_9(Criterion& c) {
    namespace fs = std::filesystem;
    std::ostringstream detail;
    bool ok = true;

    RunConfig base;
    base.n = 64;
    base.m = 4096;
    base.r = 1;
    base.nu = {1.0};
    base.vector_mode = "uniform-sign";
    base.seed = 3;
    base.d = 6.0;
    base.k = 3;
    base.trials = 2000;

    // an observed file for the estimate mode
    fs::remove_all("acc9");
    fs::create_directories("acc9");
    {
        GroundTruth gt = gen_rank_r(64, 4096, 1, {1.0}, VectorMode::kUniformSign, 3);
        SampleSpec spec;
        spec.d = 6.0;
        spec.seed = 3;
        write_observed_file("acc9/observed.txt", sample_observed(gt, spec));
    }

    struct ModeSetup {
        std::string mode;
        std::function<void(RunConfig&)> tweak;
    };
    std::vector<ModeSetup> modes = {
        {"synth-run", [](RunConfig&) {}},
        {"sweep-d",
         [](RunConfig& cfg) {
             cfg.d_list = {4.0, 6.0};
             cfg.seeds = {1, 2};
         }},
        {"compare-svd", [](RunConfig&) {}},
        {"gw-check", [](RunConfig&) {}},
        {"estimate", [](RunConfig& cfg) { cfg.observed_path = "acc9/observed.txt"; }},
    };
    for (const ModeSetup& ms : modes) {
        for (int rep = 0; rep < 2; ++rep) {
            RunConfig cfg = base;
            cfg.mode = ms.mode;
            ms.tweak(cfg);
            cfg.out_dir = "acc9/" + ms.mode + "_" + std::to_string(rep);
            std::ostringstream log;
            int rc = run(cfg, log);
            if (rc != kExitOk && rc != kExitSolverWarning) {
                ok = false;
                detail << ms.mode << " exited " << rc << "; ";
            }
        }
        std::string why;
        if (!dirs_identical("acc9/" + ms.mode + "_0", "acc9/" + ms.mode + "_1", why)) {
            ok = false;
            detail << ms.mode << ": " << why << "; ";
        } else {
            detail << ms.mode << " byte-identical; ";
        }
    }
    fs::remove_all("acc9");
    c.pass = ok;
    c.detail = detail.str();
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<Criterion> criteria = {
        {1, "exact operator identities (B = TS_d - J_d, parity-time) at 1e-12", 10.0},
        {2, "oracle equivalence (dense_B, dense spectrum, brute gamma)", 60.0},
        {3, "singular-value recovery (lambda_1 vs nu_1^2, outlier gap)", 300.0},
        {4, "eigenvector overlap vs sqrt(1 - d^-2)", 900.0},
        {5, "threshold behavior at d = 1.2", 300.0},
        {6, "tree-functional Monte Carlo means", 120.0},
        {7, "spectral-structure grams of B^ell", 600.0},
        {8, "parameter inequalities on 1000 instances", 30.0},
        {9, "determinism of all modes", 600.0},
    };
    int only = argc > 1 ? std::atoi(argv[1]) : 0;

    int failures = 0;
    for (Criterion& c : criteria) {
        if (only != 0 && c.id != only) continue;
        auto t0 = std::chrono::steady_clock::now();
        try {
            switch (c.id) {
                case 1: criterion_1(c); break;
                case 2: criterion_2(c); break;
                case 3: criterion_3(c); break;
                case 4: criterion_4(c); break;
                case 5: criterion_5(c); break;
                case 6: criterion_6(c); break;
                case 7: criterion_7(c); break;
                case 8: criterion_8(c); break;
                case 9: criterion_9(c); break;
            }
        } catch (const std::exception& e) {
            c.pass = false;
            c.detail = std::string("exception: ") + e.what();
        }
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (elapsed > c.time_limit_s) {
            c.pass = false;
            c.detail += " [OVER TIME LIMIT]";
        }
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << "criterion " << c.id << ": " << c.title
                  << " -- " << c.detail << " (" << elapsed << " s, limit " << c.time_limit_s
                  << ")\n";
        if (!c.pass) ++failures;
    }
    return failures;
}
