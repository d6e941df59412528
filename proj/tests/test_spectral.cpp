#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "longnbt/spectral.hpp"
#include "longnbt/two_paths.hpp"
#include "support.hpp"

using namespace longnbt;
using testsupport::bernoulli_instance;

namespace {

TwoPathSet make_paths(const ObservedMatrix& obs) {
    return enumerate_two_paths(prune_degree_one(build_graph(obs)), obs);
}

ApplyFn operator_of(const TwoPathSet& tp) {
    return [&tp](const std::vector<double>& in, std::vector<double>& out) { out = apply_B(tp, in); };
}

ApplyFn transpose_of(const TwoPathSet& tp) {
    return [&tp](const std::vector<double>& in, std::vector<double>& out) {
        out = apply_B_transpose(tp, in);
    };
}

ApplyFn dense_operator(const DenseMatrix& a) {
    return [&a](const std::vector<double>& in, std::vector<double>& out) { out = matvec(a, in); };
}

}  // namespace

TEST_CASE("arnoldi on a diagonal operator") {
    DenseMatrix d(3, 3);
    d(0, 0) = 3.0;
    d(1, 1) = 2.0;
    d(2, 2) = 1.0;
    ArnoldiOptions opts;
    opts.k = 1;
    opts.seed = 4;
    ArnoldiResult res = arnoldi_topk(dense_operator(d), 3, opts);
    REQUIRE(res.pairs.size() >= 1);
    CHECK(std::abs(res.pairs[0].lambda - cdouble(3.0, 0.0)) < 1e-8);
    CHECK(res.pairs[0].converged);
    CHECK(res.pairs[0].residual <= opts.tol * 3.0);
}

TEST_CASE("arnoldi handles dim = 0 and the zero operator") {
    ArnoldiOptions opts;
    opts.k = 2;
    CHECK(arnoldi_topk(dense_operator(DenseMatrix(0, 0)), 0, opts).pairs.empty());

    DenseMatrix z(5, 5);
    ArnoldiResult res = arnoldi_topk(dense_operator(z), 5, opts);
    REQUIRE(!res.pairs.empty());
    CHECK(res.invariant_subspace);
    for (const auto& p : res.pairs) CHECK(std::abs(p.lambda) < 1e-12);
}

TEST_CASE("arnoldi recovers the 4-cycle spectrum exactly") {
    ObservedMatrix cyc =
        ingest(2, 2, 1.4, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}}, true);
    TwoPathSet tp = make_paths(cyc);
    ArnoldiOptions opts;
    opts.k = 4;
    opts.krylov_dim = 4;
    opts.seed = 9;
    ArnoldiResult res = arnoldi_topk(operator_of(tp), tp.size(), opts);
    REQUIRE(res.pairs.size() == 4);
    std::vector<cdouble> got;
    for (const auto& p : res.pairs) got.push_back(p.lambda);
    CHECK(testsupport::spectrum_distance(
              got, {cdouble(1, 0), cdouble(1, 0), cdouble(-1, 0), cdouble(-1, 0)}) < 1e-10);
}

TEST_CASE("arnoldi top-5 matches the dense spectrum on random instances") {
    int tested = 0;
    for (std::uint64_t seed = 1; seed <= 12 && tested < 3; ++seed) {
        ObservedMatrix obs = bernoulli_instance(40, 160, 3.0, seed, true);
        TwoPathSet tp = make_paths(obs);
        if (tp.size() < 60 || tp.size() > 500) continue;

        DenseMatrix b = dense_B(tp);
        std::vector<cdouble> dense = dense_eigenvalues(b);
        std::sort(dense.begin(), dense.end(), spectral_order);
        double scale = std::abs(dense[0]);
        if (scale < 1e-6) continue;
        // only meaningful when the top of the spectrum stands above the
        // numerical zero cluster
        if (std::abs(dense[4]) < 0.05 * scale) continue;
        ++tested;

        ArnoldiOptions opts;
        opts.k = 5;
        opts.tol = 1e-10;
        opts.seed = seed;
        ArnoldiResult res = arnoldi_topk(operator_of(tp), tp.size(), opts);
        REQUIRE(res.pairs.size() >= 5);
        for (std::size_t i = 0; i < res.pairs.size(); ++i) {
            double best = 1e300;
            for (const cdouble& ref : dense)
                best = std::min(best, std::abs(res.pairs[i].lambda - ref));
            CHECK(best < 1e-8 * scale);
        }
        // multiplicity-aware: the i-th modulus must match the dense one
        for (std::size_t i = 0; i < 5; ++i)
            CHECK(std::abs(res.pairs[i].lambda) ==
                  doctest::Approx(std::abs(dense[i])).epsilon(1e-8).scale(scale));
    }
    REQUIRE(tested >= 2);
}

TEST_CASE("conjugate closure of returned pairs") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        ObservedMatrix obs = bernoulli_instance(40, 160, 3.0, seed, true);
        TwoPathSet tp = make_paths(obs);
        if (tp.size() < 60) continue;
        ArnoldiOptions opts;
        opts.k = 5;
        opts.seed = seed + 3;
        ArnoldiResult res = arnoldi_topk(operator_of(tp), tp.size(), opts);
        for (const auto& p : res.pairs) {
            // converged pairs honor the residual contract
            if (p.converged) CHECK(p.residual <= opts.tol * std::abs(p.lambda) + 1e-13);
            if (std::abs(p.lambda.imag()) < 1e-10 * std::max(1.0, std::abs(p.lambda))) continue;
            bool found = false;
            for (const auto& q : res.pairs)
                if (std::abs(q.lambda - std::conj(p.lambda)) <
                    1e-8 * std::max(1.0, std::abs(p.lambda)))
                    found = true;
            CHECK(found);
        }
    }
}

TEST_CASE("left vectors pair with right vectors") {
    ObservedMatrix obs = bernoulli_instance(40, 160, 3.0, 4, true);
    TwoPathSet tp = make_paths(obs);
    REQUIRE(tp.size() > 60);
    ArnoldiOptions opts;
    opts.k = 3;
    opts.tol = 1e-10;
    opts.seed = 10;
    ArnoldiResult res = arnoldi_topk(operator_of(tp), tp.size(), opts);
    attach_left_vectors(res.pairs, transpose_of(tp), tp.size(), opts);
    int attached = 0;
    for (const auto& p : res.pairs) {
        if (!p.has_left) continue;
        ++attached;
        // bilinear consistency: xiL^T B xiR == lambda xiL^T xiR
        std::vector<double> rr(p.right_vec.size()), ri(p.right_vec.size());
        for (std::size_t i = 0; i < p.right_vec.size(); ++i) {
            rr[i] = p.right_vec[i].real();
            ri[i] = p.right_vec[i].imag();
        }
        EdgeVector brr = apply_B(tp, rr), bri = apply_B(tp, ri);
        cdouble lhs(0, 0), inner(0, 0);
        for (std::size_t i = 0; i < p.right_vec.size(); ++i) {
            lhs += p.left_vec[i] * cdouble(brr[i], bri[i]);
            inner += p.left_vec[i] * p.right_vec[i];
        }
        CHECK(std::abs(lhs - p.lambda * inner) <= 10 * opts.tol * std::max(1.0, std::abs(p.lambda)));
    }
    CHECK(attached >= 1);
}

TEST_CASE("classify_spectrum arithmetic") {
    std::vector<EigenPair> pairs(2);
    pairs[0].lambda = cdouble(4.0, 0.0);
    pairs[0].converged = true;
    pairs[1].lambda = cdouble(0.2, 0.0);
    pairs[1].converged = true;

    SpectrumSummary s = classify_spectrum(pairs, 1, 0.5, 1);
    REQUIRE(s.outliers.size() == 1);
    CHECK(s.outliers[0].lambda.real() == 4.0);
    CHECK(s.bulk_radius == doctest::Approx(0.2));
    CHECK(s.bulk_theta2_ratio == doctest::Approx(0.8));
    CHECK_FALSE(s.partial);

    SpectrumSummary all_bulk = classify_spectrum(pairs, 0, 0.5, 1);
    CHECK(all_bulk.outliers.empty());
    CHECK(all_bulk.bulk_radius == doctest::Approx(4.0));

    SpectrumSummary partial = classify_spectrum(pairs, 3, 0.5, 1);
    CHECK(partial.partial);
    CHECK(partial.outliers.size() == 2);
}

TEST_CASE("power_apply basics and associativity") {
    ObservedMatrix cyc =
        ingest(2, 2, 1.4, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}}, true);
    TwoPathSet tp = make_paths(cyc);
    ApplyFn op = operator_of(tp);

    std::vector<double> v = {2.0, 0.0, 0.0, 0.0};
    PowerApplyResult r0 = power_apply(op, v, 0);
    CHECK(r0.log_scale == doctest::Approx(std::log(2.0)));
    CHECK(r0.unit[0] == doctest::Approx(1.0));

    // ell = 1 equals the dense product
    DenseMatrix b = dense_B(tp);
    std::vector<double> bv = matvec(b, v);
    PowerApplyResult r1 = power_apply(op, v, 1);
    for (std::size_t i = 0; i < bv.size(); ++i)
        CHECK(r1.unit[i] * std::exp(r1.log_scale) == doctest::Approx(bv[i]).epsilon(1e-12));

    // two single steps equal one double step
    PowerApplyResult once = power_apply(op, v, 1);
    PowerApplyResult twice = power_apply(op, once.unit, 1);
    PowerApplyResult direct = power_apply(op, v, 2);
    double combined = twice.log_scale + once.log_scale;
    CHECK(combined == doctest::Approx(direct.log_scale).epsilon(1e-10));
    for (std::size_t i = 0; i < v.size(); ++i)
        CHECK(twice.unit[i] == doctest::Approx(direct.unit[i]).epsilon(1e-10));

    // zero vector sentinel
    std::vector<double> zero(4, 0.0);
    PowerApplyResult rz = power_apply(op, zero, 3);
    CHECK(std::isinf(rz.log_scale));
    CHECK(rz.log_scale < 0);
}
