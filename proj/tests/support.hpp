#pragma once

// shared helpers for the unit suites

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "longnbt/dense.hpp"
#include "longnbt/observed.hpp"
#include "longnbt/rng.hpp"

namespace testsupport {

// test-local Bernoulli sampler, independent of the synth module
inline longnbt::ObservedMatrix bernoulli_instance(longnbt::index_t n, longnbt::index_t m, double d,
                                                  std::uint64_t seed, bool signed_values = false) {
    double p = d / std::sqrt(double(n) * double(m));
    std::vector<longnbt::RawEntry> raw;
    for (longnbt::index_t x = 0; x < n; ++x) {
        longnbt::CounterRng rng(seed, 1000 + std::uint64_t(x));
        longnbt::index_t k = rng.binomial(m, p);
        for (longnbt::index_t y : rng.sample_without_replacement(m, k)) {
            double v = 1.0 + 0.1 * double((x + y) % 7);
            if (signed_values && ((x * 31 + y) % 3 == 0)) v = -v;
            raw.push_back({x, y, v});
        }
    }
    return longnbt::ingest(n, m, d, std::move(raw), false);
}

inline longnbt::DenseMatrix random_matrix(longnbt::index_t n, longnbt::index_t m,
                                          std::uint64_t seed) {
    longnbt::CounterRng rng(seed, 0xDEADBEEF);
    longnbt::DenseMatrix a(n, m);
    for (longnbt::index_t i = 0; i < n; ++i)
        for (longnbt::index_t j = 0; j < m; ++j) a(i, j) = rng.normal();
    return a;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    longnbt::CounterRng rng(seed, 0xFEEDFACE);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

// multiset comparison of complex spectra after canonical sorting
inline double spectrum_distance(std::vector<std::complex<double>> a,
                                std::vector<std::complex<double>> b) {
    auto key = [](const std::complex<double>& x, const std::complex<double>& y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    };
    std::sort(a.begin(), a.end(), key);
    std::sort(b.begin(), b.end(), key);
    if (a.size() != b.size()) return 1e300;
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

inline double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

}  // namespace testsupport
