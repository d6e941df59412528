#include "longnbt/dense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace longnbt {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();

inline double sign_of(double magnitude, double sign_source) {
    return sign_source >= 0.0 ? std::abs(magnitude) : -std::abs(magnitude);
}
}  // namespace

DenseMatrix DenseMatrix::transposed() const {
    DenseMatrix t(cols_, rows_);
    for (index_t i = 0; i < rows_; ++i)
        for (index_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

double DenseMatrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double DenseMatrix::max_abs() const {
    double s = 0.0;
    for (double v : data_) s = std::max(s, std::abs(v));
    return s;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw error("matmul: dimension mismatch");
    DenseMatrix c(a.rows(), b.cols());
    for (index_t i = 0; i < a.rows(); ++i) {
        for (index_t k = 0; k < a.cols(); ++k) {
            double aik = a(i, k);
            if (aik == 0.0) continue;
            for (index_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

std::vector<double> matvec(const DenseMatrix& a, const std::vector<double>& x) {
    if (index_t(x.size()) != a.cols()) throw error("matvec: dimension mismatch");
    std::vector<double> y(static_cast<std::size_t>(a.rows()), 0.0);
    for (index_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (index_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[std::size_t(j)];
        y[std::size_t(i)] = s;
    }
    return y;
}

std::vector<double> lu_solve(DenseMatrix a, std::vector<double> b) {
    const index_t n = a.rows();
    if (a.cols() != n || index_t(b.size()) != n) throw error("lu_solve: dimension mismatch");
    std::vector<index_t> perm(static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i) perm[std::size_t(i)] = i;

    for (index_t k = 0; k < n; ++k) {
        index_t piv = k;
        double best = std::abs(a(k, k));
        for (index_t i = k + 1; i < n; ++i) {
            double m = std::abs(a(i, k));
            if (m > best) {
                best = m;
                piv = i;
            }
        }
        if (best == 0.0) throw error("lu_solve: singular matrix");
        if (piv != k) {
            for (index_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(b[std::size_t(k)], b[std::size_t(piv)]);
        }
        for (index_t i = k + 1; i < n; ++i) {
            double f = a(i, k) / a(k, k);
            a(i, k) = f;
            for (index_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
            b[std::size_t(i)] -= f * b[std::size_t(k)];
        }
    }
    for (index_t i = n - 1; i >= 0; --i) {
        double s = b[std::size_t(i)];
        for (index_t j = i + 1; j < n; ++j) s -= a(i, j) * b[std::size_t(j)];
        b[std::size_t(i)] = s / a(i, i);
    }
    return b;
}

namespace {

// Householder reduction to upper Hessenberg form, in place.
void reduce_to_hessenberg(DenseMatrix& a) {
    const index_t n = a.rows();
    std::vector<double> v(static_cast<std::size_t>(n));
    for (index_t k = 0; k + 2 < n; ++k) {
        double scale = 0.0;
        for (index_t i = k + 1; i < n; ++i) scale += std::abs(a(i, k));
        if (scale == 0.0) continue;
        double norm2 = 0.0;
        for (index_t i = k + 1; i < n; ++i) {
            v[std::size_t(i)] = a(i, k) / scale;
            norm2 += v[std::size_t(i)] * v[std::size_t(i)];
        }
        double alpha = -sign_of(std::sqrt(norm2), v[std::size_t(k + 1)]);
        double beta = norm2 - alpha * v[std::size_t(k + 1)];
        if (beta == 0.0) continue;
        v[std::size_t(k + 1)] -= alpha;

        // left: A <- (I - v v^T / beta) A on rows k+1.., all columns
        for (index_t j = k; j < n; ++j) {
            double s = 0.0;
            for (index_t i = k + 1; i < n; ++i) s += v[std::size_t(i)] * a(i, j);
            s /= beta;
            for (index_t i = k + 1; i < n; ++i) a(i, j) -= s * v[std::size_t(i)];
        }
        // right: A <- A (I - v v^T / beta) on columns k+1.., all rows
        for (index_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (index_t j = k + 1; j < n; ++j) s += a(i, j) * v[std::size_t(j)];
            s /= beta;
            for (index_t j = k + 1; j < n; ++j) a(i, j) -= s * v[std::size_t(j)];
        }
        a(k + 1, k) = alpha * scale;
        for (index_t i = k + 2; i < n; ++i) a(i, k) = 0.0;
    }
}

}  // namespace

// Francis double-shift QR on an upper Hessenberg matrix (classical
// EISPACK hqr scheme, eigenvalues only).
std::vector<cdouble> hessenberg_eigenvalues(DenseMatrix h) {
    const index_t n = h.rows();
    if (h.cols() != n) throw error("hessenberg_eigenvalues: not square");
    std::vector<cdouble> eigs;
    eigs.reserve(std::size_t(n));
    if (n == 0) return eigs;

    double anorm = 0.0;
    for (index_t i = 0; i < n; ++i)
        for (index_t j = std::max<index_t>(i - 1, 0); j < n; ++j) anorm += std::abs(h(i, j));
    if (anorm == 0.0) {
        eigs.assign(std::size_t(n), cdouble(0.0, 0.0));
        return eigs;
    }

    index_t hi = n - 1;
    double shift_total = 0.0;
    double p = 0, q = 0, r = 0, x = 0, y = 0, z = 0, w = 0;
    while (hi >= 0) {
        int its = 0;
        for (;;) {
            index_t lo = hi;
            while (lo > 0) {
                double s = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
                // a neighborhood whose scale collapsed relative to the matrix
                // sits in the numerical-zero cluster; deflate it against the
                // global scale or nilpotent blocks never converge
                if (s < 1e-13 * anorm) s = anorm;
                if (std::abs(h(lo, lo - 1)) <= kEps * s) {
                    h(lo, lo - 1) = 0.0;
                    break;
                }
                --lo;
            }
            x = h(hi, hi);
            if (lo == hi) {
                eigs.emplace_back(x + shift_total, 0.0);
                --hi;
                break;
            }
            y = h(hi - 1, hi - 1);
            w = h(hi, hi - 1) * h(hi - 1, hi);
            if (lo == hi - 1) {
                p = 0.5 * (y - x);
                q = p * p + w;
                z = std::sqrt(std::abs(q));
                x += shift_total;
                if (q >= 0.0) {
                    z = p + sign_of(z, p);
                    eigs.emplace_back(x + z, 0.0);
                    eigs.emplace_back(z != 0.0 ? x - w / z : x + z, 0.0);
                } else {
                    eigs.emplace_back(x + p, z);
                    eigs.emplace_back(x + p, -z);
                }
                hi -= 2;
                break;
            }
            if (its == 240) throw error("hessenberg_eigenvalues: QR iteration did not converge");
            if (its > 0 && its % 10 == 0) {
                // exceptional shift; equal-modulus clusters (permutation-like
                // blocks of B) can cycle, so the constants alternate
                shift_total += x;
                for (index_t i = 0; i <= hi; ++i) h(i, i) -= x;
                double s = std::abs(h(hi, hi - 1)) + std::abs(h(hi - 1, hi - 2));
                if ((its / 10) % 2 == 1) {
                    y = x = 0.75 * s;
                    w = -0.4375 * s * s;
                } else {
                    y = x = 1.35 * s;
                    w = -0.2 * s * s;
                }
            }
            ++its;

            index_t m = hi - 2;
            for (; m >= lo; --m) {
                z = h(m, m);
                r = x - z;
                double s = y - z;
                p = (r * s - w) / h(m + 1, m) + h(m, m + 1);
                q = h(m + 1, m + 1) - z - r - s;
                r = h(m + 2, m + 1);
                double scale = std::abs(p) + std::abs(q) + std::abs(r);
                p /= scale;
                q /= scale;
                r /= scale;
                if (m == lo) break;
                double u = std::abs(h(m, m - 1)) * (std::abs(q) + std::abs(r));
                double v = std::abs(p) *
                           (std::abs(h(m - 1, m - 1)) + std::abs(z) + std::abs(h(m + 1, m + 1)));
                if (u <= kEps * v) break;
            }
            for (index_t i = m + 2; i <= hi; ++i) {
                h(i, i - 2) = 0.0;
                if (i != m + 2) h(i, i - 3) = 0.0;
            }

            // double QR sweep over rows lo..hi, columns m..hi
            for (index_t k = m; k <= hi - 1; ++k) {
                if (k != m) {
                    p = h(k, k - 1);
                    q = h(k + 1, k - 1);
                    r = (k != hi - 1) ? h(k + 2, k - 1) : 0.0;
                    x = std::abs(p) + std::abs(q) + std::abs(r);
                    if (x != 0.0) {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                double s = sign_of(std::sqrt(p * p + q * q + r * r), p);
                if (s == 0.0) continue;
                if (k == m) {
                    if (lo != m) h(k, k - 1) = -h(k, k - 1);
                } else {
                    h(k, k - 1) = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;
                for (index_t j = k; j <= hi; ++j) {
                    double pp = h(k, j) + q * h(k + 1, j);
                    if (k != hi - 1) {
                        pp += r * h(k + 2, j);
                        h(k + 2, j) -= pp * z;
                    }
                    h(k + 1, j) -= pp * y;
                    h(k, j) -= pp * x;
                }
                index_t imax = std::min(hi, k + 3);
                for (index_t i = lo; i <= imax; ++i) {
                    double pp = x * h(i, k) + y * h(i, k + 1);
                    if (k != hi - 1) {
                        pp += z * h(i, k + 2);
                        h(i, k + 2) -= pp * r;
                    }
                    h(i, k + 1) -= pp * q;
                    h(i, k) -= pp;
                }
            }
        }
    }
    return eigs;
}

std::vector<cdouble> dense_eigenvalues(DenseMatrix a) {
    if (a.cols() != a.rows()) throw error("dense_eigenvalues: not square");
    reduce_to_hessenberg(a);
    return hessenberg_eigenvalues(std::move(a));
}

std::vector<cdouble> hessenberg_eigenvector(const DenseMatrix& h, cdouble lambda,
                                            int start_index) {
    const index_t n = h.rows();
    if (n == 0) return {};
    double hnorm = h.max_abs();
    if (hnorm == 0.0) hnorm = 1.0;
    const double pivot_floor = kEps * hnorm * double(n);

    // (H - lambda I) as a complex Hessenberg band; LU with partial pivoting
    // uses only adjacent-row swaps so the band stays intact.
    std::vector<cdouble> mat(static_cast<std::size_t>(n * n), cdouble(0.0, 0.0));
    auto at = [&](index_t i, index_t j) -> cdouble& { return mat[std::size_t(i * n + j)]; };
    for (index_t i = 0; i < n; ++i)
        for (index_t j = std::max<index_t>(i - 1, 0); j < n; ++j) at(i, j) = h(i, j);
    for (index_t i = 0; i < n; ++i) at(i, i) -= lambda;

    std::vector<cdouble> sub(std::size_t(n), cdouble(0.0, 0.0));  // multipliers
    std::vector<bool> swapped(static_cast<std::size_t>(n), false);
    for (index_t k = 0; k + 1 < n; ++k) {
        if (std::abs(at(k + 1, k)) > std::abs(at(k, k))) {
            swapped[std::size_t(k)] = true;
            for (index_t j = k; j < n; ++j) std::swap(at(k, j), at(k + 1, j));
        }
        if (std::abs(at(k, k)) < pivot_floor) at(k, k) = cdouble(pivot_floor, 0.0);
        cdouble f = at(k + 1, k) / at(k, k);
        sub[std::size_t(k)] = f;
        at(k + 1, k) = cdouble(0.0, 0.0);
        for (index_t j = k + 1; j < n; ++j) at(k + 1, j) -= f * at(k, j);
    }
    if (std::abs(at(n - 1, n - 1)) < pivot_floor) at(n - 1, n - 1) = cdouble(pivot_floor, 0.0);

    std::vector<cdouble> v(static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i)
        v[std::size_t(i)] = cdouble(1.0 / double(1 + (i + start_index) % n), 0.0);

    for (int iter = 0; iter < 3; ++iter) {
        // forward substitution replaying the pivot pattern
        for (index_t k = 0; k + 1 < n; ++k) {
            if (swapped[std::size_t(k)]) std::swap(v[std::size_t(k)], v[std::size_t(k + 1)]);
            v[std::size_t(k + 1)] -= sub[std::size_t(k)] * v[std::size_t(k)];
        }
        for (index_t i = n - 1; i >= 0; --i) {
            cdouble s = v[std::size_t(i)];
            for (index_t j = i + 1; j < n; ++j) s -= at(i, j) * v[std::size_t(j)];
            v[std::size_t(i)] = s / at(i, i);
        }
        double norm = 0.0;
        for (auto& c : v) norm += std::norm(c);
        norm = std::sqrt(norm);
        if (norm == 0.0) return v;
        for (auto& c : v) c /= norm;
    }
    // deterministic phase: largest-modulus entry made real positive
    index_t imax = 0;
    double best = 0.0;
    for (index_t i = 0; i < n; ++i) {
        double m = std::abs(v[std::size_t(i)]);
        if (m > best) {
            best = m;
            imax = i;
        }
    }
    if (best > 0.0) {
        cdouble phase = std::conj(v[std::size_t(imax)]) / best;
        for (auto& c : v) c *= phase;
    }
    return v;
}

SymmetricEigen symmetric_eigen(DenseMatrix a) {
    const index_t n = a.rows();
    if (a.cols() != n) throw error("symmetric_eigen: not square");
    for (index_t i = 0; i < n; ++i)
        for (index_t j = i + 1; j < n; ++j) {
            double avg = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = a(j, i) = avg;
        }
    DenseMatrix v = DenseMatrix::identity(n);

    auto off_norm = [&]() {
        double s = 0.0;
        for (index_t i = 0; i < n; ++i)
            for (index_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
        return std::sqrt(2.0 * s);
    };
    double scale = a.frobenius_norm();
    if (scale == 0.0) scale = 1.0;

    for (int sweep = 0; sweep < 100 && off_norm() > 1e-14 * scale; ++sweep) {
        for (index_t p = 0; p < n; ++p) {
            for (index_t q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                double theta = 0.5 * (a(q, q) - a(p, p)) / apq;
                double t = sign_of(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (index_t k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (index_t k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (index_t k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<index_t> order(static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i) order[std::size_t(i)] = i;
    std::sort(order.begin(), order.end(), [&](index_t i, index_t j) { return a(i, i) > a(j, j); });

    SymmetricEigen out;
    out.values.resize(std::size_t(n));
    out.vectors.assign(std::size_t(n), std::vector<double>(std::size_t(n)));
    for (index_t i = 0; i < n; ++i) {
        index_t src = order[std::size_t(i)];
        out.values[std::size_t(i)] = a(src, src);
        for (index_t k = 0; k < n; ++k) out.vectors[std::size_t(i)][std::size_t(k)] = v(k, src);
    }
    return out;
}

DenseSvd dense_svd(const DenseMatrix& a, index_t max_rank) {
    const index_t n = a.rows();
    const index_t m = a.cols();
    DenseMatrix gram(n, n);
    for (index_t i = 0; i < n; ++i)
        for (index_t j = i; j < n; ++j) {
            double s = 0.0;
            for (index_t k = 0; k < m; ++k) s += a(i, k) * a(j, k);
            gram(i, j) = gram(j, i) = s;
        }
    SymmetricEigen eig = symmetric_eigen(std::move(gram));

    index_t want = (max_rank < 0) ? n : std::min(max_rank, n);
    DenseSvd out;
    for (index_t i = 0; i < want; ++i) {
        double sv = std::sqrt(std::max(eig.values[std::size_t(i)], 0.0));
        out.singular_values.push_back(sv);
        out.left.push_back(eig.vectors[std::size_t(i)]);
        std::vector<double> psi(static_cast<std::size_t>(m), 0.0);
        if (sv > 0.0) {
            for (index_t k = 0; k < m; ++k) {
                double s = 0.0;
                for (index_t j = 0; j < n; ++j)
                    s += a(j, k) * eig.vectors[std::size_t(i)][std::size_t(j)];
                psi[std::size_t(k)] = s / sv;
            }
        }
        out.right.push_back(std::move(psi));
    }
    return out;
}

}  // namespace longnbt
