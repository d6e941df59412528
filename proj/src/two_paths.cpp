#include "longnbt/two_paths.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "longnbt/rng.hpp"

namespace longnbt {

double TwoPathSet::delta_max_abs() const {
    double s = 0.0;
    for (double v : delta) s = std::max(s, std::abs(v));
    return s;
}

namespace {

struct PathRec {
    index_t e1, e2, e3;
    double delta;
};

void build_index_structure(TwoPathSet& tp) {
    const index_t np = tp.size();

    tp.starts_ptr.assign(std::size_t(tp.n + 1), 0);
    for (index_t p = 0; p < np; ++p) ++tp.starts_ptr[std::size_t(tp.e1[std::size_t(p)] + 1)];
    for (index_t x = 0; x < tp.n; ++x)
        tp.starts_ptr[std::size_t(x + 1)] += tp.starts_ptr[std::size_t(x)];

    tp.ends_ptr.assign(std::size_t(tp.n + 1), 0);
    for (index_t p = 0; p < np; ++p) ++tp.ends_ptr[std::size_t(tp.e3[std::size_t(p)] + 1)];
    for (index_t x = 0; x < tp.n; ++x) tp.ends_ptr[std::size_t(x + 1)] += tp.ends_ptr[std::size_t(x)];
    tp.ends_idx.resize(std::size_t(np));
    {
        std::vector<index_t> cursor(tp.ends_ptr.begin(), tp.ends_ptr.end() - 1);
        for (index_t p = 0; p < np; ++p)
            tp.ends_idx[std::size_t(cursor[std::size_t(tp.e3[std::size_t(p)])]++)] = p;
    }

    // wedge ids: runs of equal (e1, e2) in the sorted path array
    tp.wedge_id.resize(std::size_t(np));
    index_t wid = -1;
    index_t prev_e1 = -1, prev_e2 = -1;
    for (index_t p = 0; p < np; ++p) {
        if (tp.e1[std::size_t(p)] != prev_e1 || tp.e2[std::size_t(p)] != prev_e2) {
            ++wid;
            prev_e1 = tp.e1[std::size_t(p)];
            prev_e2 = tp.e2[std::size_t(p)];
        }
        tp.wedge_id[std::size_t(p)] = wid;
    }
    tp.num_wedges = wid + 1;

    // inverse by binary search on the sorted triples
    auto find_path = [&](index_t a, index_t b, index_t c) -> index_t {
        index_t lo = tp.starts_ptr[std::size_t(a)];
        index_t hi = tp.starts_ptr[std::size_t(a + 1)];
        while (lo < hi) {
            index_t mid = (lo + hi) / 2;
            index_t me2 = tp.e2[std::size_t(mid)];
            index_t me3 = tp.e3[std::size_t(mid)];
            if (me2 < b || (me2 == b && me3 < c))
                lo = mid + 1;
            else
                hi = mid;
        }
        if (lo >= tp.starts_ptr[std::size_t(a + 1)] || tp.e2[std::size_t(lo)] != b ||
            tp.e3[std::size_t(lo)] != c)
            throw error("two_paths: inverse path missing; enumeration is inconsistent");
        return lo;
    };
    tp.inverse.resize(std::size_t(np));
    for (index_t p = 0; p < np; ++p)
        tp.inverse[std::size_t(p)] =
            find_path(tp.e3[std::size_t(p)], tp.e2[std::size_t(p)], tp.e1[std::size_t(p)]);

    tp.excl_wedge.resize(std::size_t(np));
    for (index_t p = 0; p < np; ++p)
        tp.excl_wedge[std::size_t(p)] = tp.wedge_id[std::size_t(tp.inverse[std::size_t(p)])];
}

void validate_invariants(const TwoPathSet& tp) {
    const index_t np = tp.size();
    for (index_t p = 0; p < np; ++p) {
        if (tp.e1[std::size_t(p)] == tp.e3[std::size_t(p)])
            throw error("two_paths: path with e1 == e3");
        index_t q = tp.inverse[std::size_t(p)];
        if (q == p) throw error("two_paths: inverse has a fixed point");
        if (tp.inverse[std::size_t(q)] != p) throw error("two_paths: inverse is not an involution");
        if (tp.delta[std::size_t(p)] != tp.delta[std::size_t(q)])
            throw error("two_paths: delta not invariant under inversion");
    }
}

}  // namespace

TwoPathSet enumerate_two_paths(const PrunedGraph& pg, const ObservedMatrix& obs, index_t cap) {
    const BipartiteGraph& g = pg.g;
    index_t total = 0;
    for (index_t y = 0; y < g.m; ++y) {
        index_t dy = g.right_degree(y);
        total += dy * (dy - 1);
    }
    if (total > cap) throw size_error("enumerate_two_paths: path count exceeds cap", total);

    std::vector<PathRec> recs;
    recs.reserve(std::size_t(total));
    for (index_t y = 0; y < g.m; ++y) {
        index_t lo = g.right_ptr[std::size_t(y)];
        index_t hi = g.right_ptr[std::size_t(y + 1)];
        index_t orig_y = pg.original_right[std::size_t(y)];
        for (index_t a = lo; a < hi; ++a) {
            for (index_t b = lo; b < hi; ++b) {
                if (a == b) continue;
                recs.push_back({g.left_of[std::size_t(a)], orig_y, g.left_of[std::size_t(b)],
                                g.right_weight[std::size_t(a)] * g.right_weight[std::size_t(b)]});
            }
        }
    }
    if (index_t(recs.size()) != total) throw error("enumerate_two_paths: cardinality mismatch");
    std::sort(recs.begin(), recs.end(), [](const PathRec& a, const PathRec& b) {
        if (a.e1 != b.e1) return a.e1 < b.e1;
        if (a.e2 != b.e2) return a.e2 < b.e2;
        return a.e3 < b.e3;
    });

    TwoPathSet tp;
    tp.n = obs.n;
    tp.m = obs.m;
    tp.e1.resize(recs.size());
    tp.e2.resize(recs.size());
    tp.e3.resize(recs.size());
    tp.delta.resize(recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        tp.e1[i] = recs[i].e1;
        tp.e2[i] = recs[i].e2;
        tp.e3[i] = recs[i].e3;
        tp.delta[i] = recs[i].delta;
    }
    build_index_structure(tp);
    validate_invariants(tp);
    return tp;
}

EdgeVector apply_B(const TwoPathSet& tp, const EdgeVector& v) {
    const index_t np = tp.size();
    if (index_t(v.size()) != np) throw error("apply_B: dimension mismatch");
    std::vector<double> start_sum(static_cast<std::size_t>(tp.n), 0.0);
    std::vector<double> wedge_sum(static_cast<std::size_t>(tp.num_wedges), 0.0);
    // ascending path index within each bucket (CSR order) for determinism
    for (index_t p = 0; p < np; ++p) {
        double dv = tp.delta[std::size_t(p)] * v[std::size_t(p)];
        start_sum[std::size_t(tp.e1[std::size_t(p)])] += dv;
        wedge_sum[std::size_t(tp.wedge_id[std::size_t(p)])] += dv;
    }
    EdgeVector out(static_cast<std::size_t>(np));
    for (index_t p = 0; p < np; ++p)
        out[std::size_t(p)] = start_sum[std::size_t(tp.e3[std::size_t(p)])] -
                              wedge_sum[std::size_t(tp.excl_wedge[std::size_t(p)])];
    return out;
}

EdgeVector apply_B_direct(const TwoPathSet& tp, const EdgeVector& v) {
    const index_t np = tp.size();
    if (index_t(v.size()) != np) throw error("apply_B_direct: dimension mismatch");
    EdgeVector out(static_cast<std::size_t>(np), 0.0);
    for (index_t p = 0; p < np; ++p) {
        index_t lo = tp.starts_ptr[std::size_t(tp.e3[std::size_t(p)])];
        index_t hi = tp.starts_ptr[std::size_t(tp.e3[std::size_t(p)] + 1)];
        double s = 0.0;
        for (index_t f = lo; f < hi; ++f) {
            if (tp.e2[std::size_t(f)] == tp.e2[std::size_t(p)]) continue;
            s += tp.delta[std::size_t(f)] * v[std::size_t(f)];
        }
        out[std::size_t(p)] = s;
    }
    return out;
}

EdgeVector apply_B_transpose(const TwoPathSet& tp, const EdgeVector& v) {
    const index_t np = tp.size();
    if (index_t(v.size()) != np) throw error("apply_B_transpose: dimension mismatch");
    std::vector<double> end_sum(static_cast<std::size_t>(tp.n), 0.0);
    for (index_t x = 0; x < tp.n; ++x) {
        double s = 0.0;
        for (index_t k = tp.ends_ptr[std::size_t(x)]; k < tp.ends_ptr[std::size_t(x + 1)]; ++k)
            s += v[std::size_t(tp.ends_idx[std::size_t(k)])];
        end_sum[std::size_t(x)] = s;
    }
    std::vector<double> wedge_sum(static_cast<std::size_t>(tp.num_wedges), 0.0);
    for (index_t p = 0; p < np; ++p)
        wedge_sum[std::size_t(tp.wedge_id[std::size_t(p)])] +=
            v[std::size_t(tp.inverse[std::size_t(p)])];
    EdgeVector out(static_cast<std::size_t>(np));
    for (index_t p = 0; p < np; ++p)
        out[std::size_t(p)] = tp.delta[std::size_t(p)] *
                              (end_sum[std::size_t(tp.e1[std::size_t(p)])] -
                               wedge_sum[std::size_t(tp.wedge_id[std::size_t(p)])]);
    return out;
}

std::vector<double> apply_S(const TwoPathSet& tp, const EdgeVector& v) {
    if (index_t(v.size()) != tp.size()) throw error("apply_S: dimension mismatch");
    std::vector<double> out(static_cast<std::size_t>(tp.n), 0.0);
    for (index_t x = 0; x < tp.n; ++x) {
        double s = 0.0;
        for (index_t p = tp.starts_ptr[std::size_t(x)]; p < tp.starts_ptr[std::size_t(x + 1)]; ++p)
            s += v[std::size_t(p)];
        out[std::size_t(x)] = s;
    }
    return out;
}

std::vector<double> apply_S_delta(const TwoPathSet& tp, const EdgeVector& v) {
    if (index_t(v.size()) != tp.size()) throw error("apply_S_delta: dimension mismatch");
    std::vector<double> out(static_cast<std::size_t>(tp.n), 0.0);
    for (index_t x = 0; x < tp.n; ++x) {
        double s = 0.0;
        for (index_t p = tp.starts_ptr[std::size_t(x)]; p < tp.starts_ptr[std::size_t(x + 1)]; ++p)
            s += tp.delta[std::size_t(p)] * v[std::size_t(p)];
        out[std::size_t(x)] = s;
    }
    return out;
}

EdgeVector apply_T(const TwoPathSet& tp, const std::vector<double>& w) {
    if (index_t(w.size()) != tp.n) throw error("apply_T: dimension mismatch");
    EdgeVector out(static_cast<std::size_t>(tp.size()));
    for (index_t p = 0; p < tp.size(); ++p)
        out[std::size_t(p)] = w[std::size_t(tp.e3[std::size_t(p)])];
    return out;
}

EdgeVector apply_T_delta(const TwoPathSet& tp, const std::vector<double>& w) {
    if (index_t(w.size()) != tp.n) throw error("apply_T_delta: dimension mismatch");
    EdgeVector out(static_cast<std::size_t>(tp.size()));
    for (index_t p = 0; p < tp.size(); ++p)
        out[std::size_t(p)] = tp.delta[std::size_t(p)] * w[std::size_t(tp.e3[std::size_t(p)])];
    return out;
}

std::vector<double> apply_T_transpose(const TwoPathSet& tp, const EdgeVector& v) {
    if (index_t(v.size()) != tp.size()) throw error("apply_T_transpose: dimension mismatch");
    std::vector<double> out(std::size_t(tp.n), 0.0);
    for (index_t x = 0; x < tp.n; ++x) {
        double s = 0.0;
        for (index_t k = tp.ends_ptr[std::size_t(x)]; k < tp.ends_ptr[std::size_t(x + 1)]; ++k)
            s += v[std::size_t(tp.ends_idx[std::size_t(k)])];
        out[std::size_t(x)] = s;
    }
    return out;
}

EdgeVector apply_J_delta(const TwoPathSet& tp, const EdgeVector& v) {
    if (index_t(v.size()) != tp.size()) throw error("apply_J_delta: dimension mismatch");
    EdgeVector out(static_cast<std::size_t>(tp.size()));
    for (index_t p = 0; p < tp.size(); ++p)
        out[std::size_t(p)] =
            tp.delta[std::size_t(p)] * v[std::size_t(tp.inverse[std::size_t(p)])];
    return out;
}

RelationReport verify_relations(const TwoPathSet& tp, index_t trials, std::uint64_t seed) {
    if (trials < 1) throw invalid_input("verify_relations: trials must be >= 1");
    RelationReport rep;
    rep.trials = trials;
    rep.delta_max = tp.delta_max_abs();

    // count right vertices carrying three or more distinct wedge starts:
    // those are exactly where T S_delta - J_delta picks up extra terms
    {
        std::vector<index_t> middle_deg;  // wedges per right vertex = degree
        middle_deg.assign(std::size_t(tp.m), 0);
        index_t prev_wedge = -1;
        for (index_t p = 0; p < tp.size(); ++p) {
            if (tp.wedge_id[std::size_t(p)] != prev_wedge) {
                prev_wedge = tp.wedge_id[std::size_t(p)];
                ++middle_deg[std::size_t(tp.e2[std::size_t(p)])];
            }
        }
        for (index_t y = 0; y < tp.m; ++y)
            if (middle_deg[std::size_t(y)] >= 3) ++rep.middle_degree_ge3;
    }

    const index_t np = tp.size();
    auto norm2 = [](const EdgeVector& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };

    for (index_t t = 0; t < trials; ++t) {
        CounterRng rng(seed, streams::kVerify + std::uint64_t(t));
        EdgeVector v(static_cast<std::size_t>(np));
        double nrm = 0.0;
        for (auto& x : v) {
            x = rng.normal();
            nrm += x * x;
        }
        nrm = std::sqrt(nrm);
        if (nrm > 0)
            for (auto& x : v) x /= nrm;

        EdgeVector bv = apply_B(tp, v);
        EdgeVector bv_direct = apply_B_direct(tp, v);
        EdgeVector stated = apply_T(tp, apply_S_delta(tp, v));
        EdgeVector jv = apply_J_delta(tp, v);
        for (index_t p = 0; p < np; ++p) stated[std::size_t(p)] -= jv[std::size_t(p)];

        EdgeVector diff(static_cast<std::size_t>(np));
        for (index_t p = 0; p < np; ++p)
            diff[std::size_t(p)] = bv[std::size_t(p)] - stated[std::size_t(p)];
        rep.stated_identity_residual = std::max(rep.stated_identity_residual, norm2(diff));

        for (index_t p = 0; p < np; ++p)
            diff[std::size_t(p)] = bv[std::size_t(p)] - bv_direct[std::size_t(p)];
        rep.direct_vs_factored = std::max(rep.direct_vs_factored, norm2(diff));

        EdgeVector lhs = apply_J_delta(tp, bv);
        EdgeVector rhs = apply_B_transpose(tp, apply_J_delta(tp, v));
        for (index_t p = 0; p < np; ++p)
            diff[std::size_t(p)] = lhs[std::size_t(p)] - rhs[std::size_t(p)];
        rep.parity_residual = std::max(rep.parity_residual, norm2(diff));
    }
    return rep;
}

DenseMatrix dense_B(const TwoPathSet& tp, index_t cap) {
    const index_t np = tp.size();
    if (np > cap) throw size_error("dense_B: path count exceeds cap", np);
    DenseMatrix b(np, np);
    for (index_t e = 0; e < np; ++e)
        for (index_t f = 0; f < np; ++f)
            if (tp.e3[std::size_t(e)] == tp.e1[std::size_t(f)] &&
                tp.e2[std::size_t(e)] != tp.e2[std::size_t(f)])
                b(e, f) = tp.delta[std::size_t(f)];
    return b;
}

namespace {

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw invalid_input("two_paths load: truncated file");
    return v;
}

}  // namespace

void save_two_paths(const std::string& path, const TwoPathSet& tp) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw invalid_input("save_two_paths: cannot open " + path);
    out.write("NBT1", 4);
    write_raw(out, std::uint64_t(tp.n));
    write_raw(out, std::uint64_t(tp.m));
    write_raw(out, std::uint64_t(tp.size()));
    for (index_t p = 0; p < tp.size(); ++p) {
        write_raw(out, std::uint64_t(tp.e1[std::size_t(p)]));
        write_raw(out, std::uint64_t(tp.e2[std::size_t(p)]));
        write_raw(out, std::uint64_t(tp.e3[std::size_t(p)]));
    }
    for (index_t p = 0; p < tp.size(); ++p) write_raw(out, tp.delta[std::size_t(p)]);
    if (!out) throw error("save_two_paths: write failed");
}

TwoPathSet load_two_paths(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw invalid_input("load_two_paths: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "NBT1", 4) != 0)
        throw invalid_input("load_two_paths: bad magic");
    TwoPathSet tp;
    tp.n = index_t(read_raw<std::uint64_t>(in));
    tp.m = index_t(read_raw<std::uint64_t>(in));
    std::uint64_t np = read_raw<std::uint64_t>(in);
    tp.e1.resize(np);
    tp.e2.resize(np);
    tp.e3.resize(np);
    tp.delta.resize(np);
    for (std::uint64_t p = 0; p < np; ++p) {
        tp.e1[p] = index_t(read_raw<std::uint64_t>(in));
        tp.e2[p] = index_t(read_raw<std::uint64_t>(in));
        tp.e3[p] = index_t(read_raw<std::uint64_t>(in));
        if (tp.e1[p] < 0 || tp.e1[p] >= tp.n || tp.e3[p] < 0 || tp.e3[p] >= tp.n || tp.e2[p] < 0 ||
            tp.e2[p] >= tp.m)
            throw invalid_input("load_two_paths: index out of range");
    }
    for (std::uint64_t p = 0; p < np; ++p) tp.delta[p] = read_raw<double>(in);
    for (std::uint64_t p = 1; p < np; ++p) {
        bool ordered = tp.e1[p - 1] < tp.e1[p] ||
                       (tp.e1[p - 1] == tp.e1[p] &&
                        (tp.e2[p - 1] < tp.e2[p] ||
                         (tp.e2[p - 1] == tp.e2[p] && tp.e3[p - 1] < tp.e3[p])));
        if (!ordered) throw invalid_input("load_two_paths: paths not in canonical order");
    }
    build_index_structure(tp);
    validate_invariants(tp);
    return tp;
}

}  // namespace longnbt
