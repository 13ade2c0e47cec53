#pragma once

#include <Eigen/Dense>

#include "sfs/matrix.hpp"
#include "sfs/rng.hpp"

namespace sfs::test {

// Mixing matrix built from its definition, independent of build_transform.
inline Mat naive_transform(int n, int i, int j, double lambda) {
    Mat a = Mat::Zero(n, n);
    for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
            if (u == v && u == i) a(u, v) = 1.0 - lambda;
            else if (u == v) a(u, v) = 1.0;
            else if (u == j && v == i) a(u, v) = lambda;
        }
    }
    return a;
}

// Feasibility of lambda for the pair (i, j): P A and A^-1 E stay above
// -tol. The inverse is computed numerically, not via the closed form.
inline bool grid_feasible(const Factorization& f, int i, int j, double lambda, double tol = 1e-12) {
    const Mat a = naive_transform(f.rank, i, j, lambda);
    const Mat p_t = f.P * a;
    if (p_t.minCoeff() < -tol) return false;
    const Eigen::FullPivLU<Mat> lu(a);
    if (!lu.isInvertible()) return false;
    const Mat e_t = lu.solve(f.E);
    return e_t.minCoeff() >= -tol;
}

inline Factorization random_factorization(int k, int g, int n, std::uint64_t seed,
                                          double p_lo = 0.05, double p_hi = 1.0,
                                          double e_lo = 0.1, double e_hi = 2.0) {
    RngStream rng(seed);
    Mat p(k, n), e(n, g);
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < k; ++r) p(r, c) = rng.uniform(p_lo, p_hi);
    for (int c = 0; c < g; ++c)
        for (int r = 0; r < n; ++r) e(r, c) = rng.uniform(e_lo, e_hi);
    for (int c = 0; c < n; ++c) {
        const double s = p.col(c).sum();
        p.col(c) /= s;
        e.row(c) *= s;
    }
    return make_factorization(std::move(p), std::move(e));
}

}  // namespace sfs::test
