#include "sfs/rank2.hpp"

#include <array>

#include "sfs/model.hpp"

namespace sfs {

namespace {

// P A(a,b) and A(a,b)^-1 E for A(a,b) = [[1-a, b], [a, 1-b]].
void accumulate_corner(const Mat& P, const Mat& E, double a, double b, SfsEnvelope& env) {
    const double det = 1.0 - a - b;
    Mat p_t(P.rows(), 2);
    p_t.col(0) = (1.0 - a) * P.col(0) + a * P.col(1);
    p_t.col(1) = b * P.col(0) + (1.0 - b) * P.col(1);
    Mat e_t(2, E.cols());
    e_t.row(0) = ((1.0 - b) * E.row(0) - b * E.row(1)) / det;
    e_t.row(1) = ((1.0 - a) * E.row(1) - a * E.row(0)) / det;
    clamp_nonnegative(p_t, "rank2 corner P");
    clamp_nonnegative(e_t, "rank2 corner E");
    env.P_min = env.P_min.cwiseMin(p_t);
    env.P_max = env.P_max.cwiseMax(p_t);
    env.E_min = env.E_min.cwiseMin(e_t);
    env.E_max = env.E_max.cwiseMax(e_t);
}

}  // namespace

Rank2Sfs rank2_sfs(const Factorization& f) {
    if (f.rank != 2) throw ConfigError("rank2_sfs: factorization must have rank 2");
    require_nonnegative(f.P, "rank2 P");
    require_nonnegative(f.E, "rank2 E");
    Factorization ref = normalize_columns(f);

    Rank2Sfs out;
    out.interval_12 = feasible_interval(ref, 0, 1);
    out.interval_21 = feasible_interval(ref, 1, 0);

    out.envelope.P_min = ref.P;
    out.envelope.P_max = ref.P;
    out.envelope.E_min = ref.E;
    out.envelope.E_max = ref.E;

    // Feasible transforms form the rectangle interval_12 x interval_21 (each
    // entry of the transformed pair is monotone in a and in b separately),
    // so corner evaluations give the exact elementwise envelope. The
    // (hi, hi) corner is never an extreme and can be singular; skip it.
    const std::array<double, 3> as = {out.interval_12.lo, 0.0, out.interval_12.hi};
    const std::array<double, 3> bs = {out.interval_21.lo, 0.0, out.interval_21.hi};
    for (double a : as) {
        for (double b : bs) {
            if (a == out.interval_12.hi && b == out.interval_21.hi && a != 0.0 && b != 0.0) continue;
            accumulate_corner(ref.P, ref.E, a, b, out.envelope);
        }
    }

    out.envelope.avg_size_P = sfs_size(out.envelope.P_min, out.envelope.P_max);
    out.envelope.avg_size_E = sfs_size(out.envelope.E_min, out.envelope.E_max);
    return out;
}

}  // namespace sfs
