#include "sfs/sampler.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "sfs/model.hpp"

namespace sfs {

namespace {

void validate_spec(const TransformSpec& spec) {
    if (spec.rank < 2) throw ConfigError("transform: rank must be at least 2");
    if (spec.i < 0 || spec.i >= spec.rank || spec.j < 0 || spec.j >= spec.rank)
        throw ConfigError("transform: column index out of range");
    if (spec.i == spec.j) throw ConfigError("transform: i and j must differ");
    if (!std::isfinite(spec.lambda)) throw ConfigError("transform: lambda must be finite");
    if (spec.lambda == 1.0) throw ContractViolation("transform: lambda = 1 is singular");
}

void validate_config(const SamplerConfig& cfg) {
    if (!(cfg.beta > 0.0)) throw ConfigError("sampler: beta must be positive");
    if (cfg.check_every < 1) throw ConfigError("sampler: check_every must be >= 1");
    if (!(cfg.epsilon > 0.0)) throw ConfigError("sampler: epsilon must be positive");
    if (cfg.max_iterations < 1) throw ConfigError("sampler: max_iterations must be >= 1");
    if (cfg.thin < 1) throw ConfigError("sampler: thin must be >= 1");
    if (cfg.max_retained < 2) throw ConfigError("sampler: max_retained must be >= 2");
}

FeasibleInterval interval_of(const Mat& P, const Mat& E, int i, int j) {
    FeasibleInterval iv;
    const Eigen::Index k_count = P.rows();
    const Eigen::Index g_count = E.cols();

    bool lower_found = false;
    double lo = 0.0;
    for (Eigen::Index k = 0; k < k_count; ++k) {
        const double pi = P(k, i);
        const double pj = P(k, j);
        if (pj > pi) {
            const double cand = pi / (pi - pj);  // <= 0
            if (!lower_found || cand > lo) lo = cand;
            lower_found = true;
        }
    }
    if (!lower_found) {
        iv.lo_unbounded = true;
        lo = kUnboundedLoCap;
    } else if (lo < kUnboundedLoCap) {
        // A bound this far out can only come from column differences at
        // roundoff scale; treat it like the unbounded case.
        lo = kUnboundedLoCap;
    }

    bool upper_found = false;
    double hi = 1.0;
    for (Eigen::Index g = 0; g < g_count; ++g) {
        const double ei = E(i, g);
        const double ej = E(j, g);
        const double sum = ei + ej;
        if (sum > 0.0) {
            const double cand = ej / sum;
            if (!upper_found || cand < hi) hi = cand;
            upper_found = true;
        }
    }
    if (!upper_found)
        throw DegenerateComponent("feasible_interval: exposure rows " + std::to_string(i) + " and " +
                                  std::to_string(j) + " are both zero");
    if (hi > 1.0 - kHiClampMargin) {
        hi = 1.0 - kHiClampMargin;
        iv.hi_clamped = true;
    }

    iv.lo = lo;
    iv.hi = hi;
    return iv;
}

}  // namespace

std::pair<Mat, Mat> build_transform(const TransformSpec& spec) {
    validate_spec(spec);
    const int n = spec.rank;
    Mat a = Mat::Identity(n, n);
    a(spec.i, spec.i) = 1.0 - spec.lambda;
    a(spec.j, spec.i) = spec.lambda;
    const double mu = -spec.lambda / (1.0 - spec.lambda);
    Mat a_inv = Mat::Identity(n, n);
    a_inv(spec.i, spec.i) = 1.0 - mu;
    a_inv(spec.j, spec.i) = mu;
    return {std::move(a), std::move(a_inv)};
}

FeasibleInterval feasible_interval(const Factorization& f, int i, int j) {
    if (i < 0 || i >= f.rank || j < 0 || j >= f.rank || i == j)
        throw ConfigError("feasible_interval: invalid column pair (" + std::to_string(i) + "," +
                          std::to_string(j) + ") for rank " + std::to_string(f.rank));
    return interval_of(f.P, f.E, i, j);
}

double sample_lambda(const FeasibleInterval& interval, double beta, RngStream& rng) {
    if (!(beta > 0.0)) throw ConfigError("sample_lambda: beta must be positive");
    const double x = rng.beta(beta, beta);
    return x * interval.hi + (1.0 - x) * interval.lo;
}

double sfs_size(const Mat& min_grid, const Mat& max_grid) {
    if (min_grid.rows() != max_grid.rows() || min_grid.cols() != max_grid.cols())
        throw ShapeError("sfs_size: shape mismatch");
    if (min_grid.size() == 0) return 0.0;
    return (max_grid - min_grid).sum() / static_cast<double>(min_grid.size());
}

SamplerRun run_sampler(const Factorization& f0, const SamplerConfig& cfg) {
    validate_config(cfg);
    require_nonnegative(f0.P, "sampler P0");
    require_nonnegative(f0.E, "sampler E0");

    SamplerRun run;
    Factorization start = f0;
    clamp_nonnegative(start.P, "sampler P0");
    clamp_nonnegative(start.E, "sampler E0");
    if (!columns_normalized(start.P)) {
        start = normalize_columns(start);
        run.input_was_normalized = true;
        run.warnings.push_back("input P was not column-normalized; normalized before sampling");
    } else {
        // Exact unit sums keep extreme mixing coefficients from amplifying
        // the residual normalization error.
        start = normalize_columns(start);
    }

    const int n = start.rank;
    const Eigen::Index k_count = start.P.rows();
    const Eigen::Index g_count = start.E.cols();

    Mat P = start.P;
    Mat E = start.E;

    run.envelope.P_min = P;
    run.envelope.P_max = P;
    run.envelope.E_min = E;
    run.envelope.E_max = E;
    run.chain.samples_P.push_back(P);
    run.chain.samples_E.push_back(E);
    run.chain.thinning = cfg.thin;

    if (n < 2) {
        // Only trivial ambiguities exist; the SFS is the starting point.
        run.converged = true;
        return run;
    }

    RngStream rng = RngStream::derive(cfg.seed, 0);
    std::set<std::string> seen_warnings(run.warnings.begin(), run.warnings.end());

    double last_size_p = 0.0;
    double last_size_e = 0.0;
    std::int64_t thin = cfg.thin;
    std::int64_t iterations = 0;

    for (std::int64_t s = 1; s <= cfg.max_iterations; ++s) {
        for (int i = 0; i < n; ++i) {
            int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n - 1)));
            if (j >= i) ++j;

            FeasibleInterval iv = interval_of(P, E, i, j);
            // The endpoints carry their own rounding error, and near-singular
            // transforms divide it by 1 - lambda. Pull the sampled range a few
            // ulps inward so lambda never exceeds the exact bounds.
            constexpr double shrink = 1.0 - 8.0 * std::numeric_limits<double>::epsilon();
            iv.lo *= shrink;
            iv.hi *= shrink;
            if (iv.lo_unbounded) {
                run.degenerate_pair_seen = true;
                auto msg = "columns " + std::to_string(i) + " and " + std::to_string(j) +
                           " of P are identical; lambda interval unbounded below, capped at " +
                           std::to_string(kUnboundedLoCap);
                if (seen_warnings.insert(msg).second) run.warnings.push_back(msg);
            }
            if (iv.hi_clamped) {
                run.degenerate_pair_seen = true;
                auto msg = "exposure row " + std::to_string(i) +
                           " is zero (unused component); lambda upper bound clamped below 1";
                if (seen_warnings.insert(msg).second) run.warnings.push_back(msg);
            }

            const double lambda = sample_lambda(iv, cfg.beta, rng);
            if (lambda == 0.0) continue;

            for (Eigen::Index k = 0; k < k_count; ++k) {
                double v = P(k, i) + lambda * (P(k, j) - P(k, i));
                if (v < 0.0) {
                    if (v < -kNegClampTol)
                        throw ContractViolation("sampler: P entry " + std::to_string(v) +
                                                " fell below the negativity clamp");
                    v = 0.0;
                }
                P(k, i) = v;
            }
            const double ratio = lambda / (1.0 - lambda);
            const double scale = 1.0 / (1.0 - lambda);
            constexpr double eps = std::numeric_limits<double>::epsilon();
            for (Eigen::Index g = 0; g < g_count; ++g) {
                const double ej = E(j, g);
                const double mixed = ratio * E(i, g);
                double v = ej - mixed;
                if (v < 0.0) {
                    // Noise floor of this subtraction; magnitudes can be large.
                    const double tol = kNegClampTol + 16.0 * eps * (std::abs(ej) + std::abs(mixed));
                    if (v < -tol)
                        throw ContractViolation("sampler: E entry " + std::to_string(v) +
                                                " fell below the negativity clamp");
                    v = 0.0;
                }
                E(j, g) = v;
                E(i, g) *= scale;
            }
        }

        // Per-sweep bookkeeping: column-sum contract, drift absorption and
        // envelope accumulation.
        for (int c = 0; c < n; ++c) {
            double sum = 0.0;
            for (Eigen::Index k = 0; k < k_count; ++k) sum += P(k, c);
            if (std::abs(sum - 1.0) > kColSumTol)
                throw ContractViolation("sampler: column " + std::to_string(c) + " sum drifted to " +
                                        std::to_string(sum));
            if (std::abs(sum - 1.0) > 1e-13) {
                // Rescale the trivial scaling ambiguity away before roundoff
                // accumulates.
                P.col(c) /= sum;
                E.row(c) *= sum;
            }
        }
        run.envelope.P_min = run.envelope.P_min.cwiseMin(P);
        run.envelope.P_max = run.envelope.P_max.cwiseMax(P);
        run.envelope.E_min = run.envelope.E_min.cwiseMin(E);
        run.envelope.E_max = run.envelope.E_max.cwiseMax(E);

        if (s % thin == 0) {
            run.chain.samples_P.push_back(P);
            run.chain.samples_E.push_back(E);
            if (static_cast<std::int64_t>(run.chain.samples_P.size()) > cfg.max_retained) {
                // Memory guard: double the stride, keeping sweep indices that
                // are multiples of the new one (position 0 stays).
                std::size_t kept = 0;
                for (std::size_t idx = 0; idx < run.chain.samples_P.size(); idx += 2) {
                    run.chain.samples_P[kept] = std::move(run.chain.samples_P[idx]);
                    run.chain.samples_E[kept] = std::move(run.chain.samples_E[idx]);
                    ++kept;
                }
                run.chain.samples_P.resize(kept);
                run.chain.samples_E.resize(kept);
                thin *= 2;
            }
        }

        iterations = s;
        if (s % cfg.check_every == 0) {
            const double size_p = sfs_size(run.envelope.P_min, run.envelope.P_max);
            const double size_e = sfs_size(run.envelope.E_min, run.envelope.E_max);
            run.size_history.push_back({s, size_p, size_e});
            const bool p_stable = size_p - last_size_p < cfg.epsilon;
            const bool e_stable = !cfg.track_E_size || size_e - last_size_e < cfg.epsilon;
            if (p_stable && e_stable) {
                run.converged = true;
                break;
            }
            last_size_p = size_p;
            last_size_e = size_e;
        }
    }

    run.chain.thinning = thin;
    run.chain.iterations = iterations;
    run.envelope.avg_size_P = sfs_size(run.envelope.P_min, run.envelope.P_max);
    run.envelope.avg_size_E = sfs_size(run.envelope.E_min, run.envelope.E_max);
    return run;
}

}  // namespace sfs
