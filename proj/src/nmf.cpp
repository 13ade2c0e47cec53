#include "sfs/nmf.hpp"

#include <cmath>
#include <string>

#include "sfs/parallel.hpp"
#include "sfs/rng.hpp"

namespace sfs {

namespace {

constexpr double kDenomFloor = 1e-100;

void validate_config(const Mat& m, const FitConfig& cfg) {
    if (cfg.rank < 1) throw ConfigError("fit: rank must be positive");
    if (cfg.rank > std::min(m.rows(), m.cols()))
        throw ConfigError("fit: rank " + std::to_string(cfg.rank) + " exceeds min(K,G) = " +
                          std::to_string(std::min(m.rows(), m.cols())));
    if (cfg.n_inits < 1) throw ConfigError("fit: n_inits must be >= 1");
    if (cfg.max_iter < 1) throw ConfigError("fit: max_iter must be >= 1");
    if (!(cfg.rel_tol > 0.0)) throw ConfigError("fit: rel_tol must be positive");
}

// M ./ PE with the conventions 0/x = 0 and a hard error on x = 0 under
// nonzero data.
Mat ratio_matrix(const Mat& m, const Mat& pe) {
    Mat r(m.rows(), m.cols());
    for (Eigen::Index g = 0; g < m.cols(); ++g) {
        for (Eigen::Index k = 0; k < m.rows(); ++k) {
            const double mv = m(k, g);
            if (mv == 0.0) {
                r(k, g) = 0.0;
                continue;
            }
            const double d = pe(k, g);
            if (d <= 0.0)
                throw ContractViolation("lee_seung_step: reconstruction is zero at (" +
                                        std::to_string(k) + "," + std::to_string(g) +
                                        ") where the data is " + std::to_string(mv));
            r(k, g) = mv / std::max(d, kDenomFloor);
        }
    }
    return r;
}

void update_e(const Mat& m, const Mat& p, Mat& e) {
    const Mat ratio = ratio_matrix(m, p * e);
    const Mat numer = p.transpose() * ratio;           // N x G
    const Vec col_sums = p.colwise().sum();            // N
    for (Eigen::Index n = 0; n < e.rows(); ++n) {
        const double denom = std::max(col_sums(n), kDenomFloor);
        e.row(n) = e.row(n).cwiseProduct(numer.row(n)) / denom;
    }
}

void update_p(const Mat& m, Mat& p, const Mat& e) {
    const Mat ratio = ratio_matrix(m, p * e);
    const Mat numer = ratio * e.transpose();           // K x N
    const Vec row_sums = e.rowwise().sum();            // N
    for (Eigen::Index n = 0; n < p.cols(); ++n) {
        const double denom = std::max(row_sums(n), kDenomFloor);
        p.col(n) = p.col(n).cwiseProduct(numer.col(n)) / denom;
    }
}

struct SingleRun {
    Factorization f;
    double divergence = 0.0;
    std::int64_t iterations = 0;
    std::vector<double> trace;
};

SingleRun run_one_init(const Mat& m, const FitConfig& cfg, int init_index) {
    RngStream rng = RngStream::derive(cfg.seed, static_cast<std::uint64_t>(init_index));
    const Eigen::Index k = m.rows();
    const Eigen::Index g = m.cols();
    const int n = cfg.rank;

    // Strictly positive start: entries uniform on (0.1, 1.9), column-major
    // order, P before E; P columns normalized.
    Mat p(k, n), e(n, g);
    for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index r = 0; r < k; ++r) p(r, c) = 0.1 + 1.8 * rng.uniform01();
    for (Eigen::Index c = 0; c < g; ++c)
        for (Eigen::Index r = 0; r < n; ++r) e(r, c) = 0.1 + 1.8 * rng.uniform01();
    for (Eigen::Index c = 0; c < n; ++c) p.col(c) /= p.col(c).sum();

    SingleRun run;
    double d_prev = gkl_divergence(m, p * e);
    if (cfg.record_traces) run.trace.push_back(d_prev);
    std::int64_t it = 0;
    while (it < cfg.max_iter) {
        update_e(m, p, e);
        update_p(m, p, e);
        ++it;
        const double d = gkl_divergence(m, p * e);
        if (cfg.record_traces) run.trace.push_back(d);
        const double change = (d_prev - d) / (1.0 + d_prev);
        d_prev = d;
        if (std::abs(change) < cfg.rel_tol) break;
    }
    run.f = make_factorization(std::move(p), std::move(e));
    run.divergence = d_prev;
    run.iterations = it;
    return run;
}

}  // namespace

Factorization lee_seung_step(const Mat& m, const Factorization& f) {
    if (f.P.rows() != m.rows() || f.E.cols() != m.cols())
        throw ShapeError("lee_seung_step: factor shapes do not match the data");
    Factorization out = f;
    update_e(m, out.P, out.E);
    update_p(m, out.P, out.E);
    return out;
}

FitResult fit(const Mat& m, const FitConfig& cfg) {
    validate_config(m, cfg);
    require_nonnegative(m, "fit data");

    std::vector<SingleRun> runs(cfg.n_inits);
    parallel_for(cfg.n_inits, [&](std::int64_t i) { runs[i] = run_one_init(m, cfg, static_cast<int>(i)); });

    int best = 0;
    for (int i = 1; i < cfg.n_inits; ++i) {
        if (runs[i].divergence < runs[best].divergence) best = i;
    }

    FitResult result;
    result.best = normalize_columns(runs[best].f);
    result.divergence = runs[best].divergence;
    result.best_init = best;
    result.per_init_divergences.reserve(runs.size());
    result.iterations_used.reserve(runs.size());
    for (const auto& r : runs) {
        result.per_init_divergences.push_back(r.divergence);
        result.iterations_used.push_back(r.iterations);
    }
    if (cfg.record_traces) {
        result.traces.reserve(runs.size());
        for (auto& r : runs) result.traces.push_back(std::move(r.trace));
    }
    return result;
}

FitResult fit(const CountMatrix& m, const FitConfig& cfg) {
    validate(m);
    return fit(m.values, cfg);
}

}  // namespace sfs
