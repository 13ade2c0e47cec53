#include "sfs/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "sfs/parallel.hpp"

namespace sfs {

namespace {

// Stream tags keep the substreams of the different pipeline stages apart.
enum StreamTag : std::uint64_t {
    kTagSeparable = 101,
    kTagDense = 102,
    kTagBootstrap = 103,
    kTagInitStudy = 104,
    kTagRankScanFit = 105,
    kTagRankScanSampler = 106,
    kTagBootRef = 107,
    kTagBootData = 108,
    kTagBootFit = 109,
    kTagBootShared = 110,
};

Mat positive_random(Eigen::Index rows, Eigen::Index cols, RngStream& rng, double lo, double hi) {
    Mat m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(lo, hi);
    return m;
}

}  // namespace

Factorization make_separable(int k, int g, int n, std::uint64_t seed, double scale) {
    if (n < 1 || k < n || g < n) throw ConfigError("make_separable: need K >= N and G >= N");
    RngStream rng = RngStream::derive(seed, kTagSeparable);
    Mat p = positive_random(k, n, rng, 0.2, 1.0);
    // Row c is the anchor of component c: zero everywhere else.
    for (int c = 0; c < n; ++c)
        for (int m = 0; m < n; ++m)
            if (m != c) p(c, m) = 0.0;
    Mat e = positive_random(n, g, rng, 0.2, 1.0) * scale;
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r)
            if (r != c) e(r, c) = 0.0;  // column c anchors component c
    return normalize_columns(make_factorization(std::move(p), std::move(e)));
}

Factorization make_dense(int k, int g, int n, std::uint64_t seed, double scale) {
    if (n < 1 || k < n || g < n) throw ConfigError("make_dense: need K >= N and G >= N");
    RngStream rng = RngStream::derive(seed, kTagDense);
    Mat p = positive_random(k, n, rng, 0.05, 1.0);
    Mat e = positive_random(n, g, rng, 0.2, 1.0) * scale;
    return normalize_columns(make_factorization(std::move(p), std::move(e)));
}

std::vector<CountMatrix> poisson_bootstrap(const Factorization& f_hat, int b_count,
                                           std::uint64_t seed) {
    if (b_count < 1) throw ConfigError("poisson_bootstrap: need at least one replicate");
    require_nonnegative(f_hat.P, "bootstrap P");
    require_nonnegative(f_hat.E, "bootstrap E");
    const Mat mean = f_hat.P * f_hat.E;
    std::vector<CountMatrix> replicates(b_count);
    parallel_for(b_count, [&](std::int64_t b) {
        RngStream rng = RngStream::derive(seed, kTagBootstrap, static_cast<std::uint64_t>(b));
        Mat draw(mean.rows(), mean.cols());
        for (Eigen::Index g = 0; g < mean.cols(); ++g)
            for (Eigen::Index k = 0; k < mean.rows(); ++k)
                draw(k, g) = static_cast<double>(rng.poisson(mean(k, g)));
        replicates[b] = make_count_matrix(std::move(draw));
    });
    return replicates;
}

InitStudyResult init_study(const Mat& m, int rank, int runs, const std::vector<int>& inits_grid,
                           std::uint64_t seed, const FitConfig& fit_base) {
    if (runs < 1) throw ConfigError("init_study: need at least one run");
    if (inits_grid.empty()) throw ConfigError("init_study: empty grid");
    for (int v : inits_grid)
        if (v < 1) throw ConfigError("init_study: grid values must be >= 1");
    const int max_inits = *std::max_element(inits_grid.begin(), inits_grid.end());

    InitStudyResult result;
    result.inits_grid = inits_grid;
    result.per_run_min_gkl.assign(runs, std::vector<double>(inits_grid.size(), 0.0));

    parallel_for(runs, [&](std::int64_t run) {
        FitConfig cfg = fit_base;
        cfg.rank = rank;
        cfg.n_inits = max_inits;
        cfg.seed = splitmix64(seed ^ splitmix64(kTagInitStudy + run));
        const FitResult fr = fit(m, cfg);
        // Running minimum over the shared initialization stream.
        for (std::size_t gi = 0; gi < inits_grid.size(); ++gi) {
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < inits_grid[gi]; ++i)
                best = std::min(best, fr.per_init_divergences[i]);
            result.per_run_min_gkl[run][gi] = best;
        }
    });

    result.mean_curve.assign(inits_grid.size(), 0.0);
    for (const auto& row : result.per_run_min_gkl)
        for (std::size_t gi = 0; gi < row.size(); ++gi) result.mean_curve[gi] += row[gi];
    for (double& v : result.mean_curve) v /= runs;
    return result;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ConfigError("quantile: empty sample");
    if (q < 0.0 || q > 1.0) throw ConfigError("quantile: q must lie in [0,1]");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(h));
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

RankScanResult rank_scan(const Mat& m, const std::vector<int>& ranks,
                         const std::vector<double>& betas, int repeats, std::uint64_t seed,
                         const FitConfig& fit_base, const SamplerConfig& sampler_base) {
    if (ranks.empty() || betas.empty()) throw ConfigError("rank_scan: empty rank or beta set");
    if (repeats < 1) throw ConfigError("rank_scan: need at least one repeat");

    RankScanResult result;
    const std::size_t cells = ranks.size() * static_cast<std::size_t>(repeats);
    result.rows.assign(cells * betas.size(), RankScanRow{});

    // One fit per (rank, repeat); the sampler runs once per beta on it.
    parallel_for(static_cast<std::int64_t>(cells), [&](std::int64_t cell) {
        const int rank = ranks[cell / repeats];
        const int repeat = static_cast<int>(cell % repeats);

        FitConfig fcfg = fit_base;
        fcfg.rank = rank;
        fcfg.seed = splitmix64(seed ^ splitmix64(kTagRankScanFit + 1000003ULL * rank + repeat));
        const FitResult fr = fit(m, fcfg);

        for (std::size_t bi = 0; bi < betas.size(); ++bi) {
            SamplerConfig scfg = sampler_base;
            scfg.beta = betas[bi];
            scfg.thin = std::max<std::int64_t>(scfg.thin, 100);  // chains are not kept here
            scfg.seed = splitmix64(seed ^ splitmix64(kTagRankScanSampler + 1000003ULL * rank +
                                                     1009ULL * bi + repeat));
            const auto t0 = std::chrono::steady_clock::now();
            const SamplerRun run = run_sampler(fr.best, scfg);
            const auto t1 = std::chrono::steady_clock::now();

            RankScanRow row;
            row.rank = rank;
            row.beta = betas[bi];
            row.repeat = repeat;
            row.fit_gkl = fr.divergence;
            row.avg_size_P = run.envelope.avg_size_P;
            row.avg_size_E = run.envelope.avg_size_E;
            row.iterations = run.chain.iterations;
            row.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
            row.converged = run.converged;
            result.rows[cell * betas.size() + bi] = row;
        }
    });

    std::map<std::pair<int, double>, std::vector<const RankScanRow*>> groups;
    for (const auto& row : result.rows) groups[{row.rank, row.beta}].push_back(&row);
    for (const auto& [key, rows] : groups) {
        std::vector<double> sizes, iters, times;
        for (const auto* r : rows) {
            sizes.push_back(r->avg_size_P);
            iters.push_back(static_cast<double>(r->iterations));
            times.push_back(r->wall_seconds);
        }
        RankScanSummaryRow s;
        s.rank = key.first;
        s.beta = key.second;
        auto mean = [](const std::vector<double>& v) {
            double t = 0.0;
            for (double x : v) t += x;
            return t / static_cast<double>(v.size());
        };
        s.size_mean = mean(sizes);
        s.size_q25 = quantile(sizes, 0.25);
        s.size_q75 = quantile(sizes, 0.75);
        s.iter_mean = mean(iters);
        s.iter_q05 = quantile(iters, 0.05);
        s.iter_q95 = quantile(iters, 0.95);
        s.time_mean = mean(times);
        s.time_q05 = quantile(times, 0.05);
        s.time_q95 = quantile(times, 0.95);
        result.summary.push_back(s);
    }
    return result;
}

BootstrapResult bootstrap_study(const Mat& m, int rank, int b_count, InitMode mode,
                                std::uint64_t seed, int n_inits, const FitConfig& fit_base) {
    if (b_count < 1) throw ConfigError("bootstrap_study: need at least one replicate");
    if (n_inits < 1) throw ConfigError("bootstrap_study: need at least one initialization");

    BootstrapResult result;
    result.mode = mode;
    result.seed = seed;

    FitConfig ref_cfg = fit_base;
    ref_cfg.rank = rank;
    ref_cfg.n_inits = n_inits;
    ref_cfg.seed = splitmix64(seed ^ splitmix64(kTagBootRef));
    result.reference = fit(m, ref_cfg);

    const Mat product = result.reference.best.P * result.reference.best.E;
    result.svd = align_to_reference(truncated_svd(product, rank), result.reference.best.P);

    const auto replo = poisson_bootstrap(result.reference.best, b_count,
                                         splitmix64(seed ^ splitmix64(kTagBootData)));

    const std::uint64_t shared_seed = splitmix64(seed ^ splitmix64(kTagBootShared));
    result.replicates.assign(b_count, BootstrapReplicate{});
    parallel_for(b_count, [&](std::int64_t b) {
        FitConfig cfg = fit_base;
        cfg.rank = rank;
        cfg.n_inits = n_inits;
        cfg.seed = mode == InitMode::Shared
                       ? shared_seed
                       : splitmix64(seed ^ splitmix64(kTagBootFit + static_cast<std::uint64_t>(b)));
        const FitResult fr = fit(replo[b].values, cfg);

        BootstrapReplicate rep;
        rep.divergence = fr.divergence;
        rep.matching = match_components(result.reference.best.P, fr.best.P);
        Mat p_matched(fr.best.P.rows(), fr.best.P.cols());
        for (int c = 0; c < rank; ++c) p_matched.col(c) = fr.best.P.col(rep.matching[c]);
        rep.alpha = alpha_of_p(result.svd, p_matched);
        rep.best = fr.best;
        result.replicates[b] = std::move(rep);
    });
    return result;
}

double alpha_bounding_box_area(const BootstrapResult& result) {
    const int rank = result.svd.rank();
    if (rank < 2 || result.replicates.empty()) return 0.0;
    double total = 0.0;
    for (int c = 0; c < rank; ++c) {
        Vec lo = result.replicates.front().alpha.points[c];
        Vec hi = lo;
        for (const auto& rep : result.replicates) {
            lo = lo.cwiseMin(rep.alpha.points[c]);
            hi = hi.cwiseMax(rep.alpha.points[c]);
        }
        double area = 1.0;
        for (Eigen::Index d = 0; d < lo.size(); ++d) area *= hi(d) - lo(d);
        total += area;
    }
    return total;
}

}  // namespace sfs
