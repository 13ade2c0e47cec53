#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sfs/matrix.hpp"
#include "sfs/nmf.hpp"
#include "sfs/sampler.hpp"
#include "sfs/svd.hpp"

namespace sfs {

// --- synthetic data -------------------------------------------------------

// Factorization with an anchor row per component in P (a row where only
// that component is nonzero) and an anchor column per component in E; such
// data has a unique NMF up to scaling and permutation. `scale` sets the
// magnitude of the exposures.
Factorization make_separable(int k, int g, int n, std::uint64_t seed, double scale = 1.0);

// Dense strictly positive factors (no anchors); generically a nontrivial
// set of feasible solutions.
Factorization make_dense(int k, int g, int n, std::uint64_t seed, double scale = 1.0);

// --- parametric bootstrap ------------------------------------------------

// B matrices with entries drawn independently from Poisson((P E)_kg).
// Replicate b uses the substream (seed, b).
std::vector<CountMatrix> poisson_bootstrap(const Factorization& f_hat, int b_count,
                                           std::uint64_t seed);

// --- initialization study --------------------------------------------------

struct InitStudyResult {
    std::vector<int> inits_grid;                        // numbers of initializations
    std::vector<std::vector<double>> per_run_min_gkl;   // [run][grid index]
    std::vector<double> mean_curve;                     // averaged over runs
};

// For each of `runs` independent repetitions, fits with max(inits_grid)
// initializations and records the running-minimum divergence at every grid
// point (prefix property: the first k inits of a run are shared across
// grid points).
InitStudyResult init_study(const Mat& m, int rank, int runs,
                           const std::vector<int>& inits_grid, std::uint64_t seed,
                           const FitConfig& fit_base = {});

// --- rank scan --------------------------------------------------------------

struct RankScanRow {
    int rank = 0;
    double beta = 0.0;
    int repeat = 0;
    double fit_gkl = 0.0;
    double avg_size_P = 0.0;
    double avg_size_E = 0.0;
    std::int64_t iterations = 0;
    double wall_seconds = 0.0;
    bool converged = false;
};

struct RankScanSummaryRow {
    int rank = 0;
    double beta = 0.0;
    double size_mean = 0.0, size_q25 = 0.0, size_q75 = 0.0;
    double iter_mean = 0.0, iter_q05 = 0.0, iter_q95 = 0.0;
    double time_mean = 0.0, time_q05 = 0.0, time_q95 = 0.0;
};

struct RankScanResult {
    std::vector<RankScanRow> rows;
    std::vector<RankScanSummaryRow> summary;  // one row per (rank, beta)
};

// For every rank in `ranks`, fits the data once per repeat (substream
// (seed, rank, repeat)) and runs the sampler once per beta on the fitted
// solution, recording size, iteration count and wall time. Summary
// quantiles are order statistics of the repeats: 0.25/0.75 for sizes,
// 0.05/0.95 for iterations and time (linear interpolation between order
// statistics).
RankScanResult rank_scan(const Mat& m, const std::vector<int>& ranks,
                         const std::vector<double>& betas, int repeats,
                         std::uint64_t seed, const FitConfig& fit_base = {},
                         const SamplerConfig& sampler_base = {});

// Quantile by linear interpolation between order statistics (type 7).
double quantile(std::vector<double> values, double q);

// --- parametric bootstrap study ---------------------------------------------

enum class InitMode { Random, Shared };

struct BootstrapReplicate {
    double divergence = 0.0;
    Factorization best;
    AlphaCloud alpha;          // replicate P in the reference SVD basis
    std::vector<int> matching; // column of the replicate matched to each reference component
};

struct BootstrapResult {
    InitMode mode = InitMode::Random;
    std::uint64_t seed = 0;
    FitResult reference;
    TruncatedSvd svd;  // of the reference product, aligned to the reference P
    std::vector<BootstrapReplicate> replicates;
};

// Fits m, draws b_count Poisson bootstrap replicates of the fitted
// product, refits each one (fresh random initializations per replicate, or
// one shared initialization stream for all), and projects every replicate
// P into the reference SVD coordinates. Components are matched to the
// reference by cosine similarity so per-component alpha clouds are
// comparable.
BootstrapResult bootstrap_study(const Mat& m, int rank, int b_count, InitMode mode,
                                std::uint64_t seed, int n_inits = 10,
                                const FitConfig& fit_base = {});

// Sum over components of the axis-aligned bounding-box area (product of
// coordinate ranges) of the replicate alpha points.
double alpha_bounding_box_area(const BootstrapResult& result);

}  // namespace sfs
