#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sfs/matrix.hpp"
#include "sfs/rng.hpp"

namespace sfs {

// Mixing transform A_ij(lambda): column i of P becomes the affine
// combination (1-lambda) P_i + lambda P_j, all other columns unchanged.
// Indices are 0-based.
struct TransformSpec {
    int rank = 0;
    int i = 0;
    int j = 0;
    double lambda = 0.0;
};

// Closed interval of mixing coefficients keeping P A_ij(lambda) and
// A_ij(lambda)^-1 E nonnegative. Always contains 0; hi < 1.
struct FeasibleInterval {
    double lo = 0.0;            // <= 0
    double hi = 0.0;            // >= 0
    bool lo_unbounded = false;  // no row bounds lambda from below (columns i,j of P identical)
    bool hi_clamped = false;    // bound reached 1 (row i of E identically zero)
};

// Cap used for the lower endpoint when it is unbounded. The P-envelope is
// invariant in that direction, so a large finite cap loses nothing
// measurable.
inline constexpr double kUnboundedLoCap = -1e6;

// hi is clamped to 1 - kHiClampMargin to keep A_ij(lambda) invertible.
inline constexpr double kHiClampMargin = 1e-9;

struct SamplerConfig {
    double beta = 0.5;                      // shape of the shifted symmetric beta law
    std::int64_t check_every = 1000;        // iterations between size checks
    double epsilon = 1e-10;                 // convergence threshold on the size change
    std::uint64_t seed = 0;
    std::int64_t max_iterations = 10'000'000;  // safety cap
    bool track_E_size = false;              // also require the E-size criterion
    std::int64_t thin = 1;                  // chain keeps every thin-th sweep
    std::int64_t max_retained = 100'000;    // memory guard; stride doubles beyond this
};

// Retained samples. samples_P[0] / samples_E[0] is the initial solution.
struct SfsChain {
    std::vector<Mat> samples_P;
    std::vector<Mat> samples_E;
    std::int64_t thinning = 1;
    std::int64_t iterations = 0;
};

// Elementwise min/max of every visited solution (all sweeps, retained or
// not) plus the mean per-entry widths.
struct SfsEnvelope {
    Mat P_min, P_max;
    Mat E_min, E_max;
    double avg_size_P = 0.0;
    double avg_size_E = 0.0;
};

struct SizeCheckpoint {
    std::int64_t iteration = 0;
    double avg_size_P = 0.0;
    double avg_size_E = 0.0;
};

struct SamplerRun {
    SfsChain chain;
    SfsEnvelope envelope;
    std::vector<SizeCheckpoint> size_history;  // one entry per size check
    std::vector<std::string> warnings;         // degeneracies seen (deduplicated)
    bool converged = false;                    // false iff stopped by max_iterations
    bool input_was_normalized = false;
    bool degenerate_pair_seen = false;         // some interval was unbounded or clamped
};

// A_ij(lambda) and its inverse A_ij(-lambda/(1-lambda)), as dense N x N
// matrices. Throws ContractViolation when lambda = 1 (singular) and
// ConfigError on bad indices.
std::pair<Mat, Mat> build_transform(const TransformSpec& spec);

// Endpoints of the feasible interval for mixing column i with column j:
//   lo = max over {k : P_kj > P_ki} of P_ki / (P_ki - P_kj)
//   hi = min over {g : E_ig + E_jg > 0} of E_jg / (E_ig + E_jg)
// An empty lower set means columns i and j of P are identical; lo is
// capped at kUnboundedLoCap and flagged. hi reaching 1 (row i of E zero)
// is clamped and flagged. Throws DegenerateComponent when rows i and j of
// E are both identically zero.
FeasibleInterval feasible_interval(const Factorization& f, int i, int j);

// Draws x ~ Beta(beta, beta) and returns x*hi + (1-x)*lo.
double sample_lambda(const FeasibleInterval& interval, double beta, RngStream& rng);

// Sequential affine-mixing sampler. Starting from f0 (normalized first if
// its column sums are off), each sweep mixes every column i with a random
// partner j using a beta-distributed coefficient in the feasible interval,
// updating E so the product is invariant. Sweeps are recorded into the
// chain (subject to thinning) and into the running envelope (always).
// Stops when avg_size_P has grown by less than cfg.epsilon since the
// previous check (and avg_size_E too when track_E_size is set), or at
// max_iterations.
SamplerRun run_sampler(const Factorization& f0, const SamplerConfig& cfg);

// Mean per-entry width: sum(max - min) / number of entries.
double sfs_size(const Mat& min_grid, const Mat& max_grid);

}  // namespace sfs
