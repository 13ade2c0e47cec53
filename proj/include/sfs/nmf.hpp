#pragma once

#include <cstdint>
#include <vector>

#include "sfs/matrix.hpp"
#include "sfs/model.hpp"

namespace sfs {

struct FitConfig {
    int rank = 2;
    int n_inits = 5;
    std::int64_t max_iter = 10'000;
    // Stop when (D_prev - D) / (1 + D_prev) < rel_tol.
    double rel_tol = 1e-8;
    std::uint64_t seed = 0;
    // Keep the full divergence trace of every initialization (off by
    // default; traces can be large).
    bool record_traces = false;
};

struct FitResult {
    Factorization best;  // column-normalized
    double divergence = 0.0;
    int best_init = 0;
    std::vector<double> per_init_divergences;
    std::vector<std::int64_t> iterations_used;
    std::vector<std::vector<double>> traces;  // per init, when recorded
};

// One multiplicative update pass:
//   E <- E .* (P' (M ./ PE)) ./ (P' 1)
//   P <- P .* ((M ./ P E_new) E_new') ./ (1 E_new')
// The generalised KL divergence never increases. Throws ContractViolation
// when PE has a zero entry where M is nonzero.
Factorization lee_seung_step(const Mat& m, const Factorization& f);

// Multi-start fit: n_inits independent runs from strictly positive random
// initializations (entries uniform on (0.1, 1.9), P column-normalized),
// each iterated until the relative divergence change drops below rel_tol
// or max_iter. Initialization i draws from the substream (seed, i), so
// results are deterministic and the first k inits of a larger run equal a
// k-init run. Returns the run with the smallest divergence (lowest index
// on ties), column-normalized.
FitResult fit(const CountMatrix& m, const FitConfig& cfg);
FitResult fit(const Mat& m, const FitConfig& cfg);

}  // namespace sfs
