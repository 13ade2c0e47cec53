#pragma once

#include <vector>

#include "sfs/matrix.hpp"

namespace sfs {

// Rank-N truncated singular value decomposition X ~ U diag(sigma) V'.
struct TruncatedSvd {
    Mat U;              // K x N, orthonormal columns
    Vec sigma;          // N positive values, non-increasing
    Mat V;              // G x N, orthonormal columns
    std::vector<bool> flipped;  // per-column sign flips applied to (U, V)

    int rank() const { return static_cast<int>(sigma.size()); }
};

// Best rank-N approximation in the least-squares sense. Column signs
// follow a fixed convention (largest-magnitude entry of each U column is
// positive) so results are reproducible. Throws ConfigError when N exceeds
// min(K, G) or the numerical rank (sigma_N / sigma_1 < 1e-12).
TruncatedSvd truncated_svd(const Mat& x, int n);

// Flips the leading (U, V) column pair so that the first row of U' P_ref
// is positive, making the alpha normalization admissible for the reference
// solution. Only the leading column enters that row; the remaining columns
// keep the default convention.
TruncatedSvd align_to_reference(TruncatedSvd svd, const Mat& p_ref);

enum class AlphaSide { P, E };

// Feasible solutions in SVD coordinates: one point in R^(N-1) per
// component.
struct AlphaCloud {
    AlphaSide side = AlphaSide::P;
    int rank = 0;
    std::vector<Vec> points;  // points[n] has length N-1
};

// P-view coordinates: T = U' P_tilde D2^-1 with D2 = diag of the first row
// of U' P_tilde; point n is (T_2n, ..., T_Nn). Throws ContractViolation
// when a first-row entry is within 1e-10 of zero (normalization
// undefined).
AlphaCloud alpha_of_p(const TruncatedSvd& svd, const Mat& p_tilde);

// E-view coordinates: rows of R = E_tilde V diag(sigma)^-1 (so that
// E_tilde = R diag(sigma) V' when E_tilde lies in the row space),
// normalized to unit first entry; point n is the remaining N-1 entries of
// row n.
AlphaCloud alpha_of_e(const TruncatedSvd& svd, const Mat& e_tilde);

// The N x N coefficient matrix with unit first row whose columns are the
// cloud's points; inverse of the extraction in alpha_of_p.
Mat alpha_to_t(const AlphaCloud& cloud);

// Maps a coefficient matrix T (unit first row, invertible) back to a
// factorization: P = U T D1^-1, E = D1 T^-1 diag(sigma) V' with
// D1 = diag(1' U T), so P has unit column sums and P E = U diag(sigma) V'.
// The result may have negative entries when T lies outside the feasible
// region; use min_entry() to detect this. Throws ContractViolation for a
// singular T or a nonpositive column-sum diagonal.
Factorization reconstruct_from_alpha(const TruncatedSvd& svd, const Mat& t);

// Smallest entry across P and E; negative values flag an infeasible
// reconstruction.
double min_entry(const Factorization& f);

}  // namespace sfs
