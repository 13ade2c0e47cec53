#pragma once

#include <vector>

#include "sfs/matrix.hpp"

namespace sfs {

// Generalised Kullback-Leibler divergence
//   D(M|R) = sum_kg M_kg log(M_kg / R_kg) - M_kg + R_kg
// with the zero-count convention 0 log 0 = 0. This is the Poisson negative
// log-likelihood of M under mean R, up to a constant in M.
//
// Throws ShapeError on dimension mismatch and InfiniteDivergence when some
// M_kg > 0 meets R_kg = 0.
double gkl_divergence(const CountMatrix& m, const Mat& r);
double gkl_divergence(const Mat& m, const Mat& r);

// Rescales so every column of P sums to 1, scaling the rows of E by the
// former column sums; the product P*E is unchanged. Throws
// DegenerateComponent (naming the column) if a column of P has
// nonpositive sum.
Factorization normalize_columns(const Factorization& f);

// Returns the permutation pi maximizing
//   sum_n cosine(P_ref[:,n], P_other[:,pi[n]])
// over all permutations; result[n] is the column of P_other assigned to
// reference column n. Exact: exhaustive enumeration for N <= 8, exact
// assignment by subset dynamic programming for 8 < N <= 20. Among equally
// good permutations the lexicographically smallest is returned.
//
// Throws DegenerateComponent on a zero column (cosine undefined) and
// ConfigError for N > 20.
std::vector<int> match_components(const Mat& p_ref, const Mat& p_other);

}  // namespace sfs
