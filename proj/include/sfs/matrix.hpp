#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sfs/errors.hpp"

namespace sfs {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Entries in [-kNegClampTol, 0) are floating-point noise and may be snapped
// to zero; anything below is a genuine negativity and is rejected.
inline constexpr double kNegClampTol = 1e-12;

// Column sums of a normalized signature matrix must stay within this of 1.
inline constexpr double kColSumTol = 1e-9;

// Nonnegative data matrix with row/column labels. Rows index the K
// categories (mutation types), columns the G observations (genomes).
// Entries are integer counts when read from data and arbitrary
// nonnegative reals when produced by a reconstruction.
struct CountMatrix {
    Mat values;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

// Builds a CountMatrix from raw values, generating placeholder labels.
CountMatrix make_count_matrix(Mat values);

// Validates dimensions, label counts and nonnegativity.
void validate(const CountMatrix& m);

// A rank-N factorization: signatures P (K x N) and exposures E (N x G).
struct Factorization {
    Mat P;
    Mat E;
    int rank = 0;

    Eigen::Index k() const { return P.rows(); }
    Eigen::Index g() const { return E.cols(); }
};

Factorization make_factorization(Mat P, Mat E);

// True if every column sum of P is within kColSumTol of 1.
bool columns_normalized(const Mat& P, double tol = kColSumTol);

// Snaps entries in [-kNegClampTol, 0) to zero in place. Throws
// ContractViolation if any entry lies below -kNegClampTol. `what`
// names the matrix in the error message.
void clamp_nonnegative(Mat& m, const char* what);

// Same check without modification; used on caller-supplied inputs.
void require_nonnegative(const Mat& m, const char* what);

// max_kg |a - b|; shapes must agree.
double max_abs_diff(const Mat& a, const Mat& b);

}  // namespace sfs
