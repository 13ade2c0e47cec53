#include "sfs/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sfs {

CountMatrix make_count_matrix(Mat values) {
    CountMatrix m;
    m.values = std::move(values);
    m.row_labels.reserve(m.values.rows());
    m.col_labels.reserve(m.values.cols());
    for (Eigen::Index k = 0; k < m.values.rows(); ++k) m.row_labels.push_back("row" + std::to_string(k));
    for (Eigen::Index g = 0; g < m.values.cols(); ++g) m.col_labels.push_back("col" + std::to_string(g));
    return m;
}

void validate(const CountMatrix& m) {
    if (m.rows() < 1 || m.cols() < 1) throw ShapeError("count matrix must be at least 1x1");
    if (static_cast<Eigen::Index>(m.row_labels.size()) != m.rows())
        throw ShapeError("row label count does not match matrix rows");
    if (static_cast<Eigen::Index>(m.col_labels.size()) != m.cols())
        throw ShapeError("column label count does not match matrix columns");
    require_nonnegative(m.values, "count matrix");
}

Factorization make_factorization(Mat P, Mat E) {
    if (P.cols() != E.rows()) throw ShapeError("factor dimensions do not match: P has " +
                                               std::to_string(P.cols()) + " columns, E has " +
                                               std::to_string(E.rows()) + " rows");
    if (P.cols() > std::min(P.rows(), E.cols()))
        throw ShapeError("rank " + std::to_string(P.cols()) + " exceeds min(K,G) = " +
                         std::to_string(std::min(P.rows(), E.cols())));
    Factorization f;
    f.rank = static_cast<int>(P.cols());
    f.P = std::move(P);
    f.E = std::move(E);
    return f;
}

bool columns_normalized(const Mat& P, double tol) {
    for (Eigen::Index n = 0; n < P.cols(); ++n) {
        if (std::abs(P.col(n).sum() - 1.0) > tol) return false;
    }
    return true;
}

void clamp_nonnegative(Mat& m, const char* what) {
    double* data = m.data();
    const Eigen::Index size = m.size();
    for (Eigen::Index idx = 0; idx < size; ++idx) {
        if (data[idx] < 0.0) {
            if (data[idx] < -kNegClampTol) {
                throw ContractViolation(std::string(what) + ": entry " + std::to_string(data[idx]) +
                                        " below the negativity clamp tolerance");
            }
            data[idx] = 0.0;
        }
    }
}

void require_nonnegative(const Mat& m, const char* what) {
    const double lowest = m.size() == 0 ? 0.0 : m.minCoeff();
    if (lowest < -kNegClampTol || std::isnan(lowest)) {
        throw ContractViolation(std::string(what) + ": negative entry " + std::to_string(lowest));
    }
}

double max_abs_diff(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("max_abs_diff: shape mismatch");
    if (a.size() == 0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace sfs
