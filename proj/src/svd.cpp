#include "sfs/svd.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <string>

namespace sfs {

namespace {
constexpr double kRankRatioTol = 1e-12;
constexpr double kAlphaDenomTol = 1e-10;
}  // namespace

TruncatedSvd truncated_svd(const Mat& x, int n) {
    if (n < 1) throw ConfigError("truncated_svd: rank must be positive");
    if (n > std::min(x.rows(), x.cols()))
        throw ConfigError("truncated_svd: rank " + std::to_string(n) + " exceeds min(K,G)");
    if (!x.allFinite()) throw ContractViolation("truncated_svd: input has non-finite entries");

    Eigen::BDCSVD<Mat> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& all_sigma = svd.singularValues();
    if (all_sigma(0) <= 0.0 || all_sigma(n - 1) / all_sigma(0) < kRankRatioTol)
        throw ConfigError("truncated_svd: requested rank " + std::to_string(n) +
                          " exceeds the numerical rank (sigma ratio " +
                          std::to_string(all_sigma(n - 1) / all_sigma(0)) + ")");

    TruncatedSvd out;
    out.U = svd.matrixU().leftCols(n);
    out.sigma = all_sigma.head(n);
    out.V = svd.matrixV().leftCols(n);
    out.flipped.assign(n, false);

    // Fixed sign convention: the largest-magnitude entry of each U column is
    // positive (first such entry on ties).
    for (int c = 0; c < n; ++c) {
        Eigen::Index arg = 0;
        out.U.col(c).cwiseAbs().maxCoeff(&arg);
        if (out.U(arg, c) < 0.0) {
            out.U.col(c) = -out.U.col(c);
            out.V.col(c) = -out.V.col(c);
            out.flipped[c] = true;
        }
    }
    return out;
}

TruncatedSvd align_to_reference(TruncatedSvd svd, const Mat& p_ref) {
    if (p_ref.rows() != svd.U.rows()) throw ShapeError("align_to_reference: row count mismatch");
    // Only U's leading column enters the first row of U' P; flip it when
    // that row comes out negative for the reference.
    const Vec first_row = p_ref.transpose() * svd.U.col(0);
    if (first_row.sum() < 0.0) {
        svd.U.col(0) = -svd.U.col(0);
        svd.V.col(0) = -svd.V.col(0);
        svd.flipped[0] = !svd.flipped[0];
    }
    return svd;
}

AlphaCloud alpha_of_p(const TruncatedSvd& svd, const Mat& p_tilde) {
    const int n = svd.rank();
    if (p_tilde.rows() != svd.U.rows() || p_tilde.cols() != n)
        throw ShapeError("alpha_of_p: P has wrong shape");
    const Mat coeff = svd.U.transpose() * p_tilde;  // N x N
    AlphaCloud cloud;
    cloud.side = AlphaSide::P;
    cloud.rank = n;
    cloud.points.reserve(n);
    for (int c = 0; c < n; ++c) {
        const double denom = coeff(0, c);
        if (std::abs(denom) <= kAlphaDenomTol)
            throw ContractViolation("alpha_of_p: first-row coefficient of component " +
                                    std::to_string(c) + " vanishes; normalization undefined");
        cloud.points.push_back(coeff.col(c).tail(n - 1) / denom);
    }
    return cloud;
}

AlphaCloud alpha_of_e(const TruncatedSvd& svd, const Mat& e_tilde) {
    const int n = svd.rank();
    if (e_tilde.cols() != svd.V.rows() || e_tilde.rows() != n)
        throw ShapeError("alpha_of_e: E has wrong shape");
    Mat coeff = e_tilde * svd.V;  // N x N, rows index components
    for (int c = 0; c < n; ++c) coeff.col(c) /= svd.sigma(c);
    AlphaCloud cloud;
    cloud.side = AlphaSide::E;
    cloud.rank = n;
    cloud.points.reserve(n);
    for (int r = 0; r < n; ++r) {
        const double denom = coeff(r, 0);
        if (std::abs(denom) <= kAlphaDenomTol)
            throw ContractViolation("alpha_of_e: first coefficient of component " +
                                    std::to_string(r) + " vanishes; normalization undefined");
        cloud.points.push_back(coeff.row(r).tail(n - 1).transpose() / denom);
    }
    return cloud;
}

Mat alpha_to_t(const AlphaCloud& cloud) {
    const int n = cloud.rank;
    if (static_cast<int>(cloud.points.size()) != n)
        throw ShapeError("alpha_to_t: need exactly one point per component");
    Mat t(n, n);
    for (int c = 0; c < n; ++c) {
        if (cloud.points[c].size() != n - 1) throw ShapeError("alpha_to_t: point dimension mismatch");
        t(0, c) = 1.0;
        t.col(c).tail(n - 1) = cloud.points[c];
    }
    return t;
}

Factorization reconstruct_from_alpha(const TruncatedSvd& svd, const Mat& t) {
    const int n = svd.rank();
    if (t.rows() != n || t.cols() != n) throw ShapeError("reconstruct_from_alpha: T must be N x N");
    for (int c = 0; c < n; ++c) {
        if (std::abs(t(0, c) - 1.0) > 1e-9)
            throw ContractViolation("reconstruct_from_alpha: first row of T must be all ones");
    }
    Eigen::FullPivLU<Mat> lu(t);
    if (!lu.isInvertible()) throw ContractViolation("reconstruct_from_alpha: T is singular");

    const Mat ut = svd.U * t;  // K x N
    const Vec col_sums = ut.colwise().sum();
    for (int c = 0; c < n; ++c) {
        if (!(col_sums(c) > 0.0))
            throw ContractViolation("reconstruct_from_alpha: column " + std::to_string(c) +
                                    " of U T has nonpositive sum " + std::to_string(col_sums(c)) +
                                    "; reconstruction leaves the feasible cone");
    }

    Mat p = ut * col_sums.cwiseInverse().asDiagonal();
    Mat e = col_sums.asDiagonal() * lu.inverse() * svd.sigma.asDiagonal() * svd.V.transpose();
    return make_factorization(std::move(p), std::move(e));
}

double min_entry(const Factorization& f) {
    double lo = f.P.size() ? f.P.minCoeff() : 0.0;
    if (f.E.size()) lo = std::min(lo, f.E.minCoeff());
    return lo;
}

}  // namespace sfs
