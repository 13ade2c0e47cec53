#include "sfs/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace sfs {

double gkl_divergence(const Mat& m, const Mat& r) {
    if (m.rows() != r.rows() || m.cols() != r.cols())
        throw ShapeError("gkl_divergence: shapes differ (" + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + " vs " + std::to_string(r.rows()) + "x" +
                         std::to_string(r.cols()) + ")");
    require_nonnegative(m, "gkl data");
    require_nonnegative(r, "gkl reconstruction");
    double total = 0.0;
    for (Eigen::Index g = 0; g < m.cols(); ++g) {
        for (Eigen::Index k = 0; k < m.rows(); ++k) {
            const double mv = m(k, g);
            const double rv = r(k, g);
            if (mv > 0.0) {
                if (rv <= 0.0)
                    throw InfiniteDivergence("gkl_divergence: M(" + std::to_string(k) + "," +
                                             std::to_string(g) + ") > 0 where reconstruction is 0");
                if (mv != rv) total += mv * std::log(mv / rv) - mv + rv;
            } else {
                total += rv;  // 0 log 0 := 0
            }
        }
    }
    return total;
}

double gkl_divergence(const CountMatrix& m, const Mat& r) { return gkl_divergence(m.values, r); }

Factorization normalize_columns(const Factorization& f) {
    Factorization out = f;
    for (int n = 0; n < f.rank; ++n) {
        const double s = f.P.col(n).sum();
        if (!(s > 0.0))
            throw DegenerateComponent("normalize_columns: column " + std::to_string(n) +
                                      " of P has nonpositive sum " + std::to_string(s));
        out.P.col(n) /= s;
        out.E.row(n) *= s;
    }
    return out;
}

namespace {

// Pairwise cosine similarities; throws on zero columns.
Mat cosine_matrix(const Mat& p_ref, const Mat& p_other) {
    const Eigen::Index n = p_ref.cols();
    Vec norm_ref(n), norm_other(n);
    for (Eigen::Index c = 0; c < n; ++c) {
        norm_ref(c) = p_ref.col(c).norm();
        norm_other(c) = p_other.col(c).norm();
        if (norm_ref(c) == 0.0)
            throw DegenerateComponent("match_components: reference column " + std::to_string(c) + " is zero");
        if (norm_other(c) == 0.0)
            throw DegenerateComponent("match_components: column " + std::to_string(c) + " is zero");
    }
    Mat cos = p_ref.transpose() * p_other;
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) cos(a, b) /= norm_ref(a) * norm_other(b);
    return cos;
}

// Lexicographic scan of all permutations; first strict maximizer wins.
std::vector<int> match_enumerate(const Mat& cos) {
    const int n = static_cast<int>(cos.rows());
    std::vector<int> perm(n), best(n);
    std::iota(perm.begin(), perm.end(), 0);
    best = perm;
    double best_total = -std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (int a = 0; a < n; ++a) total += cos(a, perm[a]);
        if (total > best_total) {
            best_total = total;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Exact assignment over subsets: g[mask] is the best total for assigning
// reference columns popcount(mask).. to the columns outside mask. The
// forward walk picks the smallest column index achieving the table value,
// which yields the lexicographically smallest optimal permutation.
std::vector<int> match_subset_dp(const Mat& cos) {
    const int n = static_cast<int>(cos.rows());
    const std::size_t full = (std::size_t{1} << n) - 1;
    std::vector<double> g(full + 1, 0.0);
    for (std::size_t mask = full; mask-- > 0;) {
        const int row = std::popcount(mask);
        double best = -std::numeric_limits<double>::infinity();
        for (int col = 0; col < n; ++col) {
            if (mask & (std::size_t{1} << col)) continue;
            const double v = cos(row, col) + g[mask | (std::size_t{1} << col)];
            if (v > best) best = v;
        }
        g[mask] = best;
    }
    std::vector<int> perm(n);
    std::size_t mask = 0;
    for (int row = 0; row < n; ++row) {
        for (int col = 0; col < n; ++col) {
            if (mask & (std::size_t{1} << col)) continue;
            if (cos(row, col) + g[mask | (std::size_t{1} << col)] == g[mask]) {
                perm[row] = col;
                mask |= std::size_t{1} << col;
                break;
            }
        }
    }
    return perm;
}

}  // namespace

std::vector<int> match_components(const Mat& p_ref, const Mat& p_other) {
    if (p_ref.rows() != p_other.rows() || p_ref.cols() != p_other.cols())
        throw ShapeError("match_components: shapes differ");
    const int n = static_cast<int>(p_ref.cols());
    if (n == 0) return {};
    if (n > 20) throw ConfigError("match_components: rank " + std::to_string(n) + " exceeds the supported 20");
    const Mat cos = cosine_matrix(p_ref, p_other);
    return n <= 8 ? match_enumerate(cos) : match_subset_dp(cos);
}

}  // namespace sfs
