#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "helpers.hpp"
#include "sfs/experiments.hpp"
#include "sfs/model.hpp"
#include "sfs/nmf.hpp"

using namespace sfs;
using sfs::test::random_factorization;

namespace {

// Straightforward reference evaluation of the objective, kept independent
// of gkl_divergence.
double reference_gkl(const Mat& m, const Mat& r) {
    double total = 0.0;
    for (Eigen::Index g = 0; g < m.cols(); ++g)
        for (Eigen::Index k = 0; k < m.rows(); ++k) {
            const double mv = m(k, g), rv = r(k, g);
            total += (mv > 0 ? mv * std::log(mv / rv) : 0.0) - mv + rv;
        }
    return total;
}

}  // namespace

TEST_CASE("lee_seung_step fixes an exact factorization") {
    Mat m(1, 1), p(1, 1), e(1, 1);
    m << 6;
    p << 2;
    e << 3;
    const auto out = lee_seung_step(m, make_factorization(p, e));
    CHECK(out.P(0, 0) == 2.0);
    CHECK(out.E(0, 0) == 3.0);
}

TEST_CASE("lee_seung_step solves the scalar problem in one pass") {
    Mat m(1, 1), p(1, 1), e(1, 1);
    m << 4;
    p << 1;
    e << 2;
    const auto out = lee_seung_step(m, make_factorization(p, e));
    CHECK(out.E(0, 0) == 4.0);
    CHECK(out.P(0, 0) == 1.0);
}

TEST_CASE("lee_seung_step never increases the divergence") {
    RngStream rng(70);
    Mat m(5, 4);
    for (int g = 0; g < 4; ++g)
        for (int k = 0; k < 5; ++k) m(k, g) = rng.uniform(0.0, 8.0);
    auto f = random_factorization(5, 4, 2, 71);
    double d = reference_gkl(m, f.P * f.E);
    for (int it = 0; it < 100; ++it) {
        f = lee_seung_step(m, f);
        const double d_next = reference_gkl(m, f.P * f.E);
        CHECK(d_next <= d + 1e-12 * (1.0 + std::abs(d)));
        d = d_next;
    }
}

TEST_CASE("lee_seung_step rejects a zero reconstruction under data") {
    Mat m(2, 1), p(2, 1), e(1, 1);
    m << 1, 1;
    p << 0, 1;
    e << 1;
    CHECK_THROWS_AS(lee_seung_step(m, make_factorization(p, e)), ContractViolation);
}

TEST_CASE("fit recovers exact rank-1 data") {
    Vec p(4), e(5);
    p << 0.4, 1.2, 0.7, 0.1;
    e << 3, 1, 4, 1, 5;
    const Mat m = p * e.transpose();
    FitConfig cfg;
    cfg.rank = 1;
    cfg.seed = 2;
    const auto res = fit(m, cfg);
    CHECK(res.divergence < 1e-8);
    CHECK(max_abs_diff(res.best.P * res.best.E, m) <= 1e-6 * m.maxCoeff());
}

TEST_CASE("fit defaults to five initializations") {
    CHECK(FitConfig{}.n_inits == 5);
    Vec p(3), e(3);
    p << 1, 2, 3;
    e << 1, 1, 1;
    FitConfig cfg;
    cfg.rank = 1;
    const auto res = fit(Mat(p * e.transpose()), cfg);
    CHECK(res.per_init_divergences.size() == 5);
    CHECK(res.iterations_used.size() == 5);
}

TEST_CASE("fit recovers separable ground truth") {
    const auto truth = make_separable(10, 8, 3, 5);
    const Mat m = truth.P * truth.E;
    FitConfig cfg;
    cfg.rank = 3;
    cfg.seed = 6;
    cfg.rel_tol = 1e-12;
    cfg.max_iter = 20000;
    const auto res = fit(m, cfg);
    const auto perm = match_components(truth.P, res.best.P);
    for (int n = 0; n < 3; ++n) {
        const auto a = truth.P.col(n);
        const auto b = res.best.P.col(perm[n]);
        CHECK(a.dot(b) / (a.norm() * b.norm()) > 0.999);
    }
}

TEST_CASE("fit is deterministic and reports the minimum") {
    RngStream rng(90);
    Mat m(6, 5);
    for (int g = 0; g < 5; ++g)
        for (int k = 0; k < 6; ++k) m(k, g) = std::floor(rng.uniform(0.0, 30.0));
    FitConfig cfg;
    cfg.rank = 2;
    cfg.seed = 11;
    cfg.max_iter = 400;
    const auto a = fit(m, cfg);
    const auto b = fit(m, cfg);
    CHECK(a.divergence == b.divergence);
    CHECK(a.per_init_divergences == b.per_init_divergences);
    CHECK(max_abs_diff(a.best.P, b.best.P) == 0.0);
    CHECK(max_abs_diff(a.best.E, b.best.E) == 0.0);
    double lowest = a.per_init_divergences[0];
    for (double d : a.per_init_divergences) lowest = std::min(lowest, d);
    CHECK(a.divergence == lowest);
    CHECK(columns_normalized(a.best.P));
}

TEST_CASE("fit initialization streams form a prefix") {
    RngStream rng(91);
    Mat m(5, 4);
    for (int g = 0; g < 4; ++g)
        for (int k = 0; k < 5; ++k) m(k, g) = std::floor(rng.uniform(0.0, 20.0));
    FitConfig small;
    small.rank = 2;
    small.seed = 13;
    small.n_inits = 3;
    small.max_iter = 300;
    FitConfig large = small;
    large.n_inits = 7;
    const auto a = fit(m, small);
    const auto b = fit(m, large);
    for (int i = 0; i < 3; ++i) CHECK(a.per_init_divergences[i] == b.per_init_divergences[i]);
    CHECK(b.divergence <= a.divergence);
}

TEST_CASE("fit divergence traces are monotone") {
    RngStream rng(92);
    Mat m(8, 6);
    for (int g = 0; g < 6; ++g)
        for (int k = 0; k < 8; ++k) m(k, g) = std::floor(rng.uniform(0.0, 40.0));
    FitConfig cfg;
    cfg.rank = 3;
    cfg.seed = 14;
    cfg.n_inits = 2;
    cfg.max_iter = 200;
    cfg.record_traces = true;
    const auto res = fit(m, cfg);
    REQUIRE(res.traces.size() == 2);
    for (const auto& trace : res.traces) {
        for (std::size_t t = 1; t < trace.size(); ++t)
            CHECK(trace[t] <= trace[t - 1] + 1e-12 * (1.0 + std::abs(trace[t - 1])));
    }
}

TEST_CASE("fit validates the rank") {
    Mat m = Mat::Constant(3, 2, 1.0);
    FitConfig cfg;
    cfg.rank = 3;
    CHECK_THROWS_AS(fit(m, cfg), ConfigError);
}

TEST_CASE("fit results do not depend on the worker thread count") {
    RngStream rng(93);
    Mat m(7, 5);
    for (int g = 0; g < 5; ++g)
        for (int k = 0; k < 7; ++k) m(k, g) = std::floor(rng.uniform(0.0, 25.0));
    FitConfig cfg;
    cfg.rank = 2;
    cfg.seed = 15;
    cfg.n_inits = 4;
    cfg.max_iter = 200;

    setenv("SFSKIT_THREADS", "1", 1);
    const auto serial = fit(m, cfg);
    setenv("SFSKIT_THREADS", "4", 1);
    const auto parallel = fit(m, cfg);
    unsetenv("SFSKIT_THREADS");

    CHECK(serial.per_init_divergences == parallel.per_init_divergences);
    CHECK(max_abs_diff(serial.best.P, parallel.best.P) == 0.0);
    CHECK(max_abs_diff(serial.best.E, parallel.best.E) == 0.0);
}
