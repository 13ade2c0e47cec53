// Python bindings for the core operations: fitting, feasible-set sampling,
// the rank-2 closed form, SVD alpha coordinates and the Poisson bootstrap.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sfs/experiments.hpp"
#include "sfs/model.hpp"
#include "sfs/nmf.hpp"
#include "sfs/rank2.hpp"
#include "sfs/sampler.hpp"
#include "sfs/svd.hpp"

namespace py = pybind11;
using namespace sfs;

namespace {

Mat alpha_points_matrix(const AlphaCloud& cloud) {
    Mat points(cloud.rank, std::max(cloud.rank - 1, 0));
    for (int c = 0; c < cloud.rank; ++c) points.row(c) = cloud.points[c].transpose();
    return points;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Poisson-KL NMF fitting and feasible-solution-set sampling";

    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseFileError", PyExc_ValueError);
    py::register_exception<InfiniteDivergence>(m, "InfiniteDivergenceError", PyExc_ArithmeticError);
    py::register_exception<DegenerateComponent>(m, "DegenerateComponentError", PyExc_RuntimeError);
    py::register_exception<ContractViolation>(m, "ContractViolationError", PyExc_RuntimeError);

    py::class_<FeasibleInterval>(m, "FeasibleInterval")
        .def_readonly("lo", &FeasibleInterval::lo)
        .def_readonly("hi", &FeasibleInterval::hi)
        .def_readonly("lo_unbounded", &FeasibleInterval::lo_unbounded)
        .def_readonly("hi_clamped", &FeasibleInterval::hi_clamped)
        .def("__repr__", [](const FeasibleInterval& iv) {
            return "FeasibleInterval(lo=" + std::to_string(iv.lo) + ", hi=" + std::to_string(iv.hi) + ")";
        });

    py::class_<FitResult>(m, "FitResult")
        .def_property_readonly("P", [](const FitResult& r) { return r.best.P; })
        .def_property_readonly("E", [](const FitResult& r) { return r.best.E; })
        .def_readonly("divergence", &FitResult::divergence)
        .def_readonly("best_init", &FitResult::best_init)
        .def_readonly("per_init_divergences", &FitResult::per_init_divergences)
        .def_readonly("iterations_used", &FitResult::iterations_used)
        .def_readonly("traces", &FitResult::traces);

    py::class_<SamplerRun>(m, "SamplerRun")
        .def_property_readonly("P_min", [](const SamplerRun& r) { return r.envelope.P_min; })
        .def_property_readonly("P_max", [](const SamplerRun& r) { return r.envelope.P_max; })
        .def_property_readonly("E_min", [](const SamplerRun& r) { return r.envelope.E_min; })
        .def_property_readonly("E_max", [](const SamplerRun& r) { return r.envelope.E_max; })
        .def_property_readonly("avg_size_P", [](const SamplerRun& r) { return r.envelope.avg_size_P; })
        .def_property_readonly("avg_size_E", [](const SamplerRun& r) { return r.envelope.avg_size_E; })
        .def_property_readonly("samples_P", [](const SamplerRun& r) { return r.chain.samples_P; })
        .def_property_readonly("samples_E", [](const SamplerRun& r) { return r.chain.samples_E; })
        .def_property_readonly("thinning", [](const SamplerRun& r) { return r.chain.thinning; })
        .def_property_readonly("iterations", [](const SamplerRun& r) { return r.chain.iterations; })
        .def_readonly("converged", &SamplerRun::converged)
        .def_readonly("warnings", &SamplerRun::warnings)
        .def_property_readonly("size_history", [](const SamplerRun& r) {
            std::vector<std::tuple<std::int64_t, double, double>> out;
            out.reserve(r.size_history.size());
            for (const auto& cp : r.size_history)
                out.emplace_back(cp.iteration, cp.avg_size_P, cp.avg_size_E);
            return out;
        });

    py::class_<Rank2Sfs>(m, "Rank2Sfs")
        .def_readonly("interval_12", &Rank2Sfs::interval_12)
        .def_readonly("interval_21", &Rank2Sfs::interval_21)
        .def_property_readonly("P_min", [](const Rank2Sfs& r) { return r.envelope.P_min; })
        .def_property_readonly("P_max", [](const Rank2Sfs& r) { return r.envelope.P_max; })
        .def_property_readonly("E_min", [](const Rank2Sfs& r) { return r.envelope.E_min; })
        .def_property_readonly("E_max", [](const Rank2Sfs& r) { return r.envelope.E_max; })
        .def_property_readonly("avg_size_P", [](const Rank2Sfs& r) { return r.envelope.avg_size_P; })
        .def_property_readonly("avg_size_E", [](const Rank2Sfs& r) { return r.envelope.avg_size_E; });

    py::class_<TruncatedSvd>(m, "TruncatedSvd")
        .def_readonly("U", &TruncatedSvd::U)
        .def_readonly("sigma", &TruncatedSvd::sigma)
        .def_readonly("V", &TruncatedSvd::V)
        .def_property_readonly("rank", &TruncatedSvd::rank);

    m.def("gkl_divergence",
          [](const Mat& m_, const Mat& r) { return gkl_divergence(m_, r); },
          py::arg("m"), py::arg("r"),
          "Generalised Kullback-Leibler divergence with the 0 log 0 = 0 convention.");

    m.def("normalize_columns",
          [](const Mat& p, const Mat& e) {
              const auto out = normalize_columns(make_factorization(p, e));
              return py::make_tuple(out.P, out.E);
          },
          py::arg("p"), py::arg("e"),
          "Rescale so P has unit column sums, preserving the product P @ E.");

    m.def("match_components",
          [](const Mat& p_ref, const Mat& p_other) { return match_components(p_ref, p_other); },
          py::arg("p_ref"), py::arg("p_other"),
          "Permutation of p_other columns maximizing total cosine similarity.");

    m.def("fit",
          [](const Mat& m_, int rank, int n_inits, std::int64_t max_iter, double rel_tol,
             std::uint64_t seed, bool record_traces) {
              FitConfig cfg;
              cfg.rank = rank;
              cfg.n_inits = n_inits;
              cfg.max_iter = max_iter;
              cfg.rel_tol = rel_tol;
              cfg.seed = seed;
              cfg.record_traces = record_traces;
              return fit(m_, cfg);
          },
          py::arg("m"), py::arg("rank"), py::arg("n_inits") = 5, py::arg("max_iter") = 10000,
          py::arg("rel_tol") = 1e-8, py::arg("seed") = 0, py::arg("record_traces") = false,
          "Multi-start multiplicative-update fit minimizing the generalised KL divergence.");

    m.def("lee_seung_step",
          [](const Mat& m_, const Mat& p, const Mat& e) {
              const auto out = lee_seung_step(m_, make_factorization(p, e));
              return py::make_tuple(out.P, out.E);
          },
          py::arg("m"), py::arg("p"), py::arg("e"), "One multiplicative update of (P, E).");

    m.def("build_transform",
          [](int rank, int i, int j, double lam) {
              auto [a, a_inv] = build_transform({rank, i, j, lam});
              return py::make_tuple(a, a_inv);
          },
          py::arg("rank"), py::arg("i"), py::arg("j"), py::arg("lam"),
          "Column-mixing matrix A_ij(lambda) and its inverse.");

    m.def("feasible_interval",
          [](const Mat& p, const Mat& e, int i, int j) {
              return feasible_interval(make_factorization(p, e), i, j);
          },
          py::arg("p"), py::arg("e"), py::arg("i"), py::arg("j"),
          "Interval of mixing coefficients keeping both factors nonnegative.");

    m.def("sample_sfs",
          [](const Mat& p, const Mat& e, double beta, double epsilon, std::int64_t check_every,
             std::uint64_t seed, std::int64_t max_iterations, bool track_e_size, std::int64_t thin) {
              SamplerConfig cfg;
              cfg.beta = beta;
              cfg.epsilon = epsilon;
              cfg.check_every = check_every;
              cfg.seed = seed;
              cfg.max_iterations = max_iterations;
              cfg.track_E_size = track_e_size;
              cfg.thin = thin;
              return run_sampler(make_factorization(p, e), cfg);
          },
          py::arg("p"), py::arg("e"), py::arg("beta") = 0.5, py::arg("epsilon") = 1e-10,
          py::arg("check_every") = 1000, py::arg("seed") = 0,
          py::arg("max_iterations") = 10'000'000, py::arg("track_e_size") = false,
          py::arg("thin") = 1,
          "Sequential affine-mixing sampler over the set of feasible solutions.");

    m.def("rank2_sfs",
          [](const Mat& p, const Mat& e) { return rank2_sfs(make_factorization(p, e)); },
          py::arg("p"), py::arg("e"), "Closed-form SFS envelope for a rank-2 factorization.");

    m.def("truncated_svd", &truncated_svd, py::arg("x"), py::arg("n"),
          "Best rank-n approximation with a fixed sign convention.");

    m.def("align_to_reference", &align_to_reference, py::arg("svd"), py::arg("p_ref"),
          "Flip the leading singular pair so the alpha normalization is admissible for p_ref.");

    m.def("alpha_of_p",
          [](const TruncatedSvd& svd, const Mat& p) { return alpha_points_matrix(alpha_of_p(svd, p)); },
          py::arg("svd"), py::arg("p"),
          "Per-component alpha coordinates of P; row n is the N-1 vector of component n.");

    m.def("alpha_of_e",
          [](const TruncatedSvd& svd, const Mat& e) { return alpha_points_matrix(alpha_of_e(svd, e)); },
          py::arg("svd"), py::arg("e"),
          "Per-component alpha coordinates of E; row n is the N-1 vector of component n.");

    m.def("reconstruct_from_alpha",
          [](const TruncatedSvd& svd, const Mat& t) {
              const auto f = reconstruct_from_alpha(svd, t);
              return py::make_tuple(f.P, f.E);
          },
          py::arg("svd"), py::arg("t"),
          "Map a coefficient matrix with unit first row back to a factorization.");

    m.def("poisson_bootstrap",
          [](const Mat& p, const Mat& e, int b, std::uint64_t seed) {
              const auto reps = poisson_bootstrap(make_factorization(p, e), b, seed);
              std::vector<Mat> out;
              out.reserve(reps.size());
              for (const auto& r : reps) out.push_back(r.values);
              return out;
          },
          py::arg("p"), py::arg("e"), py::arg("b") = 100, py::arg("seed") = 0,
          "B count matrices drawn entrywise from Poisson((P @ E)_kg).");

    m.def("make_separable",
          [](int k, int g, int n, std::uint64_t seed, double scale) {
              const auto f = make_separable(k, g, n, seed, scale);
              return py::make_tuple(f.P, f.E);
          },
          py::arg("k"), py::arg("g"), py::arg("n"), py::arg("seed") = 0, py::arg("scale") = 1.0,
          "Anchored synthetic factors with a unique NMF.");

    m.def("make_dense",
          [](int k, int g, int n, std::uint64_t seed, double scale) {
              const auto f = make_dense(k, g, n, seed, scale);
              return py::make_tuple(f.P, f.E);
          },
          py::arg("k"), py::arg("g"), py::arg("n"), py::arg("seed") = 0, py::arg("scale") = 1.0,
          "Dense strictly positive synthetic factors.");
}
