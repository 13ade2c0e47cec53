// sfskit: fit Poisson-KL nonnegative matrix factorizations of count data
// and enumerate the set of feasible solutions around a fit.
//
// Subcommands: fit, sample, project, rank-scan, bootstrap, init-study.
// Exit codes: 0 success, 1 numerical/contract failure, 2 input error.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfs/experiments.hpp"
#include "sfs/io.hpp"
#include "sfs/model.hpp"
#include "sfs/nmf.hpp"
#include "sfs/parallel.hpp"
#include "sfs/sampler.hpp"
#include "sfs/svd.hpp"

using json = nlohmann::json;

namespace {

std::vector<std::string> component_labels(int n) {
    std::vector<std::string> labels;
    labels.reserve(n);
    for (int c = 0; c < n; ++c) labels.push_back("s" + std::to_string(c + 1));
    return labels;
}

sfs::CountMatrix as_matrix_file(const sfs::Mat& values, std::vector<std::string> rows,
                                std::vector<std::string> cols) {
    sfs::CountMatrix m;
    m.values = values;
    m.row_labels = std::move(rows);
    m.col_labels = std::move(cols);
    return m;
}

// --- fit ---------------------------------------------------------------

struct FitArgs {
    std::string input, out;
    sfs::FitConfig cfg;
};

void run_fit(const FitArgs& args) {
    const auto m = sfs::read_matrix_tsv(args.input);
    const auto result = sfs::fit(m, args.cfg);

    const auto comps = component_labels(args.cfg.rank);
    sfs::write_matrix_tsv(args.out + ".P.tsv", as_matrix_file(result.best.P, m.row_labels, comps));
    sfs::write_matrix_tsv(args.out + ".E.tsv", as_matrix_file(result.best.E, comps, m.col_labels));

    json doc;
    doc["format"] = "sfskit-fit/1";
    doc["config"] = {{"input", args.input},       {"rank", args.cfg.rank},
                     {"n_inits", args.cfg.n_inits}, {"max_iter", args.cfg.max_iter},
                     {"rel_tol", args.cfg.rel_tol}, {"seed", args.cfg.seed}};
    doc["divergence"] = result.divergence;
    doc["best_init"] = result.best_init;
    doc["per_init_divergences"] = result.per_init_divergences;
    doc["iterations_used"] = result.iterations_used;
    sfs::write_file_atomic(args.out + ".fit.json", doc.dump(2) + "\n");
    std::cout << "fit: divergence " << sfs::format_double(result.divergence) << " (best init "
              << result.best_init << "), wrote " << args.out << ".{P,E}.tsv and .fit.json\n";
}

// --- sample ------------------------------------------------------------

struct SampleArgs {
    std::string p_path, e_path, out, chain_path;
    sfs::SamplerConfig cfg;
    bool strict = false;
};

void run_sample(const SampleArgs& args) {
    const auto p_file = sfs::read_matrix_tsv(args.p_path);
    const auto e_file = sfs::read_matrix_tsv(args.e_path);
    if (p_file.cols() != e_file.rows())
        throw sfs::ParseError("dimension mismatch: P has " + std::to_string(p_file.cols()) +
                              " components but E has " + std::to_string(e_file.rows()) + " rows");

    const auto f0 = sfs::make_factorization(p_file.values, e_file.values);
    if (!sfs::columns_normalized(f0.P))
        std::cerr << "warning: P columns do not sum to 1; normalizing\n";
    const auto run = sfs::run_sampler(f0, args.cfg);
    for (const auto& w : run.warnings) std::cerr << "warning: " << w << "\n";
    if (args.strict && run.degenerate_pair_seen)
        throw sfs::DegenerateComponent("degenerate component pair encountered (strict mode)");

    sfs::EnvelopeReport report;
    report.config = args.cfg;
    report.row_labels = p_file.row_labels;
    report.col_labels = e_file.col_labels;
    report.reference_P = run.chain.samples_P.front();
    report.reference_E = run.chain.samples_E.front();
    report.envelope = run.envelope;
    report.size_history = run.size_history;
    report.warnings = run.warnings;
    report.iterations = run.chain.iterations;
    report.converged = run.converged;
    report.input_was_normalized = run.input_was_normalized;
    sfs::write_envelope_report(args.out + ".envelope.json", report);

    if (!args.chain_path.empty()) {
        // One flattened sample per line: P in column-major order (k fastest),
        // then E in row-major order (g fastest).
        const int n = f0.rank;
        const Eigen::Index k_count = f0.P.rows(), g_count = f0.E.cols();
        std::ostringstream out;
        out << "sample";
        for (int c = 0; c < n; ++c)
            for (Eigen::Index k = 0; k < k_count; ++k) out << "\tP_" << k << '_' << c;
        for (int c = 0; c < n; ++c)
            for (Eigen::Index g = 0; g < g_count; ++g) out << "\tE_" << c << '_' << g;
        out << '\n';
        for (std::size_t s = 0; s < run.chain.samples_P.size(); ++s) {
            out << s * run.chain.thinning;
            const auto& ps = run.chain.samples_P[s];
            const auto& es = run.chain.samples_E[s];
            for (int c = 0; c < n; ++c)
                for (Eigen::Index k = 0; k < k_count; ++k) out << '\t' << sfs::format_double(ps(k, c));
            for (int c = 0; c < n; ++c)
                for (Eigen::Index g = 0; g < g_count; ++g) out << '\t' << sfs::format_double(es(c, g));
            out << '\n';
        }
        sfs::write_file_atomic(args.chain_path, out.str());
    }
    std::cout << "sample: " << run.chain.iterations << " iterations, avg size P "
              << sfs::format_double(run.envelope.avg_size_P) << ", avg size E "
              << sfs::format_double(run.envelope.avg_size_E) << ", "
              << (run.converged ? "converged" : "hit max iterations") << ", wrote " << args.out
              << ".envelope.json\n";
}

// --- project -----------------------------------------------------------

struct ProjectArgs {
    std::string p_path, e_path, samples_path, out;
    std::string side = "P";
    bool check = false;
};

void run_project(const ProjectArgs& args) {
    const auto p_file = sfs::read_matrix_tsv(args.p_path);
    const auto e_file = sfs::read_matrix_tsv(args.e_path);
    if (p_file.cols() != e_file.rows())
        throw sfs::ParseError("dimension mismatch: P has " + std::to_string(p_file.cols()) +
                              " components but E has " + std::to_string(e_file.rows()) + " rows");
    const auto ref = sfs::normalize_columns(sfs::make_factorization(p_file.values, e_file.values));
    const int n = ref.rank;
    if (n < 2) throw sfs::ConfigError("project: rank must be at least 2");
    const auto svd = sfs::align_to_reference(sfs::truncated_svd(ref.P * ref.E, n), ref.P);
    const Eigen::Index k_count = ref.P.rows(), g_count = ref.E.cols();

    // Samples: the chain dump layout, or just the reference when absent.
    std::vector<std::pair<std::int64_t, sfs::Factorization>> samples;
    if (args.samples_path.empty()) {
        samples.emplace_back(0, ref);
    } else {
        const auto table = sfs::read_table_tsv(args.samples_path);
        const std::size_t expected = 1 + static_cast<std::size_t>(n) * (k_count + g_count);
        if (table.header.size() != expected)
            throw sfs::ParseError(args.samples_path + ": expected " + std::to_string(expected) +
                                  " columns for a rank-" + std::to_string(n) + " chain");
        for (const auto& row : table.rows) {
            sfs::Mat p(k_count, n), e(n, g_count);
            std::size_t cell = 1;
            for (int c = 0; c < n; ++c)
                for (Eigen::Index k = 0; k < k_count; ++k) p(k, c) = std::strtod(row[cell++].c_str(), nullptr);
            for (int c = 0; c < n; ++c)
                for (Eigen::Index g = 0; g < g_count; ++g) e(c, g) = std::strtod(row[cell++].c_str(), nullptr);
            samples.emplace_back(std::strtoll(row[0].c_str(), nullptr, 10),
                                 sfs::make_factorization(std::move(p), std::move(e)));
        }
    }

    sfs::TsvTable table;
    table.config_lines = {"side=" + args.side, "rank=" + std::to_string(n),
                          "p=" + args.p_path, "e=" + args.e_path,
                          "samples=" + (args.samples_path.empty() ? "<reference-only>" : args.samples_path)};
    table.header = {"sample_index", "component"};
    for (int d = 1; d < n; ++d) table.header.push_back("alpha_" + std::to_string(d));
    if (args.check) table.header.push_back("roundtrip_maxabs");

    for (const auto& [index, sample] : samples) {
        const auto cloud = args.side == "P" ? sfs::alpha_of_p(svd, sample.P)
                                            : sfs::alpha_of_e(svd, sample.E);
        double roundtrip = 0.0;
        if (args.check) {
            if (args.side == "P") {
                const auto rebuilt = sfs::reconstruct_from_alpha(svd, sfs::alpha_to_t(cloud));
                const auto normalized = sfs::normalize_columns(sample);
                roundtrip = sfs::max_abs_diff(rebuilt.P, normalized.P);
            } else {
                const sfs::Mat r_raw = sample.E * svd.V * svd.sigma.cwiseInverse().asDiagonal();
                roundtrip = sfs::max_abs_diff(r_raw * svd.sigma.asDiagonal() * svd.V.transpose(), sample.E);
            }
        }
        for (int c = 0; c < n; ++c) {
            std::vector<std::string> row{std::to_string(index), std::to_string(c)};
            for (int d = 0; d < n - 1; ++d) row.push_back(sfs::format_double(cloud.points[c](d)));
            if (args.check) row.push_back(sfs::format_double(roundtrip));
            table.rows.push_back(std::move(row));
        }
    }
    sfs::write_table_tsv(args.out, table);
    std::cout << "project: wrote " << table.rows.size() << " alpha points to " << args.out << "\n";
}

// --- rank-scan ----------------------------------------------------------

struct RankScanArgs {
    std::string input, out;
    std::vector<int> ranks;
    std::vector<double> betas{0.1, 0.5, 1.0};
    int repeats = 50;
    std::uint64_t seed = 0;
    sfs::FitConfig fit_base;
    sfs::SamplerConfig sampler_base;
};

void run_rank_scan(const RankScanArgs& args) {
    const auto m = sfs::read_matrix_tsv(args.input);
    const auto scan = sfs::rank_scan(m.values, args.ranks, args.betas, args.repeats, args.seed,
                                     args.fit_base, args.sampler_base);

    std::vector<std::string> config{"input=" + args.input,
                                    "repeats=" + std::to_string(args.repeats),
                                    "seed=" + std::to_string(args.seed),
                                    "n_inits=" + std::to_string(args.fit_base.n_inits),
                                    "epsilon=" + sfs::format_double(args.sampler_base.epsilon),
                                    "check_every=" + std::to_string(args.sampler_base.check_every)};

    sfs::TsvTable raw;
    raw.config_lines = config;
    raw.header = {"rank", "beta", "repeat", "fit_gkl", "avg_size_P", "avg_size_E",
                  "iterations", "wall_seconds", "converged"};
    for (const auto& row : scan.rows) {
        raw.rows.push_back({std::to_string(row.rank), sfs::format_double(row.beta),
                            std::to_string(row.repeat), sfs::format_double(row.fit_gkl),
                            sfs::format_double(row.avg_size_P), sfs::format_double(row.avg_size_E),
                            std::to_string(row.iterations), sfs::format_double(row.wall_seconds),
                            row.converged ? "1" : "0"});
    }
    sfs::write_table_tsv(args.out + ".raw.tsv", raw);

    sfs::TsvTable summary;
    summary.config_lines = config;
    summary.header = {"rank", "beta", "size_mean", "size_q25", "size_q75",
                      "iter_mean", "iter_q05", "iter_q95", "time_mean", "time_q05", "time_q95"};
    for (const auto& s : scan.summary) {
        summary.rows.push_back({std::to_string(s.rank), sfs::format_double(s.beta),
                                sfs::format_double(s.size_mean), sfs::format_double(s.size_q25),
                                sfs::format_double(s.size_q75), sfs::format_double(s.iter_mean),
                                sfs::format_double(s.iter_q05), sfs::format_double(s.iter_q95),
                                sfs::format_double(s.time_mean), sfs::format_double(s.time_q05),
                                sfs::format_double(s.time_q95)});
    }
    sfs::write_table_tsv(args.out + ".summary.tsv", summary);
    std::cout << "rank-scan: wrote " << scan.rows.size() << " rows to " << args.out
              << ".raw.tsv and " << scan.summary.size() << " summary rows\n";
}

// --- bootstrap ----------------------------------------------------------

struct BootstrapArgs {
    std::string input, out;
    int rank = 3;
    int replicates = 100;
    int inits = 10;
    std::string mode = "random";
    std::uint64_t seed = 0;
    sfs::FitConfig fit_base;
};

void run_bootstrap(const BootstrapArgs& args) {
    const auto m = sfs::read_matrix_tsv(args.input);
    const auto mode = args.mode == "shared" ? sfs::InitMode::Shared : sfs::InitMode::Random;
    const auto result = sfs::bootstrap_study(m.values, args.rank, args.replicates, mode, args.seed,
                                             args.inits, args.fit_base);
    const double area = sfs::alpha_bounding_box_area(result);

    sfs::TsvTable table;
    table.config_lines = {"input=" + args.input,
                          "rank=" + std::to_string(args.rank),
                          "replicates=" + std::to_string(args.replicates),
                          "init_mode=" + args.mode,
                          "n_inits=" + std::to_string(args.inits),
                          "seed=" + std::to_string(args.seed),
                          "reference_divergence=" + sfs::format_double(result.reference.divergence),
                          "alpha_bbox_area=" + sfs::format_double(area)};
    table.header = {"replicate", "divergence", "component"};
    for (int d = 1; d < args.rank; ++d) table.header.push_back("alpha_" + std::to_string(d));
    for (std::size_t b = 0; b < result.replicates.size(); ++b) {
        const auto& rep = result.replicates[b];
        for (int c = 0; c < args.rank; ++c) {
            std::vector<std::string> row{std::to_string(b), sfs::format_double(rep.divergence),
                                         std::to_string(c)};
            for (int d = 0; d < args.rank - 1; ++d)
                row.push_back(sfs::format_double(rep.alpha.points[c](d)));
            table.rows.push_back(std::move(row));
        }
    }
    sfs::write_table_tsv(args.out + ".bootstrap.tsv", table);
    std::cout << "bootstrap: " << args.replicates << " replicates (" << args.mode
              << " inits), alpha bounding-box area " << sfs::format_double(area) << ", wrote "
              << args.out << ".bootstrap.tsv\n";
}

// --- init-study ---------------------------------------------------------

struct InitStudyArgs {
    std::string input, out;
    int rank = 3;
    int runs = 100;
    int max_inits = 10;
    std::uint64_t seed = 0;
    sfs::FitConfig fit_base;
};

void run_init_study(const InitStudyArgs& args) {
    const auto m = sfs::read_matrix_tsv(args.input);
    std::vector<int> grid(args.max_inits);
    for (int i = 0; i < args.max_inits; ++i) grid[i] = i + 1;
    const auto study = sfs::init_study(m.values, args.rank, args.runs, grid, args.seed, args.fit_base);

    std::vector<std::string> config{"input=" + args.input, "rank=" + std::to_string(args.rank),
                                    "runs=" + std::to_string(args.runs),
                                    "max_inits=" + std::to_string(args.max_inits),
                                    "seed=" + std::to_string(args.seed)};
    sfs::TsvTable raw;
    raw.config_lines = config;
    raw.header = {"run", "inits", "min_gkl"};
    for (std::size_t run = 0; run < study.per_run_min_gkl.size(); ++run)
        for (std::size_t gi = 0; gi < grid.size(); ++gi)
            raw.rows.push_back({std::to_string(run), std::to_string(grid[gi]),
                                sfs::format_double(study.per_run_min_gkl[run][gi])});
    sfs::write_table_tsv(args.out + ".raw.tsv", raw);

    sfs::TsvTable curve;
    curve.config_lines = config;
    curve.header = {"inits", "mean_min_gkl"};
    for (std::size_t gi = 0; gi < grid.size(); ++gi)
        curve.rows.push_back({std::to_string(grid[gi]), sfs::format_double(study.mean_curve[gi])});
    sfs::write_table_tsv(args.out + ".curve.tsv", curve);
    std::cout << "init-study: " << args.runs << " runs x " << args.max_inits
              << " initializations, wrote " << args.out << ".{raw,curve}.tsv\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NMF fitting and feasible-solution-set sampling for count matrices"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (default: SFSKIT_THREADS or all cores)");

    FitArgs fit_args;
    auto* fit_cmd = app.add_subcommand("fit", "fit P,E to a count matrix by multiplicative updates");
    fit_cmd->add_option("--input", fit_args.input, "count matrix TSV")->required();
    fit_cmd->add_option("--rank", fit_args.cfg.rank, "number of components")->required();
    fit_cmd->add_option("--inits", fit_args.cfg.n_inits, "random initializations (default 5)");
    fit_cmd->add_option("--max-iter", fit_args.cfg.max_iter, "iteration cap per initialization");
    fit_cmd->add_option("--tol", fit_args.cfg.rel_tol, "relative divergence-change tolerance");
    fit_cmd->add_option("--seed", fit_args.cfg.seed, "random seed");
    fit_cmd->add_option("--out", fit_args.out, "output prefix")->required();

    SampleArgs sample_args;
    auto* sample_cmd = app.add_subcommand("sample", "sample the set of feasible solutions of a factorization");
    sample_cmd->add_option("--p", sample_args.p_path, "signature matrix TSV")->required();
    sample_cmd->add_option("--e", sample_args.e_path, "exposure matrix TSV")->required();
    sample_cmd->add_option("--beta", sample_args.cfg.beta, "beta shape parameter (default 0.5)");
    sample_cmd->add_option("--epsilon", sample_args.cfg.epsilon, "size-change convergence threshold");
    sample_cmd->add_option("--check-every", sample_args.cfg.check_every, "iterations between size checks");
    sample_cmd->add_option("--seed", sample_args.cfg.seed, "random seed");
    sample_cmd->add_option("--thin", sample_args.cfg.thin, "keep every thin-th sample");
    sample_cmd->add_option("--max-iterations", sample_args.cfg.max_iterations, "safety cap");
    sample_cmd->add_flag("--track-e", sample_args.cfg.track_E_size, "also require the E-size criterion");
    sample_cmd->add_flag("--strict", sample_args.strict, "treat degeneracy warnings as errors");
    sample_cmd->add_option("--chain", sample_args.chain_path, "write retained samples to this TSV");
    sample_cmd->add_option("--out", sample_args.out, "output prefix")->required();

    ProjectArgs project_args;
    auto* project_cmd = app.add_subcommand("project", "project factorizations into SVD alpha coordinates");
    project_cmd->add_option("--p", project_args.p_path, "reference signature matrix TSV")->required();
    project_cmd->add_option("--e", project_args.e_path, "reference exposure matrix TSV")->required();
    project_cmd->add_option("--samples", project_args.samples_path, "chain dump to project (default: reference only)");
    project_cmd->add_option("--side", project_args.side, "P or E view")
        ->check(CLI::IsMember({"P", "E"}));
    project_cmd->add_flag("--check", project_args.check, "append a round-trip error column");
    project_cmd->add_option("--out", project_args.out, "output TSV")->required();

    RankScanArgs scan_args;
    auto* scan_cmd = app.add_subcommand("rank-scan", "sweep ranks and betas, recording SFS sizes");
    scan_cmd->add_option("--input", scan_args.input, "count matrix TSV")->required();
    scan_cmd->add_option("--ranks", scan_args.ranks, "ranks to scan, e.g. 2 3 4")->required()->expected(-1);
    scan_cmd->add_option("--betas", scan_args.betas, "beta values (default 0.1 0.5 1)")->expected(-1);
    scan_cmd->add_option("--repeats", scan_args.repeats, "sampler repeats per cell (default 50)");
    scan_cmd->add_option("--seed", scan_args.seed, "random seed");
    scan_cmd->add_option("--inits", scan_args.fit_base.n_inits, "fit initializations");
    scan_cmd->add_option("--max-iter", scan_args.fit_base.max_iter, "fit iteration cap");
    scan_cmd->add_option("--tol", scan_args.fit_base.rel_tol, "fit tolerance");
    scan_cmd->add_option("--epsilon", scan_args.sampler_base.epsilon, "sampler convergence threshold");
    scan_cmd->add_option("--check-every", scan_args.sampler_base.check_every, "sampler check interval");
    scan_cmd->add_option("--sampler-cap", scan_args.sampler_base.max_iterations, "sampler iteration cap");
    scan_cmd->add_option("--out", scan_args.out, "output prefix")->required();

    BootstrapArgs boot_args;
    auto* boot_cmd = app.add_subcommand("bootstrap", "Poisson parametric bootstrap of a fit");
    boot_cmd->add_option("--input", boot_args.input, "count matrix TSV")->required();
    boot_cmd->add_option("--rank", boot_args.rank, "number of components")->required();
    boot_cmd->add_option("--replicates", boot_args.replicates, "bootstrap replicates (default 100)");
    boot_cmd->add_option("--init-mode", boot_args.mode, "random or shared")
        ->check(CLI::IsMember({"random", "shared"}));
    boot_cmd->add_option("--inits", boot_args.inits, "initializations per fit (default 10)");
    boot_cmd->add_option("--seed", boot_args.seed, "random seed");
    boot_cmd->add_option("--max-iter", boot_args.fit_base.max_iter, "fit iteration cap");
    boot_cmd->add_option("--tol", boot_args.fit_base.rel_tol, "fit tolerance");
    boot_cmd->add_option("--out", boot_args.out, "output prefix")->required();

    InitStudyArgs init_args;
    auto* init_cmd = app.add_subcommand("init-study", "running-minimum divergence vs initializations");
    init_cmd->add_option("--input", init_args.input, "count matrix TSV")->required();
    init_cmd->add_option("--rank", init_args.rank, "number of components")->required();
    init_cmd->add_option("--runs", init_args.runs, "independent repetitions (default 100)");
    init_cmd->add_option("--max-inits", init_args.max_inits, "largest initialization count (default 10)");
    init_cmd->add_option("--seed", init_args.seed, "random seed");
    init_cmd->add_option("--max-iter", init_args.fit_base.max_iter, "fit iteration cap");
    init_cmd->add_option("--tol", init_args.fit_base.rel_tol, "fit tolerance");
    init_cmd->add_option("--out", init_args.out, "output prefix")->required();

    try {
        app.parse(argc, argv);
        if (threads > 0) setenv("SFSKIT_THREADS", std::to_string(threads).c_str(), 1);
        if (*fit_cmd) run_fit(fit_args);
        if (*sample_cmd) run_sample(sample_args);
        if (*project_cmd) run_project(project_args);
        if (*scan_cmd) run_rank_scan(scan_args);
        if (*boot_cmd) run_bootstrap(boot_args);
        if (*init_cmd) run_init_study(init_args);
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const sfs::ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const sfs::IoError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const sfs::ConfigError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const sfs::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
