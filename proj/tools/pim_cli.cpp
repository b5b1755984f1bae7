// Command line front end for the point-integral solver experiments.

#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "pim/errors.hpp"
#include "pim/harness.hpp"

namespace {

struct CommonOpts {
    std::vector<int> sizes = {684, 2610, 10191, 40269};
    std::uint64_t seed = 42;
    std::string t_policy = "balance";
    double t_fixed = 0.0;
    double c_b = 0.0;  // 0 = experiment default
    double beta = 1e-4;
    int m_eigs = 10;
    std::string out_dir = ".";
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--sizes", opts.sizes, "target point counts, ascending");
    cmd->add_option("--seed", opts.seed, "sampling seed");
    cmd->add_option("--t-policy", opts.t_policy, "bandwidth policy")
        ->check(CLI::IsMember({"balance", "fixed"}));
    cmd->add_option("--t", opts.t_fixed, "bandwidth for --t-policy fixed");
    cmd->add_option("--c-b", opts.c_b, "bandwidth constant for --t-policy balance");
    cmd->add_option("--beta", opts.beta, "Robin penalty parameter");
    cmd->add_option("--m-eigs", opts.m_eigs, "number of eigenvalues");
    cmd->add_option("--out", opts.out_dir, "output directory");
}

pim::ExperimentConfig to_config(const CommonOpts& opts, pim::Experiment kind) {
    pim::ExperimentConfig cfg;
    cfg.experiment = kind;
    cfg.sizes = opts.sizes;
    cfg.seed = opts.seed;
    cfg.beta = opts.beta;
    cfg.m_eigs = opts.m_eigs;
    cfg.out_dir = opts.out_dir;
    if (opts.t_policy == "fixed") {
        cfg.bandwidth = pim::BandwidthPolicy::fixed(opts.t_fixed);
        cfg.bandwidth_set = true;
    } else if (opts.c_b > 0.0) {
        cfg.bandwidth = pim::BandwidthPolicy::balance(opts.c_b);
        cfg.bandwidth_set = true;
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Point integral method with volume-constrained Dirichlet boundaries"};
    app.set_config("--config");
    app.require_subcommand(1);

    CommonOpts opts;
    std::string cloud_path, f_spec = "zero", g_spec = "zero";

    auto* poisson = app.add_subcommand("poisson-convergence",
                                       "unit-disk Poisson convergence table");
    add_common(poisson, opts);
    auto* eig = app.add_subcommand("eigen-convergence",
                                   "unit-disk Dirichlet spectrum convergence");
    add_common(eig, opts);
    auto* robin = app.add_subcommand("compare-robin",
                                     "volume constraint vs Robin penalty");
    add_common(robin, opts);
    auto* solve = app.add_subcommand("solve", "solve one Poisson problem on a cloud file");
    add_common(solve, opts);
    solve->add_option("--cloud", cloud_path, "input cloud (.xyzb or .csv)")->required();
    solve->add_option("--f", f_spec, "source spec: zero|one|cos2pir|disk-source|<number>");
    solve->add_option("--g", g_spec, "constraint spec, same grammar");

    CLI11_PARSE(app, argc, argv);

    try {
        if (poisson->parsed()) {
            auto rows = run_poisson_convergence(to_config(opts, pim::Experiment::poisson_convergence));
            for (const auto& r : rows) {
                std::printf("n=%d h=%.4g t=%.4g l2_error=%.6g cg_iters=%d\n", r.n, r.h, r.t,
                            r.l2_error, r.cg_iters);
            }
        } else if (eig->parsed()) {
            auto rows = run_eigen_convergence(to_config(opts, pim::Experiment::eigen_convergence));
            for (const auto& r : rows) {
                std::printf("n=%d lambda_%d=%.6g exact=%.6g rel=%.4g\n", r.n, r.index,
                            r.lambda_computed, r.lambda_exact, r.rel_error);
            }
        } else if (robin->parsed()) {
            auto rows = run_compare_robin(to_config(opts, pim::Experiment::compare_robin));
            for (const auto& r : rows) {
                std::printf("n=%d vc_error=%.6g robin_error=%.6g\n", r.n, r.vc_error,
                            r.robin_error);
            }
        } else if (solve->parsed()) {
            auto report = run_single_solve(to_config(opts, pim::Experiment::single_solve),
                                           cloud_path, f_spec, g_spec);
            std::printf("interior=%d constrained=%d cg_iters=%d residual=%.3g\n",
                        report.interior_count, report.constrained_count, report.iterations,
                        report.residual);
        }
    } catch (const pim::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
