#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pim/kernel.hpp"
#include "pim/operators.hpp"
#include "pim/point_cloud.hpp"
#include "pim/solvers.hpp"

namespace pim {

enum class Experiment { poisson_convergence, eigen_convergence, compare_robin, single_solve };

struct ExperimentConfig {
    Experiment experiment = Experiment::poisson_convergence;
    std::vector<int> sizes = {684, 2610, 10191, 40269};
    std::uint64_t seed = 42;
    BandwidthPolicy bandwidth;   // defaults depend on the experiment, see run_*
    bool bandwidth_set = false;  // true once the CLI overrode the policy
    double beta = 1e-4;
    int m_eigs = 10;
    std::string out_dir = ".";

    void validate() const;
};

struct ConvergenceRow {
    int n = 0;
    double h = 0.0;
    double t = 0.0;
    double l2_error = 0.0;
    int cg_iters = 0;
    int interior_count = 0;
    int constrained_count = 0;
};

struct EigenRow {
    int n = 0;
    int index = 0;  // 1-based mode index
    double lambda_computed = 0.0;
    double lambda_exact = 0.0;
    double rel_error = 0.0;
};

struct RobinRow {
    int n = 0;
    double h = 0.0;
    double t = 0.0;
    double vc_error = 0.0;
    double robin_error = 0.0;
};

/// Manufactured unit-disk solution u = cos(2 pi r) and its source
/// f = -Lap u = 4 pi^2 cos(2 pi r) + 2 pi sin(2 pi r)/r (limit 8 pi^2 at 0).
double disk_exact_solution(const Eigen::VectorXd& p);
double disk_exact_source(const Eigen::VectorXd& p);

/// First `count` Dirichlet eigenvalues of the unit disk: squared Bessel
/// zeros j_{m,k}^2 with multiplicity 2 for m >= 1, ascending.
std::vector<double> disk_dirichlet_spectrum(int count);

/// One assembled-and-solved volume-constraint Poisson problem on a weighted
/// cloud; shared by the experiment drivers and the CLI `solve` subcommand.
struct PoissonRun {
    DomainPartition partition;
    KernelSpec kernel;
    SolveReport report;
};

PoissonRun solve_poisson_vc(const PointCloud& cloud, const NeighborIndex& index,
                            const KernelSpec& kernel, const SourceField& source,
                            const CgConfig& cg = {});

/// Prepares a disk cloud of the requested size with estimated weights.
PointCloud make_disk_cloud(int n_target, std::uint64_t seed);

/// Writes convergence.csv (+ report.txt) to cfg.out_dir. Default bandwidth
/// policy: balance with c_b = 8.
std::vector<ConvergenceRow> run_poisson_convergence(const ExperimentConfig& cfg);

/// Writes eigen.csv. Default bandwidth policy: balance with c_b = 1.
std::vector<EigenRow> run_eigen_convergence(const ExperimentConfig& cfg);

/// Writes robin.csv with both error columns. Default policy as Poisson.
std::vector<RobinRow> run_compare_robin(const ExperimentConfig& cfg);

/// Solves on an arbitrary cloud file; writes solution.csv and report.txt.
/// f_spec / g_spec accept "zero", "one", "cos2pir", "disk-source" or a
/// numeric constant.
SolveReport run_single_solve(const ExperimentConfig& cfg, const std::string& cloud_path,
                             const std::string& f_spec, const std::string& g_spec);

} // namespace pim
