#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pim/kernel.hpp"
#include "pim/neighbor_index.hpp"
#include "pim/point_cloud.hpp"

namespace pim {

/// Split of the sample indices into the interior set (points whose
/// 2 sqrt(t) ball misses the sampled boundary) and the constrained collar.
struct DomainPartition {
    std::vector<int> interior_ids;
    std::vector<int> constrained_ids;
    double t_used = 0.0;
};

/// Symmetric sparse matrix over a subset of the samples; ids maps local
/// row/column to the global point index.
struct SparseOperator {
    Eigen::SparseMatrix<double> matrix;
    std::vector<int> ids;
    double t_used = 0.0;

    int dim() const { return static_cast<int>(matrix.rows()); }
};

/// Source term f and optional constraint/boundary data g (null means 0).
struct SourceField {
    std::function<double(const Eigen::VectorXd&)> f;
    std::function<double(const Eigen::VectorXd&)> g;

    double f_value(const Eigen::VectorXd& p) const { return f ? f(p) : 0.0; }
    double g_value(const Eigen::VectorXd& p) const { return g ? g(p) : 0.0; }
};

struct SolveReport {
    Eigen::VectorXd solution;  // full n-vector; equals g on constrained ids
    int iterations = 0;
    double residual = 0.0;
    int interior_count = 0;
    int constrained_count = 0;
    std::vector<double> residual_history;
};

/// Constrained ids: boundary-flagged samples plus every point within
/// 2 sqrt(t) of one. Empty boundary (closed manifold) yields an empty
/// collar. Throws when the interior comes out empty.
DomainPartition partition_domain(const PointCloud& cloud, const NeighborIndex& index,
                                 double t);

/// Stiffness of the volume-constrained system, rows scaled by V_i so the
/// interior block is symmetric positive definite: entries
///   A_ii = (V_i/t) sum_{l != i} R_t(p_i,p_l) V_l,
///   A_ij = -(1/t) R_t(p_i,p_j) V_i V_j  for interior j != i.
/// The coupling to constrained columns lives in the diagonal sum.
SparseOperator assemble_stiffness(const PointCloud& cloud, const KernelSpec& kernel,
                                  const NeighborIndex& index,
                                  const DomainPartition& partition);

/// Load vector b_i = V_i [ sum_j Rbar_t(p_i,p_j) f(p_j) V_j
///   + (1/t) sum_{j in V_t} R_t(p_i,p_j) g(p_j) V_j ] over interior rows.
Eigen::VectorXd assemble_load(const PointCloud& cloud, const KernelSpec& kernel,
                              const NeighborIndex& index, const DomainPartition& partition,
                              const SourceField& source);

/// Mass matrix B_ij = V_i Rbar_t(p_i,p_j) V_j over interior pairs.
SparseOperator assemble_mass(const PointCloud& cloud, const KernelSpec& kernel,
                             const NeighborIndex& index, const DomainPartition& partition);

/// Full-cloud Robin-penalty system (no volume constraint); op holds the
/// row-scaled matrix, build_rhs assembles the right side for a given source
/// (source.g supplies the Robin boundary data u + beta du/dn).
struct RobinSystem {
    SparseOperator op;
    std::function<Eigen::VectorXd(const SourceField&)> build_rhs;
};

RobinSystem assemble_robin(const PointCloud& cloud, const KernelSpec& kernel,
                           const NeighborIndex& index, double beta);

/// Kernel-weighted interpolant of a solved field: partition-of-unity average
/// of the samples plus the t-weighted source correction; returns g inside
/// the collar. Throws a coverage error when evaluated farther than
/// 2 sqrt(t) from every sample.
std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>
interpolate(const SolveReport& report, const PointCloud& cloud, const KernelSpec& kernel,
            const DomainPartition& partition, const SourceField& source);

/// Volume-weighted RMS over the interior:
/// sqrt( sum (u_i - exact(p_i))^2 V_i / sum V_i ).
double discrete_l2_error(const Eigen::VectorXd& u,
                         const std::function<double(const Eigen::VectorXd&)>& exact,
                         const PointCloud& cloud, const DomainPartition& partition);

/// Minimum Rayleigh ratio u^T A u / sum u_i^2 V_i over random interior
/// vectors vanishing on the collar.
double coercivity_probe(const PointCloud& cloud, const KernelSpec& kernel,
                        const NeighborIndex& index, const DomainPartition& partition,
                        int trials, std::uint64_t seed);

/// Relative asymmetry max |A - A^T| / max |A|; 0 for empty matrices.
double symmetry_defect(const SparseOperator& op);

/// Debug dump of the triplets as "row col value" lines.
void dump_triplets(const SparseOperator& op, const std::string& path);

} // namespace pim
