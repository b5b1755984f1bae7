#include "pim/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <random>

#include "pim/errors.hpp"

namespace pim {

namespace {

void require_weights(const PointCloud& cloud) {
    if (!cloud.has_volume_weights()) {
        throw ParameterError("assembly requires volume weights");
    }
}

void require_matching_t(const KernelSpec& kernel, const DomainPartition& partition) {
    if (std::abs(kernel.t - partition.t_used) > 1e-14 * std::max(1.0, kernel.t)) {
        throw ParameterError("partition was computed with a different bandwidth t");
    }
}

std::vector<int> local_positions(const PointCloud& cloud, const std::vector<int>& ids) {
    std::vector<int> pos(static_cast<size_t>(cloud.size()), -1);
    for (size_t a = 0; a < ids.size(); ++a) {
        pos[static_cast<size_t>(ids[a])] = static_cast<int>(a);
    }
    return pos;
}

} // namespace

DomainPartition partition_domain(const PointCloud& cloud, const NeighborIndex& index,
                                 double t) {
    (void)index;
    if (!(t > 0.0)) throw ParameterError("partition_domain: t must be positive");
    cloud.validate();
    const int n = cloud.size();
    const double collar = 2.0 * std::sqrt(t);

    DomainPartition part;
    part.t_used = t;
    std::vector<int> bids;
    for (int i = 0; i < n; ++i) {
        if (cloud.is_boundary(i)) bids.push_back(i);
    }
    if (bids.empty()) {
        part.interior_ids.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) part.interior_ids[static_cast<size_t>(i)] = i;
        return part;
    }
    Eigen::MatrixXd bcoords(static_cast<int>(bids.size()), cloud.ambient_dim());
    for (size_t a = 0; a < bids.size(); ++a) {
        bcoords.row(static_cast<int>(a)) = cloud.coords.row(bids[a]);
    }
    NeighborIndex bindex(bcoords);
    for (int i = 0; i < n; ++i) {
        const bool constrained =
            cloud.is_boundary(i) ||
            bindex.nearest_distance(cloud.coords.row(i).transpose()) <= collar;
        (constrained ? part.constrained_ids : part.interior_ids).push_back(i);
    }
    if (part.interior_ids.empty()) {
        throw ParameterError("partition_domain: bandwidth too large for domain");
    }
    return part;
}

SparseOperator assemble_stiffness(const PointCloud& cloud, const KernelSpec& kernel,
                                  const NeighborIndex& index,
                                  const DomainPartition& partition) {
    require_weights(cloud);
    require_matching_t(kernel, partition);
    const double t = kernel.t;
    const double ct = kernel.normalization();
    const double radius = kernel.support_radius();
    const auto& ids = partition.interior_ids;
    const auto pos = local_positions(cloud, ids);
    const Eigen::VectorXd& vw = cloud.volume_weight;

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(ids.size() * 32);
    for (size_t a = 0; a < ids.size(); ++a) {
        const int i = ids[a];
        const Eigen::VectorXd xi = cloud.coords.row(i).transpose();
        double diag = 0.0;
        for (int j : index.radius_query(xi, radius)) {
            if (j == i) continue;
            const double rt =
                ct * kernel.profile.r((cloud.coords.row(j).transpose() - xi).squaredNorm() /
                                      (4.0 * t));
            if (rt == 0.0) continue;
            diag += rt * vw[j];
            const int bj = pos[static_cast<size_t>(j)];
            if (bj >= 0) {
                // V_i V_j product kept symmetric bit-for-bit
                triplets.emplace_back(static_cast<int>(a), bj, -(rt / t) * (vw[i] * vw[j]));
            }
        }
        triplets.emplace_back(static_cast<int>(a), static_cast<int>(a),
                              (vw[i] / t) * diag);
    }
    SparseOperator op;
    op.ids = ids;
    op.t_used = t;
    op.matrix.resize(static_cast<int>(ids.size()), static_cast<int>(ids.size()));
    op.matrix.setFromTriplets(triplets.begin(), triplets.end());
    op.matrix.makeCompressed();
    return op;
}

Eigen::VectorXd assemble_load(const PointCloud& cloud, const KernelSpec& kernel,
                              const NeighborIndex& index, const DomainPartition& partition,
                              const SourceField& source) {
    require_weights(cloud);
    require_matching_t(kernel, partition);
    const double t = kernel.t;
    const double ct = kernel.normalization();
    const double radius = kernel.support_radius();
    const auto& ids = partition.interior_ids;
    const Eigen::VectorXd& vw = cloud.volume_weight;

    std::vector<char> constrained(static_cast<size_t>(cloud.size()), 0);
    for (int j : partition.constrained_ids) constrained[static_cast<size_t>(j)] = 1;

    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<int>(ids.size()));
    for (size_t a = 0; a < ids.size(); ++a) {
        const int i = ids[a];
        const Eigen::VectorXd xi = cloud.coords.row(i).transpose();
        double acc = 0.0;
        for (int j : index.radius_query(xi, radius)) {
            const Eigen::VectorXd xj = cloud.coords.row(j).transpose();
            const double arg = (xj - xi).squaredNorm() / (4.0 * t);
            acc += ct * kernel.profile.rbar(arg) * source.f_value(xj) * vw[j];
            if (constrained[static_cast<size_t>(j)]) {
                const double g = source.g_value(xj);
                if (g != 0.0) {
                    acc += (ct * kernel.profile.r(arg) / t) * g * vw[j];
                }
            }
        }
        b[static_cast<int>(a)] = vw[i] * acc;
    }
    return b;
}

SparseOperator assemble_mass(const PointCloud& cloud, const KernelSpec& kernel,
                             const NeighborIndex& index, const DomainPartition& partition) {
    require_weights(cloud);
    require_matching_t(kernel, partition);
    const double t = kernel.t;
    const double ct = kernel.normalization();
    const double radius = kernel.support_radius();
    const auto& ids = partition.interior_ids;
    const auto pos = local_positions(cloud, ids);
    const Eigen::VectorXd& vw = cloud.volume_weight;

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(ids.size() * 32);
    for (size_t a = 0; a < ids.size(); ++a) {
        const int i = ids[a];
        const Eigen::VectorXd xi = cloud.coords.row(i).transpose();
        for (int j : index.radius_query(xi, radius)) {
            const int bj = pos[static_cast<size_t>(j)];
            if (bj < 0) continue;
            const double rb =
                ct * kernel.profile.rbar((cloud.coords.row(j).transpose() - xi).squaredNorm() /
                                         (4.0 * t));
            if (rb == 0.0) continue;
            triplets.emplace_back(static_cast<int>(a), bj, rb * (vw[i] * vw[j]));
        }
    }
    SparseOperator op;
    op.ids = ids;
    op.t_used = t;
    op.matrix.resize(static_cast<int>(ids.size()), static_cast<int>(ids.size()));
    op.matrix.setFromTriplets(triplets.begin(), triplets.end());
    op.matrix.makeCompressed();
    return op;
}

RobinSystem assemble_robin(const PointCloud& cloud, const KernelSpec& kernel,
                           const NeighborIndex& index, double beta) {
    require_weights(cloud);
    if (!cloud.has_boundary_weights()) {
        throw ParameterError("assemble_robin requires boundary measure weights");
    }
    if (!(beta > 0.0)) throw ParameterError("assemble_robin: beta must be positive");
    const double t = kernel.t;
    const double ct = kernel.normalization();
    const double radius = kernel.support_radius();
    const int n = cloud.size();
    const Eigen::VectorXd& vw = cloud.volume_weight;
    const Eigen::VectorXd& sw = cloud.boundary_weight;

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<size_t>(n) * 32);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd xi = cloud.coords.row(i).transpose();
        double diag = 0.0;
        for (int j : index.radius_query(xi, radius)) {
            const double arg = (cloud.coords.row(j).transpose() - xi).squaredNorm() / (4.0 * t);
            if (j != i) {
                const double rt = ct * kernel.profile.r(arg);
                if (rt != 0.0) {
                    diag += rt * vw[j];
                    triplets.emplace_back(i, j, -(rt / t) * (vw[i] * vw[j]));
                }
            }
            if (cloud.is_boundary(j)) {
                const double rb = ct * kernel.profile.rbar(arg);
                if (rb != 0.0) {
                    triplets.emplace_back(i, j, (2.0 / beta) * vw[i] * rb * sw[j]);
                }
            }
        }
        triplets.emplace_back(i, i, (vw[i] / t) * diag);
    }
    RobinSystem sys;
    sys.op.ids.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) sys.op.ids[static_cast<size_t>(i)] = i;
    sys.op.t_used = t;
    sys.op.matrix.resize(n, n);
    sys.op.matrix.setFromTriplets(triplets.begin(), triplets.end());
    sys.op.matrix.makeCompressed();

    // capture by value; the builder outlives this call
    auto coords = std::make_shared<Eigen::MatrixXd>(cloud.coords);
    auto flags = std::make_shared<std::vector<char>>(cloud.boundary_flag);
    auto vols = std::make_shared<Eigen::VectorXd>(vw);
    auto surf = std::make_shared<Eigen::VectorXd>(sw);
    auto idx = std::make_shared<NeighborIndex>(cloud.coords);
    KernelSpec kspec = kernel;
    sys.build_rhs = [=](const SourceField& source) {
        const int nn = static_cast<int>(coords->rows());
        Eigen::VectorXd b = Eigen::VectorXd::Zero(nn);
        for (int i = 0; i < nn; ++i) {
            const Eigen::VectorXd xi = coords->row(i).transpose();
            double acc = 0.0;
            for (int j : idx->radius_query(xi, kspec.support_radius())) {
                const Eigen::VectorXd xj = coords->row(j).transpose();
                const double arg = (xj - xi).squaredNorm() / (4.0 * kspec.t);
                const double rb = kspec.normalization() * kspec.profile.rbar(arg);
                acc += rb * source.f_value(xj) * (*vols)[j];
                if ((*flags)[static_cast<size_t>(j)]) {
                    acc += (2.0 / beta) * rb * source.g_value(xj) * (*surf)[j];
                }
            }
            b[i] = (*vols)[i] * acc;
        }
        return b;
    };
    return sys;
}

std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>
interpolate(const SolveReport& report, const PointCloud& cloud, const KernelSpec& kernel,
            const DomainPartition& partition, const SourceField& source) {
    require_weights(cloud);
    require_matching_t(kernel, partition);
    if (report.solution.size() != cloud.size()) {
        throw ParameterError("interpolate: solution size mismatch");
    }
    auto coords = std::make_shared<Eigen::MatrixXd>(cloud.coords);
    auto vols = std::make_shared<Eigen::VectorXd>(cloud.volume_weight);
    auto sol = std::make_shared<Eigen::VectorXd>(report.solution);
    auto idx = std::make_shared<NeighborIndex>(cloud.coords);
    std::shared_ptr<NeighborIndex> bidx;
    {
        std::vector<int> bids;
        for (int i = 0; i < cloud.size(); ++i) {
            if (cloud.is_boundary(i)) bids.push_back(i);
        }
        if (!bids.empty()) {
            Eigen::MatrixXd bc(static_cast<int>(bids.size()), cloud.ambient_dim());
            for (size_t a = 0; a < bids.size(); ++a) {
                bc.row(static_cast<int>(a)) = cloud.coords.row(bids[a]);
            }
            bidx = std::make_shared<NeighborIndex>(bc);
        }
    }
    KernelSpec kspec = kernel;
    SourceField src = source;
    return [=](const Eigen::Ref<const Eigen::VectorXd>& x) -> double {
        const double radius = kspec.support_radius();
        if (bidx && bidx->nearest_distance(x) <= radius) {
            return src.g_value(x);  // inside the collar V_t
        }
        double num = 0.0, w = 0.0;
        for (int j : idx->radius_query(x, radius)) {
            const Eigen::VectorXd xj = coords->row(j).transpose();
            const double arg = (xj - x).squaredNorm() / (4.0 * kspec.t);
            const double rt = kspec.normalization() * kspec.profile.r(arg);
            const double rb = kspec.normalization() * kspec.profile.rbar(arg);
            num += rt * (*sol)[j] * (*vols)[j] + kspec.t * rb * src.f_value(xj) * (*vols)[j];
            w += rt * (*vols)[j];
        }
        if (w == 0.0) {
            throw GeometryError("interpolate: evaluation point not covered by any sample");
        }
        return num / w;
    };
}

double discrete_l2_error(const Eigen::VectorXd& u,
                         const std::function<double(const Eigen::VectorXd&)>& exact,
                         const PointCloud& cloud, const DomainPartition& partition) {
    require_weights(cloud);
    if (partition.interior_ids.empty()) {
        throw ParameterError("discrete_l2_error: empty interior");
    }
    if (u.size() != cloud.size()) {
        throw ParameterError("discrete_l2_error: solution size mismatch");
    }
    double num = 0.0, den = 0.0;
    for (int i : partition.interior_ids) {
        const double e = u[i] - exact(cloud.coords.row(i).transpose());
        if (!std::isfinite(e)) throw ParameterError("discrete_l2_error: non-finite value");
        num += e * e * cloud.volume_weight[i];
        den += cloud.volume_weight[i];
    }
    return std::sqrt(num / den);
}

double coercivity_probe(const PointCloud& cloud, const KernelSpec& kernel,
                        const NeighborIndex& index, const DomainPartition& partition,
                        int trials, std::uint64_t seed) {
    if (trials < 1) throw ParameterError("coercivity_probe: trials must be >= 1");
    const SparseOperator A = assemble_stiffness(cloud, kernel, index, partition);
    const int dim = A.dim();
    Eigen::VectorXd vi(dim);
    for (int a = 0; a < dim; ++a) vi[a] = cloud.volume_weight[A.ids[static_cast<size_t>(a)]];

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double best = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < trials; ++trial) {
        Eigen::VectorXd u(dim);
        for (int a = 0; a < dim; ++a) u[a] = gauss(rng);
        const double nrm = u.norm();
        if (nrm == 0.0) continue;
        u /= nrm;
        const double quad = u.dot(A.matrix * u);
        const double mass = (u.array().square() * vi.array()).sum();
        best = std::min(best, quad / mass);
    }
    return best;
}

double symmetry_defect(const SparseOperator& op) {
    if (op.matrix.nonZeros() == 0) return 0.0;
    const Eigen::SparseMatrix<double> diff =
        op.matrix - Eigen::SparseMatrix<double>(op.matrix.transpose());
    double dmax = 0.0, amax = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it) {
            dmax = std::max(dmax, std::abs(it.value()));
        }
    }
    for (int k = 0; k < op.matrix.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(op.matrix, k); it; ++it) {
            amax = std::max(amax, std::abs(it.value()));
        }
    }
    return amax > 0.0 ? dmax / amax : 0.0;
}

void dump_triplets(const SparseOperator& op, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write '" + path + "'");
    for (int k = 0; k < op.matrix.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(op.matrix, k); it; ++it) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%ld %ld %.17g\n", static_cast<long>(it.row()),
                          static_cast<long>(it.col()), it.value());
            out << buf;
        }
    }
}

} // namespace pim
