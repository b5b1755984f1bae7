#include "pim/harness.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "pim/errors.hpp"
#include "pim/geometry.hpp"

namespace pim {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write '" + path.string() + "'");
    return out;
}

BandwidthPolicy effective_policy(const ExperimentConfig& cfg, double default_cb) {
    if (cfg.bandwidth_set) return cfg.bandwidth;
    return BandwidthPolicy::balance(default_cb);
}

} // namespace

void ExperimentConfig::validate() const {
    if (!std::is_sorted(sizes.begin(), sizes.end())) {
        throw ParameterError("experiment sizes must be ascending");
    }
    if (sizes.empty()) throw ParameterError("experiment needs at least one size");
    if (!(beta > 0.0)) throw ParameterError("beta must be positive");
    if (m_eigs < 1 || m_eigs > 20) throw ParameterError("m_eigs must be in 1..20");
}

double disk_exact_solution(const Eigen::VectorXd& p) {
    return std::cos(2.0 * kPi * p.norm());
}

double disk_exact_source(const Eigen::VectorXd& p) {
    const double r = p.norm();
    const double c = 4.0 * kPi * kPi * std::cos(2.0 * kPi * r);
    if (r < 1e-12) {
        return c + 4.0 * kPi * kPi;  // limit of 2 pi sin(2 pi r)/r
    }
    return c + 2.0 * kPi * std::sin(2.0 * kPi * r) / r;
}

std::vector<double> disk_dirichlet_spectrum(int count) {
    if (count < 1) throw ParameterError("disk_dirichlet_spectrum: count must be >= 1");
    // squared zeros of J_m, multiplicity 2 for m >= 1
    std::vector<double> values;
    const int max_order = 12;
    const int zeros_per_order = 8;
    for (int order = 0; order <= max_order; ++order) {
        auto f = [order](double x) {
            return std::cyl_bessel_j(static_cast<double>(order), x);
        };
        int found = 0;
        double x = std::max(0.5, static_cast<double>(order));
        double fx = f(x);
        const double step = 0.05;
        while (found < zeros_per_order && x < 60.0) {
            const double x2 = x + step;
            const double fx2 = f(x2);
            if ((fx < 0.0) != (fx2 < 0.0)) {
                double lo = x, hi = x2;
                for (int it = 0; it < 80; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if ((f(mid) < 0.0) == (f(lo) < 0.0)) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                const double z = 0.5 * (lo + hi);
                values.push_back(z * z);
                if (order >= 1) values.push_back(z * z);
                ++found;
            }
            x = x2;
            fx = fx2;
        }
    }
    std::sort(values.begin(), values.end());
    if (static_cast<int>(values.size()) < count) {
        throw SolveError("disk_dirichlet_spectrum: not enough zeros bracketed");
    }
    values.resize(static_cast<size_t>(count));
    return values;
}

PointCloud make_disk_cloud(int n_target, std::uint64_t seed) {
    PointCloud cloud = sample_unit_disk(n_target, seed);
    NeighborIndex index(cloud.coords);
    voronoi_volume_weights(cloud, index);
    boundary_measure_weights(cloud);
    return cloud;
}

PoissonRun solve_poisson_vc(const PointCloud& cloud, const NeighborIndex& index,
                            const KernelSpec& kernel, const SourceField& source,
                            const CgConfig& cg) {
    PoissonRun run;
    run.kernel = kernel;
    run.partition = partition_domain(cloud, index, kernel.t);
    const SparseOperator A = assemble_stiffness(cloud, kernel, index, run.partition);
    const Eigen::VectorXd b = assemble_load(cloud, kernel, index, run.partition, source);
    const CgResult sol = cg_solve(A.matrix, b, cg);

    run.report.solution = Eigen::VectorXd::Zero(cloud.size());
    for (size_t a = 0; a < run.partition.interior_ids.size(); ++a) {
        run.report.solution[run.partition.interior_ids[a]] = sol.x[static_cast<int>(a)];
    }
    for (int i : run.partition.constrained_ids) {
        run.report.solution[i] = source.g_value(cloud.coords.row(i).transpose());
    }
    run.report.iterations = sol.iterations;
    run.report.residual = sol.residual;
    run.report.interior_count = static_cast<int>(run.partition.interior_ids.size());
    run.report.constrained_count = static_cast<int>(run.partition.constrained_ids.size());
    run.report.residual_history = sol.residual_history;
    return run;
}

std::vector<ConvergenceRow> run_poisson_convergence(const ExperimentConfig& cfg) {
    cfg.validate();
    const BandwidthPolicy policy = effective_policy(cfg, 8.0);
    SourceField source{disk_exact_source, disk_exact_solution};

    std::vector<ConvergenceRow> rows;
    for (int n_target : cfg.sizes) {
        PointCloud cloud = make_disk_cloud(n_target, cfg.seed);
        NeighborIndex index(cloud.coords);
        const SamplingStats stats = estimate_fill_distance(cloud, index);
        const KernelSpec kernel = select_bandwidth(stats, policy, cloud.intrinsic_dim);
        const PoissonRun run = solve_poisson_vc(cloud, index, kernel, source);
        ConvergenceRow row;
        row.n = cloud.size();
        row.h = stats.fill_distance;
        row.t = kernel.t;
        row.l2_error =
            discrete_l2_error(run.report.solution, disk_exact_solution, cloud, run.partition);
        row.cg_iters = run.report.iterations;
        row.interior_count = run.report.interior_count;
        row.constrained_count = run.report.constrained_count;
        rows.push_back(row);
    }

    auto out = open_out(cfg.out_dir, "convergence.csv");
    out << "n,h,t,l2_error,cg_iters,interior_count,constrained_count\n";
    for (const auto& r : rows) {
        out << r.n << ',' << fmt(r.h) << ',' << fmt(r.t) << ',' << fmt(r.l2_error) << ','
            << r.cg_iters << ',' << r.interior_count << ',' << r.constrained_count << '\n';
    }
    auto rep = open_out(cfg.out_dir, "report.txt");
    rep << "experiment poisson_convergence\nseed " << cfg.seed << "\n";
    for (const auto& r : rows) {
        rep << "n " << r.n << " h " << fmt(r.h) << " t " << fmt(r.t) << " l2_error "
            << fmt(r.l2_error) << " cg_iters " << r.cg_iters << "\n";
    }
    return rows;
}

std::vector<EigenRow> run_eigen_convergence(const ExperimentConfig& cfg) {
    cfg.validate();
    const BandwidthPolicy policy = effective_policy(cfg, 1.0);
    const std::vector<double> exact = disk_dirichlet_spectrum(cfg.m_eigs);

    std::vector<EigenRow> rows;
    bool any_lumped = false;
    for (int n_target : cfg.sizes) {
        PointCloud cloud = make_disk_cloud(n_target, cfg.seed);
        NeighborIndex index(cloud.coords);
        const SamplingStats stats = estimate_fill_distance(cloud, index);
        const KernelSpec kernel = select_bandwidth(stats, policy, cloud.intrinsic_dim);
        const DomainPartition partition = partition_domain(cloud, index, kernel.t);
        const SparseOperator A = assemble_stiffness(cloud, kernel, index, partition);
        const SparseOperator B = assemble_mass(cloud, kernel, index, partition);
        const EigenSolveResult eig =
            smallest_eigenpairs(A, B, cfg.m_eigs, 1e-6, cfg.seed);
        any_lumped = any_lumped || eig.lumped_mass_used;
        for (int i = 0; i < cfg.m_eigs; ++i) {
            EigenRow row;
            row.n = cloud.size();
            row.index = i + 1;
            row.lambda_computed = eig.pairs[static_cast<size_t>(i)].value;
            row.lambda_exact = exact[static_cast<size_t>(i)];
            row.rel_error = (row.lambda_computed - row.lambda_exact) / row.lambda_exact;
            rows.push_back(row);
        }
    }

    auto out = open_out(cfg.out_dir, "eigen.csv");
    out << "n,index,lambda_computed,lambda_exact,rel_error\n";
    for (const auto& r : rows) {
        out << r.n << ',' << r.index << ',' << fmt(r.lambda_computed) << ','
            << fmt(r.lambda_exact) << ',' << fmt(r.rel_error) << '\n';
    }
    auto rep = open_out(cfg.out_dir, "report.txt");
    rep << "experiment eigen_convergence\nseed " << cfg.seed << "\nmass_matrix "
        << (any_lumped ? "lumped" : "full") << "\n";
    return rows;
}

std::vector<RobinRow> run_compare_robin(const ExperimentConfig& cfg) {
    cfg.validate();
    const BandwidthPolicy policy = effective_policy(cfg, 8.0);
    SourceField vc_source{disk_exact_source, disk_exact_solution};
    // Robin data u + beta du/dn on the unit circle; du/dn = -2 pi sin(2 pi) = 0
    SourceField robin_source{disk_exact_source,
                             [](const Eigen::VectorXd&) { return 1.0; }};

    std::vector<RobinRow> rows;
    for (int n_target : cfg.sizes) {
        PointCloud cloud = make_disk_cloud(n_target, cfg.seed);
        NeighborIndex index(cloud.coords);
        const SamplingStats stats = estimate_fill_distance(cloud, index);
        const KernelSpec kernel = select_bandwidth(stats, policy, cloud.intrinsic_dim);

        RobinRow row;
        row.n = cloud.size();
        row.h = stats.fill_distance;
        row.t = kernel.t;

        const PoissonRun vc = solve_poisson_vc(cloud, index, kernel, vc_source);
        row.vc_error =
            discrete_l2_error(vc.report.solution, disk_exact_solution, cloud, vc.partition);

        const RobinSystem robin = assemble_robin(cloud, kernel, index, cfg.beta);
        const Eigen::VectorXd rhs = robin.build_rhs(robin_source);
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(robin.op.matrix);
        if (lu.info() != Eigen::Success) {
            throw SolveError("compare_robin: Robin system factorization failed");
        }
        const Eigen::VectorXd u = lu.solve(rhs);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < cloud.size(); ++i) {
            const double e = u[i] - disk_exact_solution(cloud.coords.row(i).transpose());
            num += e * e * cloud.volume_weight[i];
            den += cloud.volume_weight[i];
        }
        row.robin_error = std::sqrt(num / den);
        rows.push_back(row);
    }

    auto out = open_out(cfg.out_dir, "robin.csv");
    out << "n,h,t,vc_error,robin_error\n";
    for (const auto& r : rows) {
        out << r.n << ',' << fmt(r.h) << ',' << fmt(r.t) << ',' << fmt(r.vc_error) << ','
            << fmt(r.robin_error) << '\n';
    }
    return rows;
}

namespace {

std::function<double(const Eigen::VectorXd&)> parse_field_spec(const std::string& spec) {
    if (spec == "zero") return [](const Eigen::VectorXd&) { return 0.0; };
    if (spec == "one") return [](const Eigen::VectorXd&) { return 1.0; };
    if (spec == "cos2pir") return disk_exact_solution;
    if (spec == "disk-source") return disk_exact_source;
    try {
        size_t pos = 0;
        const double v = std::stod(spec, &pos);
        if (pos == spec.size()) {
            return [v](const Eigen::VectorXd&) { return v; };
        }
    } catch (const std::exception&) {
    }
    throw ParameterError("unknown field spec '" + spec +
                         "' (expected zero|one|cos2pir|disk-source|<number>)");
}

} // namespace

SolveReport run_single_solve(const ExperimentConfig& cfg, const std::string& cloud_path,
                             const std::string& f_spec, const std::string& g_spec) {
    cfg.validate();
    PointCloud cloud = load_cloud(
        cloud_path, cloud_path.size() > 4 && cloud_path.substr(cloud_path.size() - 4) == ".csv"
                        ? CloudFormat::csv
                        : CloudFormat::xyzb);
    NeighborIndex index(cloud.coords);
    if (!cloud.has_volume_weights()) {
        voronoi_volume_weights(cloud, index);  // file weights take precedence
    }
    const SamplingStats stats = estimate_fill_distance(cloud, index);
    const BandwidthPolicy policy = effective_policy(cfg, 8.0);
    const KernelSpec kernel = select_bandwidth(stats, policy, cloud.intrinsic_dim);
    SourceField source{parse_field_spec(f_spec), parse_field_spec(g_spec)};

    if (cloud.boundary_count() == 0) {
        // closed manifold: constants span the nullspace, reject inconsistent data
        double mean_f = 0.0, total = 0.0;
        for (int i = 0; i < cloud.size(); ++i) {
            mean_f += source.f_value(cloud.coords.row(i).transpose()) * cloud.volume_weight[i];
            total += cloud.volume_weight[i];
        }
        if (std::abs(mean_f / total) > 1e-8) {
            throw SolveError("single_solve: closed manifold with nonzero-mean source, "
                             "operator is singular");
        }
    }

    const PoissonRun run = solve_poisson_vc(cloud, index, kernel, source);

    auto out = open_out(cfg.out_dir, "solution.csv");
    for (int a = 0; a < cloud.ambient_dim(); ++a) out << 'x' << a << ',';
    out << "value\n";
    for (int i = 0; i < cloud.size(); ++i) {
        for (int a = 0; a < cloud.ambient_dim(); ++a) {
            out << fmt(cloud.coords(i, a)) << ',';
        }
        out << fmt(run.report.solution[i]) << '\n';
    }
    auto rep = open_out(cfg.out_dir, "report.txt");
    rep << "experiment single_solve\ncloud " << cloud_path << "\nt " << fmt(kernel.t)
        << "\ninterior " << run.report.interior_count << "\nconstrained "
        << run.report.constrained_count << "\ncg_iters " << run.report.iterations
        << "\nresidual " << fmt(run.report.residual) << "\n";
    return run.report;
}

} // namespace pim
