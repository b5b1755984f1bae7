#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pim/errors.hpp"
#include "pim/geometry.hpp"
#include "pim/harness.hpp"
#include "pim/kernel.hpp"
#include "pim/neighbor_index.hpp"
#include "pim/operators.hpp"
#include "pim/point_cloud.hpp"
#include "pim/solvers.hpp"

namespace py = pybind11;
using namespace pim;

PYBIND11_MODULE(_pim, m) {
    m.doc() = "point integral solver for Poisson and Laplace-Beltrami problems "
              "on point clouds";

    py::register_exception<Error>(m, "PimError");

    py::enum_<CloudFormat>(m, "CloudFormat")
        .value("xyzb", CloudFormat::xyzb)
        .value("csv", CloudFormat::csv);

    py::class_<PointCloud>(m, "PointCloud")
        .def(py::init<>())
        .def_readwrite("coords", &PointCloud::coords)
        .def_readwrite("intrinsic_dim", &PointCloud::intrinsic_dim)
        .def_property(
            "boundary_flag",
            [](const PointCloud& c) {
                std::vector<bool> out(c.boundary_flag.size());
                for (size_t i = 0; i < out.size(); ++i) out[i] = c.boundary_flag[i] != 0;
                return out;
            },
            [](PointCloud& c, const std::vector<bool>& flags) {
                c.boundary_flag.assign(flags.size(), 0);
                for (size_t i = 0; i < flags.size(); ++i) c.boundary_flag[i] = flags[i];
            })
        .def_readwrite("volume_weight", &PointCloud::volume_weight)
        .def_readwrite("boundary_weight", &PointCloud::boundary_weight)
        .def("size", &PointCloud::size)
        .def("ambient_dim", &PointCloud::ambient_dim)
        .def("boundary_count", &PointCloud::boundary_count)
        .def("is_boundary", &PointCloud::is_boundary)
        .def("validate", &PointCloud::validate);

    py::class_<SamplingStats>(m, "SamplingStats")
        .def_readonly("fill_distance", &SamplingStats::fill_distance)
        .def_readonly("min_spacing", &SamplingStats::min_spacing);

    m.def("load_cloud", &load_cloud, py::arg("path"), py::arg("format"));
    m.def("save_cloud", &save_cloud, py::arg("cloud"), py::arg("path"), py::arg("format"));
    m.def("sample_unit_disk", &sample_unit_disk, py::arg("n_target"), py::arg("seed"));
    m.def("estimate_fill_distance", &estimate_fill_distance, py::arg("cloud"),
          py::arg("index"));

    py::class_<NeighborIndex>(m, "NeighborIndex")
        .def(py::init<const Eigen::MatrixXd&>())
        .def("radius_query",
             [](const NeighborIndex& idx, const Eigen::VectorXd& x, double radius) {
                 return idx.radius_query(x, radius);
             })
        .def("nearest",
             [](const NeighborIndex& idx, const Eigen::VectorXd& x, int k) {
                 return idx.nearest(x, k);
             })
        .def("nearest_distance",
             [](const NeighborIndex& idx, const Eigen::VectorXd& x, int skip) {
                 return idx.nearest_distance(x, skip);
             },
             py::arg("x"), py::arg("skip") = -1)
        .def("size", &NeighborIndex::size);

    py::class_<KernelSpec>(m, "KernelSpec")
        .def_readonly("t", &KernelSpec::t)
        .def_readonly("intrinsic_dim", &KernelSpec::intrinsic_dim)
        .def_readonly("delta0", &KernelSpec::delta0)
        .def("normalization", &KernelSpec::normalization)
        .def("support_radius", &KernelSpec::support_radius);

    py::class_<BandwidthPolicy>(m, "BandwidthPolicy")
        .def_static("balance", &BandwidthPolicy::balance, py::arg("c_b"))
        .def_static("fixed", &BandwidthPolicy::fixed, py::arg("t"));

    m.def("make_kernel", &make_kernel, py::arg("t"), py::arg("intrinsic_dim"));
    m.def("profile_r", &profile_r, py::arg("spec"), py::arg("r"));
    m.def("profile_rbar", &profile_rbar, py::arg("spec"), py::arg("r"));
    m.def("eval_rt",
          [](const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
              return eval_rt(spec, x, y);
          });
    m.def("eval_rbart",
          [](const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
              return eval_rbart(spec, x, y);
          });
    m.def("select_bandwidth", &select_bandwidth, py::arg("stats"), py::arg("policy"),
          py::arg("intrinsic_dim"));

    py::class_<TangentFrame>(m, "TangentFrame")
        .def_readonly("origin", &TangentFrame::origin)
        .def_readonly("basis", &TangentFrame::basis);

    m.def("estimate_tangent_frame", &estimate_tangent_frame, py::arg("cloud"),
          py::arg("index"), py::arg("i"), py::arg("m_neighbors"));
    m.def("voronoi_volume_weights", &voronoi_volume_weights, py::arg("cloud"),
          py::arg("index"), py::arg("m_neighbors") = 16);
    m.def("boundary_measure_weights", &boundary_measure_weights, py::arg("cloud"));

    py::class_<DomainPartition>(m, "DomainPartition")
        .def_readonly("interior_ids", &DomainPartition::interior_ids)
        .def_readonly("constrained_ids", &DomainPartition::constrained_ids)
        .def_readonly("t_used", &DomainPartition::t_used);

    py::class_<SparseOperator>(m, "SparseOperator")
        .def_property_readonly("matrix",
                               [](const SparseOperator& op) { return op.matrix; })
        .def_readonly("ids", &SparseOperator::ids)
        .def_readonly("t_used", &SparseOperator::t_used)
        .def("dim", &SparseOperator::dim);

    py::class_<SourceField>(m, "SourceField")
        .def(py::init<>())
        .def_readwrite("f", &SourceField::f)
        .def_readwrite("g", &SourceField::g);

    py::class_<SolveReport>(m, "SolveReport")
        .def_readonly("solution", &SolveReport::solution)
        .def_readonly("iterations", &SolveReport::iterations)
        .def_readonly("residual", &SolveReport::residual)
        .def_readonly("interior_count", &SolveReport::interior_count)
        .def_readonly("constrained_count", &SolveReport::constrained_count)
        .def_readonly("residual_history", &SolveReport::residual_history);

    m.def("partition_domain", &partition_domain, py::arg("cloud"), py::arg("index"),
          py::arg("t"));
    m.def("assemble_stiffness", &assemble_stiffness, py::arg("cloud"), py::arg("kernel"),
          py::arg("index"), py::arg("partition"));
    m.def("assemble_load", &assemble_load, py::arg("cloud"), py::arg("kernel"),
          py::arg("index"), py::arg("partition"), py::arg("source"));
    m.def("assemble_mass", &assemble_mass, py::arg("cloud"), py::arg("kernel"),
          py::arg("index"), py::arg("partition"));
    m.def("discrete_l2_error", &discrete_l2_error, py::arg("u"), py::arg("exact"),
          py::arg("cloud"), py::arg("partition"));
    m.def("symmetry_defect", &symmetry_defect, py::arg("op"));
    m.def("coercivity_probe", &coercivity_probe, py::arg("cloud"), py::arg("kernel"),
          py::arg("index"), py::arg("partition"), py::arg("trials"), py::arg("seed"));
    m.def("interpolate",
          [](const SolveReport& report, const PointCloud& cloud, const KernelSpec& kernel,
             const DomainPartition& partition, const SourceField& source) {
              auto fn = interpolate(report, cloud, kernel, partition, source);
              return std::function<double(Eigen::VectorXd)>(
                  [fn](const Eigen::VectorXd& x) { return fn(x); });
          },
          py::arg("report"), py::arg("cloud"), py::arg("kernel"), py::arg("partition"),
          py::arg("source"));

    py::class_<CgConfig>(m, "CgConfig")
        .def(py::init<>())
        .def_readwrite("tol", &CgConfig::tol)
        .def_readwrite("max_iter", &CgConfig::max_iter)
        .def_readwrite("collect_history", &CgConfig::collect_history);

    py::class_<CgResult>(m, "CgResult")
        .def_readonly("x", &CgResult::x)
        .def_readonly("iterations", &CgResult::iterations)
        .def_readonly("residual", &CgResult::residual)
        .def_readonly("residual_history", &CgResult::residual_history);

    m.def("cg_solve",
          [](const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
             const CgConfig& cfg) { return cg_solve(A, b, cfg); },
          py::arg("A"), py::arg("b"), py::arg("cfg") = CgConfig{});

    py::class_<EigenPair>(m, "EigenPair")
        .def_readonly("value", &EigenPair::value)
        .def_readonly("vector", &EigenPair::vector)
        .def_readonly("residual", &EigenPair::residual);

    py::class_<EigenSolveResult>(m, "EigenSolveResult")
        .def_readonly("pairs", &EigenSolveResult::pairs)
        .def_readonly("lumped_mass_used", &EigenSolveResult::lumped_mass_used)
        .def_readonly("lanczos_steps", &EigenSolveResult::lanczos_steps);

    m.def("smallest_eigenpairs", &smallest_eigenpairs, py::arg("A"), py::arg("B"),
          py::arg("m"), py::arg("tol") = 1e-8, py::arg("seed") = 0x5eed);

    py::enum_<Experiment>(m, "Experiment")
        .value("poisson_convergence", Experiment::poisson_convergence)
        .value("eigen_convergence", Experiment::eigen_convergence)
        .value("compare_robin", Experiment::compare_robin)
        .value("single_solve", Experiment::single_solve);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("experiment", &ExperimentConfig::experiment)
        .def_readwrite("sizes", &ExperimentConfig::sizes)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("bandwidth", &ExperimentConfig::bandwidth)
        .def_readwrite("bandwidth_set", &ExperimentConfig::bandwidth_set)
        .def_readwrite("beta", &ExperimentConfig::beta)
        .def_readwrite("m_eigs", &ExperimentConfig::m_eigs)
        .def_readwrite("out_dir", &ExperimentConfig::out_dir);

    py::class_<ConvergenceRow>(m, "ConvergenceRow")
        .def_readonly("n", &ConvergenceRow::n)
        .def_readonly("h", &ConvergenceRow::h)
        .def_readonly("t", &ConvergenceRow::t)
        .def_readonly("l2_error", &ConvergenceRow::l2_error)
        .def_readonly("cg_iters", &ConvergenceRow::cg_iters)
        .def_readonly("interior_count", &ConvergenceRow::interior_count)
        .def_readonly("constrained_count", &ConvergenceRow::constrained_count);

    py::class_<EigenRow>(m, "EigenRow")
        .def_readonly("n", &EigenRow::n)
        .def_readonly("index", &EigenRow::index)
        .def_readonly("lambda_computed", &EigenRow::lambda_computed)
        .def_readonly("lambda_exact", &EigenRow::lambda_exact)
        .def_readonly("rel_error", &EigenRow::rel_error);

    py::class_<RobinRow>(m, "RobinRow")
        .def_readonly("n", &RobinRow::n)
        .def_readonly("h", &RobinRow::h)
        .def_readonly("t", &RobinRow::t)
        .def_readonly("vc_error", &RobinRow::vc_error)
        .def_readonly("robin_error", &RobinRow::robin_error);

    py::class_<PoissonRun>(m, "PoissonRun")
        .def_readonly("partition", &PoissonRun::partition)
        .def_readonly("kernel", &PoissonRun::kernel)
        .def_readonly("report", &PoissonRun::report);

    m.def("disk_exact_solution", &disk_exact_solution);
    m.def("disk_exact_source", &disk_exact_source);
    m.def("disk_dirichlet_spectrum", &disk_dirichlet_spectrum, py::arg("count"));
    m.def("make_disk_cloud", &make_disk_cloud, py::arg("n_target"), py::arg("seed"));
    m.def("solve_poisson_vc", &solve_poisson_vc, py::arg("cloud"), py::arg("index"),
          py::arg("kernel"), py::arg("source"), py::arg("cg") = CgConfig{});
    m.def("run_poisson_convergence", &run_poisson_convergence, py::arg("cfg"));
    m.def("run_eigen_convergence", &run_eigen_convergence, py::arg("cfg"));
    m.def("run_compare_robin", &run_compare_robin, py::arg("cfg"));
    m.def("run_single_solve", &run_single_solve, py::arg("cfg"), py::arg("cloud_path"),
          py::arg("f_spec"), py::arg("g_spec"));
}
