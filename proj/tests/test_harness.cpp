#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "pim/errors.hpp"
#include "pim/harness.hpp"

using namespace pim;

namespace {

constexpr double kPi = std::numbers::pi;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// independent Bessel oracle through the integral representation
// J_m(x) = (1/pi) int_0^pi cos(m tau - x sin tau) d tau, Simpson rule
double bessel_j(int order, double x) {
    const int steps = 2000;  // even
    const double h = kPi / steps;
    double acc = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double tau = i * h;
        const double v = std::cos(order * tau - x * std::sin(tau));
        const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += w * v;
    }
    return acc * h / (3.0 * kPi);
}

std::vector<double> oracle_spectrum(int count) {
    std::vector<double> values;
    for (int order = 0; order <= 4; ++order) {
        double x = 0.5;
        double fx = bessel_j(order, x);
        while (x < 14.0) {
            const double x2 = x + 0.02;
            const double fx2 = bessel_j(order, x2);
            if ((fx < 0.0) != (fx2 < 0.0)) {
                double lo = x, hi = x2;
                double flo = fx;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fmid = bessel_j(order, mid);
                    if ((fmid < 0.0) == (flo < 0.0)) {
                        lo = mid;
                        flo = fmid;
                    } else {
                        hi = mid;
                    }
                }
                const double z = 0.5 * (lo + hi);
                values.push_back(z * z);
                if (order >= 1) values.push_back(z * z);
            }
            x = x2;
            fx = fx2;
        }
    }
    std::sort(values.begin(), values.end());
    REQUIRE(static_cast<int>(values.size()) >= count);
    values.resize(static_cast<size_t>(count));
    return values;
}

} // namespace

TEST_CASE("manufactured disk solution and source") {
    Eigen::Vector2d center(0.0, 0.0);
    CHECK(disk_exact_solution(center) == 1.0);
    CHECK(disk_exact_source(center) == doctest::Approx(8.0 * kPi * kPi).epsilon(1e-12));

    // source continuous across the removable singularity
    CHECK(disk_exact_source(Eigen::Vector2d(1e-9, 0.0)) ==
          doctest::Approx(8.0 * kPi * kPi).epsilon(1e-6));

    for (double r : {0.2, 0.55, 0.9}) {
        const Eigen::Vector2d p(r, 0.0);
        const double expect = 4.0 * kPi * kPi * std::cos(2.0 * kPi * r) +
                              2.0 * kPi * std::sin(2.0 * kPi * r) / r;
        CHECK(disk_exact_source(p) == doctest::Approx(expect).epsilon(1e-12));
        CHECK(disk_exact_solution(p) == doctest::Approx(std::cos(2.0 * kPi * r)));
    }
    // boundary values: u = 1, du/dn = -2 pi sin(2 pi) = 0
    CHECK(disk_exact_solution(Eigen::Vector2d(0.0, 1.0)) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("disk Dirichlet spectrum against the integral-representation oracle") {
    const std::vector<double> got = disk_dirichlet_spectrum(10);
    const std::vector<double> want = oracle_spectrum(10);
    REQUIRE(got.size() == 10);
    for (size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-8));
    }
    // first few squared zeros, with the double modes duplicated
    CHECK(got[0] == doctest::Approx(5.7832).epsilon(1e-4));
    CHECK(got[1] == doctest::Approx(14.6820).epsilon(1e-4));
    CHECK(got[2] == got[1]);
    CHECK(got[3] == doctest::Approx(26.3746).epsilon(1e-4));
    CHECK(got[4] == got[3]);
    CHECK(got[5] == doctest::Approx(30.4713).epsilon(1e-4));
    CHECK(std::is_sorted(got.begin(), got.end()));
    CHECK_THROWS_AS(disk_dirichlet_spectrum(0), ParameterError);
}

TEST_CASE("experiment config validation") {
    ExperimentConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    SUBCASE("unsorted sizes") {
        cfg.sizes = {2610, 684};
        CHECK_THROWS_AS(cfg.validate(), ParameterError);
    }
    SUBCASE("empty sizes") {
        cfg.sizes.clear();
        CHECK_THROWS_AS(cfg.validate(), ParameterError);
    }
    SUBCASE("bad beta") {
        cfg.beta = 0.0;
        CHECK_THROWS_AS(cfg.validate(), ParameterError);
    }
    SUBCASE("bad eigen count") {
        cfg.m_eigs = 21;
        CHECK_THROWS_AS(cfg.validate(), ParameterError);
    }
}

TEST_CASE("zero data solves to zero") {
    const PointCloud cloud = make_disk_cloud(684, 42);
    const NeighborIndex index(cloud.coords);
    const SamplingStats stats = estimate_fill_distance(cloud, index);
    const KernelSpec kernel =
        select_bandwidth(stats, BandwidthPolicy::balance(8.0), 2);
    const PoissonRun run = solve_poisson_vc(cloud, index, kernel, SourceField{});
    CHECK(run.report.solution.cwiseAbs().maxCoeff() <= 1e-10);
    const double err =
        discrete_l2_error(run.report.solution, [](const Eigen::VectorXd&) { return 0.0; },
                          cloud, run.partition);
    CHECK(err <= 1e-10);
}

TEST_CASE("poisson convergence row structure and determinism") {
    ExperimentConfig cfg;
    cfg.sizes = {684};
    cfg.out_dir = "/tmp/pim_test_conv_a";
    const auto rows = run_poisson_convergence(cfg);
    REQUIRE(rows.size() == 1);
    const ConvergenceRow& r = rows[0];
    CHECK(r.n > 600);
    CHECK(r.h > 0.0);
    CHECK(r.t > 0.0);
    CHECK(r.l2_error > 0.0);
    CHECK(r.l2_error < 0.5);
    CHECK(r.cg_iters > 0);
    CHECK(r.interior_count > 0);
    const PointCloud cloud = sample_unit_disk(684, cfg.seed);
    CHECK(r.constrained_count >= cloud.boundary_count());
    CHECK(r.interior_count + r.constrained_count == r.n);

    cfg.out_dir = "/tmp/pim_test_conv_b";
    run_poisson_convergence(cfg);
    CHECK(read_file("/tmp/pim_test_conv_a/convergence.csv") ==
          read_file("/tmp/pim_test_conv_b/convergence.csv"));
}

TEST_CASE("fixed bandwidth policy is honored end to end") {
    ExperimentConfig cfg;
    cfg.sizes = {684};
    cfg.bandwidth = BandwidthPolicy::fixed(0.05);
    cfg.bandwidth_set = true;
    cfg.out_dir = "/tmp/pim_test_conv_fixed";
    const auto rows = run_poisson_convergence(cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].t == 0.05);
}

TEST_CASE("single solve on a saved cloud") {
    const PointCloud cloud = make_disk_cloud(300, 9);
    const std::string cloud_path = "/tmp/pim_test_solve_cloud.xyzb";
    save_cloud(cloud, cloud_path, CloudFormat::xyzb);

    ExperimentConfig cfg;
    cfg.experiment = Experiment::single_solve;
    cfg.out_dir = "/tmp/pim_test_solve_a";

    SUBCASE("zero data stays zero and reruns byte-identically") {
        const SolveReport rep = run_single_solve(cfg, cloud_path, "zero", "zero");
        CHECK(rep.solution.cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(rep.interior_count > 0);
        cfg.out_dir = "/tmp/pim_test_solve_b";
        run_single_solve(cfg, cloud_path, "zero", "zero");
        CHECK(read_file("/tmp/pim_test_solve_a/solution.csv") ==
              read_file("/tmp/pim_test_solve_b/solution.csv"));
    }
    SUBCASE("numeric field specs parse") {
        const SolveReport rep = run_single_solve(cfg, cloud_path, "zero", "2.5");
        // with f = 0 and g = 2.5 the solution is the constant 2.5
        CHECK((rep.solution.array() - 2.5).abs().maxCoeff() <= 1e-8);
    }
    SUBCASE("bad field spec rejected") {
        CHECK_THROWS_AS(run_single_solve(cfg, cloud_path, "wavelet", "zero"),
                        ParameterError);
    }
    SUBCASE("closed cloud with nonzero-mean source reports a singular operator") {
        PointCloud closed = cloud;
        std::fill(closed.boundary_flag.begin(), closed.boundary_flag.end(), 0);
        closed.boundary_weight.resize(0);
        const std::string closed_path = "/tmp/pim_test_solve_closed.xyzb";
        save_cloud(closed, closed_path, CloudFormat::xyzb);
        CHECK_THROWS_AS(run_single_solve(cfg, closed_path, "one", "zero"), SolveError);
    }
}

TEST_CASE("eigen experiment writes rows for each requested mode") {
    ExperimentConfig cfg;
    cfg.experiment = Experiment::eigen_convergence;
    cfg.sizes = {684};
    cfg.m_eigs = 4;
    cfg.out_dir = "/tmp/pim_test_eig";
    const auto rows = run_eigen_convergence(cfg);
    REQUIRE(rows.size() == 4);
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].index == static_cast<int>(i) + 1);
        CHECK(rows[i].lambda_computed > 0.0);
        if (i > 0) CHECK(rows[i].lambda_computed >= rows[i - 1].lambda_computed);
    }
    CHECK(rows[0].lambda_exact == doctest::Approx(5.7832).epsilon(1e-4));
    // coarse cloud still localizes the fundamental mode
    CHECK(std::abs(rows[0].rel_error) < 0.5);
}
