#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <functional>
#include <vector>

#include "pim/operators.hpp"

namespace pim {

struct CgConfig {
    double tol = 1e-10;          // relative residual target
    int max_iter = -1;           // -1: 10 * dim
    enum class Precond { none, jacobi };
    Precond preconditioner = Precond::jacobi;
    bool collect_history = true;
    // Test hook, called with (iteration, current iterate) when set.
    std::function<void(int, const Eigen::VectorXd&)> iterate_observer;
};

struct CgResult {
    Eigen::VectorXd x;
    int iterations = 0;
    double residual = 0.0;  // final relative residual
    std::vector<double> residual_history;
};

/// Preconditioned conjugate gradients for an SPD matrix. Throws SolveError
/// (with residual history) on non-convergence or NaN breakdown, which
/// usually signals an indefinite matrix.
CgResult cg_solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                  const CgConfig& cfg = {});

struct EigenPair {
    double value = 0.0;
    Eigen::VectorXd vector;
    double residual = 0.0;  // |A v - lambda B v| / |B v|
};

struct EigenSolveResult {
    std::vector<EigenPair> pairs;  // ascending by value
    bool lumped_mass_used = false;
    int lanczos_steps = 0;
};

/// m smallest eigenvalues of A v = lambda B v, A SPD, via shift-invert
/// Lanczos at shift 0 with CG inner solves and full reorthogonalization.
/// If B turns out indefinite during the iteration the solver restarts with
/// the lumped (row-sum diagonal) mass matrix and flags the result.
EigenSolveResult smallest_eigenpairs(const SparseOperator& A, const SparseOperator& B,
                                     int m, double tol = 1e-8,
                                     std::uint64_t seed = 0x5eed);

} // namespace pim
