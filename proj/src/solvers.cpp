#include "pim/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pim/errors.hpp"

namespace pim {

CgResult cg_solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                  const CgConfig& cfg) {
    const int dim = static_cast<int>(A.rows());
    if (A.cols() != dim || b.size() != dim) {
        throw ParameterError("cg_solve: dimension mismatch");
    }
    if (!(cfg.tol > 0.0 && cfg.tol < 1.0)) {
        throw ParameterError("cg_solve: tol must be in (0,1)");
    }
    const int max_iter = cfg.max_iter > 0 ? cfg.max_iter : 10 * dim;

    CgResult res;
    res.x = Eigen::VectorXd::Zero(dim);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        return res;  // x = 0 in 0 iterations
    }

    Eigen::VectorXd inv_diag;
    const bool jacobi = cfg.preconditioner == CgConfig::Precond::jacobi;
    if (jacobi) {
        inv_diag = A.diagonal();
        for (int i = 0; i < dim; ++i) {
            if (!(inv_diag[i] > 0.0)) {
                throw SolveError("cg_solve: nonpositive diagonal, matrix not SPD");
            }
            inv_diag[i] = 1.0 / inv_diag[i];
        }
    }

    Eigen::VectorXd r = b;
    Eigen::VectorXd z = jacobi ? (inv_diag.array() * r.array()).matrix() : r;
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    double rel = r.norm() / bnorm;
    if (cfg.collect_history) res.residual_history.push_back(rel);

    for (int it = 0; it < max_iter; ++it) {
        if (rel <= cfg.tol) {
            res.iterations = it;
            res.residual = rel;
            return res;
        }
        const Eigen::VectorXd Ap = A * p;
        const double pAp = p.dot(Ap);
        if (!std::isfinite(pAp) || pAp <= 0.0) {
            throw SolveError("cg_solve: indefinite curvature, matrix not SPD",
                             res.residual_history);
        }
        const double alpha = rz / pAp;
        res.x += alpha * p;
        r -= alpha * Ap;
        if (cfg.iterate_observer) cfg.iterate_observer(it + 1, res.x);
        z = jacobi ? (inv_diag.array() * r.array()).matrix() : r;
        const double rz_new = r.dot(z);
        if (!std::isfinite(rz_new)) {
            throw SolveError("cg_solve: NaN breakdown", res.residual_history);
        }
        p = z + (rz_new / rz) * p;
        rz = rz_new;
        rel = r.norm() / bnorm;
        if (cfg.collect_history) res.residual_history.push_back(rel);
    }
    if (rel <= cfg.tol) {
        res.iterations = max_iter;
        res.residual = rel;
        return res;
    }
    throw SolveError("cg_solve: no convergence after " + std::to_string(max_iter) +
                         " iterations (residual " + std::to_string(rel) + ")",
                     res.residual_history);
}

namespace {

Eigen::VectorXd lumped_diagonal(const Eigen::SparseMatrix<double>& B) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(B.rows());
    for (int k = 0; k < B.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(B, k); it; ++it) {
            d[it.row()] += it.value();
        }
    }
    return d;
}

struct MassOp {
    const Eigen::SparseMatrix<double>* full = nullptr;
    Eigen::VectorXd lumped;  // used when full == nullptr

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
        return full != nullptr ? Eigen::VectorXd(*full * v)
                               : Eigen::VectorXd((lumped.array() * v.array()).matrix());
    }
};

class IndefiniteMass {};  // internal signal, triggers the lumped fallback

// One shift-invert Lanczos run with a fixed mass operator. Throws
// IndefiniteMass when a B-norm turns nonpositive.
std::vector<EigenPair> lanczos_run(const Eigen::SparseMatrix<double>& A, const MassOp& B,
                                   int m, double tol, std::uint64_t seed, int* steps_out) {
    const int dim = static_cast<int>(A.rows());
    const int max_steps = std::min(dim, std::max(15 * m + 60, 160));

    CgConfig inner;
    inner.tol = std::max(1e-2 * tol, 1e-14);
    inner.collect_history = false;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<Eigen::VectorXd> q;      // B-orthonormal Lanczos basis
    std::vector<Eigen::VectorXd> bq;     // B * q_k, cached
    std::vector<double> alpha, beta;     // tridiagonal entries

    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
    {
        const Eigen::VectorXd bv = B.apply(v);
        const double bn = v.dot(bv);
        if (!(bn > 0.0)) throw IndefiniteMass{};
        v /= std::sqrt(bn);
    }
    q.push_back(v);
    bq.push_back(B.apply(v));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tes;
    std::vector<EigenPair> pairs;
    for (int k = 0; k < max_steps; ++k) {
        Eigen::VectorXd w = cg_solve(A, bq[static_cast<size_t>(k)], inner).x;
        const double a = w.dot(bq[static_cast<size_t>(k)]);
        alpha.push_back(a);
        w -= a * q[static_cast<size_t>(k)];
        if (k > 0) w -= beta[static_cast<size_t>(k - 1)] * q[static_cast<size_t>(k - 1)];
        // full reorthogonalization, two classical passes
        for (int pass = 0; pass < 2; ++pass) {
            for (size_t i = 0; i < q.size(); ++i) {
                w -= w.dot(bq[i]) * q[i];
            }
        }
        const Eigen::VectorXd bw = B.apply(w);
        const double bn = w.dot(bw);
        if (bn < 0.0) throw IndefiniteMass{};
        const double bnorm = std::sqrt(std::max(bn, 0.0));

        const int kk = k + 1;
        // Ritz values of the tridiagonal section
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(kk, kk);
        for (int i = 0; i < kk; ++i) T(i, i) = alpha[static_cast<size_t>(i)];
        for (int i = 0; i + 1 < kk; ++i) {
            T(i, i + 1) = T(i + 1, i) = beta[static_cast<size_t>(i)];
        }
        tes.compute(T);
        const Eigen::VectorXd theta = tes.eigenvalues();  // ascending
        bool converged = kk >= m;
        if (converged) {
            for (int i = 0; i < m; ++i) {
                const int col = kk - 1 - i;  // largest theta = smallest lambda
                const double th = theta[col];
                if (!(th > 0.0)) {
                    converged = false;
                    break;
                }
                const double res_est = bnorm * std::abs(tes.eigenvectors()(kk - 1, col));
                if (res_est > tol * th) {
                    converged = false;
                    break;
                }
            }
        }
        if (converged || bnorm <= 1e-14 || kk == dim) {
            if (kk < m) {
                throw SolveError("smallest_eigenpairs: Krylov space exhausted before " +
                                 std::to_string(m) + " pairs converged");
            }
            pairs.clear();
            for (int i = 0; i < m; ++i) {
                const int col = kk - 1 - i;
                const double th = theta[col];
                if (!(th > 0.0)) {
                    throw SolveError("smallest_eigenpairs: nonpositive shift-invert Ritz value");
                }
                EigenPair pair;
                pair.value = 1.0 / th;
                Eigen::VectorXd y = Eigen::VectorXd::Zero(dim);
                for (int s = 0; s < kk; ++s) {
                    y += tes.eigenvectors()(s, col) * q[static_cast<size_t>(s)];
                }
                const Eigen::VectorXd by = B.apply(y);
                const double ynorm = std::sqrt(std::max(y.dot(by), 1e-300));
                y /= ynorm;
                const Eigen::VectorXd byn = B.apply(y);
                pair.vector = y;
                pair.residual = (A * y - pair.value * byn).norm() / byn.norm();
                pairs.push_back(std::move(pair));
            }
            std::sort(pairs.begin(), pairs.end(),
                      [](const EigenPair& l, const EigenPair& r) { return l.value < r.value; });
            bool all_good = true;
            for (const auto& p : pairs) {
                // floor of the attainable residual grows with |lambda|
                if (p.residual > 10.0 * tol * std::max(1.0, std::abs(p.value))) {
                    all_good = false;
                }
            }
            if (all_good || kk == dim || bnorm <= 1e-14) {
                if (steps_out != nullptr) *steps_out = kk;
                return pairs;
            }
        }
        if (bnorm <= 1e-14) {
            // invariant subspace hit; continue from a fresh random direction
            Eigen::VectorXd f(dim);
            for (int i = 0; i < dim; ++i) f[i] = gauss(rng);
            for (int pass = 0; pass < 2; ++pass) {
                for (size_t i = 0; i < q.size(); ++i) f -= f.dot(bq[i]) * q[i];
            }
            const double fb = f.dot(B.apply(f));
            if (!(fb > 0.0)) throw IndefiniteMass{};
            w = f / std::sqrt(fb);
            beta.push_back(0.0);
            q.push_back(w);
            bq.push_back(B.apply(w));
            continue;
        }
        beta.push_back(bnorm);
        w /= bnorm;
        q.push_back(w);
        bq.push_back(bw / bnorm);
    }
    throw SolveError("smallest_eigenpairs: Lanczos stagnation after " +
                     std::to_string(max_steps) + " steps");
}

} // namespace

EigenSolveResult smallest_eigenpairs(const SparseOperator& A, const SparseOperator& B,
                                     int m, double tol, std::uint64_t seed) {
    const int dim = A.dim();
    if (B.dim() != dim) throw ParameterError("smallest_eigenpairs: dimension mismatch");
    if (m < 1 || m > dim) {
        throw ParameterError("smallest_eigenpairs: need 1 <= m <= dim");
    }
    for (int i = 0; i < dim; ++i) {
        if (!(B.matrix.coeff(i, i) > 0.0)) {
            throw ParameterError("smallest_eigenpairs: mass diagonal must be positive");
        }
    }
    EigenSolveResult result;
    MassOp full{&B.matrix, {}};
    try {
        result.pairs = lanczos_run(A.matrix, full, m, tol, seed, &result.lanczos_steps);
        return result;
    } catch (const IndefiniteMass&) {
        // fall through to the lumped mass matrix
    }
    MassOp lumped{nullptr, lumped_diagonal(B.matrix)};
    for (int i = 0; i < dim; ++i) {
        if (!(lumped.lumped[i] > 0.0)) {
            throw SolveError("smallest_eigenpairs: lumped mass not positive");
        }
    }
    result.lumped_mass_used = true;
    try {
        result.pairs = lanczos_run(A.matrix, lumped, m, tol, seed, &result.lanczos_steps);
    } catch (const IndefiniteMass&) {
        throw SolveError("smallest_eigenpairs: lumped mass still indefinite");
    }
    return result;
}

} // namespace pim
