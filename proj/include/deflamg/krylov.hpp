#ifndef DEFLAMG_KRYLOV_HPP
#define DEFLAMG_KRYLOV_HPP

/**
 * \file   deflamg/krylov.hpp
 * \brief  CG, BiCGStab(L), GMRES(m) and flexible GMRES.
 *
 * All solvers are right-preconditioned (CG uses the symmetric form), so the
 * residual they monitor is the residual of the original system. Convergence
 * is declared when ||r|| <= tol * ref, where ref is ||b|| unless
 * KrylovParams::reference_norm overrides it. Dot products go through the
 * supplied InnerProduct.
 */

#include <deflamg/linear_operator.hpp>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deflamg {

struct SolveReport {
    index_t iterations        = 0;
    double  relative_residual = 0;
    bool    converged         = false;
    std::optional<std::string> breakdown;
};

struct KrylovParams {
    double  tol     = 1e-6;
    index_t maxiter = 100;
    index_t restart = 50;   ///< GMRES / FGMRES cycle length
    int     L       = 2;    ///< BiCGStab(L) polynomial degree

    /// Norm the residual is measured against; 0 means ||b||.
    double reference_norm = 0;

    /// Recompute the true residual every this many iterations.
    index_t refresh = 50;

    /// Called after every iteration with the (recurred) relative residual.
    std::function<void(index_t, double)> on_iteration;

    /// GMRES family: called with the Arnoldi basis at the end of each cycle.
    std::function<void(const std::vector<std::vector<double>>&, index_t)> on_basis;
};

/// Preconditioned conjugate gradients. A and M must be symmetric, A
/// positive (semi)definite on the Krylov space. pAp <= 0 ends the solve
/// with a breakdown.
SolveReport cg(const LinearOperator &A, std::span<const double> b, std::span<double> x,
               const LinearOperator *M, const KrylovParams &prm,
               const InnerProduct &inner = InnerProduct());

/// BiCGStab(L) with L = prm.L. An iteration is one BiCG + minimal residual
/// cycle. A vanishing rho restarts once with a fresh shadow residual.
SolveReport bicgstabl(const LinearOperator &A, std::span<const double> b, std::span<double> x,
                      const LinearOperator *M, const KrylovParams &prm,
                      const InnerProduct &inner = InnerProduct());

/// BiCGStab(2).
SolveReport bicgstab2(const LinearOperator &A, std::span<const double> b, std::span<double> x,
                      const LinearOperator *M, const KrylovParams &prm,
                      const InnerProduct &inner = InnerProduct());

/// Restarted GMRES(prm.restart). M must be a fixed linear operator.
SolveReport gmres(const LinearOperator &A, std::span<const double> b, std::span<double> x,
                  const LinearOperator *M, const KrylovParams &prm,
                  const InnerProduct &inner = InnerProduct());

/// Flexible GMRES: stores preconditioned directions, so M may change
/// between applications.
SolveReport fgmres(const LinearOperator &A, std::span<const double> b, std::span<double> x,
                   const LinearOperator *M, const KrylovParams &prm,
                   const InnerProduct &inner = InnerProduct());

/// Dispatch by name: "cg", "bicgstab2", "bicgstabl", "gmres", "fgmres".
SolveReport krylov_solve(const std::string &type,
                         const LinearOperator &A, std::span<const double> b, std::span<double> x,
                         const LinearOperator *M, const KrylovParams &prm,
                         const InnerProduct &inner = InnerProduct());

bool is_known_solver(const std::string &type);

} // namespace deflamg

#endif
