#ifndef DEFLAMG_DEFLATION_HPP
#define DEFLAMG_DEFLATION_HPP

/**
 * \file   deflamg/deflation.hpp
 * \brief  Subdomain deflation with block-local AMG.
 *
 * The solution is split as x = y + Z lambda, where Z holds one (constant)
 * or 1 + dim (linear) vectors per subdomain. With E = Z^T A Z the projector
 *
 *     P = I - A Z E^{-1} Z^T
 *
 * is applied matrix-free: t1 = Z^T r, t2 = E^{-1} t1, r* = r - (AZ) t2.
 * The Krylov solver works on P A with the block-local AMG as the
 * preconditioner, and the coarse part is recovered at the end.
 */

#include <deflamg/amg.hpp>
#include <deflamg/krylov.hpp>
#include <deflamg/runtime.hpp>
#include <deflamg/sparse.hpp>

#include <array>
#include <span>
#include <string>
#include <vector>

namespace deflamg {

enum class DeflationKind { constant, linear };

DeflationKind deflation_kind_from_string(const std::string &name);
std::string   to_string(DeflationKind kind);

/// Per-unknown coordinates, row-major n x dim.
struct Coordinates {
    int dim = 3;
    std::vector<double> xyz;

    index_t size() const { return dim ? static_cast<index_t>(xyz.size()) / dim : 0; }
    double operator()(index_t i, int c) const { return xyz[static_cast<std::size_t>(i * dim + c)]; }
};

struct DeflationBasis {
    DeflationKind kind = DeflationKind::constant;
    int           k    = 1;                    ///< vectors per subdomain
    Partition     partition;

    std::vector<DenseMatrix>           Zl;         ///< local rows x k, per subdomain
    std::vector<std::array<double, 3>> barycenter; ///< linear kind only
    std::vector<SparseMatrix>          AZl;        ///< local rows of A Z (nlocal x m*k)
    DenseMatrix                        E;          ///< Z^T A Z
    std::vector<LuFactorization>       E_lu;       ///< one replica per subdomain

    double factorize_seconds = 0;

    index_t ncoarse() const { return static_cast<index_t>(partition.m) * k; }

    /// A Z assembled as one global matrix.
    SparseMatrix AZ() const;
};

/// Builds Z, A Z and E over the partition of A and factorizes E on every
/// subdomain. The linear kind needs coordinates for every unknown.
/// Throws SingularMatrixError when E is singular.
DeflationBasis build_basis(const DistributedMatrix &A, DeflationKind kind,
                           const Coordinates *coords = nullptr);

/// t = Z^T r, reduced over subdomains.
std::vector<double> deflation_restrict(const DeflationBasis &Z, Communicator &comm,
                                       std::span<const double> r);

/// x += alpha * Z c
void deflation_prolong(const DeflationBasis &Z, Communicator &comm,
                       std::span<const double> c, std::span<double> x, double alpha = 1.0);

/// c = E^{-1} t. coarse_tol = 0 uses the LU replicas, otherwise an inner
/// GMRES solve to the given relative tolerance.
std::vector<double> coarse_solve(const DeflationBasis &Z, std::span<const double> t,
                                 double coarse_tol = 0);

/// out = (I - A Z E^{-1} Z^T) r
void project(const DeflationBasis &Z, Communicator &comm,
             std::span<const double> r, std::span<double> out, double coarse_tol = 0);

std::vector<double> project(const DeflationBasis &Z, Communicator &comm,
                            std::span<const double> r, double coarse_tol = 0);

/// Block Jacobi over subdomains with one AMG hierarchy per diagonal block.
class BlockAmgPreconditioner : public LinearOperator {
    public:
        BlockAmgPreconditioner(const DistributedMatrix &A, const AmgParams &prm);

        index_t size() const override { return P.nglobal; }

        void apply(std::span<const double> r, std::span<double> z) const override;

        const AmgHierarchy& hierarchy(int d) const { return H[d]; }

    private:
        Partition                  P;
        Communicator              &comm;
        std::vector<AmgHierarchy>  H;
        mutable std::vector<AmgWorkspace> ws;
};

/// Block Jacobi over subdomains with a single relaxation sweep per block.
class BlockRelaxationPreconditioner : public LinearOperator {
    public:
        BlockRelaxationPreconditioner(const DistributedMatrix &A, SmootherKind kind,
                                      double damping = 0.8);

        index_t size() const override { return P.nglobal; }

        void apply(std::span<const double> r, std::span<double> z) const override;

    private:
        Partition              P;
        Communicator          &comm;
        std::vector<SparseMatrix> blocks;
        std::vector<Smoother>     S;
};

struct DeflationParams {
    DeflationKind kind       = DeflationKind::constant;
    bool          inexact    = false;
    double        coarse_tol = 1e-2;
};

/// Deflated solver for A x = b on a fixed partition.
/**
 * Construction is the setup phase (local AMG hierarchies, Z, A Z, E and
 * its factorization); solve() may be called repeatedly.
 *
 * As a LinearOperator the object is the additive preconditioner
 *
 *     B(r) = Q r + (I - Q A) M P r,    Q = Z E^{-1} Z^T,
 *
 * whose Krylov iterates on A started from Q b coincide with those of the
 * projected system. The inexact mode and the pressure solver of the Schur
 * preconditioner use it in this form.
 */
class SubdomainDeflation : public LinearOperator {
    public:
        SubdomainDeflation(const SparseMatrix &A, const Partition &P, Communicator &comm,
                           const DeflationParams &dprm = {}, const AmgParams &aprm = {},
                           const Coordinates *coords = nullptr);

        index_t size() const override { return A.size(); }

        /// The preconditioner B above.
        void apply(std::span<const double> r, std::span<double> z) const override;

        /// Solves A x = b with x as the initial guess. Exact mode runs
        /// `solver` on P A; inexact mode always runs FGMRES on A with B.
        SolveReport solve(std::span<const double> b, std::span<double> x,
                          const std::string &solver, const KrylovParams &prm) const;

        /// Exact-mode solve regardless of the configured mode.
        SolveReport solve_deflated(std::span<const double> b, std::span<double> x,
                                   const std::string &solver, const KrylovParams &prm) const;

        /// FGMRES on A with B, coarse systems solved to coarse_tol.
        SolveReport solve_inexact_deflated(std::span<const double> b, std::span<double> x,
                                           const KrylovParams &prm) const;

        void project(std::span<const double> r, std::span<double> out) const;

        const DeflationBasis&          basis() const { return Z; }
        const DistributedMatrix&       matrix() const { return A; }
        const BlockAmgPreconditioner&  local_preconditioner() const { return M; }
        const DeflationParams&         params() const { return dprm; }

        double setup_seconds() const { return setup_time; }
        double factorize_seconds() const { return Z.factorize_seconds; }

    private:
        double                 setup_time;   // start stamp until the constructor finishes
        DistributedMatrix      A;
        DeflationParams        dprm;
        BlockAmgPreconditioner M;
        DeflationBasis         Z;

        double coarse_tol() const { return dprm.inexact ? dprm.coarse_tol : 0.0; }
};

/// Block-local AMG without deflation: `solver` on A with
/// BlockAmgPreconditioner. Used as the reference in deflation comparisons.
SolveReport solve_local_amg(const SparseMatrix &A, const Partition &P, Communicator &comm,
                            const AmgParams &aprm, std::span<const double> b,
                            std::span<double> x, const std::string &solver,
                            const KrylovParams &prm);

} // namespace deflamg

#endif
