#ifndef DEFLAMG_SCHUR_HPP
#define DEFLAMG_SCHUR_HPP

/**
 * \file   deflamg/schur.hpp
 * \brief  Pressure Schur complement preconditioner for saddle-point systems
 *
 *     [ K  G ] [u]   [b_u]
 *     [ D  S ] [p] = [b_p]
 *
 * where a mask over the unknowns marks the pressure rows/columns. One
 * application performs
 *
 *   1. K u^ = b_u                                (GMRES + block SPAI-0)
 *   2. (S - D diag(K)^{-1} G) p = b_p - D u^      (FGMRES, matrix-free,
 *                                                  deflation + local AMG)
 *   3. K u  = b_u - G p                          (as step 1)
 */

#include <deflamg/deflation.hpp>
#include <deflamg/krylov.hpp>
#include <deflamg/runtime.hpp>
#include <deflamg/sparse.hpp>

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace deflamg {

struct BlockSystem {
    SparseMatrix K, G, D, S;
    std::vector<char>    mask;       ///< true for pressure unknowns
    std::vector<double>  invKdiag;
    std::vector<index_t> u_index;    ///< velocity position -> global index
    std::vector<index_t> p_index;    ///< pressure position -> global index

    index_t nu() const { return static_cast<index_t>(u_index.size()); }
    index_t np() const { return static_cast<index_t>(p_index.size()); }
};

/// Extracts the four blocks; both index sets keep their global order.
/// Throws StructureError when K has a zero diagonal.
BlockSystem split_blocks(const SparseMatrix &A, const std::vector<char> &mask);

/// The monolithic matrix the blocks came from.
SparseMatrix reassemble(const BlockSystem &B);

/// p -> S p - D (diag(K)^{-1} * (G p)), never formed explicitly.
class SchurOperator : public LinearOperator {
    public:
        explicit SchurOperator(const BlockSystem &B, int threads = 1) : B(B), threads(threads) {}

        index_t size() const override { return B.np(); }

        void apply(std::span<const double> p, std::span<double> y) const override;

    private:
        const BlockSystem &B;
        int threads;
};

/// S - D diag(K)^{-1} G as a sparse matrix.
SparseMatrix assemble_schur_approximation(const BlockSystem &B);

struct SchurParams {
    std::string  usolver = "gmres";
    KrylovParams uprm;                  ///< tol 1e-3, maxiter 5
    SmootherKind urelax  = SmootherKind::spai0;
    double       udamping = 0.8;

    std::string     psolver = "fgmres";
    KrylovParams    pprm;               ///< tol 1e-2, maxiter 20
    AmgParams       plocal;
    DeflationParams pdeflation;

    /// Build the pressure preconditioner on S - D diag(K)^{-1} G instead of S.
    bool approx_schur = false;

    SchurParams() {
        uprm.tol = 1e-3; uprm.maxiter = 5;  uprm.restart = 50;
        pprm.tol = 1e-2; pprm.maxiter = 20; pprm.restart = 50;
    }
};

/// Three-step preconditioner for the monolithic system, as a LinearOperator
/// acting on full-length vectors. Inner solves are inexact, so the outer
/// solver has to be flexible.
class SchurPressureCorrection : public LinearOperator {
    public:
        /// P partitions the monolithic unknowns; velocity and pressure
        /// partitions are inherited from it (every subdomain must own at
        /// least one unknown of each kind). coords, when given, holds one
        /// row per monolithic unknown and feeds linear pressure deflation.
        SchurPressureCorrection(const SparseMatrix &A, const std::vector<char> &mask,
                                const Partition &P, Communicator &comm,
                                const SchurParams &prm = {}, const Coordinates *coords = nullptr);
        ~SchurPressureCorrection() override;

        index_t size() const override { return n; }

        void apply(std::span<const double> r, std::span<double> z) const override;

        const BlockSystem& blocks() const { return B; }
        const SchurOperator& schur() const { return *Sop; }

        /// (u, p) from (b_u, b_p) by the three steps.
        void apply_blocks(std::span<const double> bu, std::span<const double> bp,
                          std::span<double> u, std::span<double> p) const;

        double setup_seconds() const { return setup_time; }
        double factorize_seconds() const;

        struct Stats {
            index_t applications = 0;
            index_t u_iterations = 0;
            index_t p_iterations = 0;
        };
        const Stats& stats() const { return counters; }

    private:
        index_t      n;
        BlockSystem  B;
        SchurParams  prm;
        Communicator &comm;

        Partition Pu, Pp;
        std::unique_ptr<DistributedMatrix>             K;
        std::unique_ptr<BlockRelaxationPreconditioner> Ku_prec;
        std::unique_ptr<SchurOperator>                 Sop;
        SparseMatrix                                   Pmat;
        std::unique_ptr<SubdomainDeflation>            Pprec;

        double setup_time = 0;
        mutable Stats counters;
};

/// Outer Krylov solve of the monolithic system with the Schur
/// preconditioner. `solver` must be "fgmres" (ConfigError otherwise).
SolveReport solve_block_system(const BlockSystem &B, std::span<const double> b, std::span<double> x,
                               const Partition &P, Communicator &comm, const SchurParams &prm,
                               const std::string &solver, const KrylovParams &outer,
                               const Coordinates *coords = nullptr);

} // namespace deflamg

#endif
