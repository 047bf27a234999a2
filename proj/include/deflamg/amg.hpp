#ifndef DEFLAMG_AMG_HPP
#define DEFLAMG_AMG_HPP

/**
 * \file   deflamg/amg.hpp
 * \brief  Smoothed aggregation AMG used as the subdomain-local preconditioner.
 */

#include <deflamg/linear_operator.hpp>
#include <deflamg/sparse.hpp>

#include <span>
#include <string>
#include <vector>

namespace deflamg {

enum class SmootherKind { damped_jacobi, gauss_seidel, spai0 };

SmootherKind smoother_kind_from_string(const std::string &name);
std::string  to_string(SmootherKind kind);

/// Single-sweep relaxation z = S(r) for A z = r, started from z = 0.
struct Smoother {
    SmootherKind        kind    = SmootherKind::damped_jacobi;
    std::vector<double> weights;          ///< 1 / a_ii, or the SPAI-0 diagonal
    double              damping = 0.8;

    /// Throws StructureError on a zero diagonal (Jacobi, Gauss-Seidel) or a
    /// zero row (SPAI-0).
    static Smoother build(SmootherKind kind, const SparseMatrix &A, double damping = 0.8);
};

/// z = S(r).
void apply_smoother(const Smoother &S, const SparseMatrix &A,
                    std::span<const double> r, std::span<double> z);

/// Sentinel id for unknowns that belong to no aggregate.
inline constexpr index_t unaggregated = -1;

struct Aggregates {
    std::vector<index_t> id;
    index_t naggr = 0;
};

/// Marks each stored entry of A as strong. Off-diagonal a_ij is strong iff
/// |a_ij| > eps * sqrt(|a_ii * a_jj|); diagonals are always strong.
std::vector<char> strength_graph(const SparseMatrix &A, double eps);

/// Greedy root-based aggregation in ascending row order.
/**
 * An unassigned row becomes a root; it claims its unassigned strong
 * neighbours and their unassigned strong neighbours. Rows without strong
 * neighbours form singleton aggregates.
 */
Aggregates aggregate(const std::vector<char> &strong, const SparseMatrix &A);

SparseMatrix tentative_prolongation(const Aggregates &agg, index_t n);

/// P = (I - omega D^{-1} A_f) P_tent with D = diag(A).
/**
 * A_f keeps the strong off-diagonal entries of A and lumps the weak ones
 * into its diagonal. An empty strength vector means every entry is strong.
 */
SparseMatrix smooth_prolongation(const SparseMatrix &A, const SparseMatrix &P_tent,
                                 double omega, const std::vector<char> &strong = {});

struct AmgParams {
    index_t      coarse_enough = 500;
    double       eps_strong    = 0.08;   ///< halved on every level
    double       omega         = 2.0 / 3.0;
    SmootherKind relax         = SmootherKind::damped_jacobi;
    double       damping       = 0.8;
};

struct AmgLevel {
    SparseMatrix A;
    SparseMatrix P;
    SparseMatrix R;
    Smoother     smoother;
};

/// Per-level scratch vectors for vcycle().
struct AmgWorkspace {
    std::vector<std::vector<double>> rhs, sol, tmp, corr;
};

/// Multigrid hierarchy ending in a dense LU of the coarsest operator.
class AmgHierarchy {
    public:
        std::vector<AmgLevel> levels;
        SparseMatrix          coarse_matrix;
        LuFactorization       coarse;
        index_t               coarse_enough = 500;

        index_t size() const { return levels.empty() ? coarse_matrix.nrows : levels.front().A.nrows; }

        /// Sizes of all levels, finest first, including the direct level.
        std::vector<index_t> level_sizes() const;

        AmgWorkspace make_workspace() const;

        /// One V(1,1) cycle: z ~ A^{-1} r.
        void vcycle(std::span<const double> r, std::span<double> z, AmgWorkspace &ws) const;

        std::vector<double> vcycle(std::span<const double> r) const;

    private:
        void cycle(std::size_t level, std::span<const double> r, std::span<double> z, AmgWorkspace &ws) const;
};

AmgHierarchy build_hierarchy(const SparseMatrix &A, const AmgParams &prm = {});

/// An AMG hierarchy with its own workspace, usable as a preconditioner.
/// One instance must not be applied concurrently.
class AmgPreconditioner : public LinearOperator {
    public:
        AmgPreconditioner(const SparseMatrix &A, const AmgParams &prm = {})
            : H(build_hierarchy(A, prm)), ws(H.make_workspace()) {}

        index_t size() const override { return H.size(); }

        void apply(std::span<const double> r, std::span<double> z) const override {
            H.vcycle(r, z, ws);
        }

        const AmgHierarchy& hierarchy() const { return H; }

    private:
        AmgHierarchy H;
        mutable AmgWorkspace ws;
};

/// A single smoother application used as a preconditioner.
class RelaxationPreconditioner : public LinearOperator {
    public:
        RelaxationPreconditioner(const SparseMatrix &A, SmootherKind kind, double damping = 0.8)
            : A(A), S(Smoother::build(kind, A, damping)) {}

        index_t size() const override { return A.nrows; }

        void apply(std::span<const double> r, std::span<double> z) const override {
            apply_smoother(S, A, r, z);
        }

    private:
        SparseMatrix A;
        Smoother     S;
};

} // namespace deflamg

#endif
