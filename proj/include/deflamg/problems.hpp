#ifndef DEFLAMG_PROBLEMS_HPP
#define DEFLAMG_PROBLEMS_HPP

/**
 * \file   deflamg/problems.hpp
 * \brief  Model problems on the unit cube with geometric box partitioning.
 *
 * Unknowns are numbered box by box, lexicographically (x fastest) inside
 * each box, so every box is a contiguous index range and the returned
 * Partition is geometrically compact.
 */

#include <deflamg/deflation.hpp>
#include <deflamg/runtime.hpp>
#include <deflamg/sparse.hpp>

#include <array>
#include <optional>
#include <vector>

namespace deflamg {

/// Interior points per axis; spacing is 1 / (n + 1) on each axis.
struct GridSpec {
    index_t nx = 1, ny = 1, nz = 1;

    GridSpec() = default;
    GridSpec(index_t n) : nx(n), ny(n), nz(n) {}
    GridSpec(index_t nx, index_t ny, index_t nz) : nx(nx), ny(ny), nz(nz) {}

    index_t points() const { return nx * ny * nz; }
    double  h(int axis) const;
};

using BoxCounts = std::array<int, 3>;

struct ProblemInstance {
    SparseMatrix        A;
    std::vector<double> b;
    Coordinates         coords;     ///< one row per unknown
    Partition           partition;  ///< one subdomain per box
    std::optional<std::vector<double>> exact;
    std::vector<char>   mask;       ///< pressure unknowns (saddle point only)
};

/// Sizes of `parts` near-even pieces of n, the remainder going to the first.
std::vector<index_t> split_axis(index_t n, int parts);

/// Grid point (i, j, k) -> position in the box-major ordering. Throws
/// PartitionError when an axis has fewer points than boxes.
std::vector<index_t> box_ordering(const GridSpec &g, const BoxCounts &boxes);

/// -Laplace(u) = 1 with homogeneous Dirichlet conditions, 7-point stencil
/// scaled by h^2 (diagonal 6, neighbours -1), b = h^2.
ProblemInstance gen_poisson3d(const GridSpec &g, const BoxCounts &boxes = {1, 1, 1});

/// Saddle-point system [K G; D S] on the grid nodes, four unknowns
/// (u, v, w, p) per node.
/**
 * K is three copies of the h^2-scaled Laplacian plus a unit mass term
 * (a backward Euler step with dt = h^2),
 * G the centered gradient (entries +-h/2, terms leaving the domain
 * dropped), D = G^T and S = -eps h^2 I with eps = 1e-2. The Schur
 * complement S - D K^{-1} G is negative definite, so the system is
 * invertible. b = A x* for a smooth manufactured x*, stored in `exact`.
 */
ProblemInstance gen_saddle_point(const GridSpec &g, const BoxCounts &boxes = {1, 1, 1});

} // namespace deflamg

#endif
