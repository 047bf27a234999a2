#ifndef DEFLAMG_SPARSE_HPP
#define DEFLAMG_SPARSE_HPP

/**
 * \file   deflamg/sparse.hpp
 * \brief  CSR matrices, dense matrices and the kernels built on them.
 */

#include <cstdint>
#include <span>
#include <vector>

namespace deflamg {

using index_t = std::int64_t;

/// Compressed sparse row matrix.
/**
 * Within each row column indices are strictly increasing and there are no
 * duplicate entries. Construct through from_triplets() or the checked
 * constructor; both establish the invariants.
 */
struct SparseMatrix {
    index_t nrows = 0;
    index_t ncols = 0;
    std::vector<index_t> row_ptr{0};
    std::vector<index_t> col_idx;
    std::vector<double>  values;

    SparseMatrix() = default;

    /// Takes ownership of CSR arrays; throws StructureError if they are
    /// not a valid sorted, duplicate-free CSR.
    SparseMatrix(index_t nrows, index_t ncols,
                 std::vector<index_t> row_ptr,
                 std::vector<index_t> col_idx,
                 std::vector<double>  values);

    index_t nnz() const { return static_cast<index_t>(col_idx.size()); }

    /// Value at (i, j), zero when not stored. Binary search in the row.
    double at(index_t i, index_t j) const;

    /// Checks the CSR invariants, throws StructureError on violation.
    void validate() const;

    std::vector<double> diagonal() const;

    static SparseMatrix identity(index_t n);
};

struct Triplet {
    index_t row;
    index_t col;
    double  value;
};

/// Builds a CSR matrix, sorting entries and summing duplicates.
SparseMatrix from_triplets(index_t nrows, index_t ncols, std::vector<Triplet> entries);

/// Row-major dense matrix.
struct DenseMatrix {
    index_t nrows = 0;
    index_t ncols = 0;
    std::vector<double> values;

    DenseMatrix() = default;
    DenseMatrix(index_t nrows, index_t ncols, double fill = 0.0)
        : nrows(nrows), ncols(ncols), values(static_cast<std::size_t>(nrows * ncols), fill) {}

    double& operator()(index_t i, index_t j) { return values[static_cast<std::size_t>(i * ncols + j)]; }
    double  operator()(index_t i, index_t j) const { return values[static_cast<std::size_t>(i * ncols + j)]; }
};

DenseMatrix to_dense(const SparseMatrix &A);

/// LU factorization with partial pivoting, packed L\U storage.
class LuFactorization {
    public:
        LuFactorization() = default;

        index_t size() const { return lu_.nrows; }

        /// Solves A x = b in place.
        void solve_in_place(std::span<double> x) const;

        std::vector<double> solve(std::span<const double> b) const;

        const DenseMatrix& packed() const { return lu_; }
        const std::vector<index_t>& pivots() const { return piv_; }

    private:
        friend LuFactorization dense_lu(DenseMatrix A);

        DenseMatrix          lu_;
        std::vector<index_t> piv_;
};

/// Factorizes a square dense matrix. Throws SingularMatrixError when a
/// pivot falls below n * eps * max|a_ij|, DimensionError when not square.
LuFactorization dense_lu(DenseMatrix A);

/// y = alpha * A * x + beta * y
/**
 * Rows are processed in order with a fixed summation order per row, so
 * the result does not depend on the thread count.
 */
void spmv(double alpha, const SparseMatrix &A, std::span<const double> x,
          double beta, std::span<double> y, int threads = 1);

/// Returns alpha * A * x + beta * y.
std::vector<double> matvec(double alpha, const SparseMatrix &A,
                           std::span<const double> x, double beta,
                           std::span<const double> y);

SparseMatrix transpose(const SparseMatrix &A);

/// Sparse product A * B. Entries with magnitude below 1e-300 are dropped.
SparseMatrix spgemm(const SparseMatrix &A, const SparseMatrix &B);

/// Submatrix keeping rows [row_begin, row_end) and columns [col_begin, col_end),
/// renumbered from zero.
SparseMatrix extract_block(const SparseMatrix &A,
                           index_t row_begin, index_t row_end,
                           index_t col_begin, index_t col_end);

// Small dense-vector helpers shared across modules.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

} // namespace deflamg

#endif
