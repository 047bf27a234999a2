#include <deflamg/sparse.hpp>
#include <deflamg/errors.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace deflamg {

SparseMatrix::SparseMatrix(index_t nrows, index_t ncols,
                           std::vector<index_t> row_ptr,
                           std::vector<index_t> col_idx,
                           std::vector<double>  values)
    : nrows(nrows), ncols(ncols), row_ptr(std::move(row_ptr)),
      col_idx(std::move(col_idx)), values(std::move(values))
{
    validate();
}

void SparseMatrix::validate() const {
    if (nrows < 0 || ncols < 0)
        throw StructureError("negative matrix dimensions");
    if (static_cast<index_t>(row_ptr.size()) != nrows + 1)
        throw StructureError("row_ptr must have nrows + 1 entries");
    if (row_ptr.front() != 0)
        throw StructureError("row_ptr[0] must be zero");
    if (row_ptr.back() != nnz() || values.size() != col_idx.size())
        throw StructureError("row_ptr[nrows], col_idx and values disagree on nnz");

    for (index_t i = 0; i < nrows; ++i) {
        if (row_ptr[i + 1] < row_ptr[i])
            throw StructureError("row_ptr decreases at row " + std::to_string(i));
        for (index_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            index_t c = col_idx[k];
            if (c < 0 || c >= ncols)
                throw StructureError("column index out of range in row " + std::to_string(i));
            if (k > row_ptr[i] && c <= col_idx[k - 1])
                throw StructureError("columns not strictly increasing in row " + std::to_string(i));
        }
    }
}

double SparseMatrix::at(index_t i, index_t j) const {
    auto b = col_idx.begin() + row_ptr[i];
    auto e = col_idx.begin() + row_ptr[i + 1];
    auto it = std::lower_bound(b, e, j);
    if (it == e || *it != j) return 0.0;
    return values[static_cast<std::size_t>(it - col_idx.begin())];
}

std::vector<double> SparseMatrix::diagonal() const {
    std::vector<double> d(static_cast<std::size_t>(std::min(nrows, ncols)), 0.0);
    for (index_t i = 0; i < static_cast<index_t>(d.size()); ++i)
        d[i] = at(i, i);
    return d;
}

SparseMatrix SparseMatrix::identity(index_t n) {
    SparseMatrix I;
    I.nrows = I.ncols = n;
    I.row_ptr.resize(n + 1);
    std::iota(I.row_ptr.begin(), I.row_ptr.end(), index_t(0));
    I.col_idx.resize(n);
    std::iota(I.col_idx.begin(), I.col_idx.end(), index_t(0));
    I.values.assign(n, 1.0);
    return I;
}

SparseMatrix from_triplets(index_t nrows, index_t ncols, std::vector<Triplet> entries) {
    for (const auto &t : entries)
        if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols)
            throw DimensionError("triplet (" + std::to_string(t.row) + ", " +
                    std::to_string(t.col) + ") outside " + std::to_string(nrows) +
                    "x" + std::to_string(ncols));

    std::stable_sort(entries.begin(), entries.end(), [](const Triplet &a, const Triplet &b) {
        return a.row < b.row || (a.row == b.row && a.col < b.col);
    });

    SparseMatrix A;
    A.nrows = nrows;
    A.ncols = ncols;
    A.row_ptr.assign(nrows + 1, 0);
    A.col_idx.reserve(entries.size());
    A.values.reserve(entries.size());

    for (std::size_t k = 0; k < entries.size(); ) {
        const Triplet &t = entries[k];
        double v = 0;
        std::size_t e = k;
        for (; e < entries.size() && entries[e].row == t.row && entries[e].col == t.col; ++e)
            v += entries[e].value;
        A.col_idx.push_back(t.col);
        A.values.push_back(v);
        ++A.row_ptr[t.row + 1];
        k = e;
    }
    std::partial_sum(A.row_ptr.begin(), A.row_ptr.end(), A.row_ptr.begin());
    return A;
}

DenseMatrix to_dense(const SparseMatrix &A) {
    DenseMatrix D(A.nrows, A.ncols);
    for (index_t i = 0; i < A.nrows; ++i)
        for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            D(i, A.col_idx[k]) = A.values[k];
    return D;
}

//---------------------------------------------------------------------------
// Dense LU
//---------------------------------------------------------------------------
LuFactorization dense_lu(DenseMatrix A) {
    if (A.nrows != A.ncols)
        throw DimensionError("dense_lu: matrix is " + std::to_string(A.nrows) +
                "x" + std::to_string(A.ncols));

    const index_t n = A.nrows;
    double amax = 0;
    for (double v : A.values) amax = std::max(amax, std::abs(v));
    const double tiny = static_cast<double>(std::max<index_t>(n, 1)) *
                        std::numeric_limits<double>::epsilon() * amax;

    LuFactorization f;
    f.piv_.resize(n);

    for (index_t k = 0; k < n; ++k) {
        index_t p = k;
        double  pmax = std::abs(A(k, k));
        for (index_t i = k + 1; i < n; ++i) {
            if (std::abs(A(i, k)) > pmax) {
                pmax = std::abs(A(i, k));
                p = i;
            }
        }
        if (pmax <= tiny || amax == 0)
            throw SingularMatrixError("dense_lu: zero pivot in column " + std::to_string(k) +
                    " (columns are linearly dependent)");

        f.piv_[k] = p;
        if (p != k)
            for (index_t j = 0; j < n; ++j) std::swap(A(k, j), A(p, j));

        const double d = A(k, k);
        for (index_t i = k + 1; i < n; ++i) {
            double l = A(i, k) / d;
            A(i, k) = l;
            if (l == 0) continue;
            for (index_t j = k + 1; j < n; ++j)
                A(i, j) -= l * A(k, j);
        }
    }

    f.lu_ = std::move(A);
    return f;
}

void LuFactorization::solve_in_place(std::span<double> x) const {
    const index_t n = size();
    if (static_cast<index_t>(x.size()) != n)
        throw DimensionError("LuFactorization::solve: rhs length mismatch");

    for (index_t k = 0; k < n; ++k)
        if (piv_[k] != k) std::swap(x[k], x[piv_[k]]);

    for (index_t i = 1; i < n; ++i) {
        double s = x[i];
        for (index_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
        x[i] = s;
    }

    for (index_t i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (index_t j = i + 1; j < n; ++j) s -= lu_(i, j) * x[j];
        x[i] = s / lu_(i, i);
    }
}

std::vector<double> LuFactorization::solve(std::span<const double> b) const {
    std::vector<double> x(b.begin(), b.end());
    solve_in_place(x);
    return x;
}

//---------------------------------------------------------------------------
// Kernels
//---------------------------------------------------------------------------
void spmv(double alpha, const SparseMatrix &A, std::span<const double> x,
          double beta, std::span<double> y, int threads)
{
    if (static_cast<index_t>(x.size()) != A.ncols || static_cast<index_t>(y.size()) != A.nrows)
        throw DimensionError("spmv: A is " + std::to_string(A.nrows) + "x" +
                std::to_string(A.ncols) + ", x has " + std::to_string(x.size()) +
                ", y has " + std::to_string(y.size()));

    const index_t n = A.nrows;
    const index_t *ptr = A.row_ptr.data();
    const index_t *col = A.col_idx.data();
    const double  *val = A.values.data();

#pragma omp parallel for num_threads(threads) if(threads > 1) schedule(static)
    for (index_t i = 0; i < n; ++i) {
        double s = 0;
        for (index_t k = ptr[i]; k < ptr[i + 1]; ++k)
            s += val[k] * x[col[k]];
        y[i] = (beta == 0 ? 0.0 : beta * y[i]) + alpha * s;
    }
}

std::vector<double> matvec(double alpha, const SparseMatrix &A,
                           std::span<const double> x, double beta,
                           std::span<const double> y)
{
    std::vector<double> out(y.begin(), y.end());
    spmv(alpha, A, x, beta, std::span<double>(out));
    return out;
}

SparseMatrix transpose(const SparseMatrix &A) {
    SparseMatrix T;
    T.nrows = A.ncols;
    T.ncols = A.nrows;
    T.row_ptr.assign(T.nrows + 1, 0);
    T.col_idx.resize(A.nnz());
    T.values.resize(A.nnz());

    for (index_t k = 0; k < A.nnz(); ++k) ++T.row_ptr[A.col_idx[k] + 1];
    std::partial_sum(T.row_ptr.begin(), T.row_ptr.end(), T.row_ptr.begin());

    std::vector<index_t> head(T.row_ptr.begin(), T.row_ptr.end() - 1);
    for (index_t i = 0; i < A.nrows; ++i) {
        for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            index_t h = head[A.col_idx[k]]++;
            T.col_idx[h] = i;
            T.values[h]  = A.values[k];
        }
    }
    return T;
}

SparseMatrix spgemm(const SparseMatrix &A, const SparseMatrix &B) {
    if (A.ncols != B.nrows)
        throw DimensionError("spgemm: inner dimensions " + std::to_string(A.ncols) +
                " and " + std::to_string(B.nrows) + " differ");

    SparseMatrix C;
    C.nrows = A.nrows;
    C.ncols = B.ncols;
    C.row_ptr.assign(C.nrows + 1, 0);

    std::vector<index_t> marker(B.ncols, -1);
    std::vector<double>  acc(B.ncols, 0.0);
    std::vector<index_t> cols;

    for (index_t i = 0; i < A.nrows; ++i) {
        cols.clear();
        for (index_t ka = A.row_ptr[i]; ka < A.row_ptr[i + 1]; ++ka) {
            index_t j = A.col_idx[ka];
            double  a = A.values[ka];
            for (index_t kb = B.row_ptr[j]; kb < B.row_ptr[j + 1]; ++kb) {
                index_t c = B.col_idx[kb];
                if (marker[c] != i) {
                    marker[c] = i;
                    acc[c] = a * B.values[kb];
                    cols.push_back(c);
                } else {
                    acc[c] += a * B.values[kb];
                }
            }
        }
        std::sort(cols.begin(), cols.end());
        for (index_t c : cols) {
            if (std::abs(acc[c]) < 1e-300) continue;
            C.col_idx.push_back(c);
            C.values.push_back(acc[c]);
        }
        C.row_ptr[i + 1] = C.nnz();
    }
    return C;
}

SparseMatrix extract_block(const SparseMatrix &A,
                           index_t row_begin, index_t row_end,
                           index_t col_begin, index_t col_end)
{
    SparseMatrix B;
    B.nrows = row_end - row_begin;
    B.ncols = col_end - col_begin;
    B.row_ptr.assign(B.nrows + 1, 0);
    for (index_t i = row_begin; i < row_end; ++i) {
        for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            index_t c = A.col_idx[k];
            if (c < col_begin || c >= col_end) continue;
            B.col_idx.push_back(c - col_begin);
            B.values.push_back(A.values[k]);
        }
        B.row_ptr[i - row_begin + 1] = B.nnz();
    }
    return B;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

} // namespace deflamg
