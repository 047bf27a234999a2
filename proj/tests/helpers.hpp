#ifndef DEFLAMG_TESTS_HELPERS_HPP
#define DEFLAMG_TESTS_HELPERS_HPP

#include <deflamg/sparse.hpp>

#include <cmath>
#include <random>
#include <utility>
#include <vector>

namespace testing {

using deflamg::index_t;
using deflamg::SparseMatrix;
using Dense = std::vector<std::vector<double>>;

inline SparseMatrix tridiag(index_t n, double lo = -1, double d = 2, double up = -1) {
    std::vector<deflamg::Triplet> t;
    for (index_t i = 0; i < n; ++i) {
        if (i > 0)     t.push_back({i, i - 1, lo});
        t.push_back({i, i, d});
        if (i + 1 < n) t.push_back({i, i + 1, up});
    }
    return deflamg::from_triplets(n, n, std::move(t));
}

inline SparseMatrix random_sparse(index_t rows, index_t cols, double fill, std::mt19937 &rng) {
    std::uniform_real_distribution<double> u(0, 1), v(-1, 1);
    std::vector<deflamg::Triplet> t;
    for (index_t i = 0; i < rows; ++i)
        for (index_t j = 0; j < cols; ++j)
            if (u(rng) < fill) t.push_back({i, j, v(rng)});
    return deflamg::from_triplets(rows, cols, std::move(t));
}

// Random sparse pattern, symmetric if asked, with a dominant diagonal.
inline SparseMatrix random_dd(index_t n, std::mt19937 &rng, bool symmetric = false, double fill = 0.05) {
    std::uniform_real_distribution<double> u(0, 1), v(-1, 1);
    std::vector<deflamg::Triplet> t;
    std::vector<double> rowsum(n, 0.0);
    for (index_t i = 0; i < n; ++i)
        for (index_t j = symmetric ? i + 1 : 0; j < n; ++j) {
            if (i == j || u(rng) >= fill) continue;
            const double a = v(rng);
            t.push_back({i, j, a});
            rowsum[i] += std::abs(a);
            if (symmetric) {
                t.push_back({j, i, a});
                rowsum[j] += std::abs(a);
            }
        }
    for (index_t i = 0; i < n; ++i) t.push_back({i, i, rowsum[i] + 1.0 + u(rng)});
    return deflamg::from_triplets(n, n, std::move(t));
}

inline Dense dense(const SparseMatrix &A) {
    Dense D(A.nrows, std::vector<double>(A.ncols, 0.0));
    for (index_t i = 0; i < A.nrows; ++i)
        for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) D[i][A.col_idx[k]] += A.values[k];
    return D;
}

inline std::vector<double> dense_mv(const Dense &A, const std::vector<double> &x) {
    std::vector<double> y(A.size(), 0.0);
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) y[i] += A[i][j] * x[j];
    return y;
}

inline Dense dense_mm(const Dense &A, const Dense &B) {
    const std::size_t n = A.size(), k = B.size(), m = B.empty() ? 0 : B[0].size();
    Dense C(n, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l)
            for (std::size_t j = 0; j < m; ++j) C[i][j] += A[i][l] * B[l][j];
    return C;
}

// Gaussian elimination with partial pivoting, kept apart from the library LU.
inline std::vector<double> gauss_solve(Dense A, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
        std::swap(A[c], A[p]);
        std::swap(b[c], b[p]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = A[r][c] / A[c][c];
            for (std::size_t j = c; j < n; ++j) A[r][j] -= f * A[c][j];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= A[i][j] * x[j];
        x[i] = s / A[i][i];
    }
    return x;
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937 &rng) {
    std::uniform_real_distribution<double> v(-1, 1);
    std::vector<double> x(n);
    for (auto &e : x) e = v(rng);
    return x;
}

inline double nrm(const std::vector<double> &x) {
    double s = 0;
    for (double e : x) s += e * e;
    return std::sqrt(s);
}

inline double rel_diff(const std::vector<double> &a, const std::vector<double> &b) {
    double d = 0, s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d += (a[i] - b[i]) * (a[i] - b[i]);
        s += b[i] * b[i];
    }
    return s > 0 ? std::sqrt(d / s) : std::sqrt(d);
}

inline double max_abs_diff(const Dense &A, const Dense &B) {
    double m = 0;
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < A[i].size(); ++j) m = std::max(m, std::abs(A[i][j] - B[i][j]));
    return m;
}

inline double max_abs(const Dense &A) {
    double m = 0;
    for (const auto &r : A)
        for (double v : r) m = std::max(m, std::abs(v));
    return m;
}

inline std::vector<double> true_residual(const SparseMatrix &A, const std::vector<double> &b,
                                         const std::vector<double> &x) {
    std::vector<double> r = b;
    deflamg::spmv(-1.0, A, x, 1.0, r);
    return r;
}

} // namespace testing

#endif
