#include <deflamg/amg.hpp>
#include <deflamg/errors.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace deflamg {

SmootherKind smoother_kind_from_string(const std::string &name) {
    if (name == "damped_jacobi") return SmootherKind::damped_jacobi;
    if (name == "gauss_seidel")  return SmootherKind::gauss_seidel;
    if (name == "spai0")         return SmootherKind::spai0;
    throw ConfigError("relax.type", "unknown relaxation '" + name +
            "' (expected damped_jacobi, gauss_seidel or spai0)");
}

std::string to_string(SmootherKind kind) {
    switch (kind) {
        case SmootherKind::damped_jacobi: return "damped_jacobi";
        case SmootherKind::gauss_seidel:  return "gauss_seidel";
        case SmootherKind::spai0:         return "spai0";
    }
    return "?";
}

//---------------------------------------------------------------------------
// Smoothers
//---------------------------------------------------------------------------
Smoother Smoother::build(SmootherKind kind, const SparseMatrix &A, double damping) {
    if (!(damping > 0 && damping < 2))
        throw ConfigError("relax.damping", "damping must lie in (0, 2)");

    Smoother S;
    S.kind    = kind;
    S.damping = damping;
    S.weights.resize(A.nrows);

    for (index_t i = 0; i < A.nrows; ++i) {
        double diag = 0, rownorm = 0;
        for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            if (A.col_idx[k] == i) diag = A.values[k];
            rownorm += A.values[k] * A.values[k];
        }

        if (kind == SmootherKind::spai0) {
            if (rownorm == 0)
                throw StructureError("spai0: row " + std::to_string(i) + " is empty");
            S.weights[i] = diag / rownorm;
        } else {
            if (diag == 0)
                throw StructureError("zero diagonal in row " + std::to_string(i));
            S.weights[i] = 1.0 / diag;
        }
    }
    return S;
}

void apply_smoother(const Smoother &S, const SparseMatrix &A,
                    std::span<const double> r, std::span<double> z)
{
    const index_t n = A.nrows;
    switch (S.kind) {
        case SmootherKind::damped_jacobi:
            for (index_t i = 0; i < n; ++i) z[i] = S.damping * S.weights[i] * r[i];
            break;
        case SmootherKind::spai0:
            for (index_t i = 0; i < n; ++i) z[i] = S.weights[i] * r[i];
            break;
        case SmootherKind::gauss_seidel:
            // Forward sweep from z = 0: entries above the diagonal are still zero.
            for (index_t i = 0; i < n; ++i) {
                double s = r[i];
                for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
                    index_t c = A.col_idx[k];
                    if (c >= i) break;
                    s -= A.values[k] * z[c];
                }
                z[i] = s * S.weights[i];
            }
            break;
    }
}

//---------------------------------------------------------------------------
// Coarsening
//---------------------------------------------------------------------------
std::vector<char> strength_graph(const SparseMatrix &A, double eps) {
    if (A.nrows != A.ncols)
        throw DimensionError("strength_graph: matrix is not square");

    std::vector<double> d = A.diagonal();
    for (index_t i = 0; i < A.nrows; ++i)
        if (d[i] == 0)
            throw StructureError("strength_graph: zero diagonal in row " + std::to_string(i));

    std::vector<char> strong(A.nnz(), 0);
    for (index_t i = 0; i < A.nrows; ++i) {
        for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            index_t j = A.col_idx[k];
            if (j == i) {
                strong[k] = 1;
            } else {
                double v = A.values[k];
                strong[k] = v != 0 && std::abs(v) > eps * std::sqrt(std::abs(d[i] * d[j]));
            }
        }
    }
    return strong;
}

Aggregates aggregate(const std::vector<char> &strong, const SparseMatrix &A) {
    if (static_cast<index_t>(strong.size()) != A.nnz())
        throw DimensionError("aggregate: strength graph does not conform to matrix");

    const index_t n = A.nrows;
    Aggregates agg;
    agg.id.assign(n, unaggregated);

    std::vector<index_t> ring;
    for (index_t i = 0; i < n; ++i) {
        if (agg.id[i] != unaggregated) continue;

        const index_t cur = agg.naggr++;
        agg.id[i] = cur;

        ring.clear();
        for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            index_t c = A.col_idx[k];
            if (c != i && strong[k] && agg.id[c] == unaggregated) {
                agg.id[c] = cur;
                ring.push_back(c);
            }
        }

        for (index_t c : ring) {
            for (index_t k = A.row_ptr[c]; k < A.row_ptr[c + 1]; ++k) {
                index_t cc = A.col_idx[k];
                if (cc != c && strong[k] && agg.id[cc] == unaggregated)
                    agg.id[cc] = cur;
            }
        }
    }
    return agg;
}

SparseMatrix tentative_prolongation(const Aggregates &agg, index_t n) {
    if (static_cast<index_t>(agg.id.size()) != n)
        throw DimensionError("tentative_prolongation: aggregate map has wrong length");

    SparseMatrix P;
    P.nrows = n;
    P.ncols = agg.naggr;
    P.row_ptr.assign(n + 1, 0);
    for (index_t i = 0; i < n; ++i) {
        if (agg.id[i] != unaggregated) {
            P.col_idx.push_back(agg.id[i]);
            P.values.push_back(1.0);
        }
        P.row_ptr[i + 1] = P.nnz();
    }
    return P;
}

SparseMatrix smooth_prolongation(const SparseMatrix &A, const SparseMatrix &P_tent,
                                 double omega, const std::vector<char> &strong)
{
    if (A.nrows != A.ncols || A.ncols != P_tent.nrows)
        throw DimensionError("smooth_prolongation: shapes do not conform");
    if (!strong.empty() && static_cast<index_t>(strong.size()) != A.nnz())
        throw DimensionError("smooth_prolongation: strength graph does not conform to matrix");

    const index_t n = A.nrows;

    // W = I - omega D^{-1} A_f, same pattern as the strong part of A.
    SparseMatrix W;
    W.nrows = W.ncols = n;
    W.row_ptr.assign(n + 1, 0);
    for (index_t i = 0; i < n; ++i) {
        double diag = 0, weak = 0;
        for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            if (A.col_idx[k] == i) diag = A.values[k];
            else if (!strong.empty() && !strong[k]) weak += A.values[k];
        }
        if (diag == 0)
            throw StructureError("smooth_prolongation: zero diagonal in row " + std::to_string(i));

        const double s = omega / diag;
        for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            index_t c = A.col_idx[k];
            if (c == i) {
                W.col_idx.push_back(i);
                W.values.push_back(1.0 - s * (diag + weak));
            } else if (strong.empty() || strong[k]) {
                W.col_idx.push_back(c);
                W.values.push_back(-s * A.values[k]);
            }
        }
        W.row_ptr[i + 1] = W.nnz();
    }

    return spgemm(W, P_tent);
}

//---------------------------------------------------------------------------
// Hierarchy
//---------------------------------------------------------------------------
AmgHierarchy build_hierarchy(const SparseMatrix &A, const AmgParams &prm) {
    if (A.nrows != A.ncols)
        throw DimensionError("build_hierarchy: matrix is not square");

    AmgHierarchy H;
    H.coarse_enough = prm.coarse_enough;

    SparseMatrix cur = A;
    double eps = prm.eps_strong;

    while (cur.nrows > prm.coarse_enough) {
        std::vector<char> S = strength_graph(cur, eps);
        Aggregates agg = aggregate(S, cur);

        // No reduction: keep this level as the direct one.
        if (agg.naggr == 0 || agg.naggr >= cur.nrows) break;

        AmgLevel L;
        L.P = smooth_prolongation(cur, tentative_prolongation(agg, cur.nrows), prm.omega, S);
        L.R = transpose(L.P);
        L.smoother = Smoother::build(prm.relax, cur, prm.damping);

        SparseMatrix next = spgemm(L.R, spgemm(cur, L.P));
        L.A = std::move(cur);
        H.levels.push_back(std::move(L));

        cur = std::move(next);
        eps *= 0.5;
    }

    H.coarse = dense_lu(to_dense(cur));
    H.coarse_matrix = std::move(cur);
    return H;
}

std::vector<index_t> AmgHierarchy::level_sizes() const {
    std::vector<index_t> s;
    for (const auto &L : levels) s.push_back(L.A.nrows);
    s.push_back(coarse_matrix.nrows);
    return s;
}

AmgWorkspace AmgHierarchy::make_workspace() const {
    AmgWorkspace ws;
    const std::size_t nl = levels.size() + 1;
    ws.rhs.resize(nl);
    ws.sol.resize(nl);
    ws.tmp.resize(nl);
    ws.corr.resize(nl);

    auto sizes = level_sizes();
    for (std::size_t l = 0; l < nl; ++l) {
        ws.rhs[l].resize(sizes[l]);
        ws.sol[l].resize(sizes[l]);
        ws.tmp[l].resize(sizes[l]);
        ws.corr[l].resize(sizes[l]);
    }
    return ws;
}

void AmgHierarchy::vcycle(std::span<const double> r, std::span<double> z, AmgWorkspace &ws) const {
    if (static_cast<index_t>(r.size()) != size() || static_cast<index_t>(z.size()) != size())
        throw DimensionError("vcycle: vector length does not match the finest level");
    cycle(0, r, z, ws);
}

std::vector<double> AmgHierarchy::vcycle(std::span<const double> r) const {
    AmgWorkspace ws = make_workspace();
    std::vector<double> z(r.size());
    vcycle(r, z, ws);
    return z;
}

void AmgHierarchy::cycle(std::size_t level, std::span<const double> r, std::span<double> z,
                         AmgWorkspace &ws) const
{
    if (level == levels.size()) {
        std::copy(r.begin(), r.end(), z.begin());
        coarse.solve_in_place(z);
        return;
    }

    const AmgLevel &L = levels[level];
    std::vector<double> &t = ws.tmp[level];
    std::vector<double> &c = ws.corr[level];

    // pre-smoothing
    apply_smoother(L.smoother, L.A, r, z);

    // t = r - A z
    std::copy(r.begin(), r.end(), t.begin());
    spmv(-1.0, L.A, z, 1.0, t);

    // coarse-grid correction
    spmv(1.0, L.R, t, 0.0, ws.rhs[level + 1]);
    cycle(level + 1, ws.rhs[level + 1], ws.sol[level + 1], ws);
    spmv(1.0, L.P, ws.sol[level + 1], 1.0, z);

    // post-smoothing
    std::copy(r.begin(), r.end(), t.begin());
    spmv(-1.0, L.A, z, 1.0, t);
    apply_smoother(L.smoother, L.A, t, c);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += c[i];
}

} // namespace deflamg
