#include <deflamg/deflation.hpp>
#include <deflamg/errors.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace deflamg {

namespace {

double now() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

bool all_zero(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double a) { return a == 0.0; });
}

} // namespace

DeflationKind deflation_kind_from_string(const std::string &name) {
    if (name == "constant") return DeflationKind::constant;
    if (name == "linear")   return DeflationKind::linear;
    throw ConfigError("deflation.kind", "unknown deflation kind '" + name +
            "' (expected constant or linear)");
}

std::string to_string(DeflationKind kind) {
    return kind == DeflationKind::constant ? "constant" : "linear";
}

//---------------------------------------------------------------------------
// Basis
//---------------------------------------------------------------------------
SparseMatrix DeflationBasis::AZ() const {
    SparseMatrix G;
    G.nrows = partition.nglobal;
    G.ncols = ncoarse();
    G.row_ptr.assign(1, 0);
    for (const auto &B : AZl) {
        for (index_t i = 0; i < B.nrows; ++i)
            G.row_ptr.push_back(G.row_ptr.back() + B.row_ptr[i + 1] - B.row_ptr[i]);
        G.col_idx.insert(G.col_idx.end(), B.col_idx.begin(), B.col_idx.end());
        G.values.insert(G.values.end(), B.values.begin(), B.values.end());
    }
    return G;
}

DeflationBasis build_basis(const DistributedMatrix &A, DeflationKind kind, const Coordinates *coords) {
    const Partition &P = A.partition();
    Communicator &comm = A.comm();
    const auto &views  = A.views();
    const int m = P.m;

    DeflationBasis Z;
    Z.kind      = kind;
    Z.partition = P;

    int dim = 0;
    if (kind == DeflationKind::linear) {
        if (!coords || coords->dim < 1 || coords->dim > 3 || coords->size() != P.nglobal)
            throw DimensionError("linear deflation needs 1 to 3 coordinates for each of the " +
                    std::to_string(P.nglobal) + " unknowns");
        dim = coords->dim;
    }
    Z.k = 1 + dim;
    const int k = Z.k;
    const index_t nc = Z.ncoarse();

    Z.Zl.resize(m);
    Z.barycenter.assign(m, {0.0, 0.0, 0.0});
    for (int d = 0; d < m; ++d) {
        const index_t nloc = P.size(d);
        DenseMatrix &B = Z.Zl[d];
        B = DenseMatrix(nloc, k, 0.0);

        auto &bc = Z.barycenter[d];
        for (int c = 0; c < dim; ++c) {
            for (index_t i = 0; i < nloc; ++i) bc[c] += (*coords)(P.begin(d) + i, c);
            bc[c] /= static_cast<double>(nloc);
        }
        for (index_t i = 0; i < nloc; ++i) {
            B(i, 0) = 1.0;
            for (int c = 0; c < dim; ++c)
                B(i, c + 1) = (*coords)(P.begin(d) + i, c) - bc[c];
        }
    }

    // Halo values of every column of Z.
    std::vector<std::vector<std::vector<double>>> zghost(k);
    {
        std::vector<double> zc(P.nglobal);
        std::vector<std::span<const double>> locals(m);
        for (int c = 0; c < k; ++c) {
            for (int d = 0; d < m; ++d)
                for (index_t i = 0; i < P.size(d); ++i) zc[P.begin(d) + i] = Z.Zl[d](i, c);
            for (int d = 0; d < m; ++d) locals[d] = local_part(std::span<const double>(zc), P, d);
            zghost[c] = comm.halo_exchange(views, locals);
        }
    }

    Z.AZl.resize(m);
    std::vector<std::vector<double>> Epart(m);

    comm.run([&](int d) {
        const SubdomainView &v = views[d];
        const DenseMatrix   &B = Z.Zl[d];
        SparseMatrix &AZ = Z.AZl[d];
        AZ.nrows = v.nlocal();
        AZ.ncols = nc;
        AZ.row_ptr.assign(v.nlocal() + 1, 0);

        std::vector<double>  acc(nc, 0.0);
        std::vector<char>    used(nc, 0);
        std::vector<index_t> cols;

        for (index_t i = 0; i < v.nlocal(); ++i) {
            cols.clear();
            auto add = [&](index_t col, double val) {
                if (!used[col]) { used[col] = 1; cols.push_back(col); }
                acc[col] += val;
            };

            const SparseMatrix &L = v.local_block;
            for (index_t j = L.row_ptr[i]; j < L.row_ptr[i + 1]; ++j)
                for (int c = 0; c < k; ++c)
                    add(d * k + c, L.values[j] * B(L.col_idx[j], c));

            const SparseMatrix &G = v.ghost_block;
            for (index_t j = G.row_ptr[i]; j < G.row_ptr[i + 1]; ++j) {
                const index_t g = G.col_idx[j];
                const int owner = P.owner[v.ghost_cols[g]];
                for (int c = 0; c < k; ++c)
                    add(owner * k + c, G.values[j] * zghost[c][d][g]);
            }

            std::sort(cols.begin(), cols.end());
            for (index_t col : cols) {
                if (acc[col] != 0.0) {
                    AZ.col_idx.push_back(col);
                    AZ.values.push_back(acc[col]);
                }
                acc[col]  = 0.0;
                used[col] = 0;
            }
            AZ.row_ptr[i + 1] = AZ.nnz();
        }

        // Rows d*k .. d*k+k-1 of Z^T A Z.
        std::vector<double> &E = Epart[d];
        E.assign(static_cast<std::size_t>(nc * nc), 0.0);
        for (index_t i = 0; i < v.nlocal(); ++i)
            for (int a = 0; a < k; ++a) {
                const double z = B(i, a);
                if (z == 0.0) continue;
                double *row = E.data() + (d * k + a) * nc;
                for (index_t j = AZ.row_ptr[i]; j < AZ.row_ptr[i + 1]; ++j)
                    row[AZ.col_idx[j]] += z * AZ.values[j];
            }
    });

    Z.E = DenseMatrix(nc, nc);
    Z.E.values = comm.allreduce_sum(Epart);

    const double t0 = now();
    Z.E_lu.resize(m);
    comm.run([&](int d) { Z.E_lu[d] = dense_lu(Z.E); });
    Z.factorize_seconds = now() - t0;

    return Z;
}

std::vector<double> deflation_restrict(const DeflationBasis &Z, Communicator &comm,
                                       std::span<const double> r)
{
    const Partition &P = Z.partition;
    if (static_cast<index_t>(r.size()) != P.nglobal)
        throw DimensionError("deflation_restrict: vector length mismatch");

    const index_t nc = Z.ncoarse();
    std::vector<std::vector<double>> part(P.m);
    comm.run([&](int d) {
        std::vector<double> &t = part[d];
        t.assign(nc, 0.0);
        const DenseMatrix &B = Z.Zl[d];
        auto rl = local_part(r, P, d);
        for (index_t i = 0; i < B.nrows; ++i)
            for (int c = 0; c < Z.k; ++c) t[d * Z.k + c] += B(i, c) * rl[i];
    });
    return comm.allreduce_sum(part);
}

void deflation_prolong(const DeflationBasis &Z, Communicator &comm,
                       std::span<const double> c, std::span<double> x, double alpha)
{
    const Partition &P = Z.partition;
    if (static_cast<index_t>(x.size()) != P.nglobal || static_cast<index_t>(c.size()) != Z.ncoarse())
        throw DimensionError("deflation_prolong: vector length mismatch");

    comm.run([&](int d) {
        const DenseMatrix &B = Z.Zl[d];
        auto xl = local_part(x, P, d);
        const double *cd = c.data() + d * Z.k;
        for (index_t i = 0; i < B.nrows; ++i) {
            double s = 0;
            for (int j = 0; j < Z.k; ++j) s += B(i, j) * cd[j];
            xl[i] += alpha * s;
        }
    });
}

std::vector<double> coarse_solve(const DeflationBasis &Z, std::span<const double> t, double coarse_tol) {
    const index_t nc = Z.ncoarse();
    if (static_cast<index_t>(t.size()) != nc)
        throw DimensionError("coarse_solve: vector length mismatch");

    if (coarse_tol <= 0) return Z.E_lu.front().solve(t);

    FunctionOperator E(nc, [&](std::span<const double> x, std::span<double> y) {
        for (index_t i = 0; i < nc; ++i) {
            double s = 0;
            for (index_t j = 0; j < nc; ++j) s += Z.E(i, j) * x[j];
            y[i] = s;
        }
    });

    KrylovParams prm;
    prm.tol     = coarse_tol;
    prm.restart = nc;
    prm.maxiter = 4 * nc;

    std::vector<double> c(nc, 0.0);
    gmres(E, t, c, nullptr, prm);
    return c;
}

void project(const DeflationBasis &Z, Communicator &comm,
             std::span<const double> r, std::span<double> out, double coarse_tol)
{
    const Partition &P = Z.partition;
    if (static_cast<index_t>(r.size()) != P.nglobal || out.size() != r.size())
        throw DimensionError("project: vector length mismatch");

    std::vector<double> t1 = deflation_restrict(Z, comm, r);
    if (r.data() != out.data()) std::copy(r.begin(), r.end(), out.begin());
    if (all_zero(t1)) return;

    std::vector<double> t2;
    if (coarse_tol > 0) t2 = coarse_solve(Z, t1, coarse_tol);

    comm.run([&](int d) {
        // Each subdomain solves with its own replica of E.
        std::vector<double> t2l = coarse_tol > 0 ? t2 : Z.E_lu[d].solve(t1);
        spmv(-1.0, Z.AZl[d], t2l, 1.0, local_part(out, P, d), comm.threads());
    });
}

std::vector<double> project(const DeflationBasis &Z, Communicator &comm,
                            std::span<const double> r, double coarse_tol)
{
    std::vector<double> out(r.size());
    project(Z, comm, r, out, coarse_tol);
    return out;
}

//---------------------------------------------------------------------------
// Block-local preconditioners
//---------------------------------------------------------------------------
BlockAmgPreconditioner::BlockAmgPreconditioner(const DistributedMatrix &A, const AmgParams &prm)
    : P(A.partition()), comm(A.comm()), H(P.m), ws(P.m)
{
    comm.run([&](int d) {
        H[d]  = build_hierarchy(A.views()[d].local_block, prm);
        ws[d] = H[d].make_workspace();
    });
}

void BlockAmgPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
    if (static_cast<index_t>(r.size()) != P.nglobal || r.size() != z.size())
        throw DimensionError("BlockAmgPreconditioner: vector length mismatch");
    comm.run([&](int d) {
        H[d].vcycle(local_part(r, P, d), local_part(z, P, d), ws[d]);
    });
}

BlockRelaxationPreconditioner::BlockRelaxationPreconditioner(
        const DistributedMatrix &A, SmootherKind kind, double damping)
    : P(A.partition()), comm(A.comm()), blocks(P.m), S(P.m)
{
    comm.run([&](int d) {
        blocks[d] = A.views()[d].local_block;
        S[d] = Smoother::build(kind, blocks[d], damping);
    });
}

void BlockRelaxationPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
    if (static_cast<index_t>(r.size()) != P.nglobal || r.size() != z.size())
        throw DimensionError("BlockRelaxationPreconditioner: vector length mismatch");
    comm.run([&](int d) {
        apply_smoother(S[d], blocks[d], local_part(r, P, d), local_part(z, P, d));
    });
}

//---------------------------------------------------------------------------
// Deflated solver
//---------------------------------------------------------------------------
SubdomainDeflation::SubdomainDeflation(const SparseMatrix &Amat, const Partition &P, Communicator &comm,
                                       const DeflationParams &dprm, const AmgParams &aprm,
                                       const Coordinates *coords)
    : setup_time(now()), A(Amat, P, comm), dprm(dprm), M(A, aprm), Z(build_basis(A, dprm.kind, coords))
{
    if (dprm.inexact && !(dprm.coarse_tol > 0 && dprm.coarse_tol < 1))
        throw ConfigError("deflation.coarse_tol", "must lie in (0, 1)");
    setup_time = now() - setup_time;
}

void SubdomainDeflation::project(std::span<const double> r, std::span<double> out) const {
    deflamg::project(Z, A.comm(), r, out, coarse_tol());
}

void SubdomainDeflation::apply(std::span<const double> r, std::span<double> z) const {
    Communicator &comm = A.comm();
    const double tol = coarse_tol();
    const std::size_t n = r.size();

    std::vector<double> c1 = coarse_solve(Z, deflation_restrict(Z, comm, r), tol);

    std::vector<double> s(r.begin(), r.end());
    comm.run([&](int d) {
        spmv(-1.0, Z.AZl[d], c1, 1.0, local_part(std::span<double>(s), A.partition(), d), comm.threads());
    });

    M.apply(s, z);

    std::vector<double> Az(n);
    A.apply(z, Az);
    std::vector<double> c2 = coarse_solve(Z, deflation_restrict(Z, comm, Az), tol);

    for (std::size_t i = 0; i < c1.size(); ++i) c1[i] -= c2[i];
    deflation_prolong(Z, comm, c1, z);
}

SolveReport SubdomainDeflation::solve(std::span<const double> b, std::span<double> x,
                                      const std::string &solver, const KrylovParams &prm) const
{
    if (dprm.inexact) return solve_inexact_deflated(b, x, prm);
    return solve_deflated(b, x, solver, prm);
}

SolveReport SubdomainDeflation::solve_deflated(std::span<const double> b, std::span<double> x,
                                               const std::string &solver, const KrylovParams &prm) const
{
    const index_t n = size();
    if (static_cast<index_t>(b.size()) != n || static_cast<index_t>(x.size()) != n)
        throw DimensionError("solve_deflated: vector length mismatch");

    Communicator &comm = A.comm();
    DistributedInnerProduct inner(A.partition(), comm);

    SolveReport rep;
    const double bnorm = std::sqrt(inner(b, b));
    if (bnorm == 0) {
        std::fill(x.begin(), x.end(), 0.0);
        rep.converged = true;
        return rep;
    }

    std::vector<double> Pb = deflamg::project(Z, comm, b);
    std::vector<double> tmp(n), r(n);

    FunctionOperator PA(n, [&](std::span<const double> v, std::span<double> y) {
        A.apply(v, tmp);
        deflamg::project(Z, comm, tmp, y);
    });

    KrylovParams kp = prm;
    kp.reference_norm = bnorm;

    // A recurred residual that claims convergence is confirmed against the
    // true one; on a mismatch the iteration resumes from the current x.
    for (int round = 0; round < 4; ++round) {
        kp.maxiter = prm.maxiter - rep.iterations;
        SolveReport k = krylov_solve(solver, PA, Pb, x, &M, kp, inner);
        rep.iterations += k.iterations;
        rep.breakdown   = k.breakdown;

        // x = y + Z E^{-1} Z^T (b - A y)
        A.apply(x, r);
        for (index_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        std::vector<double> lambda = coarse_solve(Z, deflation_restrict(Z, comm, r));
        deflation_prolong(Z, comm, lambda, x);

        A.apply(x, r);
        for (index_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        rep.relative_residual = std::sqrt(inner(r, r)) / bnorm;
        rep.converged = rep.relative_residual <= prm.tol;

        if (rep.converged || !k.converged || rep.iterations >= prm.maxiter) break;
    }
    return rep;
}

SolveReport SubdomainDeflation::solve_inexact_deflated(std::span<const double> b, std::span<double> x,
                                                       const KrylovParams &prm) const
{
    const index_t n = size();
    if (static_cast<index_t>(b.size()) != n || static_cast<index_t>(x.size()) != n)
        throw DimensionError("solve_inexact_deflated: vector length mismatch");

    Communicator &comm = A.comm();
    DistributedInnerProduct inner(A.partition(), comm);

    if (std::sqrt(inner(b, b)) == 0) {
        std::fill(x.begin(), x.end(), 0.0);
        SolveReport rep;
        rep.converged = true;
        return rep;
    }

    // x0 += Q (b - A x0)
    std::vector<double> r(n);
    A.apply(x, r);
    for (index_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    std::vector<double> c = coarse_solve(Z, deflation_restrict(Z, comm, r), coarse_tol());
    deflation_prolong(Z, comm, c, x);

    KrylovParams kp = prm;
    kp.reference_norm = 0;
    return fgmres(A, b, x, this, kp, inner);
}

SolveReport solve_local_amg(const SparseMatrix &Amat, const Partition &P, Communicator &comm,
                            const AmgParams &aprm, std::span<const double> b,
                            std::span<double> x, const std::string &solver,
                            const KrylovParams &prm)
{
    DistributedMatrix A(Amat, P, comm);
    BlockAmgPreconditioner M(A, aprm);
    DistributedInnerProduct inner(P, comm);

    const index_t n = A.size();
    if (static_cast<index_t>(b.size()) != n || static_cast<index_t>(x.size()) != n)
        throw DimensionError("solve_local_amg: vector length mismatch");

    const double bnorm = std::sqrt(inner(b, b));
    SolveReport rep;
    if (bnorm == 0) {
        std::fill(x.begin(), x.end(), 0.0);
        rep.converged = true;
        return rep;
    }

    std::vector<double> r(n);
    KrylovParams kp = prm;
    for (int round = 0; round < 4; ++round) {
        kp.maxiter = prm.maxiter - rep.iterations;
        SolveReport k = krylov_solve(solver, A, b, x, &M, kp, inner);
        rep.iterations += k.iterations;
        rep.breakdown   = k.breakdown;

        A.apply(x, r);
        for (index_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        rep.relative_residual = std::sqrt(inner(r, r)) / bnorm;
        rep.converged = rep.relative_residual <= prm.tol;

        if (rep.converged || !k.converged || rep.iterations >= prm.maxiter) break;
    }
    return rep;
}

} // namespace deflamg
