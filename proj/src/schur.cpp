#include <deflamg/schur.hpp>
#include <deflamg/errors.hpp>

#include <algorithm>
#include <chrono>
#include <string>

namespace deflamg {

namespace {

double now() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

} // namespace

BlockSystem split_blocks(const SparseMatrix &A, const std::vector<char> &mask) {
    if (A.nrows != A.ncols)
        throw DimensionError("split_blocks: matrix is not square");
    if (static_cast<index_t>(mask.size()) != A.nrows)
        throw DimensionError("split_blocks: mask has " + std::to_string(mask.size()) +
                " entries for " + std::to_string(A.nrows) + " unknowns");

    BlockSystem B;
    B.mask = mask;

    const index_t n = A.nrows;
    std::vector<index_t> pos(n);
    for (index_t i = 0; i < n; ++i) {
        if (mask[i]) { pos[i] = B.np(); B.p_index.push_back(i); }
        else         { pos[i] = B.nu(); B.u_index.push_back(i); }
    }
    const index_t nu = B.nu(), np = B.np();

    std::vector<Triplet> tk, tg, td, ts;
    for (index_t i = 0; i < n; ++i)
        for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            const index_t j = A.col_idx[k];
            const Triplet t{pos[i], pos[j], A.values[k]};
            if (!mask[i]) (mask[j] ? tg : tk).push_back(t);
            else          (mask[j] ? ts : td).push_back(t);
        }

    B.K = from_triplets(nu, nu, std::move(tk));
    B.G = from_triplets(nu, np, std::move(tg));
    B.D = from_triplets(np, nu, std::move(td));
    B.S = from_triplets(np, np, std::move(ts));

    B.invKdiag = B.K.diagonal();
    for (index_t i = 0; i < nu; ++i) {
        if (B.invKdiag[i] == 0)
            throw StructureError("split_blocks: zero diagonal in K at global row " +
                    std::to_string(B.u_index[i]));
        B.invKdiag[i] = 1.0 / B.invKdiag[i];
    }
    return B;
}

SparseMatrix reassemble(const BlockSystem &B) {
    const index_t n = B.nu() + B.np();
    std::vector<Triplet> t;
    t.reserve(B.K.nnz() + B.G.nnz() + B.D.nnz() + B.S.nnz());

    auto put = [&](const SparseMatrix &M, const std::vector<index_t> &rows, const std::vector<index_t> &cols) {
        for (index_t i = 0; i < M.nrows; ++i)
            for (index_t k = M.row_ptr[i]; k < M.row_ptr[i + 1]; ++k)
                t.push_back({rows[i], cols[M.col_idx[k]], M.values[k]});
    };
    put(B.K, B.u_index, B.u_index);
    put(B.G, B.u_index, B.p_index);
    put(B.D, B.p_index, B.u_index);
    put(B.S, B.p_index, B.p_index);

    return from_triplets(n, n, std::move(t));
}

void SchurOperator::apply(std::span<const double> p, std::span<double> y) const {
    if (static_cast<index_t>(p.size()) != B.np() || p.size() != y.size())
        throw DimensionError("SchurOperator: vector length mismatch");

    spmv(1.0, B.S, p, 0.0, y, threads);
    if (B.G.nnz() == 0 || B.D.nnz() == 0) return;

    std::vector<double> t(B.nu());
    spmv(1.0, B.G, p, 0.0, t, threads);
    for (index_t i = 0; i < B.nu(); ++i) t[i] *= B.invKdiag[i];
    spmv(-1.0, B.D, t, 1.0, y, threads);
}

SparseMatrix assemble_schur_approximation(const BlockSystem &B) {
    SparseMatrix Ds = B.D;
    for (index_t k = 0; k < Ds.nnz(); ++k) Ds.values[k] *= B.invKdiag[Ds.col_idx[k]];
    SparseMatrix DG = spgemm(Ds, B.G);

    std::vector<Triplet> t;
    for (index_t i = 0; i < B.np(); ++i) {
        for (index_t k = B.S.row_ptr[i]; k < B.S.row_ptr[i + 1]; ++k)
            t.push_back({i, B.S.col_idx[k], B.S.values[k]});
        for (index_t k = DG.row_ptr[i]; k < DG.row_ptr[i + 1]; ++k)
            t.push_back({i, DG.col_idx[k], -DG.values[k]});
    }
    return from_triplets(B.np(), B.np(), std::move(t));
}

//---------------------------------------------------------------------------
SchurPressureCorrection::SchurPressureCorrection(
        const SparseMatrix &A, const std::vector<char> &mask,
        const Partition &P, Communicator &comm,
        const SchurParams &prm, const Coordinates *coords)
    : n(A.nrows), B(split_blocks(A, mask)), prm(prm), comm(comm)
{
    const double t0 = now();

    if (P.nglobal != n)
        throw DimensionError("SchurPressureCorrection: partition does not match the matrix");
    if (B.nu() == 0)
        throw StructureError("SchurPressureCorrection: the mask leaves no velocity unknowns");

    std::vector<index_t> su(P.m, 0), sp(P.m, 0);
    for (index_t i = 0; i < n; ++i) ++(mask[i] ? sp : su)[P.owner[i]];

    Pu = Partition::from_sizes(su);
    K  = std::make_unique<DistributedMatrix>(B.K, Pu, comm);
    Ku_prec = std::make_unique<BlockRelaxationPreconditioner>(*K, prm.urelax, prm.udamping);

    if (B.np() > 0) {
        Pp  = Partition::from_sizes(sp);
        Sop = std::make_unique<SchurOperator>(B, comm.threads());
        Pmat = prm.approx_schur ? assemble_schur_approximation(B) : B.S;

        Coordinates pc;
        if (coords) {
            pc.dim = coords->dim;
            for (index_t i : B.p_index)
                for (int c = 0; c < pc.dim; ++c) pc.xyz.push_back((*coords)(i, c));
        }
        Pprec = std::make_unique<SubdomainDeflation>(Pmat, Pp, comm, prm.pdeflation, prm.plocal,
                                                     coords ? &pc : nullptr);
    }

    setup_time = now() - t0;
}

SchurPressureCorrection::~SchurPressureCorrection() = default;

double SchurPressureCorrection::factorize_seconds() const {
    return Pprec ? Pprec->factorize_seconds() : 0.0;
}

void SchurPressureCorrection::apply_blocks(std::span<const double> bu, std::span<const double> bp,
                                           std::span<double> u, std::span<double> p) const
{
    ++counters.applications;
    DistributedInnerProduct ipu(Pu, comm);

    std::fill(u.begin(), u.end(), 0.0);
    counters.u_iterations += krylov_solve(prm.usolver, *K, bu, u, Ku_prec.get(), prm.uprm, ipu).iterations;

    if (B.np() == 0) return;

    std::vector<double> rp(bp.begin(), bp.end());
    spmv(-1.0, B.D, u, 1.0, rp, comm.threads());

    DistributedInnerProduct ipp(Pp, comm);
    std::fill(p.begin(), p.end(), 0.0);
    counters.p_iterations += krylov_solve(prm.psolver, *Sop, rp, p, Pprec.get(), prm.pprm, ipp).iterations;

    std::vector<double> ru(bu.begin(), bu.end());
    spmv(-1.0, B.G, p, 1.0, ru, comm.threads());

    std::fill(u.begin(), u.end(), 0.0);
    counters.u_iterations += krylov_solve(prm.usolver, *K, ru, u, Ku_prec.get(), prm.uprm, ipu).iterations;
}

void SchurPressureCorrection::apply(std::span<const double> r, std::span<double> z) const {
    if (static_cast<index_t>(r.size()) != n || r.size() != z.size())
        throw DimensionError("SchurPressureCorrection: vector length mismatch");

    std::vector<double> bu(B.nu()), bp(B.np()), u(B.nu()), p(B.np());
    for (index_t i = 0; i < B.nu(); ++i) bu[i] = r[B.u_index[i]];
    for (index_t i = 0; i < B.np(); ++i) bp[i] = r[B.p_index[i]];

    apply_blocks(bu, bp, u, p);

    for (index_t i = 0; i < B.nu(); ++i) z[B.u_index[i]] = u[i];
    for (index_t i = 0; i < B.np(); ++i) z[B.p_index[i]] = p[i];
}

SolveReport solve_block_system(const BlockSystem &B, std::span<const double> b, std::span<double> x,
                               const Partition &P, Communicator &comm, const SchurParams &prm,
                               const std::string &solver, const KrylovParams &outer,
                               const Coordinates *coords)
{
    if (solver != "fgmres")
        throw ConfigError("solver.type", "the Schur preconditioner is inexact and needs "
                "a flexible outer solver (fgmres), got '" + solver + "'");

    SparseMatrix A = reassemble(B);
    SchurPressureCorrection pc(A, B.mask, P, comm, prm, coords);
    DistributedMatrix Ad(A, P, comm);
    DistributedInnerProduct inner(P, comm);
    return fgmres(Ad, b, x, &pc, outer, inner);
}

} // namespace deflamg
