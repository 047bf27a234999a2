#include <deflamg/krylov.hpp>
#include <deflamg/errors.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace deflamg {

namespace {

using Vec = std::vector<double>;

void check_sizes(const LinearOperator &A, std::span<const double> b, std::span<double> x,
                 const LinearOperator *M)
{
    const auto n = static_cast<std::size_t>(A.size());
    if (b.size() != n || x.size() != n || (M && static_cast<std::size_t>(M->size()) != n))
        throw DimensionError("krylov: operator, preconditioner and vectors disagree on size");
}

void precondition(const LinearOperator *M, std::span<const double> r, std::span<double> z) {
    if (M) M->apply(r, z);
    else   std::copy(r.begin(), r.end(), z.begin());
}

// r = b - A x
void residual(const LinearOperator &A, std::span<const double> b, std::span<const double> x,
              std::span<double> r)
{
    A.apply(x, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

inline bool tiny(double v) {
    return !std::isfinite(v) || std::abs(v) < std::numeric_limits<double>::min();
}

// Common prologue. Returns true when the solve is already finished.
bool start(const LinearOperator &A, std::span<const double> b, std::span<double> x,
           const KrylovParams &prm, const InnerProduct &inner,
           std::span<double> r, double &ref, double &res, SolveReport &rep)
{
    const double bnorm = std::sqrt(inner(b, b));
    ref = prm.reference_norm > 0 ? prm.reference_norm : bnorm;

    if (ref == 0) {
        std::fill(x.begin(), x.end(), 0.0);
        std::fill(r.begin(), r.end(), 0.0);
        res = 0;
        rep.converged = true;
        return true;
    }

    residual(A, b, x, r);
    res = std::sqrt(inner(r, r));
    rep.relative_residual = res / ref;
    if (res <= prm.tol * ref) {
        rep.converged = true;
        return true;
    }
    return false;
}

SolveReport gmres_impl(bool flexible,
                       const LinearOperator &A, std::span<const double> b, std::span<double> x,
                       const LinearOperator *M, const KrylovParams &prm, const InnerProduct &inner)
{
    check_sizes(A, b, x, M);
    if (prm.restart < 1)
        throw ConfigError("solver.M", "restart length must be at least 1");

    const std::size_t n = b.size();
    const index_t     m = prm.restart;

    SolveReport rep;
    Vec r(n);
    double ref, beta;
    if (start(A, b, x, prm, inner, r, ref, beta, rep)) return rep;

    std::vector<Vec> V(m + 1, Vec(n));
    std::vector<Vec> Z(flexible ? m : 0, Vec(n));
    Vec w(n), z(n);
    std::vector<Vec> H(m + 1, Vec(m, 0.0));
    Vec cs(m), sn(m), g(m + 1), y(m);

    while (rep.iterations < prm.maxiter) {
        for (std::size_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;

        index_t j = 0;
        bool happy = false;
        while (j < m && rep.iterations < prm.maxiter) {
            std::span<double> zj = flexible ? std::span<double>(Z[j]) : std::span<double>(z);
            precondition(M, V[j], zj);
            A.apply(zj, w);

            const double wnorm = std::sqrt(inner(w, w));
            for (index_t i = 0; i <= j; ++i) {
                double h = inner(w, V[i]);
                H[i][j] = h;
                axpy(-h, V[i], w);
            }
            double hn = std::sqrt(inner(w, w));

            // Second Gram-Schmidt pass when cancellation was severe.
            if (hn < 0.7 * wnorm) {
                for (index_t i = 0; i <= j; ++i) {
                    double h = inner(w, V[i]);
                    H[i][j] += h;
                    axpy(-h, V[i], w);
                }
                hn = std::sqrt(inner(w, w));
            }
            H[j + 1][j] = hn;

            for (index_t i = 0; i < j; ++i) {
                double t = cs[i] * H[i][j] + sn[i] * H[i + 1][j];
                H[i + 1][j] = -sn[i] * H[i][j] + cs[i] * H[i + 1][j];
                H[i][j] = t;
            }
            const double d = std::hypot(H[j][j], H[j + 1][j]);
            cs[j] = d == 0 ? 1.0 : H[j][j] / d;
            sn[j] = d == 0 ? 0.0 : H[j + 1][j] / d;
            H[j][j] = d;
            H[j + 1][j] = 0;
            g[j + 1] = -sn[j] * g[j];
            g[j]     =  cs[j] * g[j];

            ++rep.iterations;
            ++j;

            const double res = std::abs(g[j]);
            rep.relative_residual = res / ref;
            if (prm.on_iteration) prm.on_iteration(rep.iterations, rep.relative_residual);

            happy = hn <= 1e-14 * wnorm;
            if (happy || res <= prm.tol * ref) break;

            for (std::size_t i = 0; i < n; ++i) V[j][i] = w[i] / hn;
        }

        // Back substitution for the cycle's correction.
        for (index_t i = j - 1; i >= 0; --i) {
            double s = g[i];
            for (index_t k = i + 1; k < j; ++k) s -= H[i][k] * y[k];
            y[i] = H[i][i] == 0 ? 0.0 : s / H[i][i];
        }

        if (flexible) {
            for (index_t i = 0; i < j; ++i) axpy(y[i], Z[i], x);
        } else {
            std::fill(w.begin(), w.end(), 0.0);
            for (index_t i = 0; i < j; ++i) axpy(y[i], V[i], w);
            precondition(M, w, z);
            axpy(1.0, z, x);
        }

        if (prm.on_basis) {
            std::vector<Vec> basis(V.begin(), V.begin() + j);
            prm.on_basis(basis, rep.iterations);
        }

        residual(A, b, x, r);
        beta = std::sqrt(inner(r, r));
        rep.relative_residual = beta / ref;
        if (beta <= prm.tol * ref) {
            rep.converged = true;
            break;
        }
        if (beta == 0 || !std::isfinite(beta)) {
            rep.breakdown = "GMRES residual is not finite";
            break;
        }
        (void)happy;
    }

    return rep;
}

} // namespace

//---------------------------------------------------------------------------
SolveReport cg(const LinearOperator &A, std::span<const double> b, std::span<double> x,
               const LinearOperator *M, const KrylovParams &prm, const InnerProduct &inner)
{
    check_sizes(A, b, x, M);
    const std::size_t n = b.size();

    SolveReport rep;
    Vec r(n);
    double ref, res;
    if (start(A, b, x, prm, inner, r, ref, res, rep)) return rep;

    Vec z(n), p(n), q(n);
    precondition(M, r, z);
    p = z;
    double rz = inner(r, z);

    while (rep.iterations < prm.maxiter) {
        A.apply(p, q);
        const double pq = inner(p, q);
        if (!(pq > 0)) {
            rep.breakdown = "indefinite operator: p'Ap <= 0";
            break;
        }

        const double alpha = rz / pq;
        axpy( alpha, p, x);
        axpy(-alpha, q, r);
        ++rep.iterations;

        if (prm.refresh > 0 && rep.iterations % prm.refresh == 0)
            residual(A, b, x, r);

        res = std::sqrt(inner(r, r));
        rep.relative_residual = res / ref;
        if (prm.on_iteration) prm.on_iteration(rep.iterations, rep.relative_residual);
        if (res <= prm.tol * ref) {
            rep.converged = true;
            break;
        }

        precondition(M, r, z);
        const double rz_new = inner(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }

    return rep;
}

//---------------------------------------------------------------------------
SolveReport bicgstabl(const LinearOperator &A, std::span<const double> b, std::span<double> x,
                      const LinearOperator *M, const KrylovParams &prm, const InnerProduct &inner)
{
    check_sizes(A, b, x, M);
    if (prm.L < 1)
        throw ConfigError("solver.L", "BiCGStab(L) needs L >= 1");

    const std::size_t n = b.size();
    const int L = prm.L;

    SolveReport rep;
    std::vector<Vec> R(L + 1, Vec(n)), U(L + 1, Vec(n));
    double ref, res;
    if (start(A, b, x, prm, inner, R[0], ref, res, rep)) return rep;

    Vec rt = R[0];
    Vec xh(n, 0.0);   // iterate increment in the preconditioned space: x = x0 + M xh
    Vec t(n);

    std::vector<std::vector<double>> tau(L + 1, std::vector<double>(L + 1));
    std::vector<double> sigma(L + 1), g0(L + 1), g1(L + 1), g2(L + 1);

    double rho0 = 1, alpha = 0, omega = 1;
    bool restarted = false;

    // op(v) = A M v
    auto apply_op = [&](std::span<const double> v, std::span<double> out) {
        precondition(M, v, t);
        A.apply(t, out);
    };

    // Moves xh into x and recomputes the true residual.
    auto flush = [&]() {
        precondition(M, xh, t);
        axpy(1.0, t, x);
        std::fill(xh.begin(), xh.end(), 0.0);
        residual(A, b, x, R[0]);
        return std::sqrt(inner(R[0], R[0]));
    };

    // Called when a scalar of the recurrence vanished. Returns true when
    // the iteration should stop.
    auto handle_breakdown = [&](const char *what) {
        res = flush();
        rep.relative_residual = res / ref;
        if (res <= prm.tol * ref) {
            rep.converged = true;
            return true;
        }
        if (restarted || !std::isfinite(res)) {
            rep.breakdown = what;
            return true;
        }
        restarted = true;
        rt = R[0];
        std::fill(U[0].begin(), U[0].end(), 0.0);
        rho0 = 1; alpha = 0; omega = 1;
        return false;
    };

    while (rep.iterations < prm.maxiter) {
        ++rep.iterations;
        rho0 *= -omega;

        bool stop = false, restart = false;

        // BiCG part
        for (int j = 0; j < L; ++j) {
            const double rho1 = inner(R[j], rt);
            if (tiny(rho1) || tiny(rho0)) {
                stop = handle_breakdown("BiCGStab(L): rho vanished");
                restart = !stop;
                break;
            }
            const double beta = alpha * rho1 / rho0;
            rho0 = rho1;

            for (int i = 0; i <= j; ++i)
                for (std::size_t k = 0; k < n; ++k) U[i][k] = R[i][k] - beta * U[i][k];

            apply_op(U[j], U[j + 1]);

            const double gamma = inner(U[j + 1], rt);
            if (tiny(gamma)) {
                stop = handle_breakdown("BiCGStab(L): (u, r~) vanished");
                restart = !stop;
                break;
            }
            alpha = rho0 / gamma;

            for (int i = 0; i <= j; ++i) axpy(-alpha, U[i + 1], R[i]);
            axpy(alpha, U[0], xh);

            // Converged inside the BiCG sweep: the MR part would divide by zero.
            res = std::sqrt(inner(R[0], R[0]));
            if (res <= prm.tol * ref) {
                rep.relative_residual = res / ref;
                if (prm.on_iteration) prm.on_iteration(rep.iterations, rep.relative_residual);
                rep.converged = true;
                stop = true;
                break;
            }
            apply_op(R[j], R[j + 1]);
        }
        if (stop) break;
        if (restart) continue;

        // MR part: modified Gram-Schmidt on R[1..L]
        for (int j = 1; j <= L && !stop && !restart; ++j) {
            for (int i = 1; i < j; ++i) {
                tau[i][j] = inner(R[j], R[i]) / sigma[i];
                axpy(-tau[i][j], R[i], R[j]);
            }
            sigma[j] = inner(R[j], R[j]);
            if (tiny(sigma[j])) {
                stop = handle_breakdown("BiCGStab(L): MR direction vanished");
                restart = !stop;
                break;
            }
            g1[j] = inner(R[0], R[j]) / sigma[j];
        }
        if (stop) break;
        if (restart) continue;

        g0[L] = g1[L];
        omega = g0[L];
        for (int j = L - 1; j >= 1; --j) {
            g0[j] = g1[j];
            for (int i = j + 1; i <= L; ++i) g0[j] -= tau[j][i] * g0[i];
        }
        for (int j = 1; j < L; ++j) {
            g2[j] = g0[j + 1];
            for (int i = j + 1; i < L; ++i) g2[j] += tau[j][i] * g0[i + 1];
        }

        axpy( g0[1], R[0], xh);
        axpy(-g1[L], R[L], R[0]);
        axpy(-g0[L], U[L], U[0]);
        for (int j = 1; j < L; ++j) {
            axpy(-g0[j], U[j], U[0]);
            axpy( g2[j], R[j], xh);
            axpy(-g1[j], R[j], R[0]);
        }

        if (prm.refresh > 0 && rep.iterations % prm.refresh == 0)
            res = flush();
        else
            res = std::sqrt(inner(R[0], R[0]));

        rep.relative_residual = res / ref;
        if (prm.on_iteration) prm.on_iteration(rep.iterations, rep.relative_residual);

        if (!std::isfinite(res)) {
            rep.breakdown = "BiCGStab(L): residual is not finite";
            break;
        }
        if (res <= prm.tol * ref) {
            rep.converged = true;
            break;
        }
    }

    precondition(M, xh, t);
    axpy(1.0, t, x);
    return rep;
}

SolveReport bicgstab2(const LinearOperator &A, std::span<const double> b, std::span<double> x,
                      const LinearOperator *M, const KrylovParams &prm, const InnerProduct &inner)
{
    KrylovParams p = prm;
    p.L = 2;
    return bicgstabl(A, b, x, M, p, inner);
}

SolveReport gmres(const LinearOperator &A, std::span<const double> b, std::span<double> x,
                  const LinearOperator *M, const KrylovParams &prm, const InnerProduct &inner)
{
    return gmres_impl(false, A, b, x, M, prm, inner);
}

SolveReport fgmres(const LinearOperator &A, std::span<const double> b, std::span<double> x,
                   const LinearOperator *M, const KrylovParams &prm, const InnerProduct &inner)
{
    return gmres_impl(true, A, b, x, M, prm, inner);
}

bool is_known_solver(const std::string &type) {
    return type == "cg" || type == "bicgstab2" || type == "bicgstabl" ||
           type == "gmres" || type == "fgmres";
}

SolveReport krylov_solve(const std::string &type,
                         const LinearOperator &A, std::span<const double> b, std::span<double> x,
                         const LinearOperator *M, const KrylovParams &prm, const InnerProduct &inner)
{
    if (type == "cg")        return cg(A, b, x, M, prm, inner);
    if (type == "bicgstab2") return bicgstab2(A, b, x, M, prm, inner);
    if (type == "bicgstabl") return bicgstabl(A, b, x, M, prm, inner);
    if (type == "gmres")     return gmres(A, b, x, M, prm, inner);
    if (type == "fgmres")    return fgmres(A, b, x, M, prm, inner);
    throw ConfigError("solver.type", "unknown solver '" + type +
            "' (expected cg, bicgstab2, bicgstabl, gmres or fgmres)");
}

} // namespace deflamg
