#include <deflamg/bench.hpp>
#include <deflamg/errors.hpp>

#include <chrono>
#include <cstdlib>
#include <ostream>

namespace deflamg {

namespace {

double now() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// Keeps sweeps within desk memory.
constexpr index_t max_unknowns = 20'000'000;

} // namespace

BoxCounts box_factor(int m) {
    if (m < 1) throw ConfigError("subdomains", "subdomain count must be at least 1");

    BoxCounts best{m, 1, 1};
    for (int c = 1; c * c * c <= m; ++c) {
        if (m % c) continue;
        for (int b = c; b * b <= m / c; ++b) {
            if ((m / c) % b) continue;
            const int a = m / c / b;
            if (a - c < best[0] - best[2]) best = {a, b, c};
        }
    }
    return best;
}

GridSpec bench_grid(const BenchOptions &opt, int m) {
    if (opt.base < 1)
        throw ConfigError("base", "grid size must be at least 1");

    const BoxCounts boxes = box_factor(m);
    GridSpec g;
    if (opt.mode == "weak") {
        g = GridSpec(opt.base * boxes[0], opt.base * boxes[1], opt.base * boxes[2]);
    } else if (opt.mode == "strong") {
        g = GridSpec(opt.base);
        for (int a = 0; a < 3; ++a)
            if (boxes[a] > opt.base)
                throw ConfigError("subdomains", std::to_string(m) + " subdomains do not fit a " +
                        std::to_string(opt.base) + "^3 grid");
    } else {
        throw ConfigError("mode", "expected weak or strong, got '" + opt.mode + "'");
    }

    if (g.points() > max_unknowns)
        throw ConfigError("base", "sweep entry with " + std::to_string(m) + " subdomains needs " +
                std::to_string(g.points()) + " unknowns, more than the limit of " +
                std::to_string(max_unknowns));
    return g;
}

std::vector<BenchRow> run_bench(const BenchOptions &opt, const SolverConfig &cfg) {
    for (int m : opt.sweep) bench_grid(opt, m);

    const std::string  solver = cfg.string("solver.type");
    const KrylovParams kp     = cfg.krylov("solver");
    const AmgParams    amg    = cfg.amg("precond");

    std::vector<BenchRow> rows;
    for (DeflationKind kind : opt.kinds) {
        for (int m : opt.sweep) {
            ProblemInstance prob = gen_poisson3d(bench_grid(opt, m), box_factor(m));

            DeflationParams dp = cfg.deflation();
            dp.kind = kind;

            Communicator comm(m, opt.threads);
            SubdomainDeflation S(prob.A, prob.partition, comm, dp, amg, &prob.coords);

            std::vector<double> x(prob.A.nrows, 0.0);
            const double t0 = now();
            SolveReport rep = S.solve(prob.b, x, solver, kp);

            BenchRow r;
            r.kind          = kind;
            r.subdomains    = m;
            r.threads       = opt.threads;
            r.unknowns      = prob.A.nrows;
            r.setup_s       = S.setup_seconds();
            r.factorize_E_s = S.factorize_seconds();
            r.solve_s       = now() - t0;
            r.iters         = rep.iterations;
            r.relative_residual = rep.relative_residual;
            r.converged     = rep.converged;
            rows.push_back(r);
        }
    }
    return rows;
}

void write_bench_csv(std::ostream &os, const std::vector<BenchRow> &rows) {
    os << "subdomains,threads,setup_s,factorize_E_s,solve_s,iters,converged\n";
    for (const auto &r : rows)
        os << r.subdomains << "," << r.threads << ","
           << r.setup_s << "," << r.factorize_E_s << "," << r.solve_s << ","
           << r.iters << "," << (r.converged ? "true" : "false") << "\n";
}

std::vector<CompareRow> compare_deflation(const BenchOptions &opt, const SolverConfig &cfg) {
    for (int m : opt.sweep) bench_grid(opt, m);

    const std::string  solver = cfg.string("solver.type");
    const KrylovParams kp     = cfg.krylov("solver");
    const AmgParams    amg    = cfg.amg("precond");
    DeflationParams    dp     = cfg.deflation();
    if (!opt.kinds.empty()) dp.kind = opt.kinds.front();

    std::vector<CompareRow> rows;
    for (int m : opt.sweep) {
        ProblemInstance prob = gen_poisson3d(bench_grid(opt, m), box_factor(m));
        Communicator comm(m, opt.threads);

        CompareRow r;
        r.subdomains = m;
        r.unknowns   = prob.A.nrows;

        {
            SubdomainDeflation S(prob.A, prob.partition, comm, dp, amg, &prob.coords);
            std::vector<double> x(prob.A.nrows, 0.0);
            SolveReport rep = S.solve(prob.b, x, solver, kp);
            r.deflated_iters     = rep.iterations;
            r.deflated_converged = rep.converged;
        }
        {
            std::vector<double> x(prob.A.nrows, 0.0);
            SolveReport rep = solve_local_amg(prob.A, prob.partition, comm, amg, prob.b, x, solver, kp);
            r.local_amg_iters     = rep.iterations;
            r.local_amg_converged = rep.converged;
        }
        rows.push_back(r);
    }
    return rows;
}

void write_compare_csv(std::ostream &os, const std::vector<CompareRow> &rows) {
    os << "subdomains,unknowns,deflated_iters,local_amg_iters\n";
    for (const auto &r : rows)
        os << r.subdomains << "," << r.unknowns << "," << r.deflated_iters << ","
           << r.local_amg_iters << "\n";
}

} // namespace deflamg
