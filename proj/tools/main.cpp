#include <deflamg/bench.hpp>
#include <deflamg/config.hpp>
#include <deflamg/deflation.hpp>
#include <deflamg/errors.hpp>
#include <deflamg/io.hpp>
#include <deflamg/problems.hpp>
#include <deflamg/schur.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace deflamg;
using nlohmann::json;

namespace {

double now() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::vector<std::string> split_list(const std::string &s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

int to_int(const std::string &s, const std::string &what) {
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size())
        throw ConfigError(what, "expected an integer, got '" + s + "'");
    return v;
}

// "8" -> near-cubic boxes, "2,2,1" -> explicit.
BoxCounts parse_boxes(const std::string &s) {
    auto items = split_list(s);
    if (items.size() == 1) return box_factor(to_int(items[0], "subdomains"));
    if (items.size() != 3)
        throw ConfigError("subdomains", "expected M or MX,MY,MZ, got '" + s + "'");
    BoxCounts b;
    for (int a = 0; a < 3; ++a) {
        b[a] = to_int(items[a], "subdomains");
        if (b[a] < 1) throw ConfigError("subdomains", "box counts must be positive");
    }
    return b;
}

SolverConfig load_config(const std::string &path) {
    return path.empty() ? SolverConfig() : SolverConfig::load(path);
}

struct SolveOptions {
    std::optional<index_t> poisson, saddle;
    std::string matrix, rhs, mask, config, deflation, out;
    std::string subdomains = "1";
    std::optional<double> tol;
    std::optional<index_t> maxiter;
    std::string solver;
    int threads = 1;
};

int cmd_solve(const SolveOptions &o) {
    SolverConfig cfg = load_config(o.config);
    if (o.tol)               cfg.set("solver.tol", *o.tol);
    if (o.maxiter)           cfg.set("solver.maxiter", *o.maxiter);
    if (!o.solver.empty())   cfg.set("solver.type", o.solver);
    if (!o.deflation.empty()) cfg.set("deflation.kind", o.deflation);

    const int sources = (o.poisson ? 1 : 0) + (o.saddle ? 1 : 0) + (o.matrix.empty() ? 0 : 1);
    if (sources != 1)
        throw ConfigError("solve", "give exactly one of --poisson, --saddle, --matrix");

    const BoxCounts boxes = parse_boxes(o.subdomains);
    const int m = boxes[0] * boxes[1] * boxes[2];

    ProblemInstance prob;
    std::string name;
    if (o.poisson) {
        prob = gen_poisson3d(GridSpec(*o.poisson), boxes);
        name = "poisson3d";
    } else if (o.saddle) {
        prob = gen_saddle_point(GridSpec(*o.saddle), boxes);
        name = "saddle_point";
    } else {
        prob.A = read_matrix_market(o.matrix);
        if (prob.A.nrows != prob.A.ncols)
            throw DimensionError("matrix must be square");
        prob.b = o.rhs.empty() ? std::vector<double>(prob.A.nrows, 1.0) : read_vector(o.rhs);
        if (static_cast<index_t>(prob.b.size()) != prob.A.nrows)
            throw DimensionError("right-hand side has " + std::to_string(prob.b.size()) +
                    " entries, matrix has " + std::to_string(prob.A.nrows) + " rows");
        if (!o.mask.empty()) prob.mask = read_mask(o.mask);
        prob.partition = partition_contiguous(prob.A.nrows, m);
        name = o.matrix;
    }

    const bool linear = cfg.string("deflation.kind") == "linear" ||
                        cfg.string("precond.psolver.deflation.kind") == "linear";
    const Coordinates *coords = prob.coords.size() ? &prob.coords : nullptr;
    if (linear && !coords)
        throw ConfigError("deflation.kind", "linear deflation needs coordinates, only available for generated problems");

    Communicator comm(m, o.threads);
    const std::string  solver = cfg.string("solver.type");
    const KrylovParams kp     = cfg.krylov("solver");
    std::vector<double> x(prob.A.nrows, 0.0);

    json rep;
    rep["problem"]    = name;
    rep["unknowns"]   = prob.A.nrows;
    rep["nonzeros"]   = prob.A.nnz();
    rep["subdomains"] = m;
    rep["threads"]    = o.threads;
    rep["solver"]     = solver;

    SolveReport sr;
    if (!prob.mask.empty()) {
        if (solver != "fgmres")
            throw ConfigError("solver.type", "the Schur preconditioner needs fgmres, got '" + solver + "'");
        SchurPressureCorrection pc(prob.A, prob.mask, prob.partition, comm, cfg.schur(), coords);
        DistributedMatrix A(prob.A, prob.partition, comm);
        DistributedInnerProduct ip(prob.partition, comm);
        const double t0 = now();
        sr = fgmres(A, prob.b, x, &pc, kp, ip);
        rep["preconditioner"] = "schur_pressure_correction";
        rep["setup_s"]        = pc.setup_seconds();
        rep["factorize_E_s"]  = pc.factorize_seconds();
        rep["solve_s"]        = now() - t0;
        rep["u_iterations"]   = pc.stats().u_iterations;
        rep["p_iterations"]   = pc.stats().p_iterations;
    } else {
        SubdomainDeflation S(prob.A, prob.partition, comm, cfg.deflation(), cfg.amg("precond"), coords);
        const double t0 = now();
        sr = S.solve(prob.b, x, solver, kp);
        rep["preconditioner"] = "deflation+amg";
        rep["deflation"]      = to_string(S.params().kind);
        rep["inexact"]        = S.params().inexact;
        rep["setup_s"]        = S.setup_seconds();
        rep["factorize_E_s"]  = S.factorize_seconds();
        rep["solve_s"]        = now() - t0;
    }

    rep["iterations"]        = sr.iterations;
    rep["relative_residual"] = sr.relative_residual;
    rep["converged"]         = sr.converged;
    if (sr.breakdown) rep["breakdown"] = *sr.breakdown;
    if (prob.exact) {
        double e = 0, s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            e += (x[i] - (*prob.exact)[i]) * (x[i] - (*prob.exact)[i]);
            s += (*prob.exact)[i] * (*prob.exact)[i];
        }
        rep["relative_error"] = std::sqrt(e / s);
    }

    if (!o.out.empty()) write_vector(o.out, x);
    std::cout << rep.dump(2) << std::endl;
    return sr.converged ? 0 : 1;
}

struct SweepOptions {
    std::string mode = "weak", sweep = "1,8,27", deflation = "constant", csv, config;
    index_t base = 16;
    int threads = 1;
};

BenchOptions bench_options(const SweepOptions &o) {
    BenchOptions b;
    b.mode    = o.mode;
    b.base    = o.base;
    b.threads = o.threads;
    b.sweep.clear();
    for (const auto &s : split_list(o.sweep)) b.sweep.push_back(to_int(s, "sweep"));
    if (b.sweep.empty()) throw ConfigError("sweep", "empty subdomain list");
    b.kinds.clear();
    for (const auto &k : split_list(o.deflation)) b.kinds.push_back(deflation_kind_from_string(k));
    if (b.kinds.empty()) throw ConfigError("deflation.kind", "empty deflation list");
    return b;
}

template <class Rows, class Writer>
void emit_csv(const std::string &path, const Rows &rows, Writer write) {
    if (path.empty() || path == "-") {
        write(std::cout, rows);
        return;
    }
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path);
    write(f, rows);
}

int cmd_bench(const SweepOptions &o) {
    SolverConfig cfg = load_config(o.config);
    auto rows = run_bench(bench_options(o), cfg);
    emit_csv(o.csv, rows, write_bench_csv);

    bool ok = true;
    for (const auto &r : rows) {
        std::cerr << to_string(r.kind) << " m=" << r.subdomains << " n=" << r.unknowns
                  << " iters=" << r.iters << " rel=" << r.relative_residual
                  << (r.converged ? "" : " NOT CONVERGED") << "\n";
        ok = ok && r.converged;
    }
    return ok ? 0 : 1;
}

int cmd_compare(const SweepOptions &o) {
    SolverConfig cfg = load_config(o.config);
    auto rows = compare_deflation(bench_options(o), cfg);
    emit_csv(o.csv, rows, write_compare_csv);

    bool ok = true;
    for (const auto &r : rows) ok = ok && r.deflated_converged && r.local_amg_converged;
    return ok ? 0 : 1;
}

void sweep_flags(CLI::App *c, SweepOptions &o) {
    c->add_option("--mode", o.mode, "weak or strong")->capture_default_str();
    c->add_option("--base", o.base, "points per axis per subdomain (weak) or in total (strong)")->capture_default_str();
    c->add_option("--sweep", o.sweep, "comma separated subdomain counts")->capture_default_str();
    c->add_option("--deflation", o.deflation, "comma separated deflation kinds")->capture_default_str();
    c->add_option("--csv", o.csv, "output CSV path (stdout when omitted)");
    c->add_option("--threads", o.threads, "threads per subdomain")->check(CLI::PositiveNumber);
    c->add_option("--config", o.config, "JSON config file or inline JSON");
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Subdomain deflation with local AMG"};
    app.require_subcommand(1);

    SolveOptions so;
    auto *solve = app.add_subcommand("solve", "solve one system and print a JSON report");
    solve->add_option("--poisson", so.poisson, "3D Poisson problem on an N^3 grid");
    solve->add_option("--saddle", so.saddle, "manufactured saddle-point problem on an N^3 grid");
    solve->add_option("--matrix", so.matrix, "MatrixMarket file");
    solve->add_option("--rhs", so.rhs, "right-hand side (ones when omitted)");
    solve->add_option("--mask", so.mask, "pressure mask, switches to the Schur preconditioner");
    solve->add_option("--subdomains", so.subdomains, "M or MX,MY,MZ")->capture_default_str();
    solve->add_option("--deflation", so.deflation, "constant or linear");
    solve->add_option("--config", so.config, "JSON config file or inline JSON");
    solve->add_option("--solver", so.solver, "outer Krylov method");
    solve->add_option("--tol", so.tol, "relative tolerance, overrides the config");
    solve->add_option("--maxiter", so.maxiter, "iteration limit, overrides the config");
    solve->add_option("--threads", so.threads, "threads per subdomain")->check(CLI::PositiveNumber);
    solve->add_option("--out", so.out, "write the solution vector here");

    SweepOptions bo;
    auto *bench = app.add_subcommand("bench", "weak or strong scaling sweep on Poisson, CSV output");
    sweep_flags(bench, bo);

    SweepOptions co;
    auto *cmp = app.add_subcommand("compare-deflation", "deflated vs block-local AMG iteration counts");
    sweep_flags(cmp, co);

    std::string pconfig;
    auto *pc = app.add_subcommand("print-config", "print the merged config tree");
    pc->add_option("--config", pconfig, "JSON config file or inline JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*solve) return cmd_solve(so);
        if (*bench) return cmd_bench(bo);
        if (*cmp)   return cmd_compare(co);
        if (*pc) {
            std::cout << load_config(pconfig).dump() << std::endl;
            return 0;
        }
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
    return 2;
}
