#ifndef DEFLAMG_BENCH_HPP
#define DEFLAMG_BENCH_HPP

/**
 * \file   deflamg/bench.hpp
 * \brief  Scaling sweeps on the Poisson problem.
 */

#include <deflamg/config.hpp>
#include <deflamg/deflation.hpp>
#include <deflamg/problems.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace deflamg {

/// Near-cubic factorization of m into box counts, largest first
/// (8 -> 2x2x2, 4 -> 2x2x1, 12 -> 3x2x2).
BoxCounts box_factor(int m);

struct BenchOptions {
    std::string                mode  = "weak";   ///< weak | strong
    index_t                    base  = 16;       ///< points per axis per subdomain (weak) or in total (strong)
    std::vector<int>           sweep = {1, 8, 27};
    std::vector<DeflationKind> kinds = {DeflationKind::constant};
    int                        threads = 1;
};

struct BenchRow {
    DeflationKind kind = DeflationKind::constant;
    int     subdomains = 1;
    int     threads    = 1;
    index_t unknowns   = 0;
    double  setup_s       = 0;
    double  factorize_E_s = 0;
    double  solve_s       = 0;
    index_t iters         = 0;
    double  relative_residual = 0;
    bool    converged     = false;
};

/// Grid for a sweep entry: base * boxes per axis in weak mode, base^3 in
/// strong mode. Throws ConfigError for infeasible sizes.
GridSpec bench_grid(const BenchOptions &opt, int m);

/// One deflated solve per (kind, subdomain count), rows grouped by kind.
std::vector<BenchRow> run_bench(const BenchOptions &opt, const SolverConfig &cfg);

/// Header `subdomains,threads,setup_s,factorize_E_s,solve_s,iters,converged`.
void write_bench_csv(std::ostream &os, const std::vector<BenchRow> &rows);

struct CompareRow {
    int     subdomains = 1;
    index_t unknowns   = 0;
    index_t deflated_iters  = 0;
    index_t local_amg_iters = 0;
    bool    deflated_converged  = false;
    bool    local_amg_converged = false;
};

/// Deflation + local AMG against local AMG alone over the sweep.
std::vector<CompareRow> compare_deflation(const BenchOptions &opt, const SolverConfig &cfg);

/// Header `subdomains,unknowns,deflated_iters,local_amg_iters`.
void write_compare_csv(std::ostream &os, const std::vector<CompareRow> &rows);

} // namespace deflamg

#endif
