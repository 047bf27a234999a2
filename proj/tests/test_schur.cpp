#include "helpers.hpp"

#include <deflamg/errors.hpp>
#include <deflamg/problems.hpp>
#include <deflamg/schur.hpp>

#include <doctest.h>

using namespace deflamg;
using namespace testing;

namespace {

std::vector<char> random_mask(index_t n, std::mt19937 &rng) {
    std::vector<char> m(n);
    for (auto &v : m) v = rng() % 3 == 0;
    m[0] = 0;
    return m;
}

Dense schur_dense(const BlockSystem &B) {
    Dense K = dense(B.K), G = dense(B.G), D = dense(B.D), S = dense(B.S);
    for (index_t i = 0; i < B.nu(); ++i)
        for (index_t j = 0; j < B.np(); ++j) G[i][j] /= K[i][i];
    Dense DG = dense_mm(D, G);
    for (index_t i = 0; i < B.np(); ++i)
        for (index_t j = 0; j < B.np(); ++j) S[i][j] -= DG[i][j];
    return S;
}

KrylovParams params(double tol, index_t maxiter) {
    KrylovParams p;
    p.tol = tol;
    p.maxiter = maxiter;
    return p;
}

}

TEST_SUITE("schur") {

TEST_CASE("split_blocks examples") {
    SparseMatrix A = tridiag(4);
    BlockSystem B = split_blocks(A, std::vector<char>(4, 0));
    CHECK(B.K.values == A.values);
    CHECK(B.np() == 0);
    CHECK(B.G.nnz() == 0);

    SparseMatrix two = from_triplets(2, 2, {{0, 0, 3}, {0, 1, 5}, {1, 0, 7}, {1, 1, -2}});
    B = split_blocks(two, {0, 1});
    CHECK(B.K.at(0, 0) == 3);
    CHECK(B.G.at(0, 0) == 5);
    CHECK(B.D.at(0, 0) == 7);
    CHECK(B.S.at(0, 0) == -2);
    CHECK(B.invKdiag == std::vector<double>{1.0 / 3});

    SparseMatrix zero = from_triplets(2, 2, {{0, 1, 1}, {1, 0, 1}, {1, 1, 1}});
    CHECK_THROWS_AS(split_blocks(zero, {0, 1}), StructureError);
    CHECK_THROWS_AS(split_blocks(two, {0, 1, 0}), DimensionError);
}

TEST_CASE("blocks conform and reassemble exactly") {
    std::mt19937 rng(3);
    for (int rep = 0; rep < 5; ++rep) {
        SparseMatrix A = random_dd(20, rng, false, 0.3);
        auto mask = random_mask(20, rng);
        BlockSystem B = split_blocks(A, mask);
        CHECK(B.K.nrows == B.nu());
        CHECK(B.K.ncols == B.nu());
        CHECK(B.S.nrows == B.np());
        CHECK(B.G.nrows == B.nu());
        CHECK(B.G.ncols == B.np());
        CHECK(B.D.nrows == B.np());
        CHECK(B.D.ncols == B.nu());
        for (double v : B.invKdiag) CHECK(std::isfinite(v));

        SparseMatrix R = reassemble(B);
        CHECK(R.row_ptr == A.row_ptr);
        CHECK(R.col_idx == A.col_idx);
        CHECK(R.values == A.values);
    }
}

TEST_CASE("schur operator against a dense oracle") {
    std::mt19937 rng(4);
    for (int rep = 0; rep < 5; ++rep) {
        const index_t n = 10 + rng() % 41;
        SparseMatrix A = random_dd(n, rng, false, 0.3);
        BlockSystem B = split_blocks(A, random_mask(n, rng));
        if (B.np() == 0) continue;
        SchurOperator S(B);
        Dense ref = schur_dense(B);
        auto p = random_vector(B.np(), rng);
        std::vector<double> y(B.np());
        S.apply(p, y);
        auto yr = dense_mv(ref, p);
        CHECK(rel_diff(y, yr) <= 1e-12);

        Dense Sa = dense(assemble_schur_approximation(B));
        CHECK(max_abs_diff(Sa, ref) <= 1e-12 * max_abs(ref));

        // Linearity.
        auto q = random_vector(B.np(), rng);
        std::vector<double> pq(B.np()), ypq(B.np()), yq(B.np());
        for (index_t i = 0; i < B.np(); ++i) pq[i] = 2 * p[i] - q[i];
        S.apply(pq, ypq);
        S.apply(q, yq);
        for (index_t i = 0; i < B.np(); ++i) yq[i] = 2 * y[i] - yq[i];
        CHECK(rel_diff(ypq, yq) <= 1e-12);
    }
}

TEST_CASE("schur operator with K = I and without coupling") {
    std::mt19937 rng(5);
    // 10 velocity then 10 pressure unknowns.
    std::vector<Triplet> t;
    for (index_t i = 0; i < 10; ++i) {
        t.push_back({i, i, 1.0});
        t.push_back({10 + i, 10 + i, 2.0 + i});
        for (index_t j = 0; j < 10; ++j) {
            if ((i + j) % 3 == 0) t.push_back({i, 10 + j, 0.1 * (i - j)});
            if ((i * j) % 4 == 1) t.push_back({10 + i, j, 0.2 * (i + j)});
        }
    }
    SparseMatrix A = from_triplets(20, 20, t);
    std::vector<char> mask(20, 0);
    for (index_t i = 10; i < 20; ++i) mask[i] = 1;
    BlockSystem B = split_blocks(A, mask);

    Dense ref = dense(B.S), DG = dense_mm(dense(B.D), dense(B.G));
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) ref[i][j] -= DG[i][j];
    auto p = random_vector(10, rng);
    std::vector<double> y(10);
    SchurOperator(B).apply(p, y);
    CHECK(rel_diff(y, dense_mv(ref, p)) <= 1e-12);

    std::vector<Triplet> d;
    for (index_t i = 0; i < 20; ++i) d.push_back({i, i, 1.0 + i});
    BlockSystem U = split_blocks(from_triplets(20, 20, d), mask);
    SchurOperator(U).apply(p, y);
    CHECK(rel_diff(y, dense_mv(dense(U.S), p)) <= 1e-15);
}

TEST_CASE("decoupled identity system is reproduced by one application") {
    SparseMatrix I = SparseMatrix::identity(8);
    std::vector<char> mask{0, 0, 1, 1, 0, 0, 1, 1};
    Communicator comm(2);
    SchurPressureCorrection pc(I, mask, partition_contiguous(8, 2), comm);
    std::vector<double> r{1, 2, 3, 4, 5, 6, 7, 8}, z(8);
    pc.apply(r, z);
    CHECK(rel_diff(z, r) <= 1e-12);
}

TEST_CASE("decoupled system splits into independent solves") {
    ProblemInstance prob = gen_poisson3d(GridSpec(4), {2, 1, 1});
    const index_t n = prob.A.nrows;
    // Two decoupled copies: a velocity block and a pressure block, interleaved per subdomain.
    std::vector<Triplet> t;
    for (index_t i = 0; i < n; ++i)
        for (index_t k = prob.A.row_ptr[i]; k < prob.A.row_ptr[i + 1]; ++k) {
            t.push_back({2 * i, 2 * prob.A.col_idx[k], prob.A.values[k]});
            t.push_back({2 * i + 1, 2 * prob.A.col_idx[k] + 1, prob.A.values[k]});
        }
    SparseMatrix A = from_triplets(2 * n, 2 * n, t);
    std::vector<char> mask(2 * n, 0);
    for (index_t i = 0; i < n; ++i) mask[2 * i + 1] = 1;
    std::vector<index_t> sizes{2 * prob.partition.size(0), 2 * prob.partition.size(1)};

    SchurParams prm;
    prm.uprm = params(1e-12, 200);
    prm.pprm = params(1e-12, 200);
    Communicator comm(2);
    SchurPressureCorrection pc(A, mask, Partition::from_sizes(sizes), comm, prm);

    std::mt19937 rng(6);
    auto bu = random_vector(n, rng), bp = random_vector(n, rng);
    std::vector<double> u(n), p(n);
    pc.apply_blocks(bu, bp, u, p);
    auto ref_u = gauss_solve(dense(prob.A), bu);
    auto ref_p = gauss_solve(dense(prob.A), bp);
    CHECK(rel_diff(u, ref_u) <= 1e-9);
    CHECK(rel_diff(p, ref_p) <= 1e-9);
}

TEST_CASE("manufactured saddle point converges") {
    ProblemInstance prob = gen_saddle_point(GridSpec(8), {2, 2, 1});
    Communicator comm(4);
    BlockSystem B = split_blocks(prob.A, prob.mask);
    std::vector<double> x(prob.A.nrows, 0.0);
    SolveReport r = solve_block_system(B, prob.b, x, prob.partition, comm, {}, "fgmres", params(1e-4, 100));
    CHECK(r.converged);
    CHECK(nrm(true_residual(prob.A, prob.b, x)) / nrm(prob.b) <= 1e-4);

    std::vector<double> y(prob.A.nrows, 0.0);
    CHECK_THROWS_AS(solve_block_system(B, prob.b, y, prob.partition, comm, {}, "gmres", params(1e-4, 10)),
                    ConfigError);
}

TEST_CASE("block-diagonal SPD system needs only a few outer iterations") {
    ProblemInstance prob = gen_poisson3d(GridSpec(6));
    const index_t n = prob.A.nrows;
    std::vector<Triplet> t;
    for (index_t i = 0; i < n; ++i) {
        for (index_t k = prob.A.row_ptr[i]; k < prob.A.row_ptr[i + 1]; ++k)
            t.push_back({i, prob.A.col_idx[k], prob.A.values[k]});
        t.push_back({n + i, n + i, 2.0});
    }
    SparseMatrix A = from_triplets(2 * n, 2 * n, t);
    std::vector<char> mask(2 * n, 0);
    for (index_t i = n; i < 2 * n; ++i) mask[i] = 1;
    BlockSystem B = split_blocks(A, mask);
    Communicator comm(1);
    std::vector<double> b(2 * n, 1.0), x(2 * n, 0.0);
    SchurParams prm;
    prm.uprm = params(1e-8, 100);
    SolveReport r = solve_block_system(B, b, x, partition_contiguous(2 * n, 1), comm, prm, "fgmres",
                                       params(1e-8, 50));
    CHECK(r.converged);
    CHECK(r.iterations <= 3);
}

TEST_CASE("all-velocity mask degenerates to the velocity solver") {
    ProblemInstance prob = gen_poisson3d(GridSpec(6), {2, 1, 1});
    BlockSystem B = split_blocks(prob.A, std::vector<char>(prob.A.nrows, 0));
    Communicator comm(2);
    std::vector<double> x(prob.A.nrows, 0.0);
    SolveReport r = solve_block_system(B, prob.b, x, prob.partition, comm, {}, "fgmres", params(1e-8, 200));
    CHECK(r.converged);
    CHECK(nrm(true_residual(prob.A, prob.b, x)) / nrm(prob.b) <= 1e-8);
}

TEST_CASE("structural errors") {
    SparseMatrix I = SparseMatrix::identity(4);
    Communicator comm(2);
    CHECK_THROWS_AS(SchurPressureCorrection(I, {1, 1, 1, 1}, partition_contiguous(4, 2), comm), StructureError);
    CHECK_THROWS_AS(SchurPressureCorrection(I, {0, 0, 1, 1}, partition_contiguous(4, 2), comm), PartitionError);
}

}
