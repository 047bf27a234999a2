#include "helpers.hpp"

#include <deflamg/amg.hpp>
#include <deflamg/errors.hpp>
#include <deflamg/krylov.hpp>
#include <deflamg/problems.hpp>

#include <doctest.h>

using namespace deflamg;
using namespace testing;

namespace {

index_t count_strong_offdiag(const SparseMatrix &A, const std::vector<char> &s) {
    index_t n = 0;
    for (index_t i = 0; i < A.nrows; ++i)
        for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            if (A.col_idx[k] != i && s[k]) ++n;
    return n;
}

SparseMatrix diag_matrix(std::vector<double> d) {
    std::vector<Triplet> t;
    for (index_t i = 0; i < static_cast<index_t>(d.size()); ++i) t.push_back({i, i, d[i]});
    return from_triplets(d.size(), d.size(), t);
}

}

TEST_SUITE("amg") {

TEST_CASE("strength graph") {
    SparseMatrix T = tridiag(5);
    CHECK(count_strong_offdiag(T, strength_graph(T, 0.25)) == 8);

    SparseMatrix D = diag_matrix({1, 2, 3});
    CHECK(count_strong_offdiag(D, strength_graph(D, 0.0)) == 0);

    SparseMatrix W = tridiag(4, -1e-3, 2, -1e-3);
    CHECK(count_strong_offdiag(W, strength_graph(W, 0.25)) == 0);
    CHECK(count_strong_offdiag(W, strength_graph(W, 0.0)) == 6);

    SparseMatrix Z = from_triplets(2, 2, {{0, 1, 1.0}, {1, 1, 1.0}});
    CHECK_THROWS_AS(strength_graph(Z, 0.1), StructureError);
}

TEST_CASE("aggregation") {
    SparseMatrix chain = tridiag(6);
    Aggregates a = aggregate(strength_graph(chain, 0.08), chain);
    CHECK(a.naggr == 2);
    CHECK(a.id == std::vector<index_t>{0, 0, 0, 1, 1, 1});

    SparseMatrix D = diag_matrix({1, 1, 1, 1});
    a = aggregate(strength_graph(D, 0.08), D);
    CHECK(a.naggr == 4);
    CHECK(a.id == std::vector<index_t>{0, 1, 2, 3});

    SparseMatrix one = diag_matrix({5});
    CHECK(aggregate(strength_graph(one, 0.08), one).naggr == 1);
}

TEST_CASE("tentative prolongation") {
    Aggregates a;
    a.id = {0, 0, 1, 1};
    a.naggr = 2;
    CHECK(to_dense(tentative_prolongation(a, 4)).values == std::vector<double>{1, 0, 1, 0, 0, 1, 0, 1});

    a.id = {0, 1, 2};
    a.naggr = 3;
    CHECK(to_dense(tentative_prolongation(a, 3)).values == to_dense(SparseMatrix::identity(3)).values);

    a.id = {0, unaggregated, 0};
    a.naggr = 1;
    SparseMatrix P = tentative_prolongation(a, 3);
    CHECK(P.row_ptr == std::vector<index_t>{0, 1, 1, 2});
}

TEST_CASE("smoothed prolongation") {
    SparseMatrix A = tridiag(6);
    Aggregates a = aggregate(strength_graph(A, 0.08), A);
    SparseMatrix Pt = tentative_prolongation(a, 6);
    CHECK(to_dense(smooth_prolongation(A, Pt, 0.0)).values == to_dense(Pt).values);

    SparseMatrix P = smooth_prolongation(diag_matrix({2, 2, 2}),
                                         SparseMatrix::identity(3), 2.0 / 3.0);
    for (index_t i = 0; i < 3; ++i) CHECK(P.at(i, i) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    // P 1 = (I - omega D^-1 A) 1 for the unfiltered prolongation.
    const double w = 2.0 / 3.0;
    SparseMatrix Ps = smooth_prolongation(A, Pt, w);
    auto lhs = matvec(1.0, Ps, std::vector<double>(2, 1.0), 0.0, std::vector<double>(6));
    auto Aone = dense_mv(dense(A), std::vector<double>(6, 1.0));
    for (index_t i = 0; i < 6; ++i) CHECK(lhs[i] == doctest::Approx(1.0 - w * Aone[i] / 2.0).epsilon(1e-14));

    SparseMatrix Z = from_triplets(2, 2, {{0, 1, 1.0}, {1, 1, 1.0}});
    CHECK_THROWS_AS(smooth_prolongation(Z, SparseMatrix::identity(2), w), StructureError);
}

TEST_CASE("smoothers") {
    SparseMatrix A = diag_matrix({2});
    std::vector<double> z(1);
    apply_smoother(Smoother::build(SmootherKind::damped_jacobi, A, 0.8), A, std::vector<double>{1}, z);
    CHECK(z[0] == doctest::Approx(0.4).epsilon(1e-15));

    SparseMatrix D = diag_matrix({2, 4, 5});
    Smoother s = Smoother::build(SmootherKind::spai0, D);
    std::vector<double> zd(3);
    apply_smoother(s, D, std::vector<double>{1, 1, 1}, zd);
    CHECK(zd[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(zd[1] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(zd[2] == doctest::Approx(0.2).epsilon(1e-15));

    Smoother t = Smoother::build(SmootherKind::spai0, tridiag(2));
    CHECK(t.weights[0] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(t.weights[1] == doctest::Approx(0.4).epsilon(1e-15));

    SparseMatrix empty_row(2, 2, {0, 1, 1}, {0}, {1.0});
    CHECK_THROWS_AS(Smoother::build(SmootherKind::spai0, empty_row), StructureError);

    CHECK(smoother_kind_from_string("spai0") == SmootherKind::spai0);
    CHECK(to_string(SmootherKind::damped_jacobi) == "damped_jacobi");
    CHECK_THROWS_AS(smoother_kind_from_string("ilu0"), ConfigError);
}

TEST_CASE("hierarchy shapes") {
    AmgHierarchy small = build_hierarchy(tridiag(100));
    CHECK(small.levels.empty());
    auto r = std::vector<double>(100, 1.0);
    auto z = small.vcycle(r);
    auto ref = gauss_solve(dense(tridiag(100)), r);
    CHECK(rel_diff(z, ref) <= 1e-12);

    AmgHierarchy H = build_hierarchy(tridiag(1000));
    auto sizes = H.level_sizes();
    CHECK(sizes.size() >= 2);
    for (std::size_t i = 1; i < sizes.size(); ++i) CHECK(sizes[i] < sizes[i - 1]);
    CHECK(sizes.back() <= 500);

    std::vector<double> d(800, 3.0);
    AmgHierarchy Dh = build_hierarchy(diag_matrix(d));
    CHECK(Dh.levels.empty());
    CHECK(Dh.coarse_matrix.nrows == 800);
}

TEST_CASE("vcycle is linear") {
    AmgParams p;
    p.coarse_enough = 10;
    AmgHierarchy H = build_hierarchy(tridiag(64), p);
    REQUIRE(!H.levels.empty());

    std::mt19937 rng(9);
    auto r = random_vector(64, rng);
    auto z = H.vcycle(r);
    std::vector<double> r3(r);
    for (auto &v : r3) v *= 3.0;
    auto z3 = H.vcycle(r3);
    for (auto &v : z) v *= 3.0;
    CHECK(rel_diff(z3, z) <= 1e-13);
}

TEST_CASE("vcycle contracts on 1D Poisson") {
    AmgParams p;
    p.coarse_enough = 8;
    SparseMatrix A = tridiag(64);
    AmgHierarchy H = build_hierarchy(A, p);
    REQUIRE(H.levels.size() >= 1);
    std::mt19937 rng(10);
    for (int rep = 0; rep < 5; ++rep) {
        auto r = random_vector(64, rng);
        auto z = H.vcycle(r);
        CHECK(nrm(true_residual(A, r, z)) / nrm(r) < 0.5);
    }
}

TEST_CASE("vcycle equals its assembled matrix") {
    AmgParams p;
    p.coarse_enough = 6;
    SparseMatrix A = tridiag(40);
    AmgHierarchy H = build_hierarchy(A, p);
    REQUIRE(!H.levels.empty());

    Dense M(40, std::vector<double>(40));
    for (index_t j = 0; j < 40; ++j) {
        std::vector<double> e(40, 0.0);
        e[j] = 1;
        auto c = H.vcycle(e);
        for (index_t i = 0; i < 40; ++i) M[i][j] = c[i];
    }
    std::mt19937 rng(12);
    auto r = random_vector(40, rng);
    CHECK(rel_diff(H.vcycle(r), dense_mv(M, r)) <= 1e-12);
}

TEST_CASE("Galerkin products and restriction") {
    ProblemInstance prob = gen_poisson3d(GridSpec(16));
    AmgHierarchy H = build_hierarchy(prob.A);
    REQUIRE(!H.levels.empty());
    for (std::size_t l = 0; l < H.levels.size(); ++l) {
        const auto &L = H.levels[l];
        SparseMatrix Pt = transpose(L.P);
        CHECK(Pt.row_ptr == L.R.row_ptr);
        CHECK(Pt.col_idx == L.R.col_idx);
        CHECK(Pt.values == L.R.values);

        const SparseMatrix &next = l + 1 < H.levels.size() ? H.levels[l + 1].A : H.coarse_matrix;
        auto G = dense(spgemm(L.R, spgemm(L.A, L.P)));
        CHECK(max_abs_diff(dense(next), G) <= 1e-12 * max_abs(G));
    }
}

TEST_CASE("AMG preconditioned CG on a 3D Poisson problem") {
    ProblemInstance prob = gen_poisson3d(GridSpec(16));
    AmgPreconditioner M(prob.A);
    MatrixOperator A(prob.A);
    KrylovParams kp;
    kp.tol = 1e-6;
    kp.maxiter = 50;
    std::vector<double> x(prob.A.nrows, 0.0);
    SolveReport r = cg(A, prob.b, x, &M, kp);
    CHECK(r.converged);
    CHECK(nrm(true_residual(prob.A, prob.b, x)) / nrm(prob.b) <= 1e-6);
}

}
