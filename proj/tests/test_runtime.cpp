#include "helpers.hpp"

#include <deflamg/errors.hpp>
#include <deflamg/runtime.hpp>

#include <doctest.h>

#include <atomic>

using namespace deflamg;
using namespace testing;

TEST_SUITE("runtime") {

TEST_CASE("partition_contiguous") {
    auto P = partition_contiguous(4, 2);
    CHECK(P.offsets == std::vector<index_t>{0, 2, 4});
    CHECK(P.owner == std::vector<int>{0, 0, 1, 1});

    CHECK(partition_contiguous(5, 2).offsets == std::vector<index_t>{0, 3, 5});
    CHECK(partition_contiguous(10, 1).offsets == std::vector<index_t>{0, 10});

    CHECK_THROWS_AS(partition_contiguous(2, 3), PartitionError);
    CHECK_THROWS_AS(partition_contiguous(2, 0), PartitionError);
}

TEST_CASE("split_matrix examples") {
    auto views = split_matrix(SparseMatrix::identity(4), partition_contiguous(4, 2));
    REQUIRE(views.size() == 2);
    for (const auto &v : views) {
        CHECK(to_dense(v.local_block).values == to_dense(SparseMatrix::identity(2)).values);
        CHECK(v.nghost() == 0);
        CHECK(v.ghost_map.empty());
    }

    views = split_matrix(tridiag(4), partition_contiguous(4, 2));
    CHECK(views[0].ghost_cols == std::vector<index_t>{2});
    CHECK(views[1].ghost_cols == std::vector<index_t>{1});
    CHECK(views[0].ghost_block.nnz() + views[1].ghost_block.nnz() == 2);
    CHECK(views[0].ghost_map.size() == 1);
    CHECK(views[0].ghost_map[0].neighbor == 1);

    std::mt19937 rng(1);
    SparseMatrix A = random_sparse(9, 9, 0.4, rng);
    views = split_matrix(A, partition_contiguous(9, 1));
    CHECK(views.size() == 1);
    CHECK(views[0].local_block.values == A.values);
    CHECK(views[0].nghost() == 0);

    CHECK_THROWS_AS(split_matrix(tridiag(4), partition_contiguous(5, 2)), DimensionError);
}

TEST_CASE("split then reassemble is lossless") {
    std::mt19937 rng(2);
    for (int m : {1, 2, 3, 5}) {
        SparseMatrix A = random_sparse(40, 40, 0.2, rng);
        auto views = split_matrix(A, partition_contiguous(40, m));
        SparseMatrix B = reassemble(views, 40);
        CHECK(B.row_ptr == A.row_ptr);
        CHECK(B.col_idx == A.col_idx);
        CHECK(B.values == A.values);
    }
}

TEST_CASE("every ghost column appears once in the ghost map") {
    std::mt19937 rng(3);
    SparseMatrix A = random_sparse(50, 50, 0.1, rng);
    auto P = partition_contiguous(50, 4);
    for (const auto &v : split_matrix(A, P)) {
        std::vector<index_t> seen;
        for (const auto &g : v.ghost_map) {
            for (index_t c : g.global) CHECK(P.owner[c] == g.neighbor);
            seen.insert(seen.end(), g.global.begin(), g.global.end());
        }
        std::sort(seen.begin(), seen.end());
        CHECK(seen == v.ghost_cols);
    }
}

TEST_CASE("allreduce_sum") {
    Communicator c2(2);
    std::vector<std::vector<double>> in{{1, 2}, {3, 4}};
    CHECK(c2.allreduce_sum(in) == std::vector<double>{4, 6});

    Communicator c1(1);
    std::vector<std::vector<double>> one{{1.5, -2}};
    CHECK(c1.allreduce_sum(one) == std::vector<double>{1.5, -2});

    Communicator c4(4);
    std::vector<std::vector<double>> e(4, std::vector<double>(4, 0.0));
    for (int i = 0; i < 4; ++i) e[i][i] = 1;
    CHECK(c4.allreduce_sum(e) == std::vector<double>{1, 1, 1, 1});

    std::vector<std::vector<double>> ragged{{1, 2}, {3}};
    CHECK_THROWS_AS(c2.allreduce_sum(ragged), CommunicatorError);
    std::vector<std::vector<double>> missing{{1, 2}};
    CHECK_THROWS_AS(c2.allreduce_sum(missing), CommunicatorError);
}

TEST_CASE("allreduce_sum is bitwise deterministic") {
    std::mt19937 rng(4);
    Communicator c(5);
    std::vector<std::vector<double>> in;
    for (int d = 0; d < 5; ++d) in.push_back(random_vector(7, rng));
    auto ref = c.allreduce_sum(in);
    for (int rep = 0; rep < 10; ++rep) CHECK(c.allreduce_sum(in) == ref);
}

TEST_CASE("run visits every participant") {
    Communicator c(6, 2);
    CHECK(c.threads() == 2);
    std::vector<int> hits(6, 0);
    c.run([&](int d) { hits[d]++; });
    CHECK(hits == std::vector<int>(6, 1));

    CHECK_THROWS_AS(c.run([](int d) { if (d == 3) throw Error("boom"); }), Error);
    c.run([&](int d) { hits[d]++; });
    CHECK(hits == std::vector<int>(6, 2));
}

TEST_CASE("halo_exchange delivers owner values") {
    SparseMatrix A = tridiag(6);
    auto P = partition_contiguous(6, 3);
    auto views = split_matrix(A, P);
    Communicator c(3);
    std::vector<double> x{10, 11, 12, 13, 14, 15};
    std::vector<std::span<const double>> locals;
    for (int d = 0; d < 3; ++d) locals.push_back(local_part(std::span<const double>(x), P, d));
    auto halo = c.halo_exchange(views, locals);
    CHECK(halo[0] == std::vector<double>{12});
    CHECK(halo[1] == std::vector<double>{11, 14});
    CHECK(halo[2] == std::vector<double>{13});

    locals.pop_back();
    CHECK_THROWS_AS(c.halo_exchange(views, locals), CommunicatorError);
}

TEST_CASE("distributed spmv equals the global product") {
    std::mt19937 rng(6);
    for (int m : {1, 2, 3, 5}) {
        for (index_t n : {20, 200}) {
            SparseMatrix A = random_sparse(n, n, 0.05, rng);
            auto P = partition_contiguous(n, m);
            Communicator comm(m);
            DistributedMatrix D(A, P, comm);
            auto x = random_vector(n, rng);
            std::vector<double> y(n), ref(n);
            D.apply(x, y);
            spmv(1.0, A, x, 0.0, ref);
            CHECK(rel_diff(y, ref) <= 1e-13);

            auto z = random_vector(n, rng);
            auto zref = z;
            D.mul(2.0, x, -0.5, z);
            spmv(2.0, A, x, -0.5, zref);
            CHECK(rel_diff(z, zref) <= 1e-13);
        }
    }
}

TEST_CASE("distributed inner product") {
    auto P = partition_contiguous(5, 2);
    Communicator c(2);
    DistributedInnerProduct ip(P, c);
    CHECK(ip(std::vector<double>{1, 2, 3, 4, 5}, std::vector<double>{1, 1, 1, 1, 1}) == 15.0);
}

TEST_CASE("Partition::from_sizes") {
    std::vector<index_t> s{2, 1, 3};
    auto P = Partition::from_sizes(s);
    CHECK(P.m == 3);
    CHECK(P.nglobal == 6);
    CHECK(P.owner == std::vector<int>{0, 0, 1, 2, 2, 2});

    std::vector<index_t> empty{2, 0, 3};
    CHECK_THROWS_AS(Partition::from_sizes(empty), PartitionError);
}

}
