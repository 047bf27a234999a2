#include <deflamg/runtime.hpp>
#include <deflamg/errors.hpp>

#include <algorithm>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>

namespace deflamg {

//---------------------------------------------------------------------------
// Partition
//---------------------------------------------------------------------------
Partition Partition::from_sizes(std::span<const index_t> sizes) {
    if (sizes.empty())
        throw PartitionError("partition needs at least one subdomain");

    Partition P;
    P.m = static_cast<int>(sizes.size());
    P.offsets.assign(sizes.size() + 1, 0);
    for (std::size_t d = 0; d < sizes.size(); ++d) {
        if (sizes[d] < 1)
            throw PartitionError("subdomain " + std::to_string(d) + " is empty");
        P.offsets[d + 1] = P.offsets[d] + sizes[d];
    }
    P.nglobal = P.offsets.back();
    P.owner.resize(P.nglobal);
    for (int d = 0; d < P.m; ++d)
        std::fill(P.owner.begin() + P.offsets[d], P.owner.begin() + P.offsets[d + 1], d);
    return P;
}

Partition partition_contiguous(index_t nglobal, int m) {
    if (m < 1 || m > nglobal)
        throw PartitionError("cannot split " + std::to_string(nglobal) +
                " unknowns into " + std::to_string(m) + " subdomains");

    std::vector<index_t> sizes(m, nglobal / m);
    for (index_t d = 0; d < nglobal % m; ++d) ++sizes[d];
    return Partition::from_sizes(sizes);
}

//---------------------------------------------------------------------------
// Matrix splitting
//---------------------------------------------------------------------------
std::vector<SubdomainView> split_matrix(const SparseMatrix &A, const Partition &P) {
    if (A.nrows != A.ncols || A.nrows != P.nglobal)
        throw DimensionError("split_matrix: matrix " + std::to_string(A.nrows) + "x" +
                std::to_string(A.ncols) + " does not match partition of " +
                std::to_string(P.nglobal));

    std::vector<SubdomainView> views(P.m);

    for (int d = 0; d < P.m; ++d) {
        SubdomainView &v = views[d];
        v.id    = d;
        v.begin = P.begin(d);
        v.end   = P.end(d);

        for (index_t i = v.begin; i < v.end; ++i)
            for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
                index_t c = A.col_idx[k];
                if (c < v.begin || c >= v.end) v.ghost_cols.push_back(c);
            }
        std::sort(v.ghost_cols.begin(), v.ghost_cols.end());
        v.ghost_cols.erase(std::unique(v.ghost_cols.begin(), v.ghost_cols.end()), v.ghost_cols.end());

        for (index_t g : v.ghost_cols) {
            int nbr = P.owner[g];
            if (v.ghost_map.empty() || v.ghost_map.back().neighbor != nbr)
                v.ghost_map.push_back({nbr, {}});
            v.ghost_map.back().global.push_back(g);
        }

        const index_t nloc = v.nlocal();
        SparseMatrix &L = v.local_block;
        SparseMatrix &G = v.ghost_block;
        L.nrows = G.nrows = nloc;
        L.ncols = nloc;
        G.ncols = v.nghost();
        L.row_ptr.assign(nloc + 1, 0);
        G.row_ptr.assign(nloc + 1, 0);

        for (index_t i = v.begin; i < v.end; ++i) {
            for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
                index_t c = A.col_idx[k];
                if (c >= v.begin && c < v.end) {
                    L.col_idx.push_back(c - v.begin);
                    L.values.push_back(A.values[k]);
                } else {
                    auto it = std::lower_bound(v.ghost_cols.begin(), v.ghost_cols.end(), c);
                    G.col_idx.push_back(it - v.ghost_cols.begin());
                    G.values.push_back(A.values[k]);
                }
            }
            L.row_ptr[i - v.begin + 1] = L.nnz();
            G.row_ptr[i - v.begin + 1] = G.nnz();
        }
    }

    return views;
}

SparseMatrix reassemble(std::span<const SubdomainView> views, index_t nglobal) {
    std::vector<Triplet> t;
    for (const auto &v : views) {
        for (index_t i = 0; i < v.nlocal(); ++i) {
            for (index_t k = v.local_block.row_ptr[i]; k < v.local_block.row_ptr[i + 1]; ++k)
                t.push_back({v.begin + i, v.begin + v.local_block.col_idx[k], v.local_block.values[k]});
            for (index_t k = v.ghost_block.row_ptr[i]; k < v.ghost_block.row_ptr[i + 1]; ++k)
                t.push_back({v.begin + i, v.ghost_cols[v.ghost_block.col_idx[k]], v.ghost_block.values[k]});
        }
    }
    return from_triplets(nglobal, nglobal, std::move(t));
}

//---------------------------------------------------------------------------
// Communicator
//---------------------------------------------------------------------------
struct Communicator::Pool {
    std::mutex              mtx;
    std::condition_variable start;
    std::condition_variable done;

    const std::function<void(int)> *task = nullptr;
    std::uint64_t generation = 0;
    int  pending = 0;
    bool stop    = false;

    std::vector<std::exception_ptr> errors;
    std::vector<std::thread>        workers;

    void work(int rank) {
        std::uint64_t seen = 0;
        for (;;) {
            const std::function<void(int)> *t;
            {
                std::unique_lock<std::mutex> lock(mtx);
                start.wait(lock, [&] { return stop || generation != seen; });
                if (stop) return;
                seen = generation;
                t = task;
            }

            try {
                (*t)(rank);
            } catch (...) {
                errors[rank] = std::current_exception();
            }

            std::lock_guard<std::mutex> lock(mtx);
            if (--pending == 0) done.notify_one();
        }
    }
};

Communicator::Communicator(int size, int threads_per_participant)
    : size_(size), threads_(std::max(1, threads_per_participant)), pool_(std::make_unique<Pool>())
{
    if (size < 1)
        throw CommunicatorError("communicator needs at least one participant");

    pool_->errors.resize(size);
    for (int r = 1; r < size; ++r)
        pool_->workers.emplace_back([this, r] { pool_->work(r); });
}

Communicator::~Communicator() {
    {
        std::lock_guard<std::mutex> lock(pool_->mtx);
        pool_->stop = true;
    }
    pool_->start.notify_all();
    for (auto &w : pool_->workers) w.join();
}

void Communicator::run(const std::function<void(int)> &task) {
    if (size_ == 1) {
        task(0);
        return;
    }

    Pool &p = *pool_;
    {
        std::lock_guard<std::mutex> lock(p.mtx);
        p.task    = &task;
        p.pending = size_ - 1;
        std::fill(p.errors.begin(), p.errors.end(), nullptr);
        ++p.generation;
    }
    p.start.notify_all();

    try {
        task(0);
    } catch (...) {
        p.errors[0] = std::current_exception();
    }

    {
        std::unique_lock<std::mutex> lock(p.mtx);
        p.done.wait(lock, [&] { return p.pending == 0; });
    }

    for (auto &e : p.errors)
        if (e) std::rethrow_exception(e);
}

std::vector<double> Communicator::allreduce_sum(std::span<const std::vector<double>> contributions) const {
    if (static_cast<int>(contributions.size()) != size_)
        throw CommunicatorError("allreduce_sum: expected " + std::to_string(size_) +
                " participants, got " + std::to_string(contributions.size()));

    const std::size_t len = contributions[0].size();
    for (const auto &c : contributions)
        if (c.size() != len)
            throw CommunicatorError("allreduce_sum: participants disagree on vector length");

    std::vector<double> sum(contributions[0]);
    for (int r = 1; r < size_; ++r)
        for (std::size_t i = 0; i < len; ++i)
            sum[i] += contributions[r][i];
    return sum;
}

std::vector<std::vector<double>> Communicator::halo_exchange(
        std::span<const SubdomainView> views,
        std::span<const std::span<const double>> locals)
{
    if (static_cast<int>(views.size()) != size_ || static_cast<int>(locals.size()) != size_)
        throw CommunicatorError("halo_exchange: expected " + std::to_string(size_) +
                " participants, got " + std::to_string(locals.size()));

    for (int d = 0; d < size_; ++d)
        if (static_cast<index_t>(locals[d].size()) != views[d].nlocal())
            throw CommunicatorError("halo_exchange: local vector of subdomain " +
                    std::to_string(d) + " has wrong length");

    std::vector<std::vector<double>> ghosts(size_);

    run([&](int d) {
        const SubdomainView &v = views[d];
        std::vector<double> &g = ghosts[d];
        g.reserve(v.ghost_cols.size());
        for (const auto &src : v.ghost_map) {
            const SubdomainView &nv = views[src.neighbor];
            std::span<const double> remote = locals[src.neighbor];
            for (index_t col : src.global)
                g.push_back(remote[col - nv.begin]);
        }
    });

    return ghosts;
}

//---------------------------------------------------------------------------
// DistributedMatrix
//---------------------------------------------------------------------------
DistributedMatrix::DistributedMatrix(const SparseMatrix &A, const Partition &P, Communicator &comm)
    : partition_(P), views_(split_matrix(A, P)), comm_(comm)
{
    if (comm.size() != P.m)
        throw CommunicatorError("communicator size " + std::to_string(comm.size()) +
                " does not match partition of " + std::to_string(P.m) + " subdomains");
}

void DistributedMatrix::apply(std::span<const double> x, std::span<double> y) const {
    mul(1.0, x, 0.0, y);
}

void DistributedMatrix::mul(double alpha, std::span<const double> x, double beta, std::span<double> y) const {
    if (static_cast<index_t>(x.size()) != size() || static_cast<index_t>(y.size()) != size())
        throw DimensionError("DistributedMatrix: vector length mismatch");

    std::vector<std::span<const double>> locals(partition_.m);
    for (int d = 0; d < partition_.m; ++d) locals[d] = local_part(x, partition_, d);

    auto ghosts = comm_.halo_exchange(views_, locals);
    const int threads = comm_.threads();

    comm_.run([&](int d) {
        const SubdomainView &v = views_[d];
        auto yl = local_part(y, partition_, d);
        spmv(alpha, v.local_block, locals[d], beta, yl, threads);
        if (v.nghost())
            spmv(alpha, v.ghost_block, ghosts[d], 1.0, yl, threads);
    });
}

double DistributedInnerProduct::operator()(std::span<const double> a, std::span<const double> b) const {
    std::vector<std::vector<double>> partial(P.m, std::vector<double>(1));
    comm.run([&](int d) {
        partial[d][0] = dot(local_part(a, P, d), local_part(b, P, d));
    });
    return comm.allreduce_sum(partial)[0];
}

} // namespace deflamg
