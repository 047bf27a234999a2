#ifndef DEFLAMG_RUNTIME_HPP
#define DEFLAMG_RUNTIME_HPP

/**
 * \file   deflamg/runtime.hpp
 * \brief  Subdomain topology and the communication contract between
 *         subdomain workers.
 *
 * Subdomains run as worker threads of one process. Everything a worker
 * needs from its neighbours goes through Communicator::halo_exchange() or
 * Communicator::allreduce_sum(), so a message-passing backend can replace
 * the thread pool without touching solver code.
 */

#include <deflamg/linear_operator.hpp>
#include <deflamg/sparse.hpp>

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace deflamg {

/// Contiguous block partition of [0, nglobal) into m subdomains.
struct Partition {
    index_t              nglobal = 0;
    int                  m       = 0;
    std::vector<index_t> offsets;   ///< m + 1 entries; subdomain d owns [offsets[d], offsets[d+1]).
    std::vector<int>     owner;     ///< global index -> subdomain id.

    index_t begin(int d) const { return offsets[d]; }
    index_t end(int d)   const { return offsets[d + 1]; }
    index_t size(int d)  const { return offsets[d + 1] - offsets[d]; }

    /// Partition with the given consecutive subdomain sizes (each >= 1).
    static Partition from_sizes(std::span<const index_t> sizes);
};

/// Splits n unknowns into m intervals whose sizes differ by at most one;
/// the first n % m intervals get the extra unknown.
Partition partition_contiguous(index_t nglobal, int m);

/// Global indices one subdomain needs from one neighbour.
struct GhostSource {
    int                  neighbor;
    std::vector<index_t> global;
};

/// Rows owned by one subdomain, columns split into the square local block
/// and the ghost (halo) block.
struct SubdomainView {
    int     id    = 0;
    index_t begin = 0;
    index_t end   = 0;

    SparseMatrix local_block;            ///< nlocal x nlocal
    SparseMatrix ghost_block;            ///< nlocal x nghost
    std::vector<index_t>     ghost_cols; ///< global index of each ghost column, ascending
    std::vector<GhostSource> ghost_map;  ///< ghost_cols grouped by owner

    index_t nlocal() const { return end - begin; }
    index_t nghost() const { return static_cast<index_t>(ghost_cols.size()); }
};

std::vector<SubdomainView> split_matrix(const SparseMatrix &A, const Partition &P);

/// Inverse of split_matrix().
SparseMatrix reassemble(std::span<const SubdomainView> views, index_t nglobal);

/// Fixed set of m participants executing collectives.
/**
 * run() executes a task once per participant and returns when all are
 * done; participant 0 runs on the calling thread. Collectives must not be
 * issued from inside run().
 */
class Communicator {
    public:
        explicit Communicator(int size, int threads_per_participant = 1);
        ~Communicator();

        Communicator(const Communicator&) = delete;
        Communicator& operator=(const Communicator&) = delete;

        int size() const { return size_; }

        /// Intra-participant parallel width used by local kernels.
        int threads() const { return threads_; }

        /// Runs task(rank) on every participant. The first exception (by
        /// rank) is rethrown on the caller after all participants finished.
        void run(const std::function<void(int)> &task);

        /// Elementwise sum of one contribution per participant, accumulated
        /// in ascending participant order.
        std::vector<double> allreduce_sum(std::span<const std::vector<double>> contributions) const;

        /// For every subdomain, the current values of its ghost columns.
        std::vector<std::vector<double>> halo_exchange(
                std::span<const SubdomainView> views,
                std::span<const std::span<const double>> locals);

    private:
        struct Pool;

        int size_;
        int threads_;
        std::unique_ptr<Pool> pool_;
};

/// Global matrix distributed by rows. Products exchange halos and compute
/// each subdomain's rows on its worker.
class DistributedMatrix : public LinearOperator {
    public:
        DistributedMatrix(const SparseMatrix &A, const Partition &P, Communicator &comm);

        index_t size() const override { return partition_.nglobal; }

        void apply(std::span<const double> x, std::span<double> y) const override;

        /// y = alpha * A * x + beta * y
        void mul(double alpha, std::span<const double> x, double beta, std::span<double> y) const;

        const Partition& partition() const { return partition_; }
        const std::vector<SubdomainView>& views() const { return views_; }
        Communicator& comm() const { return comm_; }

    private:
        Partition                  partition_;
        std::vector<SubdomainView> views_;
        Communicator              &comm_;
};

/// Dot product reduced over subdomains with allreduce_sum, so the result
/// is bitwise reproducible for a fixed partition.
class DistributedInnerProduct : public InnerProduct {
    public:
        DistributedInnerProduct(const Partition &P, Communicator &comm) : P(P), comm(comm) {}

        double operator()(std::span<const double> a, std::span<const double> b) const override;

    private:
        Partition     P;
        Communicator &comm;
};

/// Local slice of a distributed vector.
inline std::span<const double> local_part(std::span<const double> x, const Partition &P, int d) {
    return x.subspan(static_cast<std::size_t>(P.begin(d)), static_cast<std::size_t>(P.size(d)));
}

inline std::span<double> local_part(std::span<double> x, const Partition &P, int d) {
    return x.subspan(static_cast<std::size_t>(P.begin(d)), static_cast<std::size_t>(P.size(d)));
}

} // namespace deflamg

#endif
