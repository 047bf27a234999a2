#ifndef DEFLAMG_LINEAR_OPERATOR_HPP
#define DEFLAMG_LINEAR_OPERATOR_HPP

#include <deflamg/sparse.hpp>

#include <algorithm>
#include <functional>
#include <span>

namespace deflamg {

/// Square operator y = Op(x). Also the preconditioner interface: a
/// preconditioner is an operator approximating the inverse.
class LinearOperator {
    public:
        virtual ~LinearOperator() = default;

        virtual index_t size() const = 0;

        /// y = Op(x); x and y do not alias.
        virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
};

/// Wraps a plain CSR matrix.
class MatrixOperator : public LinearOperator {
    public:
        explicit MatrixOperator(const SparseMatrix &A) : A(A) {}

        index_t size() const override { return A.nrows; }

        void apply(std::span<const double> x, std::span<double> y) const override {
            spmv(1.0, A, x, 0.0, y);
        }

    private:
        const SparseMatrix &A;
};

/// Wraps a callable.
class FunctionOperator : public LinearOperator {
    public:
        using Fn = std::function<void(std::span<const double>, std::span<double>)>;

        FunctionOperator(index_t n, Fn fn) : n(n), fn(std::move(fn)) {}

        index_t size() const override { return n; }

        void apply(std::span<const double> x, std::span<double> y) const override { fn(x, y); }

    private:
        index_t n;
        Fn fn;
};

/// Identity, the "no preconditioner" preconditioner.
class IdentityOperator : public LinearOperator {
    public:
        explicit IdentityOperator(index_t n) : n(n) {}

        index_t size() const override { return n; }

        void apply(std::span<const double> x, std::span<double> y) const override {
            std::copy(x.begin(), x.end(), y.begin());
        }

    private:
        index_t n;
};

/// Inner product used by the Krylov solvers. The default is a plain
/// sequential dot product; the runtime provides a reduction over subdomains.
class InnerProduct {
    public:
        virtual ~InnerProduct() = default;

        virtual double operator()(std::span<const double> a, std::span<const double> b) const {
            return dot(a, b);
        }
};

} // namespace deflamg

#endif
