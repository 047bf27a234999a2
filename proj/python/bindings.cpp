#include <deflamg/bench.hpp>
#include <deflamg/config.hpp>
#include <deflamg/deflation.hpp>
#include <deflamg/errors.hpp>
#include <deflamg/problems.hpp>
#include <deflamg/schur.hpp>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace deflamg;

namespace {

using f64 = py::array_t<double, py::array::c_style | py::array::forcecast>;
using i64 = py::array_t<index_t, py::array::c_style | py::array::forcecast>;

template <class T, class A>
std::vector<T> to_vec(const A &a) {
    return std::vector<T>(a.data(), a.data() + a.size());
}

py::array_t<double> to_array(const std::vector<double> &v) {
    py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

SolverConfig make_config(const std::optional<std::string> &config) {
    return config ? SolverConfig::load(*config) : SolverConfig();
}

Partition make_partition(index_t n, int subdomains, const std::optional<std::vector<index_t>> &sizes) {
    if (sizes) return Partition::from_sizes(*sizes);
    return partition_contiguous(n, subdomains);
}

Coordinates make_coords(const std::optional<f64> &coords) {
    Coordinates c;
    if (!coords) return c;
    if (coords->ndim() != 2)
        throw DimensionError("coordinates must be an (n, dim) array");
    c.dim = static_cast<int>(coords->shape(1));
    c.xyz = to_vec<double>(*coords);
    return c;
}

py::dict report_dict(const SolveReport &r) {
    py::dict d;
    d["iterations"]        = r.iterations;
    d["relative_residual"] = r.relative_residual;
    d["converged"]         = r.converged;
    d["breakdown"]         = r.breakdown ? py::cast(*r.breakdown) : py::none();
    return d;
}

py::dict problem_dict(const ProblemInstance &p) {
    py::dict d;
    d["A"] = p.A;
    d["b"] = to_array(p.b);
    py::array_t<double> xyz({static_cast<py::ssize_t>(p.coords.size()), static_cast<py::ssize_t>(p.coords.dim)});
    std::copy(p.coords.xyz.begin(), p.coords.xyz.end(), xyz.mutable_data());
    d["coords"] = xyz;
    std::vector<index_t> sizes;
    for (int s = 0; s < p.partition.m; ++s) sizes.push_back(p.partition.size(s));
    d["sizes"] = sizes;
    d["exact"] = p.exact ? py::object(to_array(*p.exact)) : py::none();
    if (!p.mask.empty()) {
        py::array_t<bool> m(static_cast<py::ssize_t>(p.mask.size()));
        for (std::size_t i = 0; i < p.mask.size(); ++i) m.mutable_data()[i] = p.mask[i] != 0;
        d["mask"] = m;
    } else {
        d["mask"] = py::none();
    }
    return d;
}

py::tuple solve(const SparseMatrix &A, const f64 &b, int subdomains,
                const std::optional<std::vector<index_t>> &sizes,
                const std::optional<f64> &coords, const std::optional<std::string> &config,
                int threads) {
    if (b.size() != A.nrows) throw DimensionError("right-hand side length does not match the matrix");
    SolverConfig cfg = make_config(config);
    Partition P = make_partition(A.nrows, subdomains, sizes);
    Coordinates xyz = make_coords(coords);
    std::vector<double> rhs = to_vec<double>(b), x(rhs.size(), 0.0);

    SolveReport r;
    {
        py::gil_scoped_release nogil;
        Communicator comm(P.m, threads);
        SubdomainDeflation S(A, P, comm, cfg.deflation(), cfg.amg("precond"),
                             xyz.xyz.empty() ? nullptr : &xyz);
        r = S.solve(rhs, x, cfg.string("solver.type"), cfg.krylov("solver"));
    }
    return py::make_tuple(to_array(x), report_dict(r));
}

py::tuple solve_schur(const SparseMatrix &A, const f64 &b, const py::array_t<bool> &mask,
                      int subdomains, const std::optional<std::vector<index_t>> &sizes,
                      const std::optional<f64> &coords, const std::optional<std::string> &config,
                      int threads) {
    if (b.size() != A.nrows || mask.size() != A.nrows)
        throw DimensionError("right-hand side and mask lengths must match the matrix");
    SolverConfig cfg = make_config(config);
    if (cfg.string("solver.type") != "fgmres")
        throw ConfigError("solver.type", "the Schur preconditioner needs fgmres");
    Partition P = make_partition(A.nrows, subdomains, sizes);
    Coordinates xyz = make_coords(coords);
    std::vector<char> mk(static_cast<std::size_t>(mask.size()));
    for (std::size_t i = 0; i < mk.size(); ++i) mk[i] = mask.data()[i] ? 1 : 0;
    std::vector<double> rhs = to_vec<double>(b), x(rhs.size(), 0.0);

    SolveReport r;
    SchurPressureCorrection::Stats st;
    {
        py::gil_scoped_release nogil;
        Communicator comm(P.m, threads);
        SchurPressureCorrection pc(A, mk, P, comm, cfg.schur(), xyz.xyz.empty() ? nullptr : &xyz);
        DistributedMatrix DA(A, P, comm);
        DistributedInnerProduct ip(P, comm);
        r  = fgmres(DA, rhs, x, &pc, cfg.krylov("solver"), ip);
        st = pc.stats();
    }
    py::dict d = report_dict(r);
    d["u_iterations"] = st.u_iterations;
    d["p_iterations"] = st.p_iterations;
    return py::make_tuple(to_array(x), d);
}

} // namespace

PYBIND11_MODULE(_core, mod) {
    mod.doc() = "Subdomain deflation with local AMG";

    auto base = py::register_exception<Error>(mod, "Error", PyExc_RuntimeError);
    py::register_exception<DimensionError>(mod, "DimensionError", base.ptr());
    py::register_exception<SingularMatrixError>(mod, "SingularMatrixError", base.ptr());
    py::register_exception<StructureError>(mod, "StructureError", base.ptr());
    py::register_exception<PartitionError>(mod, "PartitionError", base.ptr());
    py::register_exception<ParseError>(mod, "ParseError", base.ptr());
    py::register_exception<ConfigError>(mod, "ConfigError", base.ptr());

    py::class_<SparseMatrix>(mod, "SparseMatrix")
        .def(py::init([](index_t nrows, index_t ncols, const i64 &indptr, const i64 &indices, const f64 &data) {
                 return SparseMatrix(nrows, ncols, to_vec<index_t>(indptr),
                                     to_vec<index_t>(indices), to_vec<double>(data));
             }),
             py::arg("nrows"), py::arg("ncols"), py::arg("indptr"), py::arg("indices"), py::arg("data"))
        .def_readonly("nrows", &SparseMatrix::nrows)
        .def_readonly("ncols", &SparseMatrix::ncols)
        .def_property_readonly("nnz", &SparseMatrix::nnz)
        .def_property_readonly("indptr",  [](const SparseMatrix &A) { return py::array(py::cast(A.row_ptr)); })
        .def_property_readonly("indices", [](const SparseMatrix &A) { return py::array(py::cast(A.col_idx)); })
        .def_property_readonly("data",    [](const SparseMatrix &A) { return to_array(A.values); })
        .def("at", &SparseMatrix::at)
        .def("matvec", [](const SparseMatrix &A, const f64 &x) {
            if (x.size() != A.ncols) throw DimensionError("vector length does not match the matrix");
            return to_array(matvec(1.0, A, to_vec<double>(x), 0.0, std::vector<double>(A.nrows)));
        });

    mod.def("poisson3d", [](index_t n, std::array<int, 3> boxes) {
        return problem_dict(gen_poisson3d(GridSpec(n), boxes));
    }, py::arg("n"), py::arg("boxes") = std::array<int, 3>{1, 1, 1});

    mod.def("saddle_point", [](index_t n, std::array<int, 3> boxes) {
        return problem_dict(gen_saddle_point(GridSpec(n), boxes));
    }, py::arg("n"), py::arg("boxes") = std::array<int, 3>{1, 1, 1});

    mod.def("box_factor", &box_factor, py::arg("m"));

    mod.def("default_config", [] { return SolverConfig().dump(); });
    mod.def("merged_config", [](const std::string &config) { return SolverConfig::load(config).dump(); },
            py::arg("config"));

    mod.def("solve", &solve, py::arg("A"), py::arg("b"), py::arg("subdomains") = 1,
            py::arg("sizes") = py::none(), py::arg("coords") = py::none(),
            py::arg("config") = py::none(), py::arg("threads") = 1);

    mod.def("solve_schur", &solve_schur, py::arg("A"), py::arg("b"), py::arg("mask"),
            py::arg("subdomains") = 1, py::arg("sizes") = py::none(), py::arg("coords") = py::none(),
            py::arg("config") = py::none(), py::arg("threads") = 1);
}
