"""Subdomain deflation with local AMG.

Thin wrapper over the compiled ``_core`` module. Matrices cross the boundary
as CSR arrays; scipy sparse matrices are accepted wherever a matrix is.
"""

import json

import numpy as np

from ._core import (
    ConfigError,
    DimensionError,
    Error,
    ParseError,
    PartitionError,
    SingularMatrixError,
    SparseMatrix,
    StructureError,
    box_factor,
    poisson3d,
    saddle_point,
)
from . import _core

__all__ = [
    "ConfigError", "DimensionError", "Error", "ParseError", "PartitionError",
    "SingularMatrixError", "SparseMatrix", "StructureError",
    "as_matrix", "box_factor", "default_config", "poisson3d", "saddle_point",
    "solve", "solve_schur", "to_scipy",
]


def as_matrix(A):
    """SparseMatrix from a SparseMatrix or anything scipy can turn into CSR."""
    if isinstance(A, SparseMatrix):
        return A
    import scipy.sparse as sp

    A = sp.csr_matrix(A)
    A.sum_duplicates()
    A.sort_indices()
    return SparseMatrix(A.shape[0], A.shape[1],
                        A.indptr.astype(np.int64), A.indices.astype(np.int64), A.data)


def to_scipy(A):
    import scipy.sparse as sp

    return sp.csr_matrix((A.data, A.indices, A.indptr), shape=(A.nrows, A.ncols))


def _config_text(config):
    if config is None or isinstance(config, str):
        return config
    return json.dumps(config)


def default_config():
    return json.loads(_core.default_config())


def solve(A, b, subdomains=1, sizes=None, coords=None, config=None, threads=1):
    """Deflated solve of A x = b. Returns (x, report)."""
    return _core.solve(as_matrix(A), np.asarray(b, dtype=float), subdomains, sizes,
                       None if coords is None else np.asarray(coords, dtype=float),
                       _config_text(config), threads)


def solve_schur(A, b, mask, subdomains=1, sizes=None, coords=None, config=None, threads=1):
    """FGMRES with the pressure Schur preconditioner. Returns (x, report)."""
    if config is None:
        config = {"solver": {"type": "fgmres"}}
    return _core.solve_schur(as_matrix(A), np.asarray(b, dtype=float),
                             np.asarray(mask, dtype=bool), subdomains, sizes,
                             None if coords is None else np.asarray(coords, dtype=float),
                             _config_text(config), threads)
