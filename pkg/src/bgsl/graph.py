"""Vectorized graph representation and the degree operator.

Edges of an ``n``-node undirected graph are stored as a flat vector over the
strict upper triangle in row-major order: ``(0,1), (0,2), ..., (0,n-1), (1,2),
...``.  Every module in the package uses this ordering.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

EDGE_THRESHOLD = 1e-5
PINV_RTOL = 1e-10


class InvalidIndexError(IndexError):
    pass


class DimensionError(ValueError):
    pass


def num_edges(n: int) -> int:
    return n * (n - 1) // 2


def num_nodes(k: int) -> int:
    """Node count for an edge vector of length ``k``."""
    n = int(round((1 + np.sqrt(1 + 8 * k)) / 2))
    if num_edges(n) != k:
        raise DimensionError(f"{k} is not a triangular number n(n-1)/2")
    return n


def edge_index(i: int, j: int, n: int) -> int:
    """Position of the pair ``(i, j)``, ``i < j``, in the edge vector."""
    if not (0 <= i < j < n):
        raise InvalidIndexError(f"need 0 <= i < j < n, got i={i}, j={j}, n={n}")
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def edge_pair(idx: int, n: int) -> tuple[int, int]:
    """Inverse of :func:`edge_index`."""
    if not (0 <= idx < num_edges(n)):
        raise InvalidIndexError(f"edge position {idx} out of range for n={n}")
    rows, cols = triu_pairs(n)
    return int(rows[idx]), int(cols[idx])


@lru_cache(maxsize=64)
def _triu_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = np.triu_indices(n, k=1)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


def triu_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row and column node index of every edge slot (read-only arrays)."""
    return _triu_pairs(int(n))


def vectorize(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    rows, cols = triu_pairs(A.shape[0])
    return A[rows, cols].copy()


def devectorize(a, n: int | None = None) -> np.ndarray:
    """Hollow symmetric matrix from an edge vector."""
    a = np.asarray(a, dtype=float)
    if n is None:
        n = num_nodes(a.shape[-1])
    _check_len(a, n)
    rows, cols = triu_pairs(n)
    A = np.zeros((n, n))
    A[rows, cols] = a
    A[cols, rows] = a
    return A


@dataclass(frozen=True)
class EdgeVector:
    """Edge weights of an ``n``-node graph in canonical order."""

    values: np.ndarray
    n: int

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        _check_len(values, self.n)

    @classmethod
    def from_matrix(cls, A) -> "EdgeVector":
        A = np.asarray(A)
        return cls(vectorize(A), A.shape[0])

    def to_matrix(self) -> np.ndarray:
        return devectorize(self.values, self.n)

    def __len__(self):
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


class DegreeOperator:
    """The binary map ``S`` from edge weights to node degrees.

    ``S`` is never materialized; ``apply`` scatters each edge weight to its two
    endpoints and ``adjoint`` gathers pairwise sums ``lam_i + lam_j``.  Both
    accept a leading batch axis.
    """

    def __init__(self, n: int):
        if n < 2:
            raise DimensionError("a graph needs at least two nodes")
        self.n = int(n)
        self.rows, self.cols = triu_pairs(self.n)

    def apply(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        _check_len(a, self.n)
        A = np.zeros(a.shape[:-1] + (self.n, self.n))
        A[..., self.rows, self.cols] = a
        return A.sum(axis=-1) + A.sum(axis=-2)

    def adjoint(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        if lam.shape[-1] != self.n:
            raise DimensionError(f"expected {self.n} node values, got {lam.shape[-1]}")
        return lam[..., self.rows] + lam[..., self.cols]

    def dense(self) -> np.ndarray:
        """Explicit ``n x n(n-1)/2`` matrix, for tests and small problems."""
        S = np.zeros((self.n, num_edges(self.n)))
        k = np.arange(num_edges(self.n))
        S[self.rows, k] = 1.0
        S[self.cols, k] = 1.0
        return S


def degrees(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return DegreeOperator(num_nodes(a.shape[-1])).apply(a)


def degrees_adjoint(lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    return DegreeOperator(lam.shape[-1]).adjoint(lam)


def laplacian(a) -> np.ndarray:
    A = devectorize(a)
    return np.diag(A.sum(axis=1)) - A


def laplacian_pinv(a, rtol: float = PINV_RTOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse of the graph Laplacian.

    Eigenvalues below ``rtol * lambda_max`` are treated as zero.  The empty
    graph maps to the zero matrix.
    """
    L = laplacian(a)
    w, U = np.linalg.eigh(L)
    wmax = np.abs(w).max(initial=0.0)
    if wmax == 0.0:
        return np.zeros_like(L)
    keep = np.abs(w) > rtol * wmax
    Uk = U[:, keep]
    P = (Uk / w[keep]) @ Uk.T
    return 0.5 * (P + P.T)


@dataclass(frozen=True)
class GraphStats:
    edge_density: float
    n_components: int
    weight_quantiles: tuple[float, float, float, float, float]


def count_components(a, threshold: float = EDGE_THRESHOLD) -> int:
    a = np.asarray(a, dtype=float)
    n = num_nodes(a.shape[-1])
    rows, cols = triu_pairs(n)
    on = a > threshold
    adj = coo_matrix((np.ones(on.sum()), (rows[on], cols[on])), shape=(n, n))
    ncomp, _ = connected_components(adj, directed=False)
    return int(ncomp)


def is_connected(a, threshold: float = EDGE_THRESHOLD) -> bool:
    return count_components(a, threshold) == 1


def graph_stats(a, threshold: float = EDGE_THRESHOLD) -> GraphStats:
    """Edge density, connected components, and quantiles of supra-threshold weights.

    Quantiles are NaN when no weight exceeds ``threshold``.
    """
    a = np.asarray(a, dtype=float)
    on = a > threshold
    if on.any():
        q = np.quantile(a[on], [0.0, 0.25, 0.5, 0.75, 1.0])
    else:
        q = np.full(5, np.nan)
    return GraphStats(
        edge_density=float(on.mean()) if a.size else 0.0,
        n_components=count_components(a, threshold),
        weight_quantiles=tuple(float(v) for v in q),
    )


def _check_len(a: np.ndarray, n: int):
    if a.shape[-1] != num_edges(n):
        raise DimensionError(
            f"edge vector has length {a.shape[-1]}, expected {num_edges(n)} for n={n}"
        )
