"""Random graph ensembles, smooth signals, and distance inputs.

Smooth signals on a connected graph are drawn from ``N(0, L^+)``.  The
expected squared distance between node rows is then the effective resistance
``L^+_ii + L^+_jj - 2 L^+_ij`` once the empirical distance is divided by the
number of signals ``P``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import networkx as nx
import numpy as np
from scipy.spatial.distance import pdist

from .graph import devectorize, is_connected, laplacian_pinv, num_edges, num_nodes, vectorize

ORDERING = "upper-row-major"


class PreconditionError(ValueError):
    pass


class DegenerateInputError(ValueError):
    pass


@dataclass(frozen=True)
class EnsembleSpec:
    """A random graph family: ``kind`` is ``"RG"``, ``"ER"`` or ``"BA"``.

    ``param`` is the connection radius, the edge probability, or the number
    of links per arriving node respectively.
    """

    kind: str
    param: float
    n: int

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        if self.n < 2:
            raise ValueError("ensembles need n >= 2")
        if kind == "RG" and not self.param > 0:
            raise ValueError("RG radius must be positive")
        elif kind == "ER" and not 0 <= self.param <= 1:
            raise ValueError("ER probability must lie in [0, 1]")
        elif kind == "BA" and not (int(self.param) == self.param and 1 <= self.param < self.n):
            raise ValueError("BA needs an integer 1 <= m < n")
        elif kind not in ("RG", "ER", "BA"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")

    @classmethod
    def parse(cls, text: str, n: int) -> "EnsembleSpec":
        """Parse ``"RG:0.333"``, ``"ER:0.5"`` or ``"BA:1"``; fractions like ``1/3`` work."""
        kind, _, value = text.partition(":")
        if "/" in value:
            num, den = value.split("/")
            param = float(num) / float(den)
        else:
            param = float(value)
        return cls(kind, param, n)

    def label(self) -> str:
        return f"{self.kind}:{self.param:g}"


def gen_graph(spec: EnsembleSpec, rng: np.random.Generator, connected: bool = False,
              max_tries: int = 10_000) -> np.ndarray:
    """Draw one binary edge vector; with ``connected`` resample until connected."""
    for _ in range(max_tries):
        if spec.kind == "RG":
            pts = rng.random((spec.n, 2))
            a = (pdist(pts) <= spec.param).astype(float)
        elif spec.kind == "ER":
            a = (rng.random(num_edges(spec.n)) < spec.param).astype(float)
        else:
            g = nx.barabasi_albert_graph(spec.n, int(spec.param), seed=rng)
            a = vectorize(nx.to_numpy_array(g, nodelist=range(spec.n)))
        if not connected or is_connected(a):
            return a
    raise RuntimeError(f"no connected {spec.label()} graph in {max_tries} draws")


def sample_smooth_signals(a, P: int, rng: np.random.Generator) -> np.ndarray:
    """``n x P`` matrix whose columns are i.i.d. ``N(0, L^+)``."""
    a = np.asarray(a, dtype=float)
    if not is_connected(a):
        raise PreconditionError("smooth signals need a connected graph")
    Lp = laplacian_pinv(a)
    w, U = np.linalg.eigh(Lp)
    root = (U * np.sqrt(np.clip(w, 0.0, None))) @ U.T
    return root @ rng.standard_normal((Lp.shape[0], P))


def analytic_distance(a) -> np.ndarray:
    """Expected squared distance of smooth signals (the effective resistance)."""
    a = np.asarray(a, dtype=float)
    if not is_connected(a):
        raise PreconditionError("the analytic distance needs a connected graph")
    Lp = laplacian_pinv(a)
    dg = np.diag(Lp)
    return np.maximum(vectorize(dg[:, None] + dg[None, :] - 2 * Lp), 0.0)


def empirical_distance(X, normalize: bool = True) -> np.ndarray:
    """Squared Euclidean distance between node rows, divided by ``P`` if ``normalize``."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    e = pdist(X, "sqeuclidean")
    return e / X.shape[1] if normalize else e


def distance_from_signals(X, mode: str = "euclidean") -> np.ndarray:
    """Pairwise dissimilarity of the rows of ``X``.

    ``mode`` is ``"euclidean"`` (squared distance), ``"one_minus_abs_corr"``
    (``1 - |pearson|``), or ``"log_euclidean"`` (log of the plain Euclidean
    distance).
    """
    X = np.asarray(X, dtype=float)
    if mode == "euclidean":
        return empirical_distance(X, normalize=False)
    if mode == "one_minus_abs_corr":
        if np.any(X.std(axis=1) == 0):
            raise DegenerateInputError("correlation distance needs non-constant rows")
        C = np.corrcoef(X)
        return np.clip(vectorize(1.0 - np.abs(C)), 0.0, None)
    if mode == "log_euclidean":
        d = pdist(X, "euclidean")
        if np.any(d <= 0):
            raise DegenerateInputError("log distance needs distinct rows")
        return np.log(d)
    raise ValueError(f"unknown distance mode {mode!r}")


@dataclass
class Dataset:
    """``T`` pairs of distance inputs ``e`` and binary labels ``a`` on ``n`` nodes."""

    n: int
    e: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        k = num_edges(self.n)
        self.e = np.asarray(self.e, dtype=float).reshape(-1, k)
        self.a = np.asarray(self.a, dtype=float).reshape(-1, k)
        if self.e.shape != self.a.shape:
            raise ValueError("inputs and labels must pair up")
        if np.any(self.e < 0):
            raise ValueError("distances must be non-negative")
        if not np.all((self.a == 0) | (self.a == 1)):
            raise ValueError("labels must be binary")

    @property
    def T(self) -> int:
        return self.e.shape[0]

    def __len__(self):
        return self.T

    def subset(self, idx) -> "Dataset":
        return Dataset(self.n, self.e[idx], self.a[idx])

    def concat(self, other: "Dataset") -> "Dataset":
        return Dataset(self.n, np.vstack([self.e, other.e]), np.vstack([self.a, other.a]))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "T": self.T,
            "ordering": ORDERING,
            "pairs": [{"e": e.tolist(), "a": a.astype(int).tolist()} for e, a in zip(self.e, self.a)],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Dataset":
        if obj.get("ordering", ORDERING) != ORDERING:
            raise ValueError(f"unsupported edge ordering {obj['ordering']!r}")
        n = int(obj["n"])
        k = num_edges(n)
        e = np.array([p["e"] for p in obj["pairs"]], dtype=float).reshape(-1, k)
        a = np.array([p["a"] for p in obj["pairs"]], dtype=float).reshape(-1, k)
        return cls(n, e, a)

    def save(self, path) -> None:
        path = Path(path)
        try:
            path.write_text(json.dumps(self.to_json()))
        except OSError as err:
            raise OSError(f"cannot write dataset to {path}: {err}") from err

    @classmethod
    def load(cls, path) -> "Dataset":
        path = Path(path)
        try:
            return cls.from_json(json.loads(path.read_text()))
        except OSError as err:
            raise OSError(f"cannot read dataset from {path}: {err}") from err


def make_dataset(spec: EnsembleSpec, T: int, rng: np.random.Generator,
                 n_signals: int | None = None) -> Dataset:
    """``T`` i.i.d. labelled pairs; analytic distances unless ``n_signals`` is given."""
    k = num_edges(spec.n)
    E = np.empty((T, k))
    A = np.empty((T, k))
    for t in range(T):
        a = gen_graph(spec, rng, connected=True)
        if n_signals is None:
            E[t] = analytic_distance(a)
        else:
            E[t] = empirical_distance(sample_smooth_signals(a, n_signals, rng), normalize=True)
        A[t] = a
    return Dataset(spec.n, E, A)


def load_signal_csv(path) -> np.ndarray:
    """Signal matrix from CSV: one row per node, one column per observation."""
    return np.loadtxt(Path(path), delimiter=",", ndmin=2)


__all__ = [
    "EnsembleSpec", "Dataset", "gen_graph", "sample_smooth_signals", "analytic_distance",
    "empirical_distance", "distance_from_signals", "make_dataset", "load_signal_csv",
    "PreconditionError", "DegenerateInputError", "devectorize", "num_nodes",
]
