"""The unrolled DPG network and its edge-probability head.

:func:`forward` is the reference implementation: plain numpy, generic over
floats and :class:`~bgsl.dual.Dual` numbers, holding only the current layer in
memory.  :func:`unroll` and :func:`unroll_with_grad` run the same recursion in
a compiled kernel over many (input, theta) columns at once and are what the
sampler and the metrics use.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from . import dual as dn
from .graph import DegreeOperator, num_nodes, triu_pairs
from .solvers import A0_DEFAULT, LAMBDA0_DEFAULT

DEPTH_DEFAULT = 200


@dataclass(frozen=True)
class UnrollConfig:
    depth: int = DEPTH_DEFAULT
    a0: float = A0_DEFAULT
    lambda0: float = LAMBDA0_DEFAULT

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be at least 1")


@dataclass(frozen=True)
class HeadParams:
    delta: float
    b: float

    def __post_init__(self):
        if not (self.delta > 0 and self.b > 0):
            raise ValueError("delta and b must be positive")


def forward(e, theta, cfg: UnrollConfig | None = None):
    """Output of ``cfg.depth`` DPG layers on ``theta * e``, before scaling by delta.

    ``e`` may carry a leading batch axis.  ``theta`` may be a float or a
    :class:`~bgsl.dual.Dual`, in which case the result is a dual too.
    """
    cfg = cfg or UnrollConfig()
    e = np.asarray(e, dtype=float)
    S = DegreeOperator(num_nodes(e.shape[-1]))
    nm1 = S.n - 1
    e_scaled = theta * e
    a = np.full(e.shape, cfg.a0)
    lam = np.full(e.shape[:-1] + (S.n,), cfg.lambda0)
    if isinstance(theta, dn.Dual):
        a = dn.Dual.constant(a, theta.width)
        lam = dn.Dual.constant(lam, theta.width)
    for _ in range(cfg.depth):
        d = dn.linear(S.apply, a) - nm1 * lam
        lam = -(d - dn.sqrt(d * d + 4 * nm1)) / (2 * nm1)
        a = dn.relu(0.5 * dn.linear(S.adjoint, lam) - e_scaled)
    return a


def logits(a_D, delta, b):
    """Pre-sigmoid edge scores ``delta * a_D - b``."""
    return delta * a_D - b


def edge_probs(a_D, head: HeadParams):
    """Edge probabilities ``sigmoid(delta * a_D - b)``."""
    return dn.sigmoid(logits(a_D, head.delta, head.b))


def _columns(E, thetas):
    E = np.atleast_2d(np.asarray(E, dtype=float))
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    return E, thetas


def unroll(E, thetas, cfg: UnrollConfig | None = None) -> np.ndarray:
    """Compiled forward pass over every combination of input and theta.

    ``E`` has shape ``(T, K)`` and ``thetas`` shape ``(M,)``; the result has
    shape ``(M, T, K)``.
    """
    cfg = cfg or UnrollConfig()
    E, thetas = _columns(E, thetas)
    T, K = E.shape
    M = thetas.shape[0]
    n = num_nodes(K)
    rows, cols = triu_pairs(n)
    cols_E = np.ascontiguousarray(np.broadcast_to(E.T[:, None, :], (K, M, T)).reshape(K, M * T))
    cols_theta = np.repeat(thetas, T)
    a, _ = _kernels.unroll_batch(cols_E, cols_theta, n, rows, cols, cfg.depth,
                                 cfg.a0, cfg.lambda0, False)
    return a.reshape(K, M, T).transpose(1, 2, 0)


def unroll_with_grad(E, theta: float, cfg: UnrollConfig | None = None):
    """Compiled forward pass and its derivative with respect to ``log(theta)``.

    Returns two ``(T, K)`` arrays.
    """
    cfg = cfg or UnrollConfig()
    E = np.atleast_2d(np.asarray(E, dtype=float))
    T, K = E.shape
    n = num_nodes(K)
    rows, cols = triu_pairs(n)
    a, da = _kernels.unroll_batch(np.ascontiguousarray(E.T), np.full(T, float(theta)), n,
                                  rows, cols, cfg.depth, cfg.a0, cfg.lambda0, True)
    return a.T, da.T
