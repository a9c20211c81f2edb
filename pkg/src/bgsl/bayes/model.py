"""Bernoulli likelihood of graph labels and the log posterior over (theta, delta, b)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .. import dual as dn
from ..synthdata import Dataset
from ..unroll import UnrollConfig, forward, logits, unroll_with_grad
from .priors import PriorSpec, altered_prior


def edge_log_likelihood(z, a):
    """Per-edge ``log p(a | z)`` for logits ``z``: ``-softplus(-(2a - 1) z)``.

    Stays finite for any finite ``z``; accepts duals.
    """
    ybar = 2.0 * np.asarray(a, dtype=float) - 1.0
    return -dn.softplus(-ybar * z)


def log_likelihood(data: Dataset, theta, delta, b, cfg: UnrollConfig | None = None):
    """Summed Bernoulli log likelihood of ``data`` under the unrolled model.

    This is the reference path: it accepts plain floats or duals for the
    three parameters.  :class:`Posterior` computes the same quantity through
    the compiled kernel.
    """
    if data.T == 0:
        return 0.0 * theta * delta * b
    aD = forward(data.e, theta, cfg)
    return edge_log_likelihood(logits(aD, delta, b), data.a).sum()


@dataclass
class Posterior:
    """Unnormalized log posterior in log coordinates ``z = (ln theta, ln delta, ln b)``."""

    data: Dataset
    prior: PriorSpec = field(default_factory=altered_prior)
    cfg: UnrollConfig = field(default_factory=UnrollConfig)

    def log_likelihood_and_grad(self, z) -> tuple[float, np.ndarray]:
        z = np.asarray(z, dtype=float)
        if self.data.T == 0:
            return 0.0, np.zeros(3)
        theta, delta, b = np.exp(z)
        a, da = unroll_with_grad(self.data.e, theta, self.cfg)
        ybar = 2.0 * self.data.a - 1.0
        s = ybar * (delta * a - b)
        value = -np.logaddexp(0.0, -s).sum()
        # d/dz of -softplus(-ybar z) is ybar * sigmoid(-ybar z)
        g = ybar * expit(-s)
        grad = np.array([delta * np.sum(g * da), delta * np.sum(g * a), -b * g.sum()])
        return float(value), grad

    def __call__(self, z) -> tuple[float, np.ndarray]:
        """``(log posterior, gradient)`` at ``z``."""
        lp, gp = self.prior.log_prior_and_grad(z)
        if not np.isfinite(lp):
            return -np.inf, np.zeros(3)
        ll, gl = self.log_likelihood_and_grad(z)
        return ll + lp, gl + gp

    def log_prob(self, z) -> float:
        return self(z)[0]

    def dual_value_and_grad(self, z) -> tuple[float, np.ndarray]:
        """Same as calling the posterior, via one dual-number pass of the reference model."""
        z = np.asarray(z, dtype=float)
        u = [dn.Dual.variable(z[i], i) for i in range(3)]
        ll = log_likelihood(self.data, dn.exp(u[0]), dn.exp(u[1]), dn.exp(u[2]), self.cfg)
        lp, gp = self.prior.log_prior_and_grad(z)
        if isinstance(ll, dn.Dual):
            return float(ll.value) + lp, ll.tangent + gp
        return float(ll) + lp, gp
