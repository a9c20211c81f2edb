"""Model-level entry points: posterior sampling and MAP estimation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..synthdata import Dataset
from ..unroll import UnrollConfig
from .hmc import HmcConfig, PosteriorSamples, hmc_sample
from .model import Posterior
from .priors import PriorSpec, altered_prior


def fit_posterior(data: Dataset, prior: PriorSpec | None = None, cfg: HmcConfig | None = None,
                  unroll_cfg: UnrollConfig | None = None, init=None) -> PosteriorSamples:
    """HMC on the posterior of (theta, delta, b).

    Chains start from independent prior draws unless ``init`` (shape
    ``(n_chains, 3)``, log coordinates) is given.
    """
    prior = prior or altered_prior()
    cfg = cfg or HmcConfig()
    post = Posterior(data, prior, unroll_cfg or UnrollConfig())
    if init is None:
        init_rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(cfg.n_chains + 1)[-1])
        init = prior.sample(init_rng, cfg.n_chains)
    return hmc_sample(post, cfg, init)


@dataclass(frozen=True)
class MapConfig:
    max_steps: int = 5000
    lr: float = 1e-3
    grad_tol: float = 1e-6
    # the step grows by ``lr_grow`` after an improving step and shrinks by
    # ``lr_shrink`` until the objective improves
    lr_grow: float = 1.5
    lr_shrink: float = 0.5
    min_lr: float = 1e-14


@dataclass
class MapResult:
    z: np.ndarray
    log_post: float
    n_steps: int
    converged: bool
    trace: list[float] = field(default_factory=list)

    @property
    def params(self) -> np.ndarray:
        """``(theta, delta, b)`` on the natural scale."""
        return np.exp(self.z)


def map_estimate(data: Dataset, prior: PriorSpec | None = None, cfg: MapConfig | None = None,
                 unroll_cfg: UnrollConfig | None = None, init=None) -> MapResult:
    """Full-batch gradient ascent on the log posterior in log coordinates.

    Starts at the prior medians by default.  Only improving steps are taken,
    so the final iterate is also the best one.
    """
    prior = prior or altered_prior()
    cfg = cfg or MapConfig()
    post = Posterior(data, prior, unroll_cfg or UnrollConfig())
    z = np.log(prior.medians()) if init is None else np.asarray(init, dtype=float).copy()
    value, grad = post(z)
    if not (np.isfinite(value) and np.all(np.isfinite(grad))):
        raise ValueError(f"log posterior is not finite at the initial point {np.exp(z)}")
    lr = cfg.lr
    trace = [value]
    for step in range(1, cfg.max_steps + 1):
        if np.linalg.norm(grad) < cfg.grad_tol:
            return MapResult(z, value, step - 1, True, trace)
        while lr >= cfg.min_lr:
            cand = z + lr * grad
            with np.errstate(over="ignore", invalid="ignore"):
                v, g = post(cand)
            if np.isfinite(v) and v > value:
                z, value, grad = cand, v, g
                lr *= cfg.lr_grow
                break
            lr *= cfg.lr_shrink
        else:
            # no representable improving step along the gradient
            return MapResult(z, value, step, True, trace)
        trace.append(value)
    return MapResult(z, value, cfg.max_steps, bool(np.linalg.norm(grad) < cfg.grad_tol), trace)
