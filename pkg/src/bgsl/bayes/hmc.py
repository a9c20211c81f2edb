"""Hamiltonian Monte Carlo with step-size and mass-matrix adaptation.

Warmup follows the usual three-phase schedule: a fast initial window that
only tunes the step size, a run of doubling slow windows that each end with a
mass-matrix update (dense by default, diagonal with ``metric="diag"``), and a final fast window.  The step size is tuned
by dual averaging toward ``target_accept``.  After warmup both are frozen.

Each trajectory runs ``min(leapfrog_steps, ceil(j * integration_time / eps))``
leapfrog steps, where ``j`` is a uniform jitter on ``[0.5, 1.5]``.  With
``integration_time=None`` every trajectory uses exactly ``leapfrog_steps``
steps and the step size is jittered by up to 10% instead.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .diagnostics import diagnose
from .priors import PARAM_NAMES

log = logging.getLogger(__name__)

LogDensity = Callable[[np.ndarray], tuple[float, np.ndarray]]
MAX_ENERGY_ERROR = 1000.0


class SamplerError(RuntimeError):
    pass


@dataclass(frozen=True)
class HmcConfig:
    n_chains: int = 4
    n_warmup: int = 500
    n_samples: int = 1000
    target_accept: float = 0.8
    leapfrog_steps: int = 32
    integration_time: float | None = 2.0
    metric: str = "dense"
    seed: int = 0

    def __post_init__(self):
        if min(self.n_chains, self.n_warmup, self.n_samples, self.leapfrog_steps) < 1:
            raise ValueError("chain, warmup, sample and leapfrog counts must all be >= 1")
        if not 0 < self.target_accept < 1:
            raise ValueError("target_accept must lie in (0, 1)")
        if self.integration_time is not None and not self.integration_time > 0:
            raise ValueError("integration_time must be positive")
        if self.metric not in ("diag", "dense"):
            raise ValueError(f"metric must be 'diag' or 'dense', got {self.metric!r}")


@dataclass
class ChainResult:
    draws: np.ndarray
    accept_rate: float
    n_divergent: int
    step_size: float
    inv_mass: np.ndarray
    n_grad: int


def worker_count(n_tasks: int) -> int:
    """Worker processes to use: capped by ``BGSL_THREADS`` and the CPU count."""
    cap = os.environ.get("BGSL_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(n_tasks, limit))


class _DualAveraging:
    def __init__(self, eps: float, target: float, gamma=0.05, t0=10.0, kappa=0.75):
        self.target, self.gamma, self.t0, self.kappa = target, gamma, t0, kappa
        self.restart(eps)

    def restart(self, eps: float):
        self.mu = math.log(10 * eps)
        self.t = 0
        self.h_bar = 0.0
        self.log_eps = math.log(eps)
        self.log_eps_bar = 0.0

    def update(self, accept_prob: float) -> float:
        self.t += 1
        eta = 1.0 / (self.t + self.t0)
        self.h_bar = (1 - eta) * self.h_bar + eta * (self.target - accept_prob)
        self.log_eps = self.mu - math.sqrt(self.t) / self.gamma * self.h_bar
        w = self.t ** (-self.kappa)
        self.log_eps_bar = w * self.log_eps + (1 - w) * self.log_eps_bar
        return math.exp(self.log_eps)

    @property
    def final(self) -> float:
        return math.exp(self.log_eps_bar)


def _windows(n_warmup: int) -> list[tuple[int, int]]:
    """``(first, last)`` iteration of each slow window; the mass matrix updates at ``last``."""
    init, term, base = 75, 50, 25
    if n_warmup < init + term + base:
        init, term = int(0.15 * n_warmup), int(0.1 * n_warmup)
        base = n_warmup - init - term
    ends, start, size = [], init, base
    last = n_warmup - term
    while start < last:
        end = start + size
        if end + 2 * size > last:
            end = last
        ends.append((start + 1, end))
        start, size = end, 2 * size
    return ends


def _regularized_metric(w: np.ndarray, metric: str) -> np.ndarray:
    """Window (co)variance shrunk toward ``1e-3`` times the identity."""
    n, d = w.shape
    shrink = 1e-3 * (5.0 / (n + 5.0))
    if metric == "dense":
        cov = np.cov(w, rowvar=False) if n > 1 else np.eye(d)
        return (n / (n + 5.0)) * np.atleast_2d(cov) + shrink * np.eye(d)
    var = w.var(axis=0, ddof=1) if n > 1 else np.ones(d)
    return (n / (n + 5.0)) * var + shrink


class _Chain:
    def __init__(self, f: LogDensity, z0, cfg: HmcConfig, rng: np.random.Generator):
        self.f, self.cfg, self.rng = f, cfg, rng
        self.z = np.array(z0, dtype=float)
        self.logp, self.grad = f(self.z)
        self.n_grad = 1
        if not np.isfinite(self.logp):
            raise SamplerError(f"log density is not finite at the initial point {self.z}")
        self.set_inv_mass(np.ones_like(self.z) if cfg.metric == "diag" else np.eye(self.z.size))

    def set_inv_mass(self, inv_mass: np.ndarray):
        self.inv_mass = inv_mass
        if inv_mass.ndim == 2:
            self._chol = np.linalg.cholesky(inv_mass)

    def _velocity(self, p):
        return self.inv_mass @ p if self.inv_mass.ndim == 2 else self.inv_mass * p

    def _leapfrog(self, z, p, grad, eps, steps):
        p = p + 0.5 * eps * grad
        for s in range(steps):
            z = z + eps * self._velocity(p)
            logp, grad = self.f(z)
            self.n_grad += 1
            if not np.isfinite(logp):
                return z, p, logp, grad
            p = p + (eps if s < steps - 1 else 0.5 * eps) * grad
        return z, p, logp, grad

    def _kinetic(self, p):
        return 0.5 * float(p @ self._velocity(p))

    def _momentum(self):
        xi = self.rng.standard_normal(self.z.shape)
        if self.inv_mass.ndim == 2:
            # inv_mass = C C^T, so C^{-T} xi has covariance inv(inv_mass)
            return np.linalg.solve(self._chol.T, xi)
        return xi / np.sqrt(self.inv_mass)

    def _steps(self, eps: float) -> int:
        L = self.cfg.leapfrog_steps
        if self.cfg.integration_time is None:
            return L
        jitter = self.rng.uniform(0.5, 1.5)
        return int(min(L, max(1, math.ceil(jitter * self.cfg.integration_time / eps))))

    def transition(self, eps: float) -> tuple[float, bool]:
        """One HMC step. Returns ``(acceptance probability, divergent)``."""
        with np.errstate(over="ignore", invalid="ignore"):
            return self._transition(eps)

    def _transition(self, eps: float) -> tuple[float, bool]:
        p0 = self._momentum()
        h0 = -self.logp + self._kinetic(p0)
        if self.cfg.integration_time is None:
            # a jittered step size breaks resonance of fixed-length trajectories
            eps = eps * self.rng.uniform(0.9, 1.1)
        z, p, logp, grad = self._leapfrog(self.z, p0, self.grad, eps, self._steps(eps))
        h = -logp + self._kinetic(p) if np.isfinite(logp) else np.inf
        if not np.isfinite(h) or h - h0 > MAX_ENERGY_ERROR:
            return 0.0, True
        accept = 1.0 if h <= h0 else math.exp(h0 - h)
        if self.rng.random() < accept:
            self.z, self.logp, self.grad = z, logp, grad
        return accept, False

    def initial_step_size(self) -> float:
        """Double or halve from 1 until the one-step acceptance crosses 1/2."""
        eps = 1.0
        p = self._momentum()
        h0 = -self.logp + self._kinetic(p)

        def accept_log(e):
            with np.errstate(over="ignore", invalid="ignore"):
                z, q, logp, _ = self._leapfrog(self.z, p, self.grad, e, 1)
                return h0 - (-logp + self._kinetic(q)) if np.isfinite(logp) else -np.inf

        direction = 1 if accept_log(eps) > math.log(0.5) else -1
        for _ in range(60):
            nxt = eps * 2.0**direction
            if (accept_log(nxt) > math.log(0.5)) != (direction == 1):
                break
            eps = nxt
        return eps


def run_chain(f: LogDensity, z0, cfg: HmcConfig, rng: np.random.Generator) -> ChainResult:
    """Warm up and sample one chain."""
    ch = _Chain(f, z0, cfg, rng)
    eps = ch.initial_step_size()
    da = _DualAveraging(eps, cfg.target_accept)
    windows = _windows(cfg.n_warmup)
    starts = {a for a, _ in windows}
    ends = {b for _, b in windows}
    window: list[np.ndarray] = []
    for it in range(1, cfg.n_warmup + 1):
        accept, _ = ch.transition(eps)
        eps = da.update(accept)
        if it in starts:
            window = []
        window.append(ch.z.copy())
        if it in ends:
            w = np.array(window)
            n = len(w)
            ch.set_inv_mass(_regularized_metric(w, cfg.metric))
            window = []
            eps = ch.initial_step_size()
            da.restart(eps)
    eps = da.final
    draws = np.empty((cfg.n_samples, ch.z.size))
    n_acc = 0.0
    n_div = 0
    for i in range(cfg.n_samples):
        accept, divergent = ch.transition(eps)
        n_acc += accept
        n_div += divergent
        draws[i] = ch.z
    if n_div == cfg.n_samples:
        raise SamplerError("every post-warmup transition diverged")
    return ChainResult(draws, n_acc / cfg.n_samples, n_div, eps, ch.inv_mass, ch.n_grad)


def _run_chain_task(args):
    return run_chain(*args)


@dataclass
class PosteriorSamples:
    """Post-warmup draws, stored per chain in log coordinates."""

    unconstrained: np.ndarray
    accept_rate: np.ndarray
    n_divergent: np.ndarray
    step_size: np.ndarray
    n_grad: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    elapsed: float = 0.0
    names: tuple = PARAM_NAMES

    @property
    def n_chains(self) -> int:
        return self.unconstrained.shape[0]

    @property
    def unconstrained_draws(self) -> np.ndarray:
        return self.unconstrained.reshape(-1, self.unconstrained.shape[-1])

    @property
    def draws(self) -> np.ndarray:
        """Natural-scale draws, shape ``(M, 3)``."""
        return np.exp(self.unconstrained_draws)

    @property
    def chain_index(self) -> np.ndarray:
        C, N = self.unconstrained.shape[:2]
        return np.repeat(np.arange(C), N)

    def __len__(self):
        return self.unconstrained_draws.shape[0]

    def diagnostics(self) -> dict:
        out = {}
        for j, name in enumerate(self.names):
            d = diagnose(self.unconstrained[:, :, j]) if self.n_chains >= 2 else None
            out[name] = {"rhat": d.rhat if d else float("nan"),
                         "ess": d.ess if d else float("nan"),
                         "degenerate": bool(d.degenerate) if d else False}
        return out

    def summary(self) -> dict:
        return {
            "n_chains": self.n_chains,
            "n_draws": len(self),
            "accept_rate": self.accept_rate.tolist(),
            "n_divergent": self.n_divergent.tolist(),
            "step_size": self.step_size.tolist(),
            "n_grad": np.asarray(self.n_grad).tolist(),
            "elapsed_s": self.elapsed,
            "diagnostics": self.diagnostics(),
        }

    def save(self, csv_path, json_path=None) -> None:
        """Draws as CSV (chain, draw, parameters...) and a JSON block with diagnostics."""
        csv_path = Path(csv_path)
        json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
        C, N, _ = self.unconstrained.shape
        nat = np.exp(self.unconstrained)
        try:
            with csv_path.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(("chain", "draw", *self.names))
                for c in range(C):
                    for i in range(N):
                        w.writerow((c, i, *(repr(float(x)) for x in nat[c, i])))
            json_path.write_text(json.dumps(self.summary(), indent=2))
        except OSError as err:
            raise OSError(f"cannot write posterior to {csv_path}: {err}") from err

    @classmethod
    def load(cls, csv_path, json_path=None) -> "PosteriorSamples":
        csv_path = Path(csv_path)
        json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
        try:
            raw = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
            meta = json.loads(json_path.read_text()) if json_path.exists() else {}
        except OSError as err:
            raise OSError(f"cannot read posterior from {csv_path}: {err}") from err
        chains = raw[:, 0].astype(int)
        C = chains.max() + 1
        z = np.log(raw[:, 2:]).reshape(C, -1, raw.shape[1] - 2)
        return cls(
            unconstrained=z,
            accept_rate=np.asarray(meta.get("accept_rate", [np.nan] * C), dtype=float),
            n_divergent=np.asarray(meta.get("n_divergent", [0] * C), dtype=int),
            step_size=np.asarray(meta.get("step_size", [np.nan] * C), dtype=float),
            n_grad=np.asarray(meta.get("n_grad", [0] * C), dtype=int),
            elapsed=float(meta.get("elapsed_s", 0.0)),
        )


def hmc_sample(f: LogDensity, cfg: HmcConfig, init) -> PosteriorSamples:
    """Run ``cfg.n_chains`` independent chains from the rows of ``init``.

    Chain ``c`` draws its randomness from the ``c``-th child of
    ``SeedSequence(cfg.seed)``.  Chains run in worker processes when more
    than one worker is available, which requires ``f`` to be picklable.
    """
    init = np.atleast_2d(np.asarray(init, dtype=float))
    if init.shape[0] != cfg.n_chains:
        raise ValueError(f"need one initial point per chain, got {init.shape[0]} for {cfg.n_chains}")
    if not np.all(np.isfinite(init)):
        raise ValueError("initial points must be finite")
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_chains)
    tasks = [(f, init[c], cfg, np.random.default_rng(seeds[c])) for c in range(cfg.n_chains)]
    t0 = time.perf_counter()
    workers = worker_count(cfg.n_chains)
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_run_chain_task, tasks))
    else:
        results = [run_chain(*t) for t in tasks]
    elapsed = time.perf_counter() - t0
    names = PARAM_NAMES if init.shape[1] == 3 else tuple(f"x{j}" for j in range(init.shape[1]))
    for c, r in enumerate(results):
        if r.n_divergent:
            log.info("chain %d: %d divergent transitions", c, r.n_divergent)
    return PosteriorSamples(
        unconstrained=np.stack([r.draws for r in results]),
        accept_rate=np.array([r.accept_rate for r in results]),
        n_divergent=np.array([r.n_divergent for r in results]),
        step_size=np.array([r.step_size for r in results]),
        n_grad=np.array([r.n_grad for r in results]),
        elapsed=elapsed,
        names=names,
    )


def config_dict(cfg: HmcConfig) -> dict:
    return asdict(cfg)
