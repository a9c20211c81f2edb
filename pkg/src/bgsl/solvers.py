"""DPG and PDS solvers for learning a graph from a distance vector.

Both solve

    min_{a >= 0}  2 a'e - alpha 1'log(S a) + beta ||a||^2

DPG works in the (theta, delta) form, ``a*(e; alpha, beta) = delta *
a*(theta e; 1, 1)`` with ``theta = 1/sqrt(alpha beta)`` and ``delta =
sqrt(alpha/beta)``, which leaves theta alone in charge of sparsity.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .graph import DegreeOperator, DimensionError, graph_stats, num_nodes, triu_pairs

log = logging.getLogger(__name__)

A0_DEFAULT = 0.5
LAMBDA0_DEFAULT = 17.0


class DivergenceError(FloatingPointError):
    """Raised when an iterate becomes non-finite or blows up past ``1e100``."""

    def __init__(self, message: str, iteration: int):
        super().__init__(message)
        self.iteration = iteration


@dataclass(frozen=True)
class DpgParams:
    theta: float
    delta: float = 1.0

    def __post_init__(self):
        if not (self.theta > 0 and self.delta > 0):
            raise ValueError(f"theta and delta must be positive, got {self}")

    def to_pds(self, gamma: float = 0.1) -> "PdsParams":
        return PdsParams(alpha=self.delta / self.theta, beta=1.0 / (self.delta * self.theta), gamma=gamma)


@dataclass(frozen=True)
class PdsParams:
    alpha: float
    beta: float
    gamma: float = 0.1

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0 and self.gamma > 0):
            raise ValueError(f"alpha, beta, gamma must be positive, got {self}")

    def to_dpg(self) -> DpgParams:
        return DpgParams(theta=1.0 / np.sqrt(self.alpha * self.beta), delta=np.sqrt(self.alpha / self.beta))


@dataclass(frozen=True)
class SolveConfig:
    max_iter: int = 50_000
    rel_tol: float = 1e-8

    def __post_init__(self):
        if self.max_iter < 1 or not self.rel_tol > 0:
            raise ValueError(f"invalid solver config {self}")


@dataclass
class SolveResult:
    a_star: np.ndarray
    lambda_star: np.ndarray | None
    iters: int
    converged: bool
    final_rel_change: float


def objective(a, e, alpha: float = 1.0, beta: float = 1.0) -> float:
    """Objective value; ``inf`` outside the domain (negative weights or zero degree)."""
    a = np.asarray(a, dtype=float)
    e = np.asarray(e, dtype=float)
    if np.any(a < 0):
        return np.inf
    d = DegreeOperator(num_nodes(a.shape[-1])).apply(a)
    if np.any(d <= 0):
        return np.inf
    return float(2.0 * a @ e - alpha * np.log(d).sum() + beta * a @ a)


def dpg_step(a, lam, e_scaled):
    """One DPG iteration on the theta-scaled input. Returns ``(a, lam, d)``."""
    a = np.asarray(a, dtype=float)
    lam = np.asarray(lam, dtype=float)
    e_scaled = np.asarray(e_scaled, dtype=float)
    if a.shape != e_scaled.shape:
        raise DimensionError(f"a has shape {a.shape} but e has shape {e_scaled.shape}")
    S = DegreeOperator(lam.shape[-1])
    nm1 = S.n - 1
    d = S.apply(a) - nm1 * lam
    lam_new = -(d - np.sqrt(d**2 + 4 * nm1)) / (2 * nm1)
    a_new = np.maximum(0.0, 0.5 * S.adjoint(lam_new) - e_scaled)
    return a_new, lam_new, d


def _initial(value, default, size):
    if value is None:
        return np.full(size, default)
    out = np.array(value, dtype=float)
    if out.ndim == 0:
        out = np.full(size, float(out))
    if out.shape != (size,):
        raise DimensionError(f"initial value has shape {out.shape}, expected ({size},)")
    return out


def _check_input(e) -> tuple[np.ndarray, int]:
    e = np.ascontiguousarray(e, dtype=float)
    if e.ndim != 1:
        raise DimensionError("expected a single edge vector")
    n = num_nodes(e.shape[0])
    if np.any(e < 0):
        raise ValueError("distances must be non-negative")
    return e, n


def dpg_solve(e, params: DpgParams, cfg: SolveConfig | None = None, a0=None, lambda0=None) -> SolveResult:
    """Run DPG to convergence and return ``delta * a``."""
    cfg = cfg or SolveConfig()
    e, n = _check_input(e)
    rows, cols = triu_pairs(n)
    a = _initial(a0, A0_DEFAULT, e.shape[0])
    lam = _initial(lambda0, LAMBDA0_DEFAULT, n)
    iters, rel, status = _kernels.dpg_iterate(
        params.theta * e, n, rows, cols, a, lam, cfg.max_iter, cfg.rel_tol
    )
    if status == 2:
        raise DivergenceError(f"DPG produced non-finite values at iteration {iters}", iters)
    if status == 1:
        log.debug("DPG hit max_iter=%d with relative change %.3g", iters, rel)
    return SolveResult(params.delta * a, lam, int(iters), status == 0, float(rel))


def pds_step(a, v, e, params: PdsParams):
    """One PDS iteration. Returns ``(a, v)``."""
    S = DegreeOperator(np.asarray(v).shape[-1])
    al, be, g = params.alpha, params.beta, params.gamma
    r1 = a - g * (2 * be * a + 2 * e + S.adjoint(v))
    r2 = v + g * S.apply(a)
    p1 = np.maximum(0.0, r1)
    p2 = 0.5 * (r2 - np.sqrt(r2**2 + 4 * al * g))
    q1 = p1 - g * (2 * be * p1 + 2 * e + S.adjoint(p2))
    q2 = p2 + g * S.apply(p1)
    return a - r1 + q1, v - r2 + q2


def pds_solve(e, params: PdsParams, cfg: SolveConfig | None = None, a0=None, v0=None) -> SolveResult:
    """Run primal-dual splitting to convergence.

    Raises :class:`DivergenceError` when the step size is too large for the
    iterations to stay finite.
    """
    cfg = cfg or SolveConfig()
    e, n = _check_input(e)
    rows, cols = triu_pairs(n)
    a = _initial(a0, A0_DEFAULT, e.shape[0])
    v = _initial(v0, 0.0, n)
    iters, rel, status = _kernels.pds_iterate(
        e, n, rows, cols, params.alpha, params.beta, params.gamma, a, v, cfg.max_iter, cfg.rel_tol
    )
    if status == 2:
        raise DivergenceError(f"PDS diverged at iteration {iters} (gamma={params.gamma})", iters)
    return SolveResult(np.maximum(a, 0.0), None, int(iters), status == 0, float(rel))


@dataclass
class SweepRow:
    theta: float
    density_mean: float
    density_std: float
    components_mean: float
    weight_quantiles: tuple[float, float, float, float, float]
    n_failed: int = 0
    densities: list[float] = field(default_factory=list)


SWEEP_COLUMNS = ("theta", "density_mean", "density_std", "components_mean",
                 "w_min", "w_q25", "w_med", "w_q75", "w_max")


def theta_sweep(e_set, theta_grid, cfg: SolveConfig | None = None, threshold: float = 1e-5) -> list[SweepRow]:
    """Solve every input at every theta (delta = 1) and summarize the graphs.

    Weight quantiles pool the supra-threshold weights of all inputs.  A
    diverging solve is logged and skipped; the grid point keeps going.
    """
    e_set = [np.asarray(e, dtype=float) for e in e_set]
    if not e_set:
        raise ValueError("theta_sweep needs at least one input")
    grid = np.asarray(theta_grid, dtype=float)
    if np.any(np.diff(grid) < 0):
        raise ValueError("theta grid must be sorted ascending")
    out = []
    for theta in grid:
        dens, comps, weights, failed = [], [], [], 0
        for e in e_set:
            try:
                a = dpg_solve(e, DpgParams(theta, 1.0), cfg).a_star
            except DivergenceError as err:
                log.warning("theta=%g: %s", theta, err)
                failed += 1
                continue
            st = graph_stats(a, threshold)
            dens.append(st.edge_density)
            comps.append(st.n_components)
            weights.append(a[a > threshold])
        w = np.concatenate(weights) if weights else np.empty(0)
        q = tuple(np.quantile(w, [0, 0.25, 0.5, 0.75, 1.0])) if w.size else (np.nan,) * 5
        out.append(SweepRow(
            theta=float(theta),
            density_mean=float(np.mean(dens)) if dens else np.nan,
            density_std=float(np.std(dens)) if dens else np.nan,
            components_mean=float(np.mean(comps)) if comps else np.nan,
            weight_quantiles=tuple(float(x) for x in q),
            n_failed=failed,
            densities=dens,
        ))
    return out


def write_sweep_csv(rows: list[SweepRow], path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([repr(r.theta), repr(r.density_mean), repr(r.density_std),
                        repr(r.components_mean), *(repr(x) for x in r.weight_quantiles)])
