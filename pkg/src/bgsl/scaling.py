"""Transfer of fitted parameters between graph sizes.

Parameters fitted at ``n_i`` nodes are rescaled to ``n`` nodes by

    theta(n) = theta_i * sqrt((n_i - 1) / (n - 1))
    delta(n) = delta_i * sqrt((n - 1) / (n_i - 1))
    alpha(n) = alpha_i * (n - 1) / (n_i - 1)
    beta(n)  = beta_i

so ``theta * delta`` is size-invariant.  :func:`fit_trend` fits simple curves
to parameters estimated at several sizes, for extrapolating empirical trends.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import curve_fit

SCALE_COLUMNS = ("n", "theta", "delta", "alpha", "beta")


@dataclass(frozen=True)
class ScaleAnchor:
    n_i: int
    theta_i: float
    delta_i: float
    alpha_i: float
    beta_i: float

    def __post_init__(self):
        if self.n_i < 2:
            raise ValueError("anchor size must be at least 2")
        if min(self.theta_i, self.delta_i, self.alpha_i, self.beta_i) <= 0:
            raise ValueError("anchor parameters must be positive")

    @classmethod
    def from_dpg(cls, n_i: int, theta_i: float, delta_i: float = 1.0) -> "ScaleAnchor":
        """Anchor from DPG parameters; alpha and beta follow from theta and delta."""
        return cls(n_i, theta_i, delta_i, delta_i / theta_i, 1.0 / (delta_i * theta_i))


def _ratio(anchor: ScaleAnchor, n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if np.any(n < 2):
        raise ValueError("graph size must be at least 2")
    return (n - 1.0) / (anchor.n_i - 1.0)


def scale_theta(anchor: ScaleAnchor, n):
    return anchor.theta_i / np.sqrt(_ratio(anchor, n))


def scale_delta(anchor: ScaleAnchor, n):
    return anchor.delta_i * np.sqrt(_ratio(anchor, n))


def scale_alpha(anchor: ScaleAnchor, n):
    return anchor.alpha_i * _ratio(anchor, n)


def scale_beta(anchor: ScaleAnchor, n):
    return anchor.beta_i * np.ones_like(_ratio(anchor, n))


def scale_table(anchor: ScaleAnchor, targets) -> list[tuple]:
    """One ``(n, theta, delta, alpha, beta)`` row per target size."""
    return [(int(n), float(scale_theta(anchor, n)), float(scale_delta(anchor, n)),
             float(scale_alpha(anchor, n)), float(scale_beta(anchor, n))) for n in targets]


def write_scale_csv(rows, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SCALE_COLUMNS)
        w.writerows(rows)


TREND_FORMS = {
    "log": lambda n, a, b: a + b * np.log(n),
    "linear": lambda n, a, b: a + b * n,
    "power": lambda n, a, b: a * np.power(n, b),
}


@dataclass
class TrendFit:
    form: str
    coef: tuple[float, float]
    rss: float

    def __call__(self, n):
        return TREND_FORMS[self.form](np.asarray(n, dtype=float), *self.coef)


def fit_trend(ns, values, form: str = "power") -> TrendFit:
    """Least-squares fit of ``log``, ``linear`` or ``power`` curves in ``n``."""
    if form not in TREND_FORMS:
        raise ValueError(f"unknown trend form {form!r}; choose from {sorted(TREND_FORMS)}")
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if ns.size < 2 or ns.shape != values.shape:
        raise ValueError("need at least two (n, value) pairs")
    f = TREND_FORMS[form]
    p0 = (values[0], 0.0)
    coef, _ = curve_fit(f, ns, values, p0=p0, maxfev=20_000)
    rss = float(np.sum((f(ns, *coef) - values) ** 2))
    return TrendFit(form, (float(coef[0]), float(coef[1])), rss)
