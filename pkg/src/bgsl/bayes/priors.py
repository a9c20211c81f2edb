"""Priors over (theta, delta, b), evaluated in log coordinates.

Every parameter is positive and the sampler works with ``u = ln x``.  Each
prior class exposes ``logpdf(u)`` (the density of ``u``, Jacobian included),
its derivative ``dlogpdf(u)``, and ``sample(rng, size)`` returning draws of
``u``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

LN10 = math.log(10.0)
PARAM_NAMES = ("theta", "delta", "b")


@dataclass(frozen=True)
class LogNormal10:
    """``ln x ~ Normal(mu_exp10 * ln 10, sigma**2)``; the median of ``x`` is ``10**mu_exp10``.

    ``sigma`` is the standard deviation of ``ln x``.
    """

    mu_exp10: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def loc(self) -> float:
        return self.mu_exp10 * LN10

    def logpdf(self, u):
        z = (u - self.loc) / self.sigma
        return -0.5 * z * z - math.log(self.sigma * math.sqrt(2 * math.pi))

    def dlogpdf(self, u):
        return -(u - self.loc) / self.sigma**2

    def sample(self, rng: np.random.Generator, size=None):
        return rng.normal(self.loc, self.sigma, size)

    def median(self) -> float:
        return 10.0**self.mu_exp10


@dataclass(frozen=True)
class LogUniform:
    """``ln x`` uniform on ``[ln lo, ln hi]``."""

    lo: float
    hi: float

    def __post_init__(self):
        if not 0 < self.lo < self.hi:
            raise ValueError("LogUniform needs 0 < lo < hi")

    def logpdf(self, u):
        u = np.asarray(u, dtype=float)
        inside = (u >= math.log(self.lo)) & (u <= math.log(self.hi))
        out = np.where(inside, -math.log(math.log(self.hi) - math.log(self.lo)), -np.inf)
        return out[()] if out.ndim == 0 else out

    def dlogpdf(self, u):
        return np.zeros_like(np.asarray(u, dtype=float))[()]

    def sample(self, rng: np.random.Generator, size=None):
        return rng.uniform(math.log(self.lo), math.log(self.hi), size)

    def median(self) -> float:
        return math.sqrt(self.lo * self.hi)


@dataclass(frozen=True)
class Normal:
    """``x ~ Normal(mu, sigma**2)`` restricted to ``x > 0``, seen through ``u = ln x``.

    The log density carries the Jacobian ``+u`` and drops the truncation
    constant, which does not depend on ``x``.
    """

    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    def logpdf(self, u):
        x = np.exp(u)
        z = (x - self.mu) / self.sigma
        return -0.5 * z * z - math.log(self.sigma * math.sqrt(2 * math.pi)) + u

    def dlogpdf(self, u):
        x = np.exp(u)
        return -(x - self.mu) * x / self.sigma**2 + 1.0

    def _trunc(self):
        return stats.truncnorm(-self.mu / self.sigma, np.inf, loc=self.mu, scale=self.sigma)

    def sample(self, rng: np.random.Generator, size=None):
        return np.log(self._trunc().rvs(size=size, random_state=rng))

    def median(self) -> float:
        return float(self._trunc().median())


Prior = LogNormal10 | LogUniform | Normal


@dataclass(frozen=True)
class PriorSpec:
    """One prior per parameter, in the order (theta, delta, b)."""

    theta: Prior
    delta: Prior
    b: Prior

    @property
    def parts(self) -> tuple:
        return (self.theta, self.delta, self.b)

    def log_prior(self, z) -> float:
        z = np.asarray(z, dtype=float)
        return float(sum(p.logpdf(z[i]) for i, p in enumerate(self.parts)))

    def log_prior_and_grad(self, z) -> tuple[float, np.ndarray]:
        z = np.asarray(z, dtype=float)
        grad = np.array([p.dlogpdf(z[i]) for i, p in enumerate(self.parts)], dtype=float)
        return self.log_prior(z), grad

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """Draws in log coordinates, shape ``(3,)`` or ``(size, 3)``."""
        cols = [p.sample(rng, size) for p in self.parts]
        return np.stack(cols, axis=-1)

    def medians(self) -> np.ndarray:
        return np.array([p.median() for p in self.parts])

    def to_json(self) -> dict:
        return {name: {"kind": type(p).__name__, **p.__dict__}
                for name, p in zip(PARAM_NAMES, self.parts)}

    @classmethod
    def from_json(cls, obj: dict) -> "PriorSpec":
        kinds = {"LogNormal10": LogNormal10, "LogUniform": LogUniform, "Normal": Normal}
        parts = []
        for name in PARAM_NAMES:
            entry = dict(obj[name])
            kind = entry.pop("kind")
            if kind not in kinds:
                raise ValueError(f"unknown prior kind {kind!r} for {name}")
            parts.append(kinds[kind](**entry))
        return cls(*parts)


# The published hyperparameters give the second log-normal argument as a
# variance, so the standard deviations below are their square roots.
def altered_prior() -> PriorSpec:
    """Default prior: theta median ``10**-0.5``."""
    return PriorSpec(LogNormal10(-0.5, 2.0), LogNormal10(2.0, math.sqrt(2.0)), LogNormal10(1.0, math.sqrt(2.0)))


def original_prior() -> PriorSpec:
    """Same as :func:`altered_prior` but with theta median 1."""
    return PriorSpec(LogNormal10(0.0, 2.0), LogNormal10(2.0, math.sqrt(2.0)), LogNormal10(1.0, math.sqrt(2.0)))


def uninformative_prior() -> PriorSpec:
    """Flat log-theta on ``[1e-6, 1e6]`` and wide positive normals on delta and b."""
    return PriorSpec(LogUniform(1e-6, 1e6), Normal(0.0, 1e3), Normal(0.0, 1e3))


PRESETS = {"altered": altered_prior, "original": original_prior, "uninformative": uninformative_prior}
