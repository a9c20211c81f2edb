"""Prior and posterior predictive checks with the mean edge density statistic."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from .bayes.priors import PriorSpec
from .predict import CHUNK_COLUMNS, logit_batch, param_array
from .synthdata import Dataset
from .unroll import UnrollConfig

HIST_BINS = 30
DEFAULT_BANDS = ((0.0, 0.25), (0.25, 0.5), (0.5, 0.75), (0.75, 1.0))


@dataclass
class CheckReport:
    replicated_stats: np.ndarray
    observed_stat: float | None
    bin_edges: np.ndarray
    counts: np.ndarray

    @classmethod
    def from_stats(cls, stats, observed=None, bins: int = HIST_BINS) -> "CheckReport":
        stats = np.asarray(stats, dtype=float)
        counts, edges = np.histogram(stats, bins=bins, range=(0.0, 1.0))
        return cls(stats, observed, edges, counts)

    def band_fraction(self, lo: float, hi: float) -> float:
        """Fraction of replicates with statistic in the closed interval ``[lo, hi]``."""
        s = self.replicated_stats
        return float(np.mean((s >= lo) & (s <= hi)))

    def summary(self, bands=DEFAULT_BANDS) -> dict:
        q = np.quantile(self.replicated_stats, [0.05, 0.25, 0.5, 0.75, 0.95])
        return {
            "n_rep": int(self.replicated_stats.size),
            "observed_stat": self.observed_stat,
            "quantiles": dict(zip(("q05", "q25", "median", "q75", "q95"), map(float, q))),
            "band_fractions": {f"[{lo:g},{hi:g}]": self.band_fraction(lo, hi) for lo, hi in bands},
            "histogram": {"edges": self.bin_edges.tolist(), "counts": self.counts.tolist()},
        }

    def save(self, out_dir, prefix: str = "") -> None:
        out = Path(out_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
            with (out / f"{prefix}replicates.csv").open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(("replicate", "density"))
                for i, s in enumerate(self.replicated_stats):
                    w.writerow((i, repr(float(s))))
            (out / f"{prefix}summary.json").write_text(json.dumps(self.summary(), indent=2))
        except OSError as err:
            raise OSError(f"cannot write check report to {out}: {err}") from err


def replicate_densities(E, params, cfg: UnrollConfig | None = None,
                        rng: np.random.Generator | None = None) -> np.ndarray:
    """Mean edge density of one replicated label set per parameter row.

    Each replicate draws Bernoulli labels for every input in ``E`` and
    averages them over inputs and edges.
    """
    rng = rng or np.random.default_rng()
    E = np.atleast_2d(np.asarray(E, dtype=float))
    if E.shape[0] == 0:
        raise ValueError("predictive checks need at least one input")
    P = param_array(params)
    out = np.empty(P.shape[0])
    step = max(1, CHUNK_COLUMNS // E.shape[0])
    for lo in range(0, P.shape[0], step):
        sl = slice(lo, lo + step)
        p = expit(logit_batch(E, P[sl], cfg))
        out[sl] = (rng.random(p.shape) < p).mean(axis=(1, 2))
    return out


def prior_predictive_check(prior: PriorSpec, e_subset, n_rep: int = 10_000,
                           cfg: UnrollConfig | None = None,
                           rng: np.random.Generator | None = None) -> CheckReport:
    """Replicated densities with parameters drawn from the prior."""
    rng = rng or np.random.default_rng()
    params = np.exp(prior.sample(rng, n_rep))
    return CheckReport.from_stats(replicate_densities(e_subset, params, cfg, rng))


def posterior_predictive_check(samples, data: Dataset, cfg: UnrollConfig | None = None,
                               rng: np.random.Generator | None = None) -> CheckReport:
    """One replicated label set per posterior draw, compared with the observed density."""
    stats = replicate_densities(data.e, samples, cfg, rng)
    return CheckReport.from_stats(stats, observed=float(data.a.mean()))
