"""Posterior predictive sampling and the evaluation metrics.

Parameters enter as an ``(M, 3)`` array of natural-scale ``(theta, delta,
b)`` draws or as a :class:`~bgsl.bayes.PosteriorSamples`.  The unrolled
network only depends on theta, so each ``(draw, input)`` pair is one column of
the compiled batch pass; columns are processed in chunks to bound memory.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit, logsumexp

from .bayes.hmc import PosteriorSamples
from .synthdata import Dataset
from .unroll import UnrollConfig, unroll

CHUNK_COLUMNS = 20_000
RELIABILITY_COLUMNS = ("bin_lo", "bin_hi", "count", "accuracy", "confidence")


class InsufficientDrawsError(ValueError):
    pass


class UndefinedCorrelationError(ValueError):
    pass


def param_array(samples) -> np.ndarray:
    """Natural-scale ``(M, 3)`` parameter array from samples or an array."""
    if isinstance(samples, PosteriorSamples):
        return samples.draws
    P = np.atleast_2d(np.asarray(samples, dtype=float))
    if P.shape[-1] != 3 or P.shape[0] == 0:
        raise ValueError("expected a non-empty (M, 3) array of (theta, delta, b)")
    return P


def logit_batch(E, params, cfg: UnrollConfig | None = None) -> np.ndarray:
    """Logits ``delta * a_D - b`` for every draw and input, shape ``(M, T, K)``."""
    P = param_array(params)
    A = unroll(E, P[:, 0], cfg)
    return P[:, 1, None, None] * A - P[:, 2, None, None]


def _chunks(T: int, M: int):
    step = max(1, CHUNK_COLUMNS // M)
    for lo in range(0, T, step):
        yield slice(lo, min(T, lo + step))


@dataclass
class PredictiveSummary:
    pred_mean: np.ndarray
    pred_stdv: np.ndarray
    draws: np.ndarray | None = None


def posterior_predictive_draws(e_test, samples, cfg: UnrollConfig | None = None,
                               rng: np.random.Generator | None = None) -> np.ndarray:
    """One Bernoulli label vector per posterior draw, shape ``(M, K)``."""
    rng = rng or np.random.default_rng()
    p = expit(logit_batch(np.atleast_2d(e_test), samples, cfg)[:, 0, :])
    return (rng.random(p.shape) < p).astype(np.int8)


def predictive_moments(draws) -> PredictiveSummary:
    """Per-edge sample mean and standard deviation (denominator ``M - 1``)."""
    draws = np.asarray(draws)
    if draws.shape[0] < 2:
        raise InsufficientDrawsError("predictive moments need at least two draws")
    d = draws.astype(float)
    return PredictiveSummary(d.mean(axis=0), d.std(axis=0, ddof=1), draws)


def _graph_loglik(z, a):
    """Per-draw log likelihood of one label vector, summed over edges: shape ``(M,)``."""
    ybar = 2.0 * a - 1.0
    return -np.logaddexp(0.0, -ybar * z).sum(axis=-1)


def nll_from_logits(z, a) -> float:
    """``-log((1/M) sum_m p(a | draw m))`` for logits ``z`` of shape ``(M, K)``."""
    ll = _graph_loglik(z, a)
    return float(-(logsumexp(ll) - np.log(ll.shape[0])))


def nll(e_test, a_test, samples, cfg: UnrollConfig | None = None) -> float:
    """Negative log posterior predictive probability of one test graph."""
    z = logit_batch(np.atleast_2d(e_test), samples, cfg)[:, 0, :]
    return nll_from_logits(z, np.asarray(a_test, dtype=float))


def brier_from_probs(p, a) -> float:
    return float(np.mean((p - a) ** 2))


def brier(e_test, a_test, samples, cfg: UnrollConfig | None = None) -> float:
    """Squared error of the edge probabilities, averaged over draws and edges."""
    p = expit(logit_batch(np.atleast_2d(e_test), samples, cfg)[:, 0, :])
    return brier_from_probs(p, np.asarray(a_test, dtype=float))


def error_rate(pred_mean, a_test) -> float:
    """Percentage of edges where ``pred_mean > 0.5`` disagrees with the label."""
    pred = np.asarray(pred_mean) > 0.5
    return float(100.0 * np.mean(pred != (np.asarray(a_test) == 1)))


@dataclass
class ReliabilityBin:
    lo: float
    hi: float
    count: int
    accuracy: float
    confidence: float


def ece(pred_mean, labels, n_bins: int = 10) -> tuple[float, list[ReliabilityBin]]:
    """Expected calibration error over confidence bins on ``(0.5, 1]``.

    Confidence is the probability of the predicted class,
    ``max(p, 1 - p)``; a confidence of exactly 0.5 falls in the first bin.
    Empty bins report NaN accuracy and confidence and carry no weight.
    """
    if n_bins < 1:
        raise ValueError("n_bins must be at least 1")
    p = np.asarray(pred_mean, dtype=float).ravel()
    y = np.asarray(labels).ravel() == 1
    if p.size == 0:
        raise ValueError("ECE of an empty test set is undefined")
    conf = np.maximum(p, 1.0 - p)
    correct = (p > 0.5) == y
    edges = np.linspace(0.5, 1.0, n_bins + 1)
    idx = np.clip(np.searchsorted(edges, conf, side="left") - 1, 0, n_bins - 1)
    table = []
    total = 0.0
    for m in range(n_bins):
        sel = idx == m
        cnt = int(sel.sum())
        if cnt:
            acc, cf = float(correct[sel].mean()), float(conf[sel].mean())
            total += cnt / p.size * abs(acc - cf)
        else:
            acc = cf = float("nan")
        table.append(ReliabilityBin(float(edges[m]), float(edges[m + 1]), cnt, acc, cf))
    return float(total), table


def _pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.ptp(x) == 0 or np.ptp(y) == 0:
        raise UndefinedCorrelationError("correlation needs two non-constant series")
    return float(np.corrcoef(x, y)[0, 1])


def error_uncertainty_correlation(pred_mean, pred_stdv, labels) -> dict:
    """Pearson r between ``|label - pred_mean|`` and ``pred_stdv``.

    Reported over all edges and separately over edges whose label is 1
    (``true_positive``) and 0 (``true_negative``).  A subset where either
    series is constant reports NaN; the overall value raises instead.
    """
    m = np.asarray(pred_mean, dtype=float).ravel()
    s = np.asarray(pred_stdv, dtype=float).ravel()
    y = np.asarray(labels).ravel()
    err = np.abs(y - m)
    out = {"overall": _pearson(err, s)}
    for key, val in (("true_positive", 1), ("true_negative", 0)):
        sel = y == val
        try:
            out[key] = _pearson(err[sel], s[sel])
        except UndefinedCorrelationError:
            out[key] = float("nan")
    return out


@dataclass
class EvalReport:
    nll: np.ndarray
    brier: np.ndarray
    error: np.ndarray
    ece: float
    reliability: list[ReliabilityBin]
    correlation: dict
    pred_mean: np.ndarray
    pred_stdv: np.ndarray
    extra: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "n_test": int(self.nll.size),
            "nll_mean": float(self.nll.mean()),
            "nll_std": float(self.nll.std()),
            "brier_mean": float(self.brier.mean()),
            "brier_std": float(self.brier.std()),
            "error_mean": float(self.error.mean()),
            "error_std": float(self.error.std()),
            "ece": self.ece,
            "correlation": self.correlation,
            "per_graph": {"nll": self.nll.tolist(), "brier": self.brier.tolist(),
                          "error": self.error.tolist()},
            **self.extra,
        }

    def save(self, out_dir, prefix: str = "") -> None:
        """Metrics JSON, reliability CSV, and per-edge mean/stdv CSV."""
        out = Path(out_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / f"{prefix}metrics.json").write_text(json.dumps(self.summary(), indent=2))
            write_reliability_csv(self.reliability, out / f"{prefix}reliability.csv")
            with (out / f"{prefix}edges.csv").open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(("graph", "edge", "pred_mean", "pred_stdv"))
                for t in range(self.pred_mean.shape[0]):
                    for k in range(self.pred_mean.shape[1]):
                        w.writerow((t, k, repr(float(self.pred_mean[t, k])),
                                    repr(float(self.pred_stdv[t, k]))))
        except OSError as err:
            raise OSError(f"cannot write evaluation outputs to {out}: {err}") from err


def write_reliability_csv(table: list[ReliabilityBin], path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RELIABILITY_COLUMNS)
        for r in table:
            w.writerow((r.lo, r.hi, r.count, r.accuracy, r.confidence))


def evaluate(test: Dataset, samples, cfg: UnrollConfig | None = None,
             rng: np.random.Generator | None = None, n_bins: int = 10,
             point: str = "draws") -> EvalReport:
    """All metrics on a test set.

    ``point="draws"`` takes the predictive mean from one Bernoulli draw per
    posterior sample; ``point="mixture"`` uses the average edge probability.
    The standard deviation always comes from the draws.
    """
    if point not in ("draws", "mixture"):
        raise ValueError(f"unknown point estimate {point!r}")
    rng = rng or np.random.default_rng()
    P = param_array(samples)
    M = P.shape[0]
    if M < 2:
        raise InsufficientDrawsError("evaluation needs at least two posterior draws")
    T, K = test.e.shape
    nlls, briers = np.empty(T), np.empty(T)
    mean, stdv = np.empty((T, K)), np.empty((T, K))
    for sl in _chunks(T, M):
        z = logit_batch(test.e[sl], P, cfg)
        p = expit(z)
        draws = (rng.random(p.shape) < p).astype(float)
        for j, t in enumerate(range(sl.start, sl.stop)):
            a = test.a[t]
            nlls[t] = nll_from_logits(z[:, j], a)
            briers[t] = brier_from_probs(p[:, j], a)
            mean[t] = p[:, j].mean(axis=0) if point == "mixture" else draws[:, j].mean(axis=0)
            stdv[t] = draws[:, j].std(axis=0, ddof=1)
    errors = np.array([error_rate(mean[t], test.a[t]) for t in range(T)])
    ece_value, table = ece(mean, test.a, n_bins)
    try:
        corr = error_uncertainty_correlation(mean, stdv, test.a)
    except UndefinedCorrelationError:
        corr = {"overall": float("nan"), "true_positive": float("nan"), "true_negative": float("nan")}
    return EvalReport(nlls, briers, errors, ece_value, table, corr, mean, stdv)
